#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempfid/data_model.hpp"
#include "tempfid/kernel.hpp"

namespace tempfid {

/// Metric values on a grid: one row per grid point, one column per component
/// (a single "mean", one column per quantile level or class, ...). NaN marks
/// an undefined entry.
struct ProfileSeries {
  std::string metric;
  TimeGrid grid{0.0, 0.0, 1.0};
  std::vector<std::string> components;
  std::vector<double> values;           // row-major, grid.size() x components.size()
  std::optional<double> bandwidth;
  std::vector<double> levels;           // quantile levels, when applicable
  std::vector<double> ess;              // effective sample size per grid point, when applicable

  std::size_t points() const { return grid.size(); }
  std::size_t width() const { return components.size(); }
  double at(std::size_t t, std::size_t c) const { return values[t * components.size() + c]; }
  std::vector<double> component(std::size_t c) const;
};

/// Grid points with ESS below this are flagged as low-support in reports.
inline constexpr double kLowSupportEss = 5.0;

/// 5th, 25th, 50th, 75th and 95th percentiles.
std::span<const double> default_quantile_levels();

/// Throws ConfigError unless levels are strictly increasing inside (0, 1).
void validate_quantile_levels(std::span<const double> levels);

ProfileSeries mean_profile(const LongDataset& dataset, const VariableId& variable,
                           const TimeGrid& grid, Bandwidth h);

ProfileSeries quantile_profile(const LongDataset& dataset, const VariableId& variable,
                               const TimeGrid& grid, Bandwidth h,
                               std::span<const double> levels = default_quantile_levels());

/// Proportion of every class in the variable's class list; classes without
/// observations get identically zero curves.
ProfileSeries class_profile(const LongDataset& dataset, const VariableId& variable,
                            const TimeGrid& grid, Bandwidth h);

struct OutlierPoint {
  SubjectId subject;
  double time = 0.0;
  double value = 0.0;
  bool above = false;  // above the upper curve, otherwise below the lower one

  bool operator==(const OutlierPoint&) const = default;
};

/// Raw observations strictly outside [Q_low(t*), Q_high(t*)], t* being the
/// observation's nearest grid point.
std::vector<OutlierPoint> outlier_overlay(const LongDataset& dataset, const VariableId& variable,
                                          const TimeGrid& grid, Bandwidth h, double q_low = 0.05,
                                          double q_high = 0.95);

/// Companion diagnostic: number and proportion of subjects under follow-up,
/// i.e. with first observation <= t <= dropout point (both snapped to the grid).
ProfileSeries subjects_at_risk(const LongDataset& dataset, const VariableId& variable,
                               const TimeGrid& grid);

namespace detail {
void require_kind(const LongDataset& dataset, const VariableId& variable, VariableKind kind,
                  std::string_view metric);
}  // namespace detail

}  // namespace tempfid
