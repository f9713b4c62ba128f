#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tempfid/data_model.hpp"

namespace tempfid {

/// mu(t) = sum_k poly[k] t^k + amplitude * sin(2 pi (t - phase) / period).
struct TrendFunction {
  std::vector<double> poly{0.0};
  double amplitude = 0.0;
  double period = 24.0;
  double phase = 0.0;

  double operator()(double t) const;
};

enum class CorrelationKind { exponential, gaussian };

std::string_view to_string(CorrelationKind kind);
CorrelationKind parse_correlation_kind(std::string_view text);

struct ContinuousModel {
  VariableId variable = "x";
  TrendFunction mean_fn;
  double nugget_var = 0.0;     // tau^2
  double serial_var = 0.0;     // sigma^2
  double serial_range = 1.0;   // a
  CorrelationKind serial_kind = CorrelationKind::exponential;
  double intercept_var = 0.0;  // nu^2

  void validate() const;
  double correlation(double lag) const;
  /// Theoretical variogram tau^2 + sigma^2 (1 - corr(u)).
  double variogram(double lag) const;
};

struct DiscreteModel {
  VariableId variable = "state";
  std::vector<ClassLabel> classes;
  std::vector<std::vector<double>> transition;  // row-stochastic
  std::vector<double> initial;

  void validate() const;
};

/// Subject count, grid and the thinning/dropout plan. Probability vectors
/// hold one value per grid point or a single value for every point.
struct ObservationDesign {
  std::size_t subjects = 0;
  TimeGrid grid{0.0, 47.0, 1.0};
  std::vector<double> keep_probability{1.0};
  std::vector<double> dropout_hazard{0.0};

  void validate() const;
  double keep(std::size_t m) const;
  double hazard(std::size_t m) const;
};

/// Zero-padded ids S0001, S0002, ... that sort in numeric order.
std::vector<SubjectId> simulated_subject_ids(std::size_t n);

LongDataset simulate_continuous(const ContinuousModel& model, const ObservationDesign& design,
                                std::uint64_t seed);

LongDataset simulate_discrete(const DiscreteModel& model, const ObservationDesign& design,
                              std::uint64_t seed);

/// Keeps each observation independently with its grid point's probability
/// and truncates every subject after a geometric dropout point drawn from
/// the hazard. Times are located on the design grid by nearest point.
LongDataset apply_design(const LongDataset& dataset, const ObservationDesign& design,
                         std::uint64_t seed);

using VariableModel = std::variant<ContinuousModel, DiscreteModel>;

/// Several variables over one roster. Every variable draws from its own
/// seed stream; per-variable designs default to the plan's design.
struct SimulationPlan {
  ObservationDesign design;
  std::vector<VariableModel> variables;
  std::vector<std::optional<ObservationDesign>> designs;  // empty or one per variable
  std::uint64_t seed = 0;
};

LongDataset simulate(const SimulationPlan& plan);

/// Structured model document; ConfigError names the offending field.
SimulationPlan parse_simulation_plan(std::string_view text);
SimulationPlan load_simulation_plan(const std::filesystem::path& path);

}  // namespace tempfid
