#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tempfid/data_model.hpp"
#include "tempfid/kernel.hpp"
#include "tempfid/marginal.hpp"

namespace tempfid {

/// sigma^2(t) = sum_w (x - mu(t))^2 with the mean-profile weights at t.
ProfileSeries variance_profile(const LongDataset& dataset, const VariableId& variable,
                               const TimeGrid& grid, Bandwidth h);

struct VariogramSeries {
  std::vector<double> lags;
  std::vector<double> gamma;
  double bandwidth = 0.0;
  std::size_t pair_count = 0;  // within-subject pairs entering every lag
};

/// Multiples of the grid step up to half the grid span (at least one lag).
std::vector<double> default_lags(const TimeGrid& grid);

/// Kernel-smoothed variogram of within-subject residual differences.
/// Residuals use the kernel mean evaluated at each observation's own time.
/// Throws DataError if no subject has two observations.
VariogramSeries variogram(const LongDataset& dataset, const VariableId& variable,
                          std::span<const double> lags, Bandwidth h);

/// Descriptive split of the total variance; only meaningful under
/// stationarity.
struct VarianceDecomposition {
  double nugget = 0.0;           // measurement error, variogram extrapolated to lag 0
  double sill = 0.0;             // mean gamma over the top quarter of lags
  double total = 0.0;            // mean of the variance profile over the grid
  double between_subject = 0.0;  // total - sill
};

VarianceDecomposition decompose_variance(const VariogramSeries& variogram,
                                         const ProfileSeries& variance);

struct RankVariabilityDistribution {
  std::vector<SubjectId> subjects;
  std::vector<double> values;  // in [-1, 1], parallel to subjects
  std::size_t levels = 0;      // Q
  std::size_t excluded = 0;    // subjects with fewer than two observations
};

/// Bin index in 1..Q+1 of x against ascending quantile values: the smallest
/// l with x <= Q_l, or Q+1 above every curve.
std::size_t quantile_bin(double x, std::span<const double> quantiles);

/// (1/Q)(1/(n-1)) sum_k (R_{k+1} - R_k) over a subject's bin sequence.
double rank_variability(std::span<const std::size_t> bins, std::size_t levels);

RankVariabilityDistribution rank_order_variability(
    const LongDataset& dataset, const VariableId& variable, const TimeGrid& grid, Bandwidth h,
    std::span<const double> levels = default_quantile_levels());

struct TransitionOptions {
  /// Consecutive pairs further apart than this are ignored.
  std::optional<double> max_gap;
};

/// Local transition matrices pi_ab(t) over the variable's class list.
/// A source row is undefined (NaN) where that state has no pair mass.
struct TransitionProfile {
  TimeGrid grid{0.0, 0.0, 1.0};
  std::vector<ClassLabel> classes;
  double bandwidth = 0.0;
  std::vector<double> probability;  // grid x L x L
  std::vector<double> source_mass;  // grid x L, kernel mass of pairs leaving each state

  std::size_t states() const { return classes.size(); }
  double at(std::size_t t, std::size_t from, std::size_t to) const {
    return probability[(t * states() + from) * states() + to];
  }
  bool defined(std::size_t t, std::size_t from) const {
    return source_mass[t * states() + from] > 0.0;
  }
};

TransitionProfile transition_profile(const LongDataset& dataset, const VariableId& variable,
                                     const TimeGrid& grid, Bandwidth h,
                                     const TransitionOptions& options = {});

}  // namespace tempfid
