#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "tempfid/data_model.hpp"

namespace tempfid {

/// Gaussian kernel bandwidth in the dataset's time unit.
class Bandwidth {
 public:
  /// Throws ConfigError unless h is positive and finite.
  explicit Bandwidth(double h);

  double value() const { return h_; }

  auto operator<=>(const Bandwidth&) const = default;

 private:
  double h_;
};

inline constexpr double kDefaultBandwidth = 6.0;

/// K_h(t, t') = exp(-(t - t')^2 / (2 h^2)) / h.
double gaussian_kernel(double t, double t_prime, Bandwidth h);

/// Normalized kernel weights of `times` at target `t`; they sum to one.
/// Computed relative to the nearest time so they never underflow to 0/0
/// far from the data. Throws DataError on an empty input.
std::vector<double> normalized_weights(double t, std::span<const double> times, Bandwidth h);

/// Weights of every observation of a variable, pooled over subjects.
struct WeightVector {
  std::vector<std::size_t> subject;
  std::vector<std::size_t> observation;
  std::vector<double> weight;
};

WeightVector normalized_weights(double t, std::span<const Series> series, Bandwidth h);

/// 1 / sum(w^2) of normalized weights.
double effective_sample_size(std::span<const double> weights);

/// Step function F(z) = sum of weights with value <= z, stored at the sorted
/// distinct values.
class WeightedEcdf {
 public:
  WeightedEcdf() = default;
  WeightedEcdf(std::vector<double> values, std::vector<double> cumulative);

  std::span<const double> values() const { return values_; }
  std::span<const double> cumulative() const { return cumulative_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double operator()(double z) const;

 private:
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

WeightedEcdf weighted_ecdf(std::span<const double> values, std::span<const double> weights);

/// inf{z : F(z) >= q}. Throws ConfigError unless 0 < q < 1 and DataError on
/// an empty ECDF.
double weighted_quantile(const WeightedEcdf& ecdf, double q);

/// Observations of one variable pooled across subjects, aggregated by
/// distinct time. Kernel weights depend on time only, so smoothing over the
/// distinct times gives the same profiles as weighting every observation.
class PooledSample {
 public:
  explicit PooledSample(std::span<const Series> series);

  std::size_t observation_count() const { return total_; }
  bool empty() const { return total_ == 0; }
  std::span<const double> distinct_times() const { return times_; }

  /// Total normalized weight carried by each distinct time at target t.
  std::vector<double> time_mass(double t, Bandwidth h) const;

  /// Weighted mean at t (any real t, not only grid points).
  double mean(double t, Bandwidth h) const;

  struct Moments {
    double mean;
    double variance;
    double ess;
  };
  Moments moments(double t, Bandwidth h) const;

  /// Weighted ECDF of all values at target t.
  WeightedEcdf ecdf(double t, Bandwidth h) const;

 private:
  std::size_t total_ = 0;
  std::vector<double> times_;
  std::vector<double> counts_;
  std::vector<double> means_;
  std::vector<double> m2_;
  // Values sorted ascending with the distinct-time slot of each.
  std::vector<double> sorted_values_;
  std::vector<std::size_t> sorted_slot_;
};

}  // namespace tempfid
