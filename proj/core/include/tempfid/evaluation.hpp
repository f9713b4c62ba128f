#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tempfid/covariance.hpp"
#include "tempfid/individual.hpp"
#include "tempfid/ingestion.hpp"
#include "tempfid/marginal.hpp"
#include "tempfid/measurement.hpp"

namespace tempfid {

template <class T>
struct Paired {
  T original;
  T synthetic;
};

struct EvaluationOptions {
  std::vector<double> bandwidths{kDefaultBandwidth};
  std::vector<double> quantile_levels{0.05, 0.25, 0.50, 0.75, 0.95};
  ProtocolOptions protocol;
  std::uint64_t seed = 0;
  std::size_t per_stratum = kDefaultPerStratum;
  std::set<VariableId> include;  // empty = every shared variable
  std::set<VariableId> exclude;
  std::optional<double> grid_step;  // overrides every variable's declared step
  std::optional<std::vector<double>> variogram_lags;
  std::optional<double> variogram_bandwidth;  // replaces the bandwidth list for the variogram
  TransitionOptions transitions;
  std::optional<StratumAssignment> original_strata;
  std::optional<StratumAssignment> synthetic_strata;
  bool measurement = true;  // run the subsampling protocol
  std::size_t jobs = 1;

  /// Throws ConfigError for out-of-range settings.
  void validate() const;
};

/// Bandwidth-dependent metrics; which fields are present depends on the
/// variable kind and on which metrics succeeded.
struct SmoothedMetrics {
  double bandwidth = kDefaultBandwidth;
  std::optional<Paired<ProfileSeries>> mean;
  std::optional<Paired<ProfileSeries>> quantiles;
  std::optional<Paired<std::vector<OutlierPoint>>> outliers;
  std::optional<Paired<ProfileSeries>> variance;
  std::optional<Paired<VariogramSeries>> variogram;
  std::optional<Paired<VarianceDecomposition>> decomposition;
  std::optional<Paired<RankVariabilityDistribution>> rank_order;
  std::optional<Paired<ProfileSeries>> classes;
  std::optional<Paired<TransitionProfile>> transitions;
};

struct MetricFailure {
  VariableId variable;
  std::string metric;
  std::string message;
};

struct VariableReport {
  VariableId variable;
  VariableKind kind = VariableKind::continuous;
  TimeGrid grid{0.0, 0.0, 1.0};
  std::vector<ClassLabel> classes;
  std::vector<ClassLabel> synthetic_only_classes;
  std::vector<ClassLabel> absent_in_synthetic;
  std::vector<SmoothedMetrics> smoothed;  // one per bandwidth, in option order
  std::optional<Paired<TrajectoryPanel>> trajectories;
  std::optional<Paired<ProfileSeries>> at_risk;
  std::optional<MeasurementReport> measurement;
  std::uint64_t seed = 0;  // variable-level seed behind every random draw
};

struct ComparisonReport {
  std::vector<VariableReport> variables;  // sorted by name
  std::vector<MetricFailure> failures;    // sorted by variable, then metric
  std::vector<VariableId> original_only;
  std::vector<VariableId> synthetic_only;
  EvaluationOptions options;
};

/// Stable per-variable seed: the master seed mixed with a hash of the name,
/// so adding or removing other variables leaves it unchanged.
std::uint64_t variable_seed(std::uint64_t master, const VariableId& variable);

/// Runs every applicable metric on both sides for each selected variable.
/// Metric errors are recorded as failures instead of aborting the run.
ComparisonReport evaluate(const DatasetPair& pair, const EvaluationOptions& options);

}  // namespace tempfid
