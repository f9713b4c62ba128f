#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tempfid/data_model.hpp"
#include "tempfid/ingestion.hpp"
#include "tempfid/kernel.hpp"
#include "tempfid/marginal.hpp"

namespace tempfid {

inline constexpr std::size_t kDefaultPerStratum = 20;

/// Percentile-class labels for quantile boundaries, e.g. "[0, 5]", "(5, 25]",
/// ..., "(95, 100]".
std::vector<std::string> percentile_class_labels(std::span<const double> boundaries);

/// Assigns each subject with at least one observation to the bin of its first
/// value against the quantile curves at that observation's nearest grid
/// point. A value equal to a boundary goes to the lower bin.
StratumAssignment baseline_strata(const LongDataset& dataset, const VariableId& variable,
                                  const TimeGrid& grid, Bandwidth h,
                                  std::span<const double> boundaries = default_quantile_levels());

struct Trajectory {
  SubjectId subject;
  std::vector<double> times;
  std::vector<double> values;
};

struct TrajectoryPanel {
  VariableId variable;
  std::vector<std::string> strata;
  std::vector<std::vector<Trajectory>> samples;  // parallel to strata, roster order within each
};

/// Seeded sample of up to `per_stratum` raw series per stratum. Subjects
/// without observations of the variable, or without a stratum, are skipped.
TrajectoryPanel sample_trajectories(const LongDataset& dataset, const VariableId& variable,
                                    const StratumAssignment& strata, std::size_t per_stratum,
                                    std::uint64_t seed);

}  // namespace tempfid
