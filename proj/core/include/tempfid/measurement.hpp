#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tempfid/assignment.hpp"
#include "tempfid/data_model.hpp"
#include "tempfid/ingestion.hpp"
#include "tempfid/marginal.hpp"

namespace tempfid {

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr std::size_t kDefaultSubsampleSize = 2000;
inline constexpr std::size_t kDefaultIterations = 100;

/// Share of all measurements that fall on each grid point.
/// Throws DataError for an all-zero matrix.
ProfileSeries measurement_density(const MeasurementMatrix& matrix);

struct SimilarityResult {
  double similarity = 0.0;
  double frobenius = 0.0;
  std::size_t mismatches = 0;  // differing bits after alignment
  Assignment alignment;        // synthetic row matched to each original row
};

/// Aligns synthetic rows to original rows by minimum total squared Euclidean
/// (= Hamming) distance, then scores 1 - mismatches / (n * |grid|) and the
/// Frobenius norm of the aligned difference. Matrices must have identical
/// dimensions; subsample first when the rosters differ.
SimilarityResult measurement_similarity(const MeasurementMatrix& original,
                                        const MeasurementMatrix& synthetic);

/// Pairwise Hamming distances between the rows of two matrices.
CostMatrix hamming_costs(const MeasurementMatrix& a, const MeasurementMatrix& b);

/// KL(P || Q) in nats after adding epsilon to every mass and renormalizing.
/// Inputs need not be normalized.
double smoothed_kl_divergence(std::span<const double> p, std::span<const double> q,
                              double epsilon = kDefaultEpsilon);

/// Empirical distribution of dropout points over the grid (subjects without
/// measurements are left out).
std::vector<double> dropout_distribution(const DropoutVector& dropout);

double dropout_divergence(const DropoutVector& original, const DropoutVector& synthetic,
                          double epsilon = kDefaultEpsilon);

struct SummaryStat {
  double mean = 0.0;
  std::optional<double> sd;  // absent for a single iteration
};

SummaryStat summarize(std::span<const double> values);

struct MeasurementBlock {
  SummaryStat similarity;
  SummaryStat frobenius;
  SummaryStat dropout_divergence;
  std::size_t subsample_size = 0;
};

struct ProtocolOptions {
  std::size_t subsample_size = kDefaultSubsampleSize;
  std::size_t iterations = kDefaultIterations;
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
};

struct MeasurementReport {
  ProfileSeries original_density;
  ProfileSeries synthetic_density;
  MeasurementBlock comparison;
  MeasurementBlock reference;  // original half vs original half
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
};

/// Repeated equal-size subsampling of both indicator matrices; the reference
/// block repeats the computation on two disjoint halves of the original
/// roster drawn afresh every iteration. Subsample sizes are clamped to the
/// available rosters.
MeasurementReport subsample_protocol(const DatasetPair& pair, const VariableId& variable,
                                     const TimeGrid& grid, const ProtocolOptions& options);

/// Original-versus-original baseline only. Needs at least two subjects.
MeasurementBlock reference_protocol(const LongDataset& original, const VariableId& variable,
                                    const TimeGrid& grid, const ProtocolOptions& options);

}  // namespace tempfid
