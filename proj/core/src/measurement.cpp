#include "tempfid/measurement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tempfid/errors.hpp"
#include "tempfid/random.hpp"

namespace tempfid {

ProfileSeries measurement_density(const MeasurementMatrix& matrix) {
  const std::size_t total = matrix.count();
  if (total == 0) throw DataError("no measurements: indicator matrix is all zero");
  ProfileSeries out{"density", matrix.grid(), {"density"}, {}, std::nullopt, {}, {}};
  out.values.reserve(matrix.cols());
  for (std::size_t t = 0; t < matrix.cols(); ++t) {
    out.values.push_back(static_cast<double>(matrix.column_count(t)) / static_cast<double>(total));
  }
  return out;
}

CostMatrix hamming_costs(const MeasurementMatrix& a, const MeasurementMatrix& b) {
  CostMatrix cost(a.rows());
  const std::size_t words = a.words_per_row();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ra = a.row_words(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto rb = b.row_words(j);
      int bits = 0;
      for (std::size_t w = 0; w < words; ++w) bits += std::popcount(ra[w] ^ rb[w]);
      cost(i, j) = static_cast<double>(bits);
    }
  }
  return cost;
}

SimilarityResult measurement_similarity(const MeasurementMatrix& original,
                                        const MeasurementMatrix& synthetic) {
  if (original.rows() != synthetic.rows() || original.cols() != synthetic.cols()) {
    throw DataError(fmt::format(
        "measurement matrices differ in shape ({} x {} vs {} x {}); subsample both to the same "
        "number of subjects on a common grid",
        original.rows(), original.cols(), synthetic.rows(), synthetic.cols()));
  }
  if (original.rows() == 0 || original.cols() == 0) {
    throw DataError("measurement similarity of an empty matrix");
  }
  SimilarityResult out;
  out.alignment = solve_assignment(hamming_costs(original, synthetic));
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < original.rows(); ++i) {
    const auto ra = original.row_words(i);
    const auto rb = synthetic.row_words(out.alignment.column_of_row[i]);
    for (std::size_t w = 0; w < ra.size(); ++w) {
      mismatches += static_cast<std::size_t>(std::popcount(ra[w] ^ rb[w]));
    }
  }
  const double cells = static_cast<double>(original.rows() * original.cols());
  out.mismatches = mismatches;
  out.similarity = 1.0 - static_cast<double>(mismatches) / cells;
  out.frobenius = std::sqrt(static_cast<double>(mismatches));
  return out;
}

double smoothed_kl_divergence(std::span<const double> p, std::span<const double> q,
                              double epsilon) {
  if (p.size() != q.size()) throw DataError("distributions differ in support size");
  if (p.empty()) throw DataError("KL divergence of empty distributions");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be a finite non-negative number");
  }
  const auto smoothed = [epsilon](std::span<const double> m) {
    std::vector<double> out(m.begin(), m.end());
    double total = 0.0;
    for (double& x : out) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw DataError("probability masses must be >= 0");
      x += epsilon;
      total += x;
    }
    if (!(total > 0.0)) throw DataError("distribution has no mass");
    for (double& x : out) x /= total;
    return out;
  };
  const std::vector<double> ps = smoothed(p);
  const std::vector<double> qs = smoothed(q);
  double kl = 0.0;
  for (std::size_t t = 0; t < ps.size(); ++t) {
    if (ps[t] == 0.0 || ps[t] == qs[t]) continue;
    if (qs[t] == 0.0) return std::numeric_limits<double>::infinity();
    kl += ps[t] * std::log(ps[t] / qs[t]);
  }
  // Rounding can leave a tiny negative sum for nearly equal inputs.
  return std::max(0.0, kl);
}

std::vector<double> dropout_distribution(const DropoutVector& dropout) {
  std::vector<double> counts(dropout.grid.size(), 0.0);
  double total = 0.0;
  for (const auto& d : dropout.points) {
    if (!d) continue;
    counts[*d] += 1.0;
    total += 1.0;
  }
  if (total == 0.0) throw DataError("no dropout points: no subject has a measurement");
  for (double& c : counts) c /= total;
  return counts;
}

double dropout_divergence(const DropoutVector& original, const DropoutVector& synthetic,
                          double epsilon) {
  if (original.grid.size() != synthetic.grid.size()) {
    throw DataError("dropout vectors are on different grids");
  }
  return smoothed_kl_divergence(dropout_distribution(original), dropout_distribution(synthetic),
                                epsilon);
}

SummaryStat summarize(std::span<const double> values) {
  SummaryStat out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

namespace {

struct Scores {
  std::vector<double> similarity;
  std::vector<double> frobenius;
  std::vector<double> divergence;

  void add(const MeasurementMatrix& a, const MeasurementMatrix& b, double epsilon) {
    const SimilarityResult s = measurement_similarity(a, b);
    similarity.push_back(s.similarity);
    frobenius.push_back(s.frobenius);
    divergence.push_back(dropout_divergence(dropout_points(a), dropout_points(b), epsilon));
  }

  MeasurementBlock block(std::size_t size) const {
    return {summarize(similarity), summarize(frobenius), summarize(divergence), size};
  }
};

std::size_t clamp_size(std::size_t requested, std::size_t available, const char* what) {
  if (requested > available) {
    spdlog::warn("subsample size {} exceeds {} ({}); clamped", requested, what, available);
    return available;
  }
  return requested;
}

// Stream ids keep the comparison and reference draws independent.
constexpr std::uint64_t kComparisonStream = 0;
constexpr std::uint64_t kReferenceStream = 1;

MeasurementBlock run_reference(const MeasurementMatrix& original, const ProtocolOptions& options) {
  const std::size_t n = original.rows();
  if (n < 2) throw DataError("reference baseline needs at least 2 original subjects");
  const std::size_t half_small = n / 2;
  const std::size_t size = clamp_size(options.subsample_size, half_small, "half the original roster");
  Scores scores;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    Rng rng(derive_seed(derive_seed(options.seed, kReferenceStream), it));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order), rng);
    const std::size_t first = (n + 1) / 2;
    std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(first));
    std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(first), order.end());
    std::vector<std::size_t> rows_a;
    std::vector<std::size_t> rows_b;
    for (const std::size_t k : sample_without_replacement(a.size(), size, rng)) rows_a.push_back(a[k]);
    for (const std::size_t k : sample_without_replacement(b.size(), size, rng)) rows_b.push_back(b[k]);
    scores.add(original.select_rows(rows_a), original.select_rows(rows_b), options.epsilon);
  }
  return scores.block(size);
}

void check_options(const ProtocolOptions& options) {
  if (options.iterations == 0) throw ConfigError("iterations must be at least 1");
  if (options.subsample_size == 0) throw ConfigError("subsample size must be at least 1");
}

}  // namespace

MeasurementReport subsample_protocol(const DatasetPair& pair, const VariableId& variable,
                                     const TimeGrid& grid, const ProtocolOptions& options) {
  check_options(options);
  const MeasurementMatrix original = build_measurement_matrix(pair.original, variable, grid);
  const MeasurementMatrix synthetic = build_measurement_matrix(pair.synthetic, variable, grid);
  if (original.rows() < 2) throw DataError("reference baseline needs at least 2 original subjects");
  if (synthetic.rows() == 0) throw DataError("synthetic dataset has no subjects");

  MeasurementReport report;
  report.original_density = measurement_density(original);
  report.synthetic_density = measurement_density(synthetic);
  report.iterations = options.iterations;
  report.seed = options.seed;

  const std::size_t size = clamp_size(options.subsample_size,
                                      std::min(original.rows(), synthetic.rows()),
                                      "the smaller roster");
  Scores scores;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    Rng rng(derive_seed(derive_seed(options.seed, kComparisonStream), it));
    const auto rows_o = sample_without_replacement(original.rows(), size, rng);
    const auto rows_s = sample_without_replacement(synthetic.rows(), size, rng);
    scores.add(original.select_rows(rows_o), synthetic.select_rows(rows_s), options.epsilon);
  }
  report.comparison = scores.block(size);
  report.reference = run_reference(original, options);
  return report;
}

MeasurementBlock reference_protocol(const LongDataset& original, const VariableId& variable,
                                    const TimeGrid& grid, const ProtocolOptions& options) {
  check_options(options);
  return run_reference(build_measurement_matrix(original, variable, grid), options);
}

}  // namespace tempfid
