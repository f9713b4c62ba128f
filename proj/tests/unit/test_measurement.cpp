#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tempfid/errors.hpp"
#include "tempfid/ingestion.hpp"
#include "tempfid/measurement.hpp"
#include "test_support.hpp"

namespace tempfid {
namespace {

using Rows = std::vector<std::vector<int>>;

MeasurementMatrix matrix(const Rows& rows) {
  return MeasurementMatrix::from_rows(TimeGrid(0, double(rows.at(0).size() - 1), 1), rows);
}

Rows random_rows(std::size_t n, std::size_t m, std::mt19937_64& rng, double p = 0.4) {
  std::bernoulli_distribution b(p);
  Rows rows(n, std::vector<int>(m));
  for (auto& r : rows)
    for (int& v : r) v = b(rng);
  return rows;
}

TEST(Density, Examples) {
  const auto full = measurement_density(matrix({{1, 1, 1, 1}, {1, 1, 1, 1}}));
  for (double v : full.values) EXPECT_DOUBLE_EQ(v, 0.25);
  const auto single = measurement_density(matrix({{0, 1, 0}, {0, 1, 0}}));
  EXPECT_EQ(single.values, (std::vector<double>{0, 1, 0}));
  const auto mixed = measurement_density(matrix({{1, 1, 0}, {1, 0, 0}}));
  EXPECT_DOUBLE_EQ(mixed.values[0], 2.0 / 3);
  EXPECT_DOUBLE_EQ(mixed.values[1], 1.0 / 3);
  EXPECT_EQ(mixed.values[2], 0.0);
  EXPECT_THROW(measurement_density(matrix({{0, 0}})), DataError);
}

TEST(Density, SumsToOne) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    auto rows = random_rows(1 + rep, 3 + rep * 7, rng);
    rows[0][0] = 1;
    const auto d = measurement_density(matrix(rows));
    EXPECT_NEAR(std::accumulate(d.values.begin(), d.values.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(Similarity, Examples) {
  std::mt19937_64 rng(2);
  Rows a = random_rows(12, 70, rng);
  Rows b = a;
  std::shuffle(b.begin(), b.end(), rng);
  const auto perm = measurement_similarity(matrix(a), matrix(b));
  EXPECT_EQ(perm.similarity, 1.0);
  EXPECT_EQ(perm.frobenius, 0.0);

  const auto opposite = measurement_similarity(matrix({{1, 1}, {1, 1}}), matrix({{0, 0}, {0, 0}}));
  EXPECT_EQ(opposite.similarity, 0.0);

  const auto small = measurement_similarity(matrix({{1, 0}, {0, 1}}), matrix({{1, 1}, {0, 0}}));
  EXPECT_DOUBLE_EQ(small.similarity, 0.5);
  EXPECT_DOUBLE_EQ(small.frobenius, std::sqrt(2.0));
  EXPECT_EQ(small.mismatches, 2u);
}

TEST(Similarity, DimensionMismatchAsksForSubsampling) {
  try {
    measurement_similarity(matrix({{1, 0}}), matrix({{1, 0}, {0, 1}}));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("subsample"), std::string::npos);
  }
}

// Minimum mismatches over all row permutations.
std::size_t brute_mismatches(const Rows& a, const Rows& b) {
  std::vector<std::size_t> p(a.size());
  std::iota(p.begin(), p.end(), 0);
  std::size_t best = SIZE_MAX;
  do {
    std::size_t m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t t = 0; t < a[i].size(); ++t) m += a[i][t] != b[p[i]][t];
    best = std::min(best, m);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

TEST(Similarity, PropertiesAgainstBruteForce) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 1 + rep % 6;
    const std::size_t m = 1 + rep % 67;
    const Rows a = random_rows(n, m, rng);
    const Rows b = random_rows(n, m, rng, 0.6);
    const auto ab = measurement_similarity(matrix(a), matrix(b));
    const auto ba = measurement_similarity(matrix(b), matrix(a));
    EXPECT_EQ(ab.mismatches, brute_mismatches(a, b));
    EXPECT_EQ(ab.similarity, ba.similarity);
    EXPECT_GE(ab.similarity, 0.0);
    EXPECT_LE(ab.similarity, 1.0);
    EXPECT_NEAR(ab.frobenius * ab.frobenius, double(n * m) * (1 - ab.similarity), 1e-9);
  }
}

TEST(HammingCosts, MatchesBitCounts) {
  const Rows a{{1, 0, 1}, {0, 0, 0}};
  const Rows b{{1, 1, 1}, {0, 1, 0}};
  const CostMatrix c = hamming_costs(matrix(a), matrix(b));
  EXPECT_EQ(c(0, 0), 1.0);
  EXPECT_EQ(c(0, 1), 3.0);
  EXPECT_EQ(c(1, 0), 3.0);
  EXPECT_EQ(c(1, 1), 1.0);
}

TEST(KlDivergence, Examples) {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{0.25, 0.75};
  EXPECT_NEAR(smoothed_kl_divergence(p, q, 1e-12), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3), 1e-9);
  EXPECT_NEAR(smoothed_kl_divergence(p, q, 1e-12), 0.1438, 1e-4);
  EXPECT_EQ(smoothed_kl_divergence(q, q), 0.0);
  const std::vector<double> o{1, 0};
  const std::vector<double> s{0, 1};
  const double loose = smoothed_kl_divergence(o, s, 1e-3);
  const double tight = smoothed_kl_divergence(o, s, 1e-6);
  EXPECT_TRUE(std::isfinite(tight));
  EXPECT_GT(tight, loose);
}

TEST(KlDivergence, NonNegative) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> p(2 + rep % 10), q(p.size());
    for (double& x : p) x = u(rng) < 0.3 ? 0 : u(rng);
    for (double& x : q) x = u(rng) < 0.3 ? 0 : u(rng);
    p[0] += 0.1;
    q[0] += 0.1;
    EXPECT_GE(smoothed_kl_divergence(p, q), 0.0);
  }
}

TEST(DropoutDivergence, UsesObservedSubjectsOnly) {
  const auto a = dropout_points(matrix({{1, 1, 0}, {1, 0, 0}, {0, 0, 0}}));
  EXPECT_EQ(dropout_distribution(a), (std::vector<double>{0.5, 0.5, 0}));
  EXPECT_EQ(dropout_divergence(a, a), 0.0);
  EXPECT_THROW(dropout_distribution(dropout_points(matrix({{0, 0}}))), DataError);
}

TEST(Summarize, SampleSd) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(*s.sd, std::sqrt(5.0 / 3), 1e-12);
  const std::vector<double> one{7};
  EXPECT_FALSE(summarize(one).sd.has_value());
}

LongDataset grid_dataset(std::size_t n, std::uint64_t seed, double keep = 0.6) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(keep);
  std::vector<test::Row> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "s" + std::to_string(i);
    rows.emplace_back(id, 0.0, 1.0);
    for (int t = 1; t < 12; ++t)
      if (b(rng)) rows.emplace_back(id, double(t), 1.0);
  }
  return test::continuous_dataset(rows);
}

TEST(Protocol, DeterministicAndClamped) {
  const LongDataset o = grid_dataset(30, 1);
  const LongDataset s = grid_dataset(20, 2);
  const DatasetPair pair = pair_datasets(o, s);
  const TimeGrid grid(0, 11, 1);
  ProtocolOptions opts;
  opts.iterations = 5;
  opts.seed = 42;
  const auto r1 = subsample_protocol(pair, "x", grid, opts);
  const auto r2 = subsample_protocol(pair, "x", grid, opts);
  EXPECT_EQ(r1.comparison.subsample_size, 20u);
  EXPECT_EQ(r1.reference.subsample_size, 15u);
  EXPECT_EQ(r1.comparison.similarity.mean, r2.comparison.similarity.mean);
  EXPECT_EQ(r1.reference.dropout_divergence.sd, r2.reference.dropout_divergence.sd);
  EXPECT_EQ(r1.original_density.values, r2.original_density.values);
  opts.seed = 43;
  EXPECT_NE(subsample_protocol(pair, "x", grid, opts).comparison.similarity.mean,
            r1.comparison.similarity.mean);
}

TEST(Protocol, SingleIterationHasNoSd) {
  const DatasetPair pair = pair_datasets(grid_dataset(10, 3), grid_dataset(10, 4));
  ProtocolOptions opts;
  opts.iterations = 1;
  const auto r = subsample_protocol(pair, "x", TimeGrid(0, 11, 1), opts);
  EXPECT_FALSE(r.comparison.similarity.sd.has_value());
  EXPECT_FALSE(r.reference.frobenius.sd.has_value());
}

TEST(Protocol, IdenticalGeneratorsMatchReference) {
  const DatasetPair pair = pair_datasets(grid_dataset(400, 5), grid_dataset(400, 6));
  ProtocolOptions opts;
  opts.iterations = 30;
  opts.subsample_size = 100;
  const auto r = subsample_protocol(pair, "x", TimeGrid(0, 11, 1), opts);
  const double se = *r.reference.similarity.sd / std::sqrt(30.0);
  EXPECT_LT(std::abs(r.comparison.similarity.mean - r.reference.similarity.mean), 3 * se);
}

TEST(Protocol, SharedRosterNeverScoresBelowReference) {
  // Both sides draw from one roster, so some rows match exactly.
  const LongDataset o = grid_dataset(200, 5);
  ProtocolOptions opts;
  opts.iterations = 20;
  opts.subsample_size = 100;
  const auto r = subsample_protocol(pair_datasets(o, o), "x", TimeGrid(0, 11, 1), opts);
  EXPECT_GE(r.comparison.similarity.mean, r.reference.similarity.mean);
}

TEST(Protocol, Errors) {
  const LongDataset one = test::continuous_dataset({{"a", 0, 1}});
  ProtocolOptions opts;
  EXPECT_THROW(reference_protocol(one, "x", TimeGrid(0, 1, 1), opts), DataError);
  opts.iterations = 0;
  EXPECT_THROW(reference_protocol(grid_dataset(4, 1), "x", TimeGrid(0, 11, 1), opts), ConfigError);
}

}  // namespace
}  // namespace tempfid
