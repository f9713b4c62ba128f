#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "tempfid/random.hpp"

namespace tempfid {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int k = 0; k < 100; ++k) {
    EXPECT_EQ(a.next(), b.next());
    EXPECT_EQ(a.normal(), b.normal());
  }
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(1);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

TEST(Rng, IndexCoversRangeUniformly) {
  Rng rng(7);
  std::vector<int> counts(6, 0);
  for (int k = 0; k < 60000; ++k) ++counts[rng.index(6)];
  for (const int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, NormalMoments) {
  Rng rng(3);
  const int n = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(Rng, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t stream = 0; stream < 1000; ++stream) seen.insert(derive_seed(5, stream));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(5, 0), derive_seed(6, 0));
  EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
}

TEST(Rng, SampleWithoutReplacementIsDistinctAndInRange) {
  Rng rng(11);
  for (std::size_t n : {1u, 5u, 50u}) {
    for (std::size_t k = 0; k <= n; ++k) {
      auto picks = sample_without_replacement(n, k, rng);
      ASSERT_EQ(picks.size(), k);
      std::sort(picks.begin(), picks.end());
      EXPECT_TRUE(std::adjacent_find(picks.begin(), picks.end()) == picks.end());
      for (const auto p : picks) EXPECT_LT(p, n);
    }
  }
  EXPECT_EQ(sample_without_replacement(3, 10, rng).size(), 3u);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(2);
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  auto w = v;
  shuffle(std::span<int>(w), rng);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

}  // namespace
}  // namespace tempfid
