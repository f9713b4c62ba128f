#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tempfid/errors.hpp"
#include "tempfid/marginal.hpp"
#include "test_support.hpp"

namespace tempfid {
namespace {

using test::continuous_dataset;
using test::discrete_dataset;

LongDataset random_continuous(std::uint64_t seed, std::size_t subjects = 20) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> t(0, 24);
  std::normal_distribution<double> x(10, 4);
  std::vector<test::Row> rows;
  for (std::size_t i = 0; i < subjects; ++i)
    for (int k = 0; k < 6; ++k) rows.emplace_back("s" + std::to_string(i), t(rng), x(rng));
  return continuous_dataset(rows);
}

TEST(MeanProfile, Examples) {
  const TimeGrid grid(0, 10, 1);
  const auto constant = mean_profile(continuous_dataset({{"a", 0, 5}, {"b", 3, 5}, {"b", 9, 5}}), "x",
                                     grid, Bandwidth{6});
  for (double v : constant.values) EXPECT_DOUBLE_EQ(v, 5.0);
  const auto single = mean_profile(continuous_dataset({{"a", 0, 3}}), "x", grid, Bandwidth{2});
  for (double v : single.values) EXPECT_DOUBLE_EQ(v, 3.0);
  const auto two = mean_profile(continuous_dataset({{"a", 0, 0}, {"b", 10, 10}}), "x", grid, Bandwidth{6});
  EXPECT_NEAR(two.at(5, 0), 5.0, 1e-12);
  EXPECT_EQ(two.metric, "mean");
  EXPECT_EQ(two.bandwidth, 6.0);
  EXPECT_EQ(two.ess.size(), grid.size());
}

TEST(MeanProfile, BoundedByData) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LongDataset ds = random_continuous(seed);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : ds.series("x"))
      for (double v : s.values) lo = std::min(lo, v), hi = std::max(hi, v);
    const auto p = mean_profile(ds, "x", TimeGrid(-10, 40, 0.5), Bandwidth{1 + double(seed)});
    for (double v : p.values) {
      EXPECT_GE(v, lo - 1e-12);
      EXPECT_LE(v, hi + 1e-12);
    }
  }
}

TEST(MeanProfile, KindAndEmptyErrors) {
  const TimeGrid grid(0, 2, 1);
  const LongDataset d = discrete_dataset({{"a", 0, "x"}}, {"x"});
  EXPECT_THROW(mean_profile(d, "state", grid, Bandwidth{1}), KindError);
  EXPECT_THROW(quantile_profile(d, "state", grid, Bandwidth{1}), KindError);
  EXPECT_THROW(class_profile(continuous_dataset({{"a", 0, 1}}), "x", grid, Bandwidth{1}), KindError);
  LongDataset::Builder b({{"x", test::continuous("x")}});
  b.add_subject("a");
  EXPECT_THROW(mean_profile(std::move(b).build(), "x", grid, Bandwidth{1}), DataError);
}

TEST(QuantileProfile, Examples) {
  const TimeGrid grid(0, 10, 1);
  const auto c = quantile_profile(continuous_dataset({{"a", 0, 2}, {"b", 7, 2}}), "x", grid, Bandwidth{3});
  for (double v : c.values) EXPECT_EQ(v, 2.0);
  const std::vector<double> median{0.5};
  const auto two = quantile_profile(continuous_dataset({{"a", 0, 1}, {"b", 10, 9}}), "x", grid,
                                    Bandwidth{6}, median);
  EXPECT_EQ(two.at(5, 0), 1.0);
  EXPECT_EQ(c.components, (std::vector<std::string>{"q0.05", "q0.25", "q0.5", "q0.75", "q0.95"}));
  const std::vector<double> bad{0.5, 0.25};
  EXPECT_THROW(quantile_profile(continuous_dataset({{"a", 0, 1}}), "x", grid, Bandwidth{1}, bad),
               ConfigError);
}

TEST(QuantileProfile, CurvesNeverCross) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = quantile_profile(random_continuous(seed), "x", TimeGrid(0, 24, 1), Bandwidth{2});
    for (std::size_t t = 0; t < p.points(); ++t)
      for (std::size_t c = 1; c < p.width(); ++c) EXPECT_LE(p.at(t, c - 1), p.at(t, c));
  }
}

TEST(ClassProfile, Examples) {
  const TimeGrid grid(0, 4, 1);
  const auto all_a = class_profile(discrete_dataset({{"s", 0, "a"}, {"s", 3, "a"}}, {"a", "b"}),
                                   "state", grid, Bandwidth{2});
  for (std::size_t t = 0; t < grid.size(); ++t) {
    EXPECT_DOUBLE_EQ(all_a.at(t, 0), 1.0);
    EXPECT_DOUBLE_EQ(all_a.at(t, 1), 0.0);
  }
  const auto sym = class_profile(discrete_dataset({{"s", 0, "a"}, {"s", 4, "b"}}, {"a", "b"}),
                                 "state", grid, Bandwidth{2});
  EXPECT_NEAR(sym.at(2, 0), 0.5, 1e-12);
  EXPECT_NEAR(sym.at(2, 1), 0.5, 1e-12);
  const auto thirds = class_profile(
      discrete_dataset({{"p", 2, "a"}, {"q", 2, "a"}, {"r", 2, "b"}}, {"a", "b", "c"}), "state", grid,
      Bandwidth{1});
  EXPECT_NEAR(thirds.at(2, 0), 2.0 / 3, 1e-12);
  EXPECT_NEAR(thirds.at(2, 1), 1.0 / 3, 1e-12);
  EXPECT_EQ(thirds.at(2, 2), 0.0);
}

TEST(ClassProfile, Simplex) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0, 30);
  std::uniform_int_distribution<int> c(0, 3);
  std::vector<test::ClassRow> rows;
  for (int i = 0; i < 200; ++i)
    rows.emplace_back("s" + std::to_string(i % 17), t(rng), std::string(1, char('a' + c(rng))));
  const auto p = class_profile(discrete_dataset(rows, {"a", "b", "c", "d"}), "state",
                               TimeGrid(0, 30, 1), Bandwidth{3});
  for (std::size_t g = 0; g < p.points(); ++g) {
    double sum = 0;
    for (std::size_t k = 0; k < p.width(); ++k) sum += p.at(g, k);
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(OutlierOverlay, Examples) {
  const TimeGrid grid(0, 5, 1);
  EXPECT_TRUE(outlier_overlay(continuous_dataset({{"a", 0, 3}, {"b", 5, 3}}), "x", grid, Bandwidth{2})
                  .empty());
  std::vector<test::Row> rows;
  for (int i = 0; i < 30; ++i) rows.emplace_back("s" + std::to_string(i), i % 6, 1.0 + 0.01 * i);
  rows.emplace_back("z", 3, 500.0);
  const auto out = outlier_overlay(continuous_dataset(rows), "x", grid, Bandwidth{2});
  ASSERT_FALSE(out.empty());
  EXPECT_TRUE(std::any_of(out.begin(), out.end(), [](const OutlierPoint& p) {
    return p.subject == "z" && p.value == 500.0 && p.above;
  }));
}

TEST(OutlierOverlay, TwoOfHundredAgainstBruteForce) {
  std::vector<test::Row> rows;
  for (int k = 0; k < 100; ++k) {
    const double t = k / 2;
    double v = 0.0;
    if (k == 41 || k == 61) v = 10.0;
    rows.emplace_back("s" + std::to_string(k), t, v);
  }
  const LongDataset ds = continuous_dataset(rows);
  const TimeGrid grid(0, 49, 1);
  const Bandwidth h{6};
  const std::vector<double> levels{0.05, 0.95};
  const auto q = quantile_profile(ds, "x", grid, h, levels);
  std::vector<OutlierPoint> oracle;
  const auto series = ds.series("x");
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t k = 0; k < series[i].size(); ++k) {
      const std::size_t g = grid.nearest(series[i].times[k]);
      const double v = series[i].values[k];
      if (v > q.at(g, 1)) oracle.push_back({ds.subjects()[i], series[i].times[k], v, true});
      else if (v < q.at(g, 0)) oracle.push_back({ds.subjects()[i], series[i].times[k], v, false});
    }
  }
  const auto out = outlier_overlay(ds, "x", grid, h);
  EXPECT_EQ(out.size(), 2u);
  auto key = [](const OutlierPoint& a, const OutlierPoint& b) { return a.subject < b.subject; };
  std::vector<OutlierPoint> sorted_out = out;
  std::sort(sorted_out.begin(), sorted_out.end(), key);
  std::sort(oracle.begin(), oracle.end(), key);
  EXPECT_EQ(sorted_out, oracle);
}

TEST(SubjectsAtRisk, CountsFollowUpWindow) {
  const LongDataset ds = continuous_dataset({{"a", 0, 1}, {"a", 2, 1}, {"b", 1, 1}, {"b", 4, 1}});
  const auto r = subjects_at_risk(ds, "x", TimeGrid(0, 5, 1));
  const std::vector<double> expected{1, 2, 2, 1, 1, 0};
  for (std::size_t g = 0; g < 6; ++g) {
    EXPECT_EQ(r.at(g, 0), expected[g]);
    EXPECT_EQ(r.at(g, 1), expected[g] / 2);
  }
}

TEST(Profiles, SelfComparisonIsExactlyZero) {
  const LongDataset a = random_continuous(9);
  const LongDataset b = random_continuous(9);
  const TimeGrid grid(0, 24, 1);
  const auto pa = quantile_profile(a, "x", grid, Bandwidth{6});
  const auto pb = quantile_profile(b, "x", grid, Bandwidth{6});
  for (std::size_t k = 0; k < pa.values.size(); ++k) EXPECT_EQ(pa.values[k] - pb.values[k], 0.0);
  EXPECT_EQ(mean_profile(a, "x", grid, Bandwidth{6}).values, mean_profile(b, "x", grid, Bandwidth{6}).values);
}

}  // namespace
}  // namespace tempfid
