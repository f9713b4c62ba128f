#include <gtest/gtest.h>

#include <random>
#include <set>

#include "tempfid/individual.hpp"
#include "test_support.hpp"

namespace tempfid {
namespace {

using test::continuous_dataset;

TEST(Strata, Labels) {
  EXPECT_EQ(percentile_class_labels(default_quantile_levels()),
            (std::vector<std::string>{"[0, 5]", "(5, 25]", "(25, 50]", "(50, 75]", "(75, 95]",
                                      "(95, 100]"}));
}

LongDataset uniform_baseline(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(0, 1);
  std::vector<test::Row> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "s" + std::to_string(1000 + i);
    rows.emplace_back(id, 0.0, x(rng));
    rows.emplace_back(id, 1.0 + double(i % 5), x(rng));
  }
  return continuous_dataset(rows);
}

TEST(Strata, SizesFollowBinMasses) {
  const LongDataset ds = uniform_baseline(100, 11);
  const auto a = baseline_strata(ds, "x", TimeGrid(0, 5, 1), Bandwidth{1e-3});
  std::map<std::string, int> size;
  for (const auto& [s, label] : a.stratum_of) ++size[label];
  const std::vector<int> expected{5, 20, 25, 25, 20, 5};
  for (std::size_t k = 0; k < a.strata.size(); ++k) EXPECT_NEAR(size[a.strata[k]], expected[k], 1);
}

TEST(Strata, BoundaryGoesToLowerBin) {
  // Four subjects at one time: median curve = 2, so a first value of 2 sits in (25, 50].
  const LongDataset ds = continuous_dataset({{"a", 0, 1}, {"b", 0, 2}, {"c", 0, 3}, {"d", 0, 4}});
  const std::vector<double> levels{0.25, 0.5, 0.75};
  const auto a = baseline_strata(ds, "x", TimeGrid(0, 0, 1), Bandwidth{1}, levels);
  EXPECT_EQ(a.stratum_of.at("a"), "[0, 25]");
  EXPECT_EQ(a.stratum_of.at("b"), "(25, 50]");
  EXPECT_EQ(a.stratum_of.at("d"), "(75, 100]");
}

TEST(Strata, PartitionCoversObservedSubjects) {
  LongDataset::Builder b({{"x", test::continuous("x")}});
  b.add({"a", "x", 0, 1.0}).add({"b", "x", 3, 2.0}).add_subject("ghost");
  const LongDataset ds = std::move(b).build();
  const auto a = baseline_strata(ds, "x", TimeGrid(0, 3, 1), Bandwidth{2});
  EXPECT_EQ(a.stratum_of.size(), 2u);
  EXPECT_FALSE(a.stratum_of.contains("ghost"));
  const auto panel = sample_trajectories(ds, "x", a, 10, 0);
  std::set<SubjectId> seen;
  std::size_t total = 0;
  for (const auto& stratum : panel.samples)
    for (const auto& t : stratum) seen.insert(t.subject), ++total;
  EXPECT_EQ(total, seen.size());
  EXPECT_EQ(seen, (std::set<SubjectId>{"a", "b"}));
}

TEST(Trajectories, CapDeterminismAndRawSeries) {
  const LongDataset ds = uniform_baseline(200, 2);
  const TimeGrid grid(0, 5, 1);
  const auto strata = baseline_strata(ds, "x", grid, Bandwidth{6});
  const auto p1 = sample_trajectories(ds, "x", strata, 7, 99);
  const auto p2 = sample_trajectories(ds, "x", strata, 7, 99);
  const auto p3 = sample_trajectories(ds, "x", strata, 7, 100);
  bool differs = false;
  for (std::size_t s = 0; s < p1.samples.size(); ++s) {
    EXPECT_LE(p1.samples[s].size(), 7u);
    ASSERT_EQ(p1.samples[s].size(), p2.samples[s].size());
    for (std::size_t k = 0; k < p1.samples[s].size(); ++k) {
      EXPECT_EQ(p1.samples[s][k].subject, p2.samples[s][k].subject);
      EXPECT_EQ(strata.stratum_of.at(p1.samples[s][k].subject), p1.strata[s]);
      if (k < p3.samples[s].size() && p3.samples[s][k].subject != p1.samples[s][k].subject) differs = true;
    }
  }
  EXPECT_TRUE(differs);
  const auto whole = sample_trajectories(ds, "x", strata, 1000, 1);
  std::size_t total = 0;
  for (const auto& s : whole.samples) total += s.size();
  EXPECT_EQ(total, 200u);
  const auto& t = whole.samples[0][0];
  const auto series = ds.series("x");
  const auto idx = std::find(ds.subjects().begin(), ds.subjects().end(), t.subject) - ds.subjects().begin();
  EXPECT_EQ(t.times, series[idx].times);
  EXPECT_EQ(t.values, series[idx].values);
}

TEST(Trajectories, SingleObservationSubject) {
  const LongDataset ds = continuous_dataset({{"lonely", 4, 1.5}});
  const auto panel = sample_trajectories(ds, "x", baseline_strata(ds, "x", TimeGrid(0, 4, 1), Bandwidth{6}),
                                         20, 3);
  std::size_t found = 0;
  for (const auto& s : panel.samples)
    for (const auto& t : s) {
      EXPECT_EQ(t.times.size(), 1u);
      ++found;
    }
  EXPECT_EQ(found, 1u);
}

TEST(Trajectories, ExternalStrata) {
  const LongDataset ds = continuous_dataset({{"a", 0, 1}, {"b", 0, 2}, {"c", 0, 3}});
  StratumAssignment a{{"treat", "placebo"}, {{"a", "treat"}, {"b", "placebo"}, {"c", "treat"}}};
  const auto panel = sample_trajectories(ds, "x", a, 20, 0);
  EXPECT_EQ(panel.samples[0].size(), 2u);
  EXPECT_EQ(panel.samples[0][0].subject, "a");
  EXPECT_EQ(panel.samples[1][0].subject, "b");
}

}  // namespace
}  // namespace tempfid
