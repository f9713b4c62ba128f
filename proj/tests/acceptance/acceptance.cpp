#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "tempfid/assignment.hpp"
#include "tempfid/covariance.hpp"
#include "tempfid/evaluation.hpp"
#include "tempfid/ingestion.hpp"
#include "tempfid/measurement.hpp"
#include "tempfid/simgen.hpp"

namespace {

using namespace tempfid;
namespace fs = std::filesystem;

// Tolerances and sizes as stated by the acceptance criteria.
constexpr double kIdentityTol = 1e-12;
constexpr double kC1Seconds = 10.0;
constexpr std::size_t kC1Subjects = 50;
constexpr std::size_t kC2Matrices = 500;
constexpr double kC2Seconds = 5.0;
constexpr double kC3Tau2 = 0.2;
constexpr double kC3Sigma2 = 0.8;
constexpr double kC3Range = 3.0;
constexpr double kC3Nu2 = 0.5;
constexpr std::size_t kC3Subjects = 500;
constexpr double kC3NuggetTol = 0.1;
constexpr double kC3SillTol = 0.15;
constexpr double kC3TotalTol = 0.15;
constexpr double kC3Seconds = 60.0;
constexpr std::size_t kC4Subjects = 200;
constexpr double kC4Nu2 = 1.0;
constexpr double kC4GammaTol = 1e-9;
constexpr double kC4VarianceShare = 0.8;
constexpr std::size_t kC5Subjects = 1000;
constexpr double kC5Tol = 0.05;
constexpr double kC5RowTol = 1e-9;
constexpr std::size_t kC6Subjects = 10000;
constexpr std::size_t kC7Pairs = 1000;
constexpr double kC7Hand = 0.1438;
constexpr double kC7HandTol = 1e-3;
constexpr double kC7HandEpsilon = 1e-9;
constexpr std::size_t kC8Pairs = 200;
constexpr std::size_t kC9Subjects = 2500;
constexpr std::size_t kC9Variables = 10;
constexpr double kC9Seconds = 600.0;
constexpr std::size_t kC10Subjects = 500;
constexpr double kC10Noise = 0.5;
constexpr double kC10NuggetShare = 0.8;
constexpr double kC10MeanTol = 0.05;

// Small bandwidth for the lag kernel so each lag reads the pairs at that gap.
constexpr double kVariogramBandwidth = 0.25;

const TimeGrid kGrid48(0, 47, 1);

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

ObservationDesign full_design(std::size_t n) {
  ObservationDesign d;
  d.subjects = n;
  d.grid = kGrid48;
  return d;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::isnan(a[k]) || std::isnan(b[k])) {
      if (std::isnan(a[k]) != std::isnan(b[k])) return INFINITY;
      continue;
    }
    worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return worst;
}

std::vector<double> flatten(const std::vector<OutlierPoint>& points) {
  std::vector<double> out;
  for (const auto& p : points) {
    out.push_back(p.time);
    out.push_back(p.value);
  }
  return out;
}

std::vector<double> flatten(const TrajectoryPanel& panel) {
  std::vector<double> out;
  for (const auto& stratum : panel.samples) {
    for (const auto& t : stratum) {
      out.insert(out.end(), t.times.begin(), t.times.end());
      out.insert(out.end(), t.values.begin(), t.values.end());
    }
  }
  return out;
}

LongDataset mixed_dataset(std::size_t n, std::uint64_t seed) {
  SimulationPlan plan;
  plan.seed = seed;
  plan.design = full_design(n);
  plan.design.keep_probability = {0.6};
  plan.design.dropout_hazard = {0.03};
  ContinuousModel hr;
  hr.variable = "hr";
  hr.mean_fn = {{80.0}, 6.0, 24.0, 0.0};
  hr.nugget_var = 2;
  hr.serial_var = 6;
  hr.serial_range = 4;
  hr.intercept_var = 9;
  ContinuousModel sbp;
  sbp.variable = "sbp";
  sbp.mean_fn.poly = {120.0, -0.2};
  sbp.nugget_var = 10;
  sbp.serial_var = 30;
  sbp.serial_range = 6;
  sbp.intercept_var = 40;
  DiscreteModel gcs;
  gcs.variable = "gcs";
  gcs.classes = {"mild", "moderate", "severe"};
  gcs.transition = {{0.85, 0.1, 0.05}, {0.15, 0.7, 0.15}, {0.05, 0.15, 0.8}};
  gcs.initial = {0.5, 0.3, 0.2};
  plan.variables = {hr, sbp, gcs};
  return simulate(plan);
}

Outcome criterion1() {
  Outcome o;
  const LongDataset ds = mixed_dataset(kC1Subjects, 101);
  EvaluationOptions opts;
  opts.seed = 7;
  opts.protocol.subsample_size = kC1Subjects;
  const ComparisonReport r = evaluate(pair_datasets(ds, ds), opts);
  o.require(r.failures.empty(), "metric failures present");
  o.require(r.variables.size() == 3, "expected three variables");
  double worst = 0.0;
  const auto track = [&](const std::vector<double>& a, const std::vector<double>& b) {
    worst = std::max(worst, max_abs_diff(a, b));
  };
  for (const VariableReport& v : r.variables) {
    for (const SmoothedMetrics& m : v.smoothed) {
      if (m.mean) track(m.mean->original.values, m.mean->synthetic.values);
      if (m.quantiles) track(m.quantiles->original.values, m.quantiles->synthetic.values);
      if (m.outliers) track(flatten(m.outliers->original), flatten(m.outliers->synthetic));
      if (m.classes) track(m.classes->original.values, m.classes->synthetic.values);
      if (m.variance) track(m.variance->original.values, m.variance->synthetic.values);
      if (m.variogram) track(m.variogram->original.gamma, m.variogram->synthetic.gamma);
      if (m.rank_order) track(m.rank_order->original.values, m.rank_order->synthetic.values);
      if (m.transitions) {
        track(m.transitions->original.probability, m.transitions->synthetic.probability);
      }
    }
    if (v.trajectories) track(flatten(v.trajectories->original), flatten(v.trajectories->synthetic));
    o.require(v.measurement.has_value(), v.variable + ": no measurement block");
    if (!v.measurement) continue;
    track(v.measurement->original_density.values, v.measurement->synthetic_density.values);

    const MeasurementMatrix full = build_measurement_matrix(ds, v.variable, v.grid);
    const SimilarityResult s = measurement_similarity(full, full);
    const double kl = dropout_divergence(dropout_points(full), dropout_points(full));
    o.require(std::abs(s.similarity - 1.0) <= kIdentityTol,
              fmt::format("{}: full-roster similarity {}", v.variable, s.similarity));
    o.require(std::abs(kl) <= kIdentityTol, fmt::format("{}: divergence {}", v.variable, kl));
    o.require(std::abs(v.measurement->comparison.similarity.mean - 1.0) <= kIdentityTol,
              fmt::format("{}: protocol similarity {}", v.variable,
                          v.measurement->comparison.similarity.mean));
    o.require(std::abs(v.measurement->comparison.dropout_divergence.mean) <= kIdentityTol,
              fmt::format("{}: protocol divergence {}", v.variable,
                          v.measurement->comparison.dropout_divergence.mean));
  }
  o.require(worst <= kIdentityTol, fmt::format("max profile difference {}", worst));
  if (o.pass) o.detail = fmt::format("max difference {} over 3 variables", worst);
  return o;
}

Outcome criterion2() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cost(0, 100);
  std::size_t checked = 0;
  for (std::size_t n = 2; n <= 7; ++n) {
    for (std::size_t rep = 0; rep < kC2Matrices; ++rep) {
      CostMatrix c(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) c(i, j) = cost(rng);
      }
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = INFINITY;
      do {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) total += c(i, perm[i]);
        best = std::min(best, total);
      } while (std::next_permutation(perm.begin(), perm.end()));
      const double got = solve_assignment(c).total_cost;
      if (got != best) o.require(false, fmt::format("n={} rep={}: {} vs {}", n, rep, got, best));
      ++checked;
    }
  }
  if (o.pass) o.detail = fmt::format("{} matrices exact", checked);
  return o;
}

EvaluationOptions structure_options() {
  EvaluationOptions opts;
  opts.measurement = false;
  opts.variogram_bandwidth = kVariogramBandwidth;
  return opts;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Outcome criterion3() {
  Outcome o;
  ContinuousModel m;
  m.nugget_var = kC3Tau2;
  m.serial_var = kC3Sigma2;
  m.serial_range = kC3Range;
  m.intercept_var = kC3Nu2;
  const LongDataset ds = simulate_continuous(m, full_design(kC3Subjects), 303);
  const ComparisonReport r = evaluate(pair_datasets(ds, ds), structure_options());
  const auto& sm = r.variables.at(0).smoothed.at(0);
  if (!sm.decomposition) {
    o.require(false, "no decomposition");
    return o;
  }
  const VarianceDecomposition& d = sm.decomposition->original;
  o.require(std::abs(d.nugget - kC3Tau2) <= kC3NuggetTol, fmt::format("nugget {:.4f}", d.nugget));
  o.require(std::abs(d.sill - (kC3Tau2 + kC3Sigma2)) <= kC3SillTol, fmt::format("sill {:.4f}", d.sill));
  o.require(std::abs(d.total - (kC3Tau2 + kC3Sigma2 + kC3Nu2)) <= kC3TotalTol,
            fmt::format("mean variance {:.4f}", d.total));
  o.detail = fmt::format("nugget {:.3f} (0.2), sill {:.3f} (1.0), variance {:.3f} (1.5)", d.nugget,
                         d.sill, d.total) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome criterion4() {
  Outcome o;
  ContinuousModel m;
  m.intercept_var = kC4Nu2;
  const LongDataset ds = simulate_continuous(m, full_design(kC4Subjects), 400);
  const auto vg = variogram(ds, "x", default_lags(kGrid48), Bandwidth{kDefaultBandwidth});
  const double gamma_max = *std::max_element(vg.gamma.begin(), vg.gamma.end());
  const double var = mean_of(variance_profile(ds, "x", kGrid48, Bandwidth{kDefaultBandwidth}).values);
  o.require(gamma_max < kC4GammaTol, fmt::format("max gamma {}", gamma_max));
  o.require(var >= kC4VarianceShare * kC4Nu2, fmt::format("mean variance {}", var));
  o.detail = fmt::format("max gamma {:.2e}, mean variance {:.3f}", gamma_max, var) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome criterion5() {
  Outcome o;
  DiscreteModel m;
  m.classes = {"a", "b", "c"};
  m.transition = {{0.7, 0.2, 0.1}, {0.15, 0.7, 0.15}, {0.1, 0.3, 0.6}};
  m.initial = {0.4, 0.35, 0.25};
  const LongDataset ds = simulate_discrete(m, full_design(kC5Subjects), 505);
  const auto p = transition_profile(ds, "state", kGrid48, Bandwidth{kDefaultBandwidth});
  const std::size_t lo = kGrid48.size() / 4;
  const std::size_t hi = kGrid48.size() - kGrid48.size() / 4;
  double worst = 0.0;
  double worst_row = 0.0;
  std::size_t defined = 0;
  for (std::size_t g = 0; g < kGrid48.size(); ++g) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (!p.defined(g, a)) continue;
      double sum = 0.0;
      for (std::size_t b = 0; b < 3; ++b) {
        sum += p.at(g, a, b);
        if (g >= lo && g < hi) worst = std::max(worst, std::abs(p.at(g, a, b) - m.transition[a][b]));
      }
      worst_row = std::max(worst_row, std::abs(sum - 1.0));
      ++defined;
    }
  }
  o.require(worst <= kC5Tol, fmt::format("max deviation {}", worst));
  o.require(worst_row <= kC5RowTol, fmt::format("row sum error {}", worst_row));
  o.detail = fmt::format("max deviation {:.4f} in the central half, row error {:.1e}, {} rows", worst,
                         worst_row, defined) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

// Bin of x against ascending curve values: 1 + number of curves strictly below x.
std::size_t oracle_bin(double x, const std::vector<double>& curves) {
  return 1 + static_cast<std::size_t>(
                 std::count_if(curves.begin(), curves.end(), [x](double q) { return x > q; }));
}

Outcome criterion6() {
  Outcome o;
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> count(1, 8);
  std::uniform_int_distribution<int> time(0, 47);
  std::normal_distribution<double> value(0.0, 1.0);
  LongDataset::Builder b({{"x", VariableSpec{"x"}}});
  for (std::size_t i = 0; i < kC6Subjects; ++i) {
    const std::string id = fmt::format("S{:05}", i);
    const int n = count(rng);
    std::set<int> times;
    while (static_cast<int>(times.size()) < n) times.insert(time(rng));
    for (const int t : times) b.add({id, "x", static_cast<double>(t), value(rng)});
  }
  const LongDataset ds = std::move(b).build();
  const Bandwidth h{kDefaultBandwidth};
  const auto levels = default_quantile_levels();
  const auto dist = rank_order_variability(ds, "x", kGrid48, h, levels);
  const ProfileSeries q = quantile_profile(ds, "x", kGrid48, h, levels);
  const auto series = ds.series("x");
  std::size_t k = 0;
  std::size_t mismatches = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    if (s.size() < 2) continue;
    std::vector<std::size_t> bins;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const std::size_t g = kGrid48.nearest(s.times[j]);
      std::vector<double> curves(levels.size());
      for (std::size_t c = 0; c < levels.size(); ++c) curves[c] = q.at(g, c);
      bins.push_back(oracle_bin(s.values[j], curves));
    }
    const double telescoped = (static_cast<double>(bins.back()) - static_cast<double>(bins.front())) /
                              (static_cast<double>(levels.size()) * static_cast<double>(s.size() - 1));
    const double got = dist.values.at(k++);
    if (got != telescoped) ++mismatches;
    worst = std::max(worst, std::abs(got));
  }
  o.require(k == dist.values.size(), "subject count mismatch");
  o.require(mismatches == 0, fmt::format("{} inexact subjects", mismatches));
  o.require(worst <= 1.0, fmt::format("value {} outside [-1, 1]", worst));
  if (o.pass) o.detail = fmt::format("{} subjects exact, max |R| {:.3f}", k, worst);
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<std::size_t> points(1, 60);
  std::uniform_int_distribution<std::size_t> people(1, 40);
  double smallest = INFINITY;
  for (std::size_t rep = 0; rep < kC7Pairs; ++rep) {
    const std::size_t m = points(rng);
    const TimeGrid grid(0, static_cast<double>(m - 1), 1);
    const auto draw = [&] {
      DropoutVector d{grid, {}};
      std::uniform_int_distribution<std::size_t> at(0, m - 1);
      const std::size_t n = people(rng);
      for (std::size_t i = 0; i < n; ++i) d.points.emplace_back(at(rng));
      return d;
    };
    const DropoutVector a = draw();
    const DropoutVector b = draw();
    const double kl = dropout_divergence(a, b);
    smallest = std::min(smallest, kl);
    o.require(kl >= 0.0, fmt::format("negative divergence {}", kl));
    o.require(dropout_divergence(a, a) == 0.0, "identical inputs gave nonzero divergence");
    if (!o.pass) break;
  }
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{0.25, 0.75};
  const double hand = smoothed_kl_divergence(p, q, kC7HandEpsilon);
  o.require(std::abs(hand - kC7Hand) <= kC7HandTol, fmt::format("hand case {}", hand));
  o.detail = fmt::format("min divergence {:.2e} over {} pairs, hand case {:.5f}", smallest, kC7Pairs,
                         hand) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<std::size_t> rows(1, 40);
  std::uniform_int_distribution<std::size_t> cols(1, 130);
  std::uniform_real_distribution<double> density(0.05, 0.95);
  for (std::size_t rep = 0; rep < kC8Pairs; ++rep) {
    const std::size_t n = rows(rng);
    const std::size_t m = cols(rng);
    const TimeGrid grid(0, static_cast<double>(m - 1), 1);
    const auto draw = [&](double p) {
      std::bernoulli_distribution bit(p);
      std::vector<std::vector<int>> r(n, std::vector<int>(m));
      for (auto& row : r) {
        for (int& v : row) v = bit(rng);
      }
      return r;
    };
    const auto ra = draw(density(rng));
    const auto rb = draw(density(rng));
    const MeasurementMatrix a = MeasurementMatrix::from_rows(grid, ra);
    const MeasurementMatrix b = MeasurementMatrix::from_rows(grid, rb);
    const SimilarityResult s = measurement_similarity(a, b);
    // Both sides count mismatched bits; compare them as integers.
    const double cells = static_cast<double>(n * m);
    const auto from_frobenius = std::llround(s.frobenius * s.frobenius);
    const auto from_similarity = std::llround(cells * (1.0 - s.similarity));
    o.require(from_frobenius == from_similarity &&
                  from_frobenius == static_cast<long long>(s.mismatches),
              fmt::format("pair {}: {} vs {}", rep, from_frobenius, from_similarity));
    auto shuffled = ra;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double self = measurement_similarity(a, MeasurementMatrix::from_rows(grid, shuffled)).similarity;
    o.require(self == 1.0, fmt::format("pair {}: permuted similarity {}", rep, self));
    if (!o.pass) break;
  }
  if (o.pass) o.detail = fmt::format("{} pairs consistent, permuted copies score 1", kC8Pairs);
  return o;
}

SimulationPlan scale_plan(std::uint64_t seed, double shift) {
  SimulationPlan plan;
  plan.seed = seed;
  plan.design = full_design(kC9Subjects);
  plan.design.keep_probability = {0.55};
  plan.design.dropout_hazard = {0.02};
  for (std::size_t k = 0; k < 7; ++k) {
    ContinuousModel c;
    c.variable = fmt::format("c{}", k);
    c.mean_fn = {{50.0 + 10.0 * static_cast<double>(k) + shift}, 2.0 + static_cast<double>(k), 24.0, 0.0};
    c.nugget_var = 0.5 + 0.1 * static_cast<double>(k);
    c.serial_var = 2.0;
    c.serial_range = 2.0 + static_cast<double>(k);
    c.intercept_var = 1.0;
    plan.variables.emplace_back(c);
  }
  for (std::size_t k = 0; k < kC9Variables - 7; ++k) {
    DiscreteModel d;
    d.variable = fmt::format("d{}", k);
    d.classes = {"low", "mid", "high"};
    d.transition = {{0.8, 0.15, 0.05}, {0.1, 0.8, 0.1}, {0.05, 0.15, 0.8}};
    d.initial = {0.3, 0.4, 0.3};
    plan.variables.emplace_back(d);
  }
  return plan;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<fs::path> tree(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome criterion9() {
  Outcome o;
  const fs::path work = fs::temp_directory_path() / fmt::format("tempfid_acceptance_{}", ::getpid());
  fs::create_directories(work);
  {
    std::ofstream orig(work / "original.csv");
    write_long_table(orig, simulate(scale_plan(901, 0.0)));
    std::ofstream syn(work / "synthetic.csv");
    write_long_table(syn, simulate(scale_plan(902, 0.5)));
  }
  // Identical command lines: the output root is part of the run id.
  std::vector<double> seconds;
  for (const char* run : {"a", "b"}) {
    const fs::path log = work / (std::string(run) + ".log");
    const std::string cmd = fmt::format(
        "{} evaluate --original {} --synthetic {} --out {} --seed 42 > {} 2>&1", TEMPFID_CLI_PATH,
        (work / "original.csv").string(), (work / "synthetic.csv").string(), (work / "out").string(),
        log.string());
    const auto t0 = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    o.require(status == 0, fmt::format("run {} exited with {}: {}", run, status, slurp(log)));
    if (fs::exists(work / "out")) fs::rename(work / "out", work / run);
  }
  std::size_t files = 0;
  if (o.pass) {
    const auto ta = tree(work / "a");
    const auto tb = tree(work / "b");
    o.require(ta == tb, "output trees differ");
    std::size_t differing = 0;
    for (const auto& f : ta) {
      if (slurp(work / "a" / f) != slurp(work / "b" / f)) ++differing;
    }
    o.require(differing == 0, fmt::format("{} files differ", differing));
    o.require(ta.size() > kC9Variables * 10, fmt::format("only {} files written", ta.size()));
    files = ta.size();
  }
  for (const double s : seconds) o.require(s < kC9Seconds, fmt::format("run took {:.0f} s", s));
  o.detail = fmt::format("{} files byte-identical, runs took {:.1f} s and {:.1f} s", files,
                         seconds.at(0), seconds.size() > 1 ? seconds[1] : 0.0) +
             (o.pass ? "" : "; " + o.detail);
  std::error_code ec;
  fs::remove_all(work, ec);
  return o;
}

Outcome criterion10() {
  Outcome o;
  ContinuousModel m;
  m.mean_fn.poly = {10.0};
  m.intercept_var = 1.0;
  const LongDataset base = simulate_continuous(m, full_design(kC10Subjects), 1001);
  std::mt19937_64 rng(1002);
  std::normal_distribution<double> noise(0.0, std::sqrt(kC10Noise));
  LongDataset::Builder b(base.specs());
  for (const auto& obs : base.observations()) {
    Observation noisy = obs;
    noisy.value = std::get<double>(obs.value) + noise(rng);
    b.add(noisy);
  }
  const LongDataset distorted = std::move(b).build();
  const ComparisonReport r = evaluate(pair_datasets(base, distorted), structure_options());
  const auto& sm = r.variables.at(0).smoothed.at(0);
  if (!sm.decomposition || !sm.mean) {
    o.require(false, "missing metrics");
    return o;
  }
  const double shift = sm.decomposition->synthetic.nugget - sm.decomposition->original.nugget;
  const double mean_gap = max_abs_diff(sm.mean->original.values, sm.mean->synthetic.values);
  o.require(shift >= kC10NuggetShare * kC10Noise, fmt::format("nugget moved by {:.4f}", shift));
  o.require(mean_gap <= kC10MeanTol, fmt::format("mean profile moved by {:.4f}", mean_gap));
  o.detail = fmt::format("nugget +{:.3f} for injected {:.2f}, mean profile within {:.4f}", shift,
                         kC10Noise, mean_gap) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
  double budget_seconds;  // 0 = no time limit in the criterion
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "self-comparison identity", criterion1, kC1Seconds},
      {2, "assignment oracle", criterion2, kC2Seconds},
      {3, "variogram decomposition recovery", criterion3, kC3Seconds},
      {4, "random-intercept degeneracy", criterion4, 0},
      {5, "transition recovery", criterion5, 0},
      {6, "rank-order telescoping", criterion6, 0},
      {7, "KL properties", criterion7, 0},
      {8, "measurement-structure consistency", criterion8, 0},
      {9, "protocol determinism and scale", criterion9, 0},
      {10, "sensitivity sanity", criterion10, 0},
  };
  std::set<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.insert(std::atoi(argv[k]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = fmt::format("exception: {}", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_seconds > 0 && secs >= c.budget_seconds) {
      out.pass = false;
      out.detail += fmt::format("; exceeded {:.0f} s budget", c.budget_seconds);
    }
    if (!out.pass) ++failed;
    fmt::print("criterion {:>2} {} {}: {} [{:.2f} s]\n", c.id, out.pass ? "PASS" : "FAIL", c.name,
               out.detail, secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
