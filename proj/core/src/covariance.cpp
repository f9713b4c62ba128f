#include "tempfid/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "tempfid/errors.hpp"

namespace tempfid {

ProfileSeries variance_profile(const LongDataset& dataset, const VariableId& variable,
                               const TimeGrid& grid, Bandwidth h) {
  detail::require_kind(dataset, variable, VariableKind::continuous, "variance profile");
  const PooledSample sample(dataset.series(variable));
  if (sample.empty()) throw DataError(fmt::format("no data for variable '{}'", variable));
  ProfileSeries out{"variance", grid, {"variance"}, {}, h.value(), {}, {}};
  for (const double t : grid.points()) {
    const auto m = sample.moments(t, h);
    out.values.push_back(m.variance);
    out.ess.push_back(m.ess);
  }
  return out;
}

std::vector<double> default_lags(const TimeGrid& grid) {
  const double half_span = (grid.t_max() - grid.t_min()) / 2.0;
  std::vector<double> lags;
  for (std::size_t m = 1;; ++m) {
    const double u = static_cast<double>(m) * grid.step();
    if (u > half_span && !lags.empty()) break;
    lags.push_back(u);
  }
  return lags;
}

VariogramSeries variogram(const LongDataset& dataset, const VariableId& variable,
                          std::span<const double> lags, Bandwidth h) {
  detail::require_kind(dataset, variable, VariableKind::continuous, "variogram");
  if (lags.empty()) throw ConfigError("variogram needs at least one lag");
  for (const double u : lags) {
    if (!(u > 0.0) || !std::isfinite(u)) throw ConfigError("variogram lags must be positive");
  }
  const auto all_series = dataset.series(variable);
  const PooledSample sample(all_series);

  // Kernel mean at each distinct observation time.
  const auto distinct = sample.distinct_times();
  std::vector<double> mu(distinct.size());
  for (std::size_t u = 0; u < distinct.size(); ++u) mu[u] = sample.mean(distinct[u], h);
  const auto mean_at = [&](double t) {
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), t);
    return mu[static_cast<std::size_t>(it - distinct.begin())];
  };

  // Aggregate squared residual differences by pair gap; the kernel depends
  // on the gap only.
  std::unordered_map<double, std::pair<double, double>> by_gap;  // gap -> (count, sum sq diff)
  std::size_t pairs = 0;
  std::vector<double> residual;
  for (const Series& s : all_series) {
    if (s.size() < 2) continue;
    residual.resize(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) residual[k] = s.values[k] - mean_at(s.times[k]);
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      for (std::size_t l = k + 1; l < s.size(); ++l) {
        const double d = residual[k] - residual[l];
        auto& slot = by_gap[s.times[l] - s.times[k]];
        slot.first += 1.0;
        slot.second += d * d;
      }
    }
    pairs += s.size() * (s.size() - 1) / 2;
  }
  if (pairs == 0) {
    throw DataError(fmt::format("variogram undefined for '{}': no subject has two observations",
                                variable));
  }
  std::vector<double> gaps;
  gaps.reserve(by_gap.size());
  for (const auto& [gap, unused] : by_gap) gaps.push_back(gap);
  std::sort(gaps.begin(), gaps.end());

  VariogramSeries out;
  out.lags.assign(lags.begin(), lags.end());
  out.bandwidth = h.value();
  out.pair_count = pairs;
  const double two_h2 = 2.0 * h.value() * h.value();
  for (const double u : lags) {
    double d2_min = std::numeric_limits<double>::infinity();
    for (const double g : gaps) d2_min = std::min(d2_min, (u - g) * (u - g));
    double mass = 0.0;
    double acc = 0.0;
    for (const double g : gaps) {
      const auto& [count, sum_sq] = by_gap.at(g);
      const double k = std::exp(-((u - g) * (u - g) - d2_min) / two_h2);
      mass += k * count;
      acc += k * sum_sq;
    }
    out.gamma.push_back(0.5 * acc / mass);
  }
  return out;
}

VarianceDecomposition decompose_variance(const VariogramSeries& vg, const ProfileSeries& variance) {
  if (vg.lags.empty()) throw DataError("empty variogram");
  VarianceDecomposition out;
  if (vg.lags.size() >= 2) {
    const double u1 = vg.lags[0];
    const double u2 = vg.lags[1];
    const double slope = (vg.gamma[1] - vg.gamma[0]) / (u2 - u1);
    out.nugget = std::max(0.0, vg.gamma[0] - slope * u1);
  } else {
    out.nugget = vg.gamma[0];
  }
  const std::size_t top = std::max<std::size_t>(1, (vg.lags.size() + 3) / 4);
  const std::size_t start = vg.lags.size() - top;
  out.sill = std::accumulate(vg.gamma.begin() + static_cast<std::ptrdiff_t>(start), vg.gamma.end(),
                             0.0) /
             static_cast<double>(top);
  const auto var = variance.component(0);
  out.total = var.empty() ? 0.0 : std::accumulate(var.begin(), var.end(), 0.0) /
                                      static_cast<double>(var.size());
  out.between_subject = out.total - out.sill;
  return out;
}

std::size_t quantile_bin(double x, std::span<const double> quantiles) {
  std::size_t bin = 1;
  for (const double q : quantiles) {
    if (x > q) ++bin;
  }
  return bin;
}

double rank_variability(std::span<const std::size_t> bins, std::size_t levels) {
  if (bins.size() < 2) throw DataError("rank-order variability needs two observations");
  if (levels == 0) throw ConfigError("rank-order variability needs at least one quantile level");
  std::int64_t sum = 0;
  for (std::size_t k = 0; k + 1 < bins.size(); ++k) {
    sum += static_cast<std::int64_t>(bins[k + 1]) - static_cast<std::int64_t>(bins[k]);
  }
  return static_cast<double>(sum) /
         (static_cast<double>(levels) * static_cast<double>(bins.size() - 1));
}

RankVariabilityDistribution rank_order_variability(const LongDataset& dataset,
                                                   const VariableId& variable, const TimeGrid& grid,
                                                   Bandwidth h, std::span<const double> levels) {
  const ProfileSeries quantiles = quantile_profile(dataset, variable, grid, h, levels);
  RankVariabilityDistribution out;
  out.levels = levels.size();
  const auto all_series = dataset.series(variable);
  std::vector<std::size_t> bins;
  std::vector<double> row(levels.size());
  for (std::size_t i = 0; i < all_series.size(); ++i) {
    const Series& s = all_series[i];
    if (s.size() < 2) {
      if (!s.empty()) ++out.excluded;
      continue;
    }
    bins.clear();
    for (std::size_t k = 0; k < s.size(); ++k) {
      const std::size_t g = grid.nearest(s.times[k]);
      for (std::size_t q = 0; q < levels.size(); ++q) row[q] = quantiles.at(g, q);
      bins.push_back(quantile_bin(s.values[k], row));
    }
    out.subjects.push_back(dataset.subjects()[i]);
    out.values.push_back(rank_variability(bins, levels.size()));
  }
  return out;
}

TransitionProfile transition_profile(const LongDataset& dataset, const VariableId& variable,
                                     const TimeGrid& grid, Bandwidth h,
                                     const TransitionOptions& options) {
  detail::require_kind(dataset, variable, VariableKind::discrete, "transition profile");
  const VariableSpec& spec = dataset.spec(variable);
  const std::size_t L = spec.classes.size();

  struct Pair {
    double start;
    double end;
    std::size_t from;
    std::size_t to;
  };
  std::vector<Pair> pairs;
  for (const Series& s : dataset.series(variable)) {
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      if (options.max_gap && s.times[k + 1] - s.times[k] > *options.max_gap) continue;
      pairs.push_back({s.times[k], s.times[k + 1], s.code(k), s.code(k + 1)});
    }
  }
  if (pairs.empty()) {
    throw DataError(fmt::format("transition profile undefined for '{}': no consecutive pairs",
                                variable));
  }

  TransitionProfile out;
  out.grid = grid;
  out.classes = spec.classes;
  out.bandwidth = h.value();
  out.probability.assign(grid.size() * L * L, std::numeric_limits<double>::quiet_NaN());
  out.source_mass.assign(grid.size() * L, 0.0);
  std::vector<double> flow(L * L);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double t = grid[g];
    std::fill(flow.begin(), flow.end(), 0.0);
    for (const Pair& p : pairs) {
      // The pair is weighted by its farther endpoint: K_h(t, t - d).
      const double d = std::max(std::abs(t - p.start), std::abs(t - p.end));
      flow[p.from * L + p.to] += gaussian_kernel(t, t - d, h);
    }
    for (std::size_t a = 0; a < L; ++a) {
      double mass = 0.0;
      for (std::size_t b = 0; b < L; ++b) mass += flow[a * L + b];
      out.source_mass[g * L + a] = mass;
      if (mass > 0.0) {
        for (std::size_t b = 0; b < L; ++b) {
          out.probability[(g * L + a) * L + b] = flow[a * L + b] / mass;
        }
      }
    }
  }
  return out;
}

}  // namespace tempfid
