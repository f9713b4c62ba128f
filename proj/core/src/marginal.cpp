#include "tempfid/marginal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "number_format.hpp"
#include "tempfid/errors.hpp"

namespace tempfid {

namespace {

constexpr std::array<double, 5> kDefaultLevels{0.05, 0.25, 0.50, 0.75, 0.95};

std::string level_name(double q) { return "q" + detail::format_number(q); }

PooledSample pooled(const LongDataset& dataset, const VariableId& variable) {
  PooledSample sample(dataset.series(variable));
  if (sample.empty()) throw DataError(fmt::format("no data for variable '{}'", variable));
  return sample;
}

}  // namespace

namespace detail {

void require_kind(const LongDataset& dataset, const VariableId& variable, VariableKind kind,
                  std::string_view metric) {
  const VariableSpec& spec = dataset.spec(variable);
  if (spec.kind != kind) {
    throw KindError(fmt::format("{} needs a {} variable; '{}' is {}", metric, to_string(kind),
                                variable, to_string(spec.kind)));
  }
}

}  // namespace detail

std::vector<double> ProfileSeries::component(std::size_t c) const {
  std::vector<double> out(points());
  for (std::size_t t = 0; t < points(); ++t) out[t] = at(t, c);
  return out;
}

std::span<const double> default_quantile_levels() { return kDefaultLevels; }

void validate_quantile_levels(std::span<const double> levels) {
  if (levels.empty()) throw ConfigError("at least one quantile level is required");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] > 0.0 && levels[k] < 1.0)) {
      throw ConfigError(fmt::format("quantile level {} is outside (0, 1)", levels[k]));
    }
    if (k > 0 && !(levels[k] > levels[k - 1])) {
      throw ConfigError("quantile levels must be strictly increasing");
    }
  }
}

ProfileSeries mean_profile(const LongDataset& dataset, const VariableId& variable,
                           const TimeGrid& grid, Bandwidth h) {
  detail::require_kind(dataset, variable, VariableKind::continuous, "mean profile");
  const PooledSample sample = pooled(dataset, variable);
  ProfileSeries out{"mean", grid, {"mean"}, {}, h.value(), {}, {}};
  out.values.reserve(grid.size());
  out.ess.reserve(grid.size());
  for (const double t : grid.points()) {
    const auto m = sample.moments(t, h);
    out.values.push_back(m.mean);
    out.ess.push_back(m.ess);
  }
  return out;
}

ProfileSeries quantile_profile(const LongDataset& dataset, const VariableId& variable,
                               const TimeGrid& grid, Bandwidth h, std::span<const double> levels) {
  detail::require_kind(dataset, variable, VariableKind::continuous, "quantile profile");
  validate_quantile_levels(levels);
  const PooledSample sample = pooled(dataset, variable);
  ProfileSeries out{"quantile", grid, {}, {}, h.value(), {levels.begin(), levels.end()}, {}};
  for (const double q : levels) out.components.push_back(level_name(q));
  out.values.reserve(grid.size() * levels.size());
  for (const double t : grid.points()) {
    const WeightedEcdf f = sample.ecdf(t, h);
    for (const double q : levels) out.values.push_back(weighted_quantile(f, q));
  }
  return out;
}

ProfileSeries class_profile(const LongDataset& dataset, const VariableId& variable,
                            const TimeGrid& grid, Bandwidth h) {
  detail::require_kind(dataset, variable, VariableKind::discrete, "class profile");
  const VariableSpec& spec = dataset.spec(variable);
  const auto all_series = dataset.series(variable);
  const std::size_t L = spec.classes.size();

  // Aggregate per distinct time: counts of each class.
  std::vector<std::pair<double, std::size_t>> points;
  for (const Series& s : all_series) {
    for (std::size_t k = 0; k < s.size(); ++k) points.emplace_back(s.times[k], s.code(k));
  }
  if (points.empty()) throw DataError(fmt::format("no data for variable '{}'", variable));
  std::sort(points.begin(), points.end());
  std::vector<double> times;
  std::vector<double> counts;  // times.size() x L
  for (const auto& [t, c] : points) {
    if (times.empty() || times.back() != t) {
      times.push_back(t);
      counts.resize(counts.size() + L, 0.0);
    }
    counts[(times.size() - 1) * L + c] += 1.0;
  }

  ProfileSeries out{"class", grid, spec.classes, {}, h.value(), {}, {}};
  out.values.assign(grid.size() * L, 0.0);
  out.ess.reserve(grid.size());
  const double two_h2 = 2.0 * h.value() * h.value();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double t = grid[g];
    double d2_min = std::numeric_limits<double>::infinity();
    for (const double u : times) d2_min = std::min(d2_min, (t - u) * (t - u));
    double total = 0.0;
    double sum_sq = 0.0;
    std::vector<double> mass(L, 0.0);
    for (std::size_t u = 0; u < times.size(); ++u) {
      const double k = std::exp(-((t - times[u]) * (t - times[u]) - d2_min) / two_h2);
      double n_u = 0.0;
      for (std::size_t c = 0; c < L; ++c) {
        mass[c] += k * counts[u * L + c];
        n_u += counts[u * L + c];
      }
      total += k * n_u;
      sum_sq += k * k * n_u;
    }
    for (std::size_t c = 0; c < L; ++c) out.values[g * L + c] = mass[c] / total;
    out.ess.push_back(total * total / sum_sq);
  }
  return out;
}

std::vector<OutlierPoint> outlier_overlay(const LongDataset& dataset, const VariableId& variable,
                                          const TimeGrid& grid, Bandwidth h, double q_low,
                                          double q_high) {
  const std::array<double, 2> levels{q_low, q_high};
  const ProfileSeries bands = quantile_profile(dataset, variable, grid, h, levels);
  std::vector<OutlierPoint> out;
  const auto all_series = dataset.series(variable);
  for (std::size_t i = 0; i < all_series.size(); ++i) {
    const Series& s = all_series[i];
    for (std::size_t k = 0; k < s.size(); ++k) {
      const std::size_t g = grid.nearest(s.times[k]);
      const double x = s.values[k];
      if (x < bands.at(g, 0)) {
        out.push_back({dataset.subjects()[i], s.times[k], x, false});
      } else if (x > bands.at(g, 1)) {
        out.push_back({dataset.subjects()[i], s.times[k], x, true});
      }
    }
  }
  return out;
}

ProfileSeries subjects_at_risk(const LongDataset& dataset, const VariableId& variable,
                               const TimeGrid& grid) {
  const auto all_series = dataset.series(variable);
  std::vector<double> count(grid.size(), 0.0);
  std::size_t observed = 0;
  for (const Series& s : all_series) {
    if (s.empty()) continue;
    ++observed;
    // Series are time-sorted, so the first and last snapped points bound follow-up.
    const std::size_t first = grid.nearest(s.times.front());
    const std::size_t last = grid.nearest(s.times.back());
    for (std::size_t g = first; g <= last; ++g) count[g] += 1.0;
  }
  ProfileSeries out{"at_risk", grid, {"subjects", "proportion"}, {}, std::nullopt, {}, {}};
  out.values.reserve(grid.size() * 2);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out.values.push_back(count[g]);
    out.values.push_back(observed > 0 ? count[g] / static_cast<double>(observed) : 0.0);
  }
  return out;
}

}  // namespace tempfid
