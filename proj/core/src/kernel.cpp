#include "tempfid/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "tempfid/errors.hpp"

namespace tempfid {

Bandwidth::Bandwidth(double h) : h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError(fmt::format("bandwidth must be positive and finite, got {}", h));
  }
}

double gaussian_kernel(double t, double t_prime, Bandwidth h) {
  const double d = t - t_prime;
  const double hv = h.value();
  return std::exp(-(d * d) / (2.0 * hv * hv)) / hv;
}

namespace {

// exp(-(d^2 - d_min^2) / 2h^2): kernel up to a factor common to all points.
inline double relative_kernel(double d2, double d2_min, double two_h2) {
  return std::exp(-(d2 - d2_min) / two_h2);
}

}  // namespace

std::vector<double> normalized_weights(double t, std::span<const double> times, Bandwidth h) {
  if (times.empty()) throw DataError("no data for variable");
  const double two_h2 = 2.0 * h.value() * h.value();
  double d2_min = std::numeric_limits<double>::infinity();
  for (const double s : times) d2_min = std::min(d2_min, (t - s) * (t - s));
  std::vector<double> w(times.size());
  double total = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    w[k] = relative_kernel((t - times[k]) * (t - times[k]), d2_min, two_h2);
    total += w[k];
  }
  for (double& x : w) x /= total;
  return w;
}

WeightVector normalized_weights(double t, std::span<const Series> series, Bandwidth h) {
  WeightVector out;
  std::vector<double> times;
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t k = 0; k < series[i].size(); ++k) {
      out.subject.push_back(i);
      out.observation.push_back(k);
      times.push_back(series[i].times[k]);
    }
  }
  out.weight = normalized_weights(t, times, h);
  return out;
}

double effective_sample_size(std::span<const double> weights) {
  double s = 0.0;
  for (const double w : weights) s += w * w;
  return s > 0.0 ? 1.0 / s : 0.0;
}

WeightedEcdf::WeightedEcdf(std::vector<double> values, std::vector<double> cumulative)
    : values_(std::move(values)), cumulative_(std::move(cumulative)) {}

double WeightedEcdf::operator()(double z) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), z);
  if (it == values_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

WeightedEcdf weighted_ecdf(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw DataError("values and weights differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> z;
  std::vector<double> f;
  double running = 0.0;
  for (const std::size_t k : order) {
    running += weights[k];
    if (!z.empty() && z.back() == values[k]) {
      f.back() = running;
    } else {
      z.push_back(values[k]);
      f.push_back(running);
    }
  }
  return WeightedEcdf(std::move(z), std::move(f));
}

double weighted_quantile(const WeightedEcdf& ecdf, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw ConfigError(fmt::format("quantile level must lie in (0, 1), got {}", q));
  }
  if (ecdf.empty()) throw DataError("quantile of an empty distribution");
  const auto f = ecdf.cumulative();
  const auto it = std::lower_bound(f.begin(), f.end(), q);
  // Accumulated rounding can leave F(max) a hair below q; the max is then the answer.
  if (it == f.end()) return ecdf.values().back();
  return ecdf.values()[static_cast<std::size_t>(it - f.begin())];
}

// ---------------------------------------------------------------------------

PooledSample::PooledSample(std::span<const Series> series) {
  struct Point {
    double time;
    double value;
  };
  std::vector<Point> points;
  for (const Series& s : series) {
    for (std::size_t k = 0; k < s.size(); ++k) points.push_back({s.times[k], s.values[k]});
  }
  total_ = points.size();
  std::stable_sort(points.begin(), points.end(),
                   [](const Point& a, const Point& b) { return a.time < b.time; });

  std::vector<std::size_t> slot_of(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Point& p = points[k];
    if (times_.empty() || times_.back() != p.time) {
      times_.push_back(p.time);
      counts_.push_back(0.0);
      means_.push_back(0.0);
      m2_.push_back(0.0);
    }
    const std::size_t u = times_.size() - 1;
    // Welford update; exact for constant data.
    counts_[u] += 1.0;
    const double delta = p.value - means_[u];
    means_[u] += delta / counts_[u];
    m2_[u] += delta * (p.value - means_[u]);
    slot_of[k] = u;
  }

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].value < points[b].value; });
  sorted_values_.reserve(order.size());
  sorted_slot_.reserve(order.size());
  for (const std::size_t k : order) {
    sorted_values_.push_back(points[k].value);
    sorted_slot_.push_back(slot_of[k]);
  }
}

std::vector<double> PooledSample::time_mass(double t, Bandwidth h) const {
  if (empty()) throw DataError("no data for variable");
  const double two_h2 = 2.0 * h.value() * h.value();
  double d2_min = std::numeric_limits<double>::infinity();
  for (const double u : times_) d2_min = std::min(d2_min, (t - u) * (t - u));
  std::vector<double> mass(times_.size());
  double total = 0.0;
  for (std::size_t u = 0; u < times_.size(); ++u) {
    mass[u] = counts_[u] * relative_kernel((t - times_[u]) * (t - times_[u]), d2_min, two_h2);
    total += mass[u];
  }
  for (double& m : mass) m /= total;
  return mass;
}

double PooledSample::mean(double t, Bandwidth h) const { return moments(t, h).mean; }

PooledSample::Moments PooledSample::moments(double t, Bandwidth h) const {
  const std::vector<double> mass = time_mass(t, h);
  // Shifted accumulation: constant data reproduce the constant exactly.
  const double anchor = means_.front();
  double shift = 0.0;
  double sum_sq_weight = 0.0;
  for (std::size_t u = 0; u < mass.size(); ++u) {
    shift += mass[u] * (means_[u] - anchor);
    sum_sq_weight += mass[u] * mass[u] / counts_[u];
  }
  const double mu = anchor + shift;
  double var = 0.0;
  for (std::size_t u = 0; u < mass.size(); ++u) {
    const double d = means_[u] - mu;
    var += mass[u] * (m2_[u] / counts_[u] + d * d);
  }
  return {mu, var, sum_sq_weight > 0.0 ? 1.0 / sum_sq_weight : 0.0};
}

WeightedEcdf PooledSample::ecdf(double t, Bandwidth h) const {
  const std::vector<double> mass = time_mass(t, h);
  std::vector<double> per_obs(mass.size());
  for (std::size_t u = 0; u < mass.size(); ++u) per_obs[u] = mass[u] / counts_[u];
  std::vector<double> z;
  std::vector<double> f;
  double running = 0.0;
  for (std::size_t k = 0; k < sorted_values_.size(); ++k) {
    running += per_obs[sorted_slot_[k]];
    if (!z.empty() && z.back() == sorted_values_[k]) {
      f.back() = running;
    } else {
      z.push_back(sorted_values_[k]);
      f.push_back(running);
    }
  }
  return WeightedEcdf(std::move(z), std::move(f));
}

}  // namespace tempfid
