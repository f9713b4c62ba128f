#include "tempfid/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tempfid/errors.hpp"
#include "tempfid/random.hpp"

namespace tempfid {

void EvaluationOptions::validate() const {
  if (bandwidths.empty()) throw ConfigError("at least one bandwidth is required");
  for (const double h : bandwidths) (void)Bandwidth{h};
  if (variogram_bandwidth) (void)Bandwidth{*variogram_bandwidth};
  validate_quantile_levels(quantile_levels);
  if (protocol.iterations == 0) throw ConfigError("iterations must be at least 1");
  if (protocol.subsample_size == 0) throw ConfigError("subsample size must be at least 1");
  if (!(protocol.epsilon >= 0.0) || !std::isfinite(protocol.epsilon)) {
    throw ConfigError("epsilon must be a finite non-negative number");
  }
  if (grid_step && !(*grid_step > 0.0 && std::isfinite(*grid_step))) {
    throw ConfigError("grid step must be a positive number");
  }
  if (variogram_lags) {
    if (variogram_lags->empty()) throw ConfigError("variogram lag list is empty");
    for (const double u : *variogram_lags) {
      if (!(u > 0.0) || !std::isfinite(u)) throw ConfigError("variogram lags must be positive");
    }
  }
  if (transitions.max_gap && !(*transitions.max_gap > 0.0)) {
    throw ConfigError("transition max gap must be > 0");
  }
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
}

std::uint64_t variable_seed(std::uint64_t master, const VariableId& variable) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const unsigned char c : variable) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return derive_seed(master, hash);
}

namespace {

struct Outcome {
  std::optional<VariableReport> report;
  std::vector<MetricFailure> failures;
};

class VariableRun {
 public:
  VariableRun(const DatasetPair& pair, const EvaluationOptions& options, VariableId variable)
      : pair_(pair), options_(options), variable_(std::move(variable)) {}

  Outcome run() {
    Outcome out;
    failures_ = &out.failures;
    const UnifiedSpec& unified = pair_.unified.at(variable_);
    const double step = options_.grid_step.value_or(unified.spec.grid_step);
    std::optional<TimeGrid> grid;
    attempt("grid", [&] {
      grid = build_time_grid(pair_.original.times(variable_), pair_.synthetic.times(variable_),
                             step);
    });
    if (!grid) return out;

    VariableReport report;
    report.variable = variable_;
    report.kind = unified.spec.kind;
    report.grid = *grid;
    report.classes = unified.spec.classes;
    report.synthetic_only_classes = unified.synthetic_only();
    report.absent_in_synthetic = unified.absent_in_synthetic();
    report.seed = variable_seed(options_.seed, variable_);

    for (const double h : options_.bandwidths) {
      report.smoothed.push_back(smoothed(*grid, Bandwidth{h}, report.kind));
    }
    if (report.kind == VariableKind::continuous) {
      report.trajectories = trajectories(*grid, report.seed);
    }
    report.at_risk = paired("at_risk", [&](const LongDataset& ds) {
      return subjects_at_risk(ds, variable_, *grid);
    });
    if (options_.measurement) {
      attempt("measurement", [&] {
        ProtocolOptions protocol = options_.protocol;
        protocol.seed = derive_seed(report.seed, 0);
        report.measurement = subsample_protocol(pair_, variable_, *grid, protocol);
      });
    }
    out.report = std::move(report);
    return out;
  }

 private:
  template <class F>
  void attempt(std::string_view metric, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      spdlog::warn("{}: {} failed: {}", variable_, metric, e.what());
      failures_->push_back({variable_, std::string(metric), e.what()});
    }
  }

  template <class F>
  auto paired(std::string_view metric, F&& compute)
      -> std::optional<Paired<decltype(compute(std::declval<const LongDataset&>()))>> {
    using T = decltype(compute(std::declval<const LongDataset&>()));
    std::optional<Paired<T>> out;
    attempt(metric, [&] { out = Paired<T>{compute(pair_.original), compute(pair_.synthetic)}; });
    return out;
  }

  SmoothedMetrics smoothed(const TimeGrid& grid, Bandwidth h, VariableKind kind) {
    SmoothedMetrics m;
    m.bandwidth = h.value();
    const std::string suffix = options_.bandwidths.size() > 1 ? fmt::format(" (h={})", h.value())
                                                              : std::string{};
    const auto name = [&suffix](std::string_view metric) { return std::string(metric) + suffix; };
    if (kind == VariableKind::discrete) {
      m.classes = paired(name("class_profile"), [&](const LongDataset& ds) {
        return class_profile(ds, variable_, grid, h);
      });
      m.transitions = paired(name("transitions"), [&](const LongDataset& ds) {
        return transition_profile(ds, variable_, grid, h, options_.transitions);
      });
      return m;
    }
    const std::span<const double> levels = options_.quantile_levels;
    m.mean = paired(name("mean"), [&](const LongDataset& ds) {
      return mean_profile(ds, variable_, grid, h);
    });
    m.quantiles = paired(name("quantiles"), [&](const LongDataset& ds) {
      return quantile_profile(ds, variable_, grid, h, levels);
    });
    m.outliers = paired(name("outliers"), [&](const LongDataset& ds) {
      return outlier_overlay(ds, variable_, grid, h, levels.front(), levels.back());
    });
    m.variance = paired(name("variance"), [&](const LongDataset& ds) {
      return variance_profile(ds, variable_, grid, h);
    });
    const std::vector<double> lags = options_.variogram_lags.value_or(default_lags(grid));
    const Bandwidth hv = options_.variogram_bandwidth ? Bandwidth{*options_.variogram_bandwidth} : h;
    m.variogram = paired(name("variogram"), [&](const LongDataset& ds) {
      return variogram(ds, variable_, lags, hv);
    });
    if (m.variogram && m.variance) {
      m.decomposition = Paired<VarianceDecomposition>{
          decompose_variance(m.variogram->original, m.variance->original),
          decompose_variance(m.variogram->synthetic, m.variance->synthetic)};
    }
    m.rank_order = paired(name("rank_order"), [&](const LongDataset& ds) {
      return rank_order_variability(ds, variable_, grid, h, levels);
    });
    return m;
  }

  std::optional<Paired<TrajectoryPanel>> trajectories(const TimeGrid& grid, std::uint64_t seed) {
    std::optional<Paired<TrajectoryPanel>> out;
    attempt("trajectories", [&] {
      const Bandwidth h{options_.bandwidths.front()};
      const auto strata = [&](const LongDataset& ds, const std::optional<StratumAssignment>& given) {
        return given ? *given : baseline_strata(ds, variable_, grid, h, options_.quantile_levels);
      };
      out = Paired<TrajectoryPanel>{
          sample_trajectories(pair_.original, variable_, strata(pair_.original, options_.original_strata),
                              options_.per_stratum, derive_seed(seed, 1)),
          sample_trajectories(pair_.synthetic, variable_,
                              strata(pair_.synthetic, options_.synthetic_strata),
                              options_.per_stratum, derive_seed(seed, 2))};
    });
    return out;
  }

  const DatasetPair& pair_;
  const EvaluationOptions& options_;
  VariableId variable_;
  std::vector<MetricFailure>* failures_ = nullptr;
};

std::vector<VariableId> selected_variables(const DatasetPair& pair, const EvaluationOptions& options) {
  for (const auto& v : options.include) {
    if (!pair.unified.contains(v)) {
      throw ConfigError(fmt::format("selected variable '{}' is not present in both datasets", v));
    }
  }
  std::vector<VariableId> out;
  for (const auto& [id, unified] : pair.unified) {
    if (!options.include.empty() && !options.include.contains(id)) continue;
    if (options.exclude.contains(id)) continue;
    out.push_back(id);
  }
  return out;
}

}  // namespace

ComparisonReport evaluate(const DatasetPair& pair, const EvaluationOptions& options) {
  options.validate();
  const std::vector<VariableId> variables = selected_variables(pair, options);
  std::vector<Outcome> outcomes(variables.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr internal;
  std::mutex internal_mutex;
  const auto worker = [&] {
    for (std::size_t k = next++; k < variables.size(); k = next++) {
      try {
        outcomes[k] = VariableRun(pair, options, variables[k]).run();
      } catch (...) {
        const std::lock_guard lock(internal_mutex);
        if (!internal) internal = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(options.jobs, variables.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (internal) std::rethrow_exception(internal);

  ComparisonReport report;
  report.options = options;
  report.original_only = pair.original_only;
  report.synthetic_only = pair.synthetic_only;
  for (auto& outcome : outcomes) {
    if (outcome.report) report.variables.push_back(std::move(*outcome.report));
    for (auto& f : outcome.failures) report.failures.push_back(std::move(f));
  }
  std::stable_sort(report.failures.begin(), report.failures.end(),
                   [](const MetricFailure& a, const MetricFailure& b) {
                     return std::tie(a.variable, a.metric) < std::tie(b.variable, b.metric);
                   });
  return report;
}

}  // namespace tempfid
