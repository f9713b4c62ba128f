#include "tempfid/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fmt/format.h>

#include "tempfid/errors.hpp"
#include "tempfid/random.hpp"

namespace tempfid {

double TrendFunction::operator()(double t) const {
  double value = 0.0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) value = value * t + *it;
  if (amplitude != 0.0) {
    value += amplitude * std::sin(2.0 * std::numbers::pi * (t - phase) / period);
  }
  return value;
}

std::string_view to_string(CorrelationKind kind) {
  return kind == CorrelationKind::exponential ? "exponential" : "gaussian";
}

CorrelationKind parse_correlation_kind(std::string_view text) {
  if (text == "exponential") return CorrelationKind::exponential;
  if (text == "gaussian") return CorrelationKind::gaussian;
  throw ConfigError(fmt::format("unknown correlation kind '{}' (expected exponential or gaussian)",
                                text));
}

namespace {

void require_variance(double v, std::string_view field) {
  if (!std::isfinite(v) || v < 0.0) throw ConfigError(fmt::format("{} must be >= 0", field));
}

void require_probability(double p, std::string_view field) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("{} must lie in [0, 1]", field));
}

void require_distribution(const std::vector<double>& p, std::size_t size, std::string_view field) {
  if (p.size() != size) {
    throw ConfigError(fmt::format("{} must have {} entries, got {}", field, size, p.size()));
  }
  double total = 0.0;
  for (const double x : p) {
    require_probability(x, field);
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError(fmt::format("{} must sum to 1 (sum is {})", field, total));
  }
}

}  // namespace

void ContinuousModel::validate() const {
  if (variable.empty()) throw ConfigError("variable name must not be empty");
  if (mean_fn.poly.empty()) throw ConfigError("mean.poly must have at least one coefficient");
  for (const double c : mean_fn.poly) {
    if (!std::isfinite(c)) throw ConfigError("mean.poly coefficients must be finite");
  }
  if (!std::isfinite(mean_fn.amplitude) || !std::isfinite(mean_fn.phase)) {
    throw ConfigError("mean.amplitude and mean.phase must be finite");
  }
  if (!(mean_fn.period > 0.0) || !std::isfinite(mean_fn.period)) {
    throw ConfigError("mean.period must be > 0");
  }
  require_variance(nugget_var, "nugget_var");
  require_variance(serial_var, "serial_var");
  require_variance(intercept_var, "intercept_var");
  if (!(serial_range > 0.0) || !std::isfinite(serial_range)) {
    throw ConfigError("serial_range must be > 0");
  }
}

double ContinuousModel::correlation(double lag) const {
  const double r = std::abs(lag) / serial_range;
  return serial_kind == CorrelationKind::exponential ? std::exp(-r) : std::exp(-r * r);
}

double ContinuousModel::variogram(double lag) const {
  return nugget_var + serial_var * (1.0 - correlation(lag));
}

void DiscreteModel::validate() const {
  if (variable.empty()) throw ConfigError("variable name must not be empty");
  if (classes.empty()) throw ConfigError("classes must not be empty");
  std::vector<ClassLabel> sorted = classes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("classes must be distinct");
  }
  if (transition.size() != classes.size()) {
    throw ConfigError(fmt::format("transition must have {} rows, got {}", classes.size(),
                                  transition.size()));
  }
  for (std::size_t a = 0; a < transition.size(); ++a) {
    require_distribution(transition[a], classes.size(), fmt::format("transition[{}]", a));
  }
  require_distribution(initial, classes.size(), "initial");
}

void ObservationDesign::validate() const {
  if (subjects == 0) throw ConfigError("subjects must be at least 1");
  const auto check = [this](const std::vector<double>& p, std::string_view field) {
    if (p.size() != 1 && p.size() != grid.size()) {
      throw ConfigError(fmt::format("{} must have 1 or {} entries, got {}", field, grid.size(),
                                    p.size()));
    }
    for (const double x : p) require_probability(x, field);
  };
  check(keep_probability, "keep_probability");
  check(dropout_hazard, "dropout_hazard");
}

double ObservationDesign::keep(std::size_t m) const {
  return keep_probability.size() == 1 ? keep_probability[0] : keep_probability[m];
}

double ObservationDesign::hazard(std::size_t m) const {
  return dropout_hazard.size() == 1 ? dropout_hazard[0] : dropout_hazard[m];
}

std::vector<SubjectId> simulated_subject_ids(std::size_t n) {
  const std::size_t width = std::max<std::size_t>(4, fmt::formatted_size("{}", n));
  std::vector<SubjectId> ids;
  ids.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) ids.push_back(fmt::format("S{:0{}}", i, width));
  return ids;
}

namespace {

// Last grid index still under follow-up.
std::size_t draw_dropout(const ObservationDesign& design, Rng& rng) {
  const std::size_t last = design.grid.size() - 1;
  for (std::size_t m = 0; m < last; ++m) {
    if (rng.bernoulli(design.hazard(m))) return m;
  }
  return last;
}

std::vector<std::size_t> draw_observed_points(const ObservationDesign& design, Rng& rng) {
  const std::size_t last = draw_dropout(design, rng);
  std::vector<std::size_t> points;
  for (std::size_t m = 0; m <= last; ++m) {
    if (rng.bernoulli(design.keep(m))) points.push_back(m);
  }
  return points;
}

class SerialFactor {
 public:
  explicit SerialFactor(const ContinuousModel& model) : model_(model) {}

  const Eigen::MatrixXd& lower(const std::vector<std::size_t>& points, const TimeGrid& grid) {
    if (points == points_ && factor_.rows() == static_cast<Eigen::Index>(points.size())) {
      return factor_;
    }
    points_ = points;
    const auto k = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd cov(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index l = 0; l < k; ++l) {
        cov(j, l) = model_.serial_var * model_.correlation(grid[points[j]] - grid[points[l]]);
      }
    }
    double jitter = 0.0;
    for (int attempt = 0; attempt < 20; ++attempt) {
      Eigen::MatrixXd work = cov;
      work.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(work);
      if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
        return factor_;
      }
      jitter = jitter == 0.0 ? 1e-12 * model_.serial_var : jitter * 10.0;
    }
    throw Error("serial covariance matrix is not positive definite");
  }

 private:
  const ContinuousModel& model_;
  std::vector<std::size_t> points_;
  Eigen::MatrixXd factor_;
};

VariableSpec continuous_spec(const VariableId& id, const TimeGrid& grid) {
  VariableSpec spec;
  spec.id = id;
  spec.kind = VariableKind::continuous;
  spec.grid_step = grid.step();
  return spec;
}

VariableSpec discrete_spec(const DiscreteModel& model, const TimeGrid& grid) {
  VariableSpec spec;
  spec.id = model.variable;
  spec.kind = VariableKind::discrete;
  spec.classes = model.classes;
  spec.grid_step = grid.step();
  return spec;
}

void add_continuous(const ContinuousModel& model, const ObservationDesign& design,
                    std::uint64_t seed, const std::vector<SubjectId>& ids,
                    LongDataset::Builder& builder) {
  SerialFactor factor(model);
  const double nu = std::sqrt(model.intercept_var);
  const double tau = std::sqrt(model.nugget_var);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    const std::vector<std::size_t> points = draw_observed_points(design, rng);
    if (points.empty()) continue;
    const double intercept = nu * rng.normal();
    Eigen::VectorXd serial = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(points.size()));
    if (model.serial_var > 0.0) {
      Eigen::VectorXd z(static_cast<Eigen::Index>(points.size()));
      for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
      serial = factor.lower(points, design.grid) * z;
    }
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double t = design.grid[points[k]];
      const double noise = tau * rng.normal();
      const double x = model.mean_fn(t) + intercept + serial[static_cast<Eigen::Index>(k)] + noise;
      builder.add({ids[i], model.variable, t, x});
    }
  }
}

std::size_t draw_class(std::span<const double> p, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p[c] <= 0.0) continue;
    cumulative += p[c];
    last_positive = c;
    if (u < cumulative) return c;
  }
  return last_positive;
}

void add_discrete(const DiscreteModel& model, const ObservationDesign& design, std::uint64_t seed,
                  const std::vector<SubjectId>& ids, LongDataset::Builder& builder) {
  const std::size_t g = design.grid.size();
  std::vector<std::size_t> chain(g);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    const std::vector<std::size_t> points = draw_observed_points(design, rng);
    if (points.empty()) continue;
    chain[0] = draw_class(model.initial, rng);
    for (std::size_t m = 1; m <= points.back(); ++m) {
      chain[m] = draw_class(model.transition[chain[m - 1]], rng);
    }
    for (const std::size_t m : points) {
      builder.add({ids[i], model.variable, design.grid[m], model.classes[chain[m]]});
    }
  }
}

LongDataset::Builder roster_builder(SpecMap specs, const std::vector<SubjectId>& ids) {
  LongDataset::Builder builder(std::move(specs));
  for (const auto& id : ids) builder.add_subject(id);
  return builder;
}

}  // namespace

LongDataset simulate_continuous(const ContinuousModel& model, const ObservationDesign& design,
                                std::uint64_t seed) {
  model.validate();
  design.validate();
  const auto ids = simulated_subject_ids(design.subjects);
  auto builder = roster_builder({{model.variable, continuous_spec(model.variable, design.grid)}}, ids);
  add_continuous(model, design, seed, ids, builder);
  return std::move(builder).build();
}

LongDataset simulate_discrete(const DiscreteModel& model, const ObservationDesign& design,
                              std::uint64_t seed) {
  model.validate();
  design.validate();
  const auto ids = simulated_subject_ids(design.subjects);
  auto builder = roster_builder({{model.variable, discrete_spec(model, design.grid)}}, ids);
  add_discrete(model, design, seed, ids, builder);
  return std::move(builder).build();
}

LongDataset apply_design(const LongDataset& dataset, const ObservationDesign& design,
                         std::uint64_t seed) {
  const auto& grid = design.grid;
  const std::vector<VariableId> variables = dataset.variables();
  auto builder = roster_builder(dataset.specs(), dataset.subjects());
  for (std::size_t i = 0; i < dataset.subject_count(); ++i) {
    Rng rng(derive_seed(seed, i));
    const std::size_t last = draw_dropout(design, rng);
    for (const auto& variable : variables) {
      const VariableSpec& spec = dataset.spec(variable);
      const Series& s = dataset.series(variable)[i];
      for (std::size_t k = 0; k < s.size(); ++k) {
        const std::size_t m = grid.nearest(s.times[k]);
        if (m > last || !rng.bernoulli(design.keep(m))) continue;
        Value value = spec.kind == VariableKind::continuous ? Value{s.values[k]}
                                                            : Value{spec.classes[s.code(k)]};
        builder.add({dataset.subjects()[i], variable, s.times[k], std::move(value)});
      }
    }
  }
  return std::move(builder).build();
}

LongDataset simulate(const SimulationPlan& plan) {
  plan.design.validate();
  if (plan.variables.empty()) throw ConfigError("variables must not be empty");
  if (!plan.designs.empty() && plan.designs.size() != plan.variables.size()) {
    throw ConfigError("designs must be empty or give one entry per variable");
  }
  const auto design_of = [&plan](std::size_t k) -> const ObservationDesign& {
    if (!plan.designs.empty() && plan.designs[k]) return *plan.designs[k];
    return plan.design;
  };
  SpecMap specs;
  for (std::size_t k = 0; k < plan.variables.size(); ++k) {
    const ObservationDesign& design = design_of(k);
    design.validate();
    if (design.subjects != plan.design.subjects) {
      throw ConfigError("every variable design must use the plan's subject count");
    }
    VariableSpec spec = std::visit(
        [&design](const auto& model) {
          model.validate();
          using M = std::decay_t<decltype(model)>;
          if constexpr (std::is_same_v<M, ContinuousModel>) {
            return continuous_spec(model.variable, design.grid);
          } else {
            return discrete_spec(model, design.grid);
          }
        },
        plan.variables[k]);
    if (specs.contains(spec.id)) {
      throw ConfigError(fmt::format("variable '{}' is defined twice", spec.id));
    }
    specs.emplace(spec.id, std::move(spec));
  }
  const auto ids = simulated_subject_ids(plan.design.subjects);
  auto builder = roster_builder(std::move(specs), ids);
  for (std::size_t k = 0; k < plan.variables.size(); ++k) {
    const std::uint64_t seed = derive_seed(plan.seed, k);
    std::visit(
        [&](const auto& model) {
          using M = std::decay_t<decltype(model)>;
          if constexpr (std::is_same_v<M, ContinuousModel>) {
            add_continuous(model, design_of(k), seed, ids, builder);
          } else {
            add_discrete(model, design_of(k), seed, ids, builder);
          }
        },
        plan.variables[k]);
  }
  return std::move(builder).build();
}

}  // namespace tempfid
