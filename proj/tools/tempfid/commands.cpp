#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "run_config.hpp"
#include "tempfid/errors.hpp"
#include "tempfid/ingestion.hpp"
#include "tempfid/random.hpp"
#include "tempfid/report.hpp"
#include "tempfid/simgen.hpp"

namespace tempfid::cli {

namespace {

// Raw flag values; only flags that were actually given override the config.
struct Flags {
  std::string config;
  std::string original, synthetic, spec, out, model, strata, synthetic_strata, spec_out;
  std::string bandwidth, quantiles, vars, exclude;
  double grid_step = 0.0, epsilon = 0.0, variogram_bandwidth = 0.0, max_gap = 0.0;
  std::size_t subsample = 0, iterations = 0, per_stratum = 0, jobs = 0;
  std::uint64_t seed = 0;
  bool free_y = false, overlay = false, no_charts = false, no_measurement = false;
  std::multimap<std::string, CLI::Option*> given;
};

template <class T>
void add(CLI::App& app, Flags& f, const std::string& name, T& target, const std::string& help) {
  f.given.emplace(name, app.add_option("--" + name, target, help));
}

void add_flag(CLI::App& app, Flags& f, const std::string& name, bool& target,
              const std::string& help) {
  f.given.emplace(name, app.add_flag("--" + name, target, help));
}

bool was_given(const Flags& f, const std::string& name) {
  const auto [first, last] = f.given.equal_range(name);
  for (auto it = first; it != last; ++it) {
    if (it->second->count() > 0) return true;
  }
  return false;
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) apply_config_file(c, f.config);
  if (was_given(f, "original")) c.original = f.original;
  if (was_given(f, "synthetic")) c.synthetic = f.synthetic;
  if (was_given(f, "spec")) c.spec = f.spec;
  if (was_given(f, "out")) c.out = f.out;
  if (was_given(f, "model")) c.model = f.model;
  if (was_given(f, "strata")) c.strata = f.strata;
  if (was_given(f, "synthetic-strata")) c.synthetic_strata = f.synthetic_strata;
  if (was_given(f, "bandwidth")) c.bandwidths = parse_number_list(f.bandwidth, "--bandwidth");
  if (was_given(f, "quantiles")) c.quantiles = parse_number_list(f.quantiles, "--quantiles");
  if (was_given(f, "vars")) c.vars = parse_name_list(f.vars);
  if (was_given(f, "exclude")) c.exclude = parse_name_list(f.exclude);
  if (was_given(f, "grid-step")) c.grid_step = f.grid_step;
  if (was_given(f, "epsilon")) c.epsilon = f.epsilon;
  if (was_given(f, "variogram-bandwidth")) c.variogram_bandwidth = f.variogram_bandwidth;
  if (was_given(f, "max-gap")) c.max_gap = f.max_gap;
  if (was_given(f, "subsample")) c.subsample = f.subsample;
  if (was_given(f, "iterations")) c.iterations = f.iterations;
  if (was_given(f, "per-stratum")) c.per_stratum = f.per_stratum;
  if (was_given(f, "jobs")) c.jobs = f.jobs;
  if (was_given(f, "seed")) c.seed = f.seed;
  if (was_given(f, "free-y")) c.free_y = f.free_y;
  if (was_given(f, "overlay")) c.overlay = f.overlay;
  if (was_given(f, "no-charts")) c.charts = !f.no_charts;
  if (was_given(f, "no-measurement")) c.measurement = !f.no_measurement;
  return c;
}

void require(const std::string& value, std::string_view flag) {
  if (value.empty()) throw ConfigError(fmt::format("{} is required", flag));
}

std::optional<SpecMap> load_specs(const RunConfig& c) {
  if (c.spec.empty()) return std::nullopt;
  return load_spec_file(c.spec);
}

LongDataset load_table(const std::string& path, const std::optional<SpecMap>& specs) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError(fmt::format("data file '{}' does not exist", path));
  }
  return read_long_table(path, {}, specs ? &*specs : nullptr);
}

StratumAssignment load_strata(const std::string& path, const LongDataset& ds) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open strata file '{}'", path));
  try {
    return parse_strata_table(in, ds);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path, e.what()));
  }
}

int cmd_evaluate(const RunConfig& c) {
  require(c.original, "--original");
  require(c.synthetic, "--synthetic");
  EvaluationOptions options = evaluation_options(c);
  const auto specs = load_specs(c);
  const DatasetPair pair = pair_datasets(load_table(c.original, specs), load_table(c.synthetic, specs));
  if (!c.strata.empty()) options.original_strata = load_strata(c.strata, pair.original);
  if (!c.synthetic_strata.empty()) {
    options.synthetic_strata = load_strata(c.synthetic_strata, pair.synthetic);
  }
  if (options.original_strata.has_value() != options.synthetic_strata.has_value()) {
    spdlog::warn("strata given for one side only; the other side uses baseline percentile classes");
  }

  const ComparisonReport report = evaluate(pair, options);
  const std::string id = run_id(c);
  const std::filesystem::path dir = std::filesystem::path(c.out) / id;
  emit_series(report, dir, {id, config_json(c)});
  if (c.charts) render_charts(report, dir, {c.free_y, c.overlay});

  fmt::print("run {} -> {}\n", id, dir.string());
  for (const VariableReport& v : report.variables) {
    if (!v.measurement) continue;
    const MeasurementReport& m = *v.measurement;
    fmt::print("{}: similarity {}, frobenius {}, dropout divergence {}\n", v.variable,
               value_with_reference(m.comparison.similarity.mean, m.reference.similarity.mean),
               value_with_reference(m.comparison.frobenius.mean, m.reference.frobenius.mean),
               value_with_reference(m.comparison.dropout_divergence.mean,
                                    m.reference.dropout_divergence.mean));
  }
  if (!report.failures.empty()) {
    for (const MetricFailure& f : report.failures) {
      fmt::print(stderr, "error: {}: {}: {}\n", f.variable, f.metric, f.message);
    }
    fmt::print(stderr, "{} metric(s) failed; see {}\n", report.failures.size(),
               (dir / "failures.json").string());
    return kExitData;
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, const Flags& f) {
  require(c.model, "--model");
  if (!was_given(f, "out") && c.out == RunConfig{}.out) throw ConfigError("--out is required");
  SimulationPlan plan = load_simulation_plan(c.model);
  if (was_given(f, "seed")) plan.seed = c.seed;
  const LongDataset ds = simulate(plan);
  const std::filesystem::path out(c.out);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ostringstream table;
  write_long_table(table, ds);
  detail::write_file_atomic(out, table.str());
  if (!f.spec_out.empty()) detail::write_file_atomic(f.spec_out, spec_document(ds.specs()));
  fmt::print("wrote {} subjects, {} variables to {}\n", ds.subject_count(), ds.variables().size(),
             out.string());
  return kExitOk;
}

int cmd_reference(const RunConfig& c, const Flags& f) {
  require(c.original, "--original");
  const EvaluationOptions options = evaluation_options(c);
  const auto specs = load_specs(c);
  const LongDataset original = load_table(c.original, specs);
  if (original.subject_count() < 2) throw DataError("reference needs at least 2 subjects");
  std::map<VariableId, MeasurementBlock> blocks;
  for (const VariableId& v : original.variables()) {
    if (!options.include.empty() && !options.include.contains(v)) continue;
    if (options.exclude.contains(v)) continue;
    const double step = c.grid_step.value_or(original.spec(v).grid_step);
    const auto times = original.times(v);
    const TimeGrid grid = build_time_grid(times, times, step);
    ProtocolOptions protocol = options.protocol;
    protocol.seed = derive_seed(variable_seed(c.seed, v), 0);
    blocks.emplace(v, reference_protocol(original, v, grid, protocol));
  }
  const std::string doc = reference_summary(blocks, c.iterations, c.seed);
  if (was_given(f, "out") || c.out != RunConfig{}.out) detail::write_file_atomic(c.out, doc);
  fmt::print("{}", doc);
  return kExitOk;
}

int cmd_render(const RunConfig& c) {
  require(c.out, "--out");
  const auto files = render_directory(c.out, {c.free_y, c.overlay});
  fmt::print("rendered {} chart(s)\n", files.size());
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Temporal fidelity evaluation for synthetic longitudinal data", "tempfid"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str();

  Flags f;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare a synthetic dataset with the original");
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a dataset from a model document");
  auto* reference_cmd = app.add_subcommand("reference", "Original-versus-original baselines");
  auto* render_cmd = app.add_subcommand("render", "Render SVG charts from emitted series documents");

  for (CLI::App* cmd : {evaluate_cmd, simulate_cmd, reference_cmd, render_cmd}) {
    cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  }
  for (CLI::App* cmd : {evaluate_cmd, reference_cmd}) {
    add(*cmd, f, "original", f.original, "Original long-format table");
    add(*cmd, f, "spec", f.spec, "Variable spec document");
    add(*cmd, f, "grid-step", f.grid_step, "Grid step for every variable");
    add(*cmd, f, "subsample", f.subsample, "Subjects per subsample (default 2000)");
    add(*cmd, f, "iterations", f.iterations, "Subsampling iterations (default 100)");
    add(*cmd, f, "epsilon", f.epsilon, "KL smoothing constant (default 1e-6)");
    add(*cmd, f, "vars", f.vars, "Comma-separated variables to include");
    add(*cmd, f, "exclude", f.exclude, "Comma-separated variables to skip");
  }
  add(*evaluate_cmd, f, "synthetic", f.synthetic, "Synthetic long-format table");
  add(*evaluate_cmd, f, "out", f.out, "Report root directory (default reports)");
  add(*evaluate_cmd, f, "bandwidth", f.bandwidth, "Kernel bandwidth(s), e.g. 6 or 3,6,12");
  add(*evaluate_cmd, f, "quantiles", f.quantiles, "Quantile levels, e.g. 0.05,0.5,0.95");
  add(*evaluate_cmd, f, "strata", f.strata, "Subject strata table for the original");
  add(*evaluate_cmd, f, "synthetic-strata", f.synthetic_strata, "Subject strata table for the synthetic data");
  add(*evaluate_cmd, f, "variogram-bandwidth", f.variogram_bandwidth, "Bandwidth over lags for the variogram");
  add(*evaluate_cmd, f, "max-gap", f.max_gap, "Ignore transitions between observations further apart");
  add(*evaluate_cmd, f, "per-stratum", f.per_stratum, "Trajectories sampled per stratum (default 20)");
  add(*evaluate_cmd, f, "jobs", f.jobs, "Variables evaluated in parallel");
  add_flag(*evaluate_cmd, f, "free-y", f.free_y, "Separate y-axes per panel");
  add_flag(*evaluate_cmd, f, "overlay", f.overlay, "Overlay original and synthetic in one panel");
  add_flag(*evaluate_cmd, f, "no-charts", f.no_charts, "Skip SVG rendering");
  add_flag(*evaluate_cmd, f, "no-measurement", f.no_measurement, "Skip the subsampling protocol");
  for (CLI::App* cmd : {evaluate_cmd, simulate_cmd, reference_cmd}) {
    add(*cmd, f, "seed", f.seed, "Master seed");
  }
  add(*simulate_cmd, f, "model", f.model, "Model document");
  add(*simulate_cmd, f, "out", f.out, "Output table path");
  simulate_cmd->add_option("--spec-out", f.spec_out, "Also write the spec document here");
  add(*reference_cmd, f, "out", f.out, "Write the summary document here");
  add(*render_cmd, f, "out", f.out, "Run directory holding series documents");
  add_flag(*render_cmd, f, "free-y", f.free_y, "Separate y-axes per panel");
  add_flag(*render_cmd, f, "overlay", f.overlay, "Overlay original and synthetic in one panel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    const RunConfig config = resolve(f);
    if (evaluate_cmd->parsed()) return cmd_evaluate(config);
    if (simulate_cmd->parsed()) return cmd_simulate(config, f);
    if (reference_cmd->parsed()) return cmd_reference(config, f);
    return cmd_render(config);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return kExitInternal;
  }
}

}  // namespace tempfid::cli
