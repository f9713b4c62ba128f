#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "tempfid/errors.hpp"

namespace tempfid::cli {

using nlohmann::json;

namespace {

template <class T>
T read(const json& value, std::string_view key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("config key '{}' has the wrong type", key));
  }
}

std::vector<double> numbers(const json& value, std::string_view key) {
  if (value.is_number()) return {value.get<double>()};
  return read<std::vector<double>>(value, key);
}

std::vector<std::string> names(const json& value, std::string_view key) {
  if (value.is_string()) return parse_name_list(value.get<std::string>());
  return read<std::vector<std::string>>(value, key);
}

std::size_t count(const json& value, std::string_view key) {
  if (!value.is_number_unsigned()) {
    throw ConfigError(fmt::format("config key '{}' must be a non-negative integer", key));
  }
  return value.get<std::size_t>();
}

json optional(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void apply_config_document(RunConfig& c, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "original") c.original = read<std::string>(value, key);
    else if (key == "synthetic") c.synthetic = read<std::string>(value, key);
    else if (key == "spec") c.spec = read<std::string>(value, key);
    else if (key == "out") c.out = read<std::string>(value, key);
    else if (key == "model") c.model = read<std::string>(value, key);
    else if (key == "strata") c.strata = read<std::string>(value, key);
    else if (key == "synthetic_strata") c.synthetic_strata = read<std::string>(value, key);
    else if (key == "bandwidth") c.bandwidths = numbers(value, key);
    else if (key == "grid_step") c.grid_step = value.is_null() ? std::nullopt : std::optional(read<double>(value, key));
    else if (key == "quantiles") c.quantiles = numbers(value, key);
    else if (key == "subsample") c.subsample = count(value, key);
    else if (key == "iterations") c.iterations = count(value, key);
    else if (key == "epsilon") c.epsilon = read<double>(value, key);
    else if (key == "seed") c.seed = read<std::uint64_t>(value, key);
    else if (key == "vars") c.vars = names(value, key);
    else if (key == "exclude") c.exclude = names(value, key);
    else if (key == "variogram_bandwidth") c.variogram_bandwidth = value.is_null() ? std::nullopt : std::optional(read<double>(value, key));
    else if (key == "max_gap") c.max_gap = value.is_null() ? std::nullopt : std::optional(read<double>(value, key));
    else if (key == "per_stratum") c.per_stratum = count(value, key);
    else if (key == "jobs") c.jobs = count(value, key);
    else if (key == "free_y") c.free_y = read<bool>(value, key);
    else if (key == "overlay") c.overlay = read<bool>(value, key);
    else if (key == "charts") c.charts = read<bool>(value, key);
    else if (key == "measurement") c.measurement = read<bool>(value, key);
    else throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    apply_config_document(config, buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string config_json(const RunConfig& c) {
  const json doc = {{"original", c.original},
                    {"synthetic", c.synthetic},
                    {"spec", c.spec},
                    {"out", c.out},
                    {"strata", c.strata},
                    {"synthetic_strata", c.synthetic_strata},
                    {"bandwidth", c.bandwidths},
                    {"grid_step", optional(c.grid_step)},
                    {"quantiles", c.quantiles},
                    {"subsample", c.subsample},
                    {"iterations", c.iterations},
                    {"epsilon", c.epsilon},
                    {"seed", c.seed},
                    {"vars", c.vars},
                    {"exclude", c.exclude},
                    {"variogram_bandwidth", optional(c.variogram_bandwidth)},
                    {"max_gap", optional(c.max_gap)},
                    {"per_stratum", c.per_stratum},
                    {"jobs", c.jobs},
                    {"free_y", c.free_y},
                    {"overlay", c.overlay},
                    {"charts", c.charts},
                    {"measurement", c.measurement}};
  return doc.dump();
}

std::string run_id(const RunConfig& config) {
  // jobs changes scheduling only, never results.
  RunConfig canonical = config;
  canonical.jobs = 1;
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : config_json(canonical)) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", hash);
}

std::vector<double> parse_number_list(std::string_view text, std::string_view flag) {
  std::vector<double> out;
  for (const std::string& item : parse_name_list(text)) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty()) {
      throw ConfigError(fmt::format("{}: '{}' is not a number", flag, item));
    }
    out.push_back(value);
  }
  if (out.empty()) throw ConfigError(fmt::format("{}: expected at least one number", flag));
  return out;
}

std::vector<std::string> parse_name_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string_view item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

EvaluationOptions evaluation_options(const RunConfig& c) {
  EvaluationOptions o;
  o.bandwidths = c.bandwidths;
  o.quantile_levels = c.quantiles;
  o.protocol.subsample_size = c.subsample;
  o.protocol.iterations = c.iterations;
  o.protocol.epsilon = c.epsilon;
  o.seed = c.seed;
  o.per_stratum = c.per_stratum;
  o.include = std::set<VariableId>(c.vars.begin(), c.vars.end());
  o.exclude = std::set<VariableId>(c.exclude.begin(), c.exclude.end());
  o.grid_step = c.grid_step;
  o.variogram_bandwidth = c.variogram_bandwidth;
  o.transitions.max_gap = c.max_gap;
  o.measurement = c.measurement;
  o.jobs = c.jobs;
  o.validate();
  return o;
}

}  // namespace tempfid::cli
