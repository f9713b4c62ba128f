#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "tempfid/errors.hpp"
#include "tempfid/simgen.hpp"

namespace tempfid {

namespace {

using nlohmann::json;

// Field path for diagnostics, e.g. "variables.hr.serial_range".
std::string join(std::string_view parent, std::string_view field) {
  return parent.empty() ? std::string(field) : fmt::format("{}.{}", parent, field);
}

void reject_unknown(const json& object, std::string_view path, std::set<std::string> allowed) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(fmt::format("{}: unknown field", join(path, key)));
    }
  }
}

const json& require_object(const json& node, std::string_view path) {
  if (!node.is_object()) throw ConfigError(fmt::format("{}: expected an object", path));
  return node;
}

double number(const json& object, std::string_view path, const std::string& key,
              std::optional<double> fallback = std::nullopt) {
  if (!object.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(fmt::format("{}: missing required field", join(path, key)));
  }
  const json& v = object[key];
  if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", join(path, key)));
  return v.get<double>();
}

std::vector<double> numbers(const json& node, std::string_view path) {
  if (node.is_number()) return {node.get<double>()};
  if (!node.is_array()) {
    throw ConfigError(fmt::format("{}: expected a number or an array of numbers", path));
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < node.size(); ++k) {
    if (!node[k].is_number()) {
      throw ConfigError(fmt::format("{}[{}]: expected a number", path, k));
    }
    out.push_back(node[k].get<double>());
  }
  return out;
}

std::string text(const json& object, std::string_view path, const std::string& key) {
  if (!object.contains(key)) {
    throw ConfigError(fmt::format("{}: missing required field", join(path, key)));
  }
  if (!object[key].is_string()) {
    throw ConfigError(fmt::format("{}: expected a string", join(path, key)));
  }
  return object[key].get<std::string>();
}

// Runs a validator and prefixes its message with the field path.
template <class F>
void within(std::string_view path, F&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

void read_probabilities(const json& node, std::string_view path, ObservationDesign& design) {
  require_object(node, path);
  reject_unknown(node, path, {"keep_probability", "dropout_hazard"});
  if (node.contains("keep_probability")) {
    design.keep_probability = numbers(node["keep_probability"], join(path, "keep_probability"));
  }
  if (node.contains("dropout_hazard")) {
    design.dropout_hazard = numbers(node["dropout_hazard"], join(path, "dropout_hazard"));
  }
}

TrendFunction read_trend(const json& node, std::string_view path) {
  TrendFunction trend;
  if (node.is_number()) {
    trend.poly = {node.get<double>()};
    return trend;
  }
  require_object(node, path);
  reject_unknown(node, path, {"poly", "amplitude", "period", "phase"});
  if (node.contains("poly")) trend.poly = numbers(node["poly"], join(path, "poly"));
  trend.amplitude = number(node, path, "amplitude", 0.0);
  trend.period = number(node, path, "period", 24.0);
  trend.phase = number(node, path, "phase", 0.0);
  return trend;
}

ContinuousModel read_continuous(const std::string& id, const json& node, std::string_view path) {
  reject_unknown(node, path,
                 {"kind", "mean", "nugget_var", "serial_var", "serial_range", "serial_kind",
                  "intercept_var", "design"});
  ContinuousModel model;
  model.variable = id;
  if (node.contains("mean")) model.mean_fn = read_trend(node["mean"], join(path, "mean"));
  model.nugget_var = number(node, path, "nugget_var", 0.0);
  model.serial_var = number(node, path, "serial_var", 0.0);
  model.serial_range = number(node, path, "serial_range", 1.0);
  model.intercept_var = number(node, path, "intercept_var", 0.0);
  if (node.contains("serial_kind")) {
    within(join(path, "serial_kind"), [&] {
      model.serial_kind = parse_correlation_kind(text(node, path, "serial_kind"));
    });
  }
  within(path, [&] { model.validate(); });
  return model;
}

DiscreteModel read_discrete(const std::string& id, const json& node, std::string_view path) {
  reject_unknown(node, path, {"kind", "classes", "transition", "initial", "design"});
  DiscreteModel model;
  model.variable = id;
  const std::string classes_path = join(path, "classes");
  if (!node.contains("classes") || !node["classes"].is_array()) {
    throw ConfigError(fmt::format("{}: expected an array of class labels", classes_path));
  }
  for (std::size_t k = 0; k < node["classes"].size(); ++k) {
    const json& c = node["classes"][k];
    if (!c.is_string()) throw ConfigError(fmt::format("{}[{}]: expected a string", classes_path, k));
    model.classes.push_back(c.get<std::string>());
  }
  const std::string transition_path = join(path, "transition");
  if (!node.contains("transition") || !node["transition"].is_array()) {
    throw ConfigError(fmt::format("{}: expected an array of rows", transition_path));
  }
  for (std::size_t a = 0; a < node["transition"].size(); ++a) {
    model.transition.push_back(
        numbers(node["transition"][a], fmt::format("{}[{}]", transition_path, a)));
  }
  if (node.contains("initial")) {
    model.initial = numbers(node["initial"], join(path, "initial"));
  } else {
    model.initial.assign(model.classes.size(), 1.0 / static_cast<double>(model.classes.size()));
  }
  within(path, [&] { model.validate(); });
  return model;
}

}  // namespace

SimulationPlan parse_simulation_plan(std::string_view source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("model document is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("model document must be a JSON object");
  reject_unknown(doc, "", {"seed", "subjects", "grid", "design", "variables"});

  SimulationPlan plan;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) {
      throw ConfigError("seed: expected a non-negative integer");
    }
    plan.seed = doc["seed"].get<std::uint64_t>();
  }
  if (!doc.contains("subjects")) throw ConfigError("subjects: missing required field");
  if (!doc["subjects"].is_number_integer() || doc["subjects"].get<std::int64_t>() < 1) {
    throw ConfigError("subjects: expected an integer >= 1");
  }
  plan.design.subjects = doc["subjects"].get<std::size_t>();

  if (doc.contains("grid")) {
    const json& grid = require_object(doc["grid"], "grid");
    reject_unknown(grid, "grid", {"start", "end", "step"});
    within("grid", [&] {
      plan.design.grid = TimeGrid(number(grid, "grid", "start", 0.0),
                                  number(grid, "grid", "end", 47.0),
                                  number(grid, "grid", "step", 1.0));
    });
  }
  if (doc.contains("design")) read_probabilities(doc["design"], "design", plan.design);
  within("design", [&] { plan.design.validate(); });

  if (!doc.contains("variables") || !doc["variables"].is_object() || doc["variables"].empty()) {
    throw ConfigError("variables: expected a non-empty object");
  }
  bool any_override = false;
  for (const auto& [id, entry] : doc["variables"].items()) {
    const std::string path = join("variables", id);
    require_object(entry, path);
    const std::string kind = text(entry, path, "kind");
    if (kind == "continuous") {
      plan.variables.emplace_back(read_continuous(id, entry, path));
    } else if (kind == "discrete") {
      plan.variables.emplace_back(read_discrete(id, entry, path));
    } else {
      throw ConfigError(fmt::format("{}.kind: expected continuous or discrete", path));
    }
    if (entry.contains("design")) {
      ObservationDesign design = plan.design;
      read_probabilities(entry["design"], join(path, "design"), design);
      within(join(path, "design"), [&] { design.validate(); });
      plan.designs.emplace_back(std::move(design));
      any_override = true;
    } else {
      plan.designs.emplace_back(std::nullopt);
    }
  }
  if (!any_override) plan.designs.clear();
  return plan;
}

SimulationPlan load_simulation_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open model document '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_simulation_plan(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace tempfid
