#include "tempfid/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "csv.hpp"
#include "json.hpp"
#include "number_format.hpp"
#include "tempfid/errors.hpp"
#include "tempfid/random.hpp"

namespace tempfid {

namespace {

using nlohmann::json;

struct RawRow {
  std::size_t line = 0;
  std::string subject;
  std::string variable;
  double time = 0.0;
  std::string value;
};

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (detail::trim(header[i]) == name) return i;
  }
  throw DataError(fmt::format("header is missing column '{}'", name));
}

std::string join_lines(const std::vector<std::size_t>& lines) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(lines.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(lines[i]);
  }
  if (lines.size() > shown) out += fmt::format(", ... ({} rows)", lines.size());
  return out;
}

}  // namespace

LongDataset parse_long_table(std::istream& in, const ColumnSchema& schema, const SpecMap* specs) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;

  // Header (skipping blank lines and a UTF-8 byte-order mark).
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw DataError("input is empty: no header row");
  if (!detail::split_fields(line, schema.delimiter, fields)) {
    throw DataError(fmt::format("line {}: unterminated quote in header", line_no));
  }
  const std::size_t subject_col = column_index(fields, schema.subject);
  const std::size_t variable_col = column_index(fields, schema.variable);
  const std::size_t time_col = column_index(fields, schema.time);
  const std::size_t value_col = column_index(fields, schema.value);
  const std::size_t width = fields.size();

  std::vector<RawRow> rows;
  std::vector<std::size_t> nonfinite_time;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (!detail::split_fields(line, schema.delimiter, fields)) {
      throw DataError(fmt::format("line {}: unterminated quote", line_no));
    }
    if (fields.size() != width) {
      throw DataError(
          fmt::format("line {}: expected {} fields, found {}", line_no, width, fields.size()));
    }
    RawRow row;
    row.line = line_no;
    row.subject = std::string(detail::trim(fields[subject_col]));
    row.variable = std::string(detail::trim(fields[variable_col]));
    row.value = std::string(detail::trim(fields[value_col]));
    if (row.subject.empty() || row.variable.empty()) {
      throw DataError(fmt::format("line {}: empty subject or variable id", line_no));
    }
    const auto time = detail::parse_number(detail::trim(fields[time_col]));
    if (!time) {
      throw DataError(fmt::format("line {}: cannot parse time '{}'", line_no,
                                  detail::trim(fields[time_col])));
    }
    if (!std::isfinite(*time)) nonfinite_time.push_back(line_no);
    row.time = *time;
    rows.push_back(std::move(row));
  }
  if (!nonfinite_time.empty()) {
    throw DataError(fmt::format("non-finite time on line(s) {}", join_lines(nonfinite_time)));
  }

  // Resolve the spec of every variable that appears.
  SpecMap resolved;
  std::map<VariableId, std::vector<const RawRow*>> by_variable;
  for (const RawRow& row : rows) by_variable[row.variable].push_back(&row);
  if (specs != nullptr) {
    for (const auto& [id, spec] : *specs) resolved.emplace(id, spec);
    for (const auto& [variable, members] : by_variable) {
      if (!specs->contains(variable)) {
        throw DataError(fmt::format("line {}: unknown variable '{}' (not declared in spec)",
                                    members.front()->line, variable));
      }
    }
  } else {
    for (const auto& [variable, members] : by_variable) {
      const bool numeric = std::all_of(members.begin(), members.end(), [](const RawRow* r) {
        return detail::parse_number(r->value).has_value();
      });
      VariableSpec spec;
      spec.id = variable;
      spec.kind = numeric ? VariableKind::continuous : VariableKind::discrete;
      resolved.emplace(variable, std::move(spec));
      spdlog::info("variable '{}': no spec given, inferred kind {}", variable,
                   to_string(resolved[variable].kind));
    }
  }
  for (auto& [id, spec] : resolved) {
    if (spec.kind != VariableKind::discrete || !spec.classes.empty()) continue;
    std::set<ClassLabel> labels;
    if (const auto it = by_variable.find(id); it != by_variable.end()) {
      for (const RawRow* r : it->second) labels.insert(r->value);
    }
    if (labels.empty()) {
      spdlog::warn("variable '{}': discrete with no declared or observed classes; dropped", id);
      continue;
    }
    spec.classes.assign(labels.begin(), labels.end());
    spdlog::info("variable '{}': inferred {} classes from data", id, spec.classes.size());
  }
  std::erase_if(resolved, [](const auto& kv) {
    return kv.second.kind == VariableKind::discrete && kv.second.classes.empty();
  });

  LongDataset::Builder builder(resolved);
  std::vector<std::size_t> nonfinite_value;
  for (const RawRow& row : rows) {
    const VariableSpec& spec = resolved.at(row.variable);
    Observation obs{row.subject, row.variable, row.time, {}};
    if (spec.kind == VariableKind::continuous) {
      const auto value = detail::parse_number(row.value);
      if (!value) {
        throw DataError(fmt::format("line {}: cannot parse value '{}' for continuous variable '{}'",
                                    row.line, row.value, row.variable));
      }
      if (!std::isfinite(*value)) {
        nonfinite_value.push_back(row.line);
        continue;
      }
      obs.value = *value;
    } else {
      if (!spec.class_index(row.value)) {
        throw DataError(fmt::format("line {}: label '{}' is not a declared class of '{}'", row.line,
                                    row.value, row.variable));
      }
      obs.value = row.value;
    }
    builder.add(obs);
  }
  if (!nonfinite_value.empty()) {
    throw DataError(fmt::format("non-finite value on line(s) {}", join_lines(nonfinite_value)));
  }
  return std::move(builder).build();
}

LongDataset read_long_table(const std::filesystem::path& path, const ColumnSchema& schema,
                            const SpecMap* specs) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  try {
    return parse_long_table(in, schema, specs);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_long_table(std::ostream& out, const LongDataset& dataset, const ColumnSchema& schema) {
  const char d = schema.delimiter;
  out << detail::quote_field(schema.subject, d) << d << detail::quote_field(schema.variable, d)
      << d << detail::quote_field(schema.time, d) << d << detail::quote_field(schema.value, d)
      << '\n';
  for (const Observation& obs : dataset.observations()) {
    out << detail::quote_field(obs.subject, d) << d << detail::quote_field(obs.variable, d) << d
        << detail::format_number(obs.time) << d;
    if (const auto* v = std::get_if<double>(&obs.value)) {
      out << detail::format_number(*v);
    } else {
      out << detail::quote_field(std::get<ClassLabel>(obs.value), d);
    }
    out << '\n';
  }
}

SpecMap parse_spec_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("spec document is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("variables") || !doc["variables"].is_object()) {
    throw ConfigError("spec document needs a 'variables' object");
  }
  const std::string default_unit = doc.value("time_unit", std::string{"hour"});
  const double default_step = doc.value("grid_step", 1.0);
  SpecMap specs;
  for (const auto& [id, entry] : doc["variables"].items()) {
    if (!entry.is_object()) throw ConfigError(fmt::format("variables.{}: expected an object", id));
    VariableSpec spec;
    spec.id = id;
    try {
      spec.kind = parse_variable_kind(entry.at("kind").get<std::string>());
      spec.time_unit = entry.value("time_unit", default_unit);
      spec.grid_step = entry.value("grid_step", default_step);
      if (entry.contains("classes")) spec.classes = entry["classes"].get<std::vector<ClassLabel>>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("variables.{}: {}", id, e.what()));
    }
    if (spec.kind == VariableKind::continuous && !spec.classes.empty()) {
      throw ConfigError(fmt::format("variables.{}: continuous variables take no classes", id));
    }
    if (spec.kind == VariableKind::discrete && spec.classes.empty()) {
      // Inferred per table at parse time; validate the rest now.
      VariableSpec probe = spec;
      probe.classes = {"_"};
      probe.validate();
    } else {
      spec.validate();
    }
    specs.emplace(id, std::move(spec));
  }
  return specs;
}

SpecMap load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open spec file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_spec_document(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string spec_document(const SpecMap& specs) {
  json vars = json::object();
  for (const auto& [id, spec] : specs) {
    json entry = {{"kind", std::string(to_string(spec.kind))},
                  {"grid_step", spec.grid_step},
                  {"time_unit", spec.time_unit}};
    if (spec.kind == VariableKind::discrete) entry["classes"] = spec.classes;
    vars[id] = std::move(entry);
  }
  return json{{"variables", vars}}.dump(2) + "\n";
}

std::vector<ClassLabel> UnifiedSpec::synthetic_only() const {
  std::vector<ClassLabel> out;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    if (presence[c].in_synthetic && !presence[c].in_original) out.push_back(spec.classes[c]);
  }
  return out;
}

std::vector<ClassLabel> UnifiedSpec::absent_in_synthetic() const {
  std::vector<ClassLabel> out;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    if (presence[c].in_original && !presence[c].in_synthetic) out.push_back(spec.classes[c]);
  }
  return out;
}

namespace {

// Labels that actually occur in the data, not just in the declaration.
std::set<std::size_t> observed_codes(const LongDataset& ds, const VariableId& id) {
  std::set<std::size_t> codes;
  for (const Series& s : ds.series(id)) {
    for (std::size_t k = 0; k < s.size(); ++k) codes.insert(s.code(k));
  }
  return codes;
}

}  // namespace

DatasetPair pair_datasets(const LongDataset& original, const LongDataset& synthetic) {
  DatasetPair pair;
  SpecMap unified_specs;
  std::set<VariableId> shared;
  for (const auto& [id, spec] : original.specs()) {
    if (!synthetic.has_variable(id)) {
      pair.original_only.push_back(id);
      spdlog::warn("variable '{}' only present in the original dataset; excluded", id);
      continue;
    }
    const VariableSpec& other = synthetic.spec(id);
    if (spec.kind != other.kind) {
      throw DataError(fmt::format("variable '{}' is {} in the original but {} in the synthetic data",
                                  id, to_string(spec.kind), to_string(other.kind)));
    }
    if (spec.grid_step != other.grid_step) {
      spdlog::warn("variable '{}': grid steps differ ({} vs {}); using the original's", id,
                   spec.grid_step, other.grid_step);
    }
    shared.insert(id);
    UnifiedSpec unified{spec, {}};
    if (spec.kind == VariableKind::discrete) {
      for (const auto& label : other.classes) {
        if (!unified.spec.class_index(label)) unified.spec.classes.push_back(label);
      }
      const auto orig_codes = observed_codes(original, id);
      const auto synth_codes = observed_codes(synthetic, id);
      unified.presence.resize(unified.spec.classes.size());
      for (std::size_t c = 0; c < unified.spec.classes.size(); ++c) {
        const ClassLabel& label = unified.spec.classes[c];
        const auto oi = spec.class_index(label);
        const auto si = other.class_index(label);
        unified.presence[c].in_original = oi && orig_codes.contains(*oi);
        unified.presence[c].in_synthetic = si && synth_codes.contains(*si);
      }
      for (const auto& label : unified.synthetic_only()) {
        spdlog::info("variable '{}': class '{}' only occurs in the synthetic data", id, label);
      }
      for (const auto& label : unified.absent_in_synthetic()) {
        spdlog::info("variable '{}': class '{}' absent from the synthetic data", id, label);
      }
    }
    unified_specs.emplace(id, unified.spec);
    pair.unified.emplace(id, std::move(unified));
  }
  for (const auto& [id, spec] : synthetic.specs()) {
    if (!original.has_variable(id)) {
      pair.synthetic_only.push_back(id);
      spdlog::warn("variable '{}' only present in the synthetic dataset; excluded", id);
    }
  }
  pair.original = original.restrict_variables(shared).recode(unified_specs);
  pair.synthetic = synthetic.restrict_variables(shared).recode(unified_specs);
  return pair;
}

std::pair<LongDataset, LongDataset> split_reference(const LongDataset& dataset, std::uint64_t seed) {
  const std::size_t n = dataset.subject_count();
  if (n < 2) throw DataError("reference split needs at least 2 subjects");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);
  const std::size_t first = (n + 1) / 2;
  std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(first));
  std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(first), order.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {dataset.select_subjects(a), dataset.select_subjects(b)};
}

StratumAssignment parse_strata_table(std::istream& in, const LongDataset& dataset, char delimiter) {
  StratumAssignment out;
  std::string line;
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  bool header = true;
  std::set<SubjectId> roster(dataset.subjects().begin(), dataset.subjects().end());
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (!detail::split_fields(line, delimiter, fields) || fields.size() != 2) {
      throw DataError(fmt::format("strata line {}: expected 2 fields", line_no));
    }
    if (header) {
      header = false;
      continue;
    }
    const SubjectId subject(detail::trim(fields[0]));
    const std::string stratum(detail::trim(fields[1]));
    if (!roster.contains(subject)) {
      throw DataError(fmt::format("strata line {}: unknown subject '{}'", line_no, subject));
    }
    if (!out.stratum_of.emplace(subject, stratum).second) {
      throw DataError(fmt::format("strata line {}: subject '{}' listed twice", line_no, subject));
    }
    if (std::find(out.strata.begin(), out.strata.end(), stratum) == out.strata.end()) {
      out.strata.push_back(stratum);
    }
  }
  if (out.stratum_of.size() != roster.size()) {
    throw DataError(fmt::format("strata table covers {} of {} subjects", out.stratum_of.size(),
                                roster.size()));
  }
  return out;
}

}  // namespace tempfid
