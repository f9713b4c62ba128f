#include "tempfid/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "csv.hpp"
#include "number_format.hpp"
#include "series_document.hpp"
#include "tempfid/errors.hpp"

#ifndef TEMPFID_VERSION
#define TEMPFID_VERSION "0.0.0"
#endif

namespace tempfid {

using nlohmann::json;

std::string_view tool_version() { return TEMPFID_VERSION; }

namespace detail {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(fmt::format("cannot create directory '{}': {}", path.parent_path().string(), ec.message()));
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(fmt::format("cannot move '{}' into place: {}", path.string(), ec.message()));
}

namespace {

json array(std::span<const double> values) {
  json out = json::array();
  for (const double v : values) out.push_back(v);  // NaN dumps as null
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json profile_side(const ProfileSeries& s) {
  json series = json::array();
  for (std::size_t c = 0; c < s.width(); ++c) series.push_back(array(s.component(c)));
  json side = {{"series", series}};
  if (!s.ess.empty()) side["ess"] = array(s.ess);
  return side;
}

json profile_document(const VariableId& variable, std::string_view metric, std::string_view chart,
                      const Paired<ProfileSeries>& p) {
  const ProfileSeries& o = p.original;
  json doc = {{"variable", variable},
              {"metric", metric},
              {"chart", chart},
              {"x_label", "time"},
              {"y_label", metric},
              {"x", array(o.grid.points())},
              {"components", o.components},
              {"bandwidth", optional_number(o.bandwidth)},
              {"original", profile_side(p.original)},
              {"synthetic", profile_side(p.synthetic)}};
  if (!o.levels.empty()) doc["levels"] = array(o.levels);
  if (!o.ess.empty()) doc["low_support_ess"] = kLowSupportEss;
  return doc;
}

json outlier_side(const std::vector<OutlierPoint>& points) {
  json out = json::array();
  for (const auto& p : points) {
    out.push_back({{"subject", p.subject}, {"time", p.time}, {"value", p.value}, {"above", p.above}});
  }
  return out;
}

json decomposition_json(const VarianceDecomposition& d) {
  return {{"nugget", d.nugget}, {"sill", d.sill}, {"total", d.total},
          {"between_subject", d.between_subject}};
}

// Type-7 (linear interpolation) sample quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

json box_and_density(std::vector<double> values) {
  json out = {{"box", nullptr}, {"density", nullptr}};
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const double q1 = sorted_quantile(values, 0.25);
  const double q3 = sorted_quantile(values, 0.75);
  const double iqr = q3 - q1;
  const auto lo_it = std::lower_bound(values.begin(), values.end(), q1 - 1.5 * iqr);
  const auto hi_it = std::upper_bound(values.begin(), values.end(), q3 + 1.5 * iqr);
  out["box"] = {{"min", values.front()},
                {"q1", q1},
                {"median", sorted_quantile(values, 0.5)},
                {"q3", q3},
                {"max", values.back()},
                {"whisker_low", *lo_it},
                {"whisker_high", *std::prev(hi_it)}};

  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = std::max(sd, iqr / 1.34);
  double bw = 0.9 * spread * std::pow(n, -0.2);
  if (!(bw > 0.0)) bw = 0.05;
  constexpr std::size_t kPoints = 101;
  std::vector<double> xs(kPoints);
  std::vector<double> ys(kPoints);
  const double norm = 1.0 / (n * bw * std::sqrt(2.0 * 3.14159265358979323846));
  for (std::size_t k = 0; k < kPoints; ++k) {
    xs[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(kPoints - 1);
    double sum = 0.0;
    for (const double v : values) {
      const double z = (xs[k] - v) / bw;
      sum += std::exp(-0.5 * z * z);
    }
    ys[k] = sum * norm;
  }
  out["density"] = {{"x", array(xs)}, {"y", array(ys)}, {"bandwidth", bw}};
  return out;
}

json rank_side(const RankVariabilityDistribution& r) {
  json side = box_and_density(r.values);
  side["subjects"] = r.subjects;
  side["values"] = array(r.values);
  side["excluded"] = r.excluded;
  return side;
}

json transition_side(const TransitionProfile& t) {
  const std::size_t l = t.states();
  json probability = json::array();
  json mass = json::array();
  for (std::size_t g = 0; g < t.grid.size(); ++g) {
    json rows = json::array();
    json masses = json::array();
    for (std::size_t a = 0; a < l; ++a) {
      json row = json::array();
      for (std::size_t b = 0; b < l; ++b) row.push_back(t.at(g, a, b));
      rows.push_back(std::move(row));
      masses.push_back(t.source_mass[g * l + a]);
    }
    probability.push_back(std::move(rows));
    mass.push_back(std::move(masses));
  }
  return {{"probability", probability}, {"source_mass", mass}};
}

json trajectory_side(const TrajectoryPanel& panel) {
  json strata = json::array();
  for (std::size_t s = 0; s < panel.strata.size(); ++s) {
    json subjects = json::array();
    for (const Trajectory& tr : panel.samples[s]) {
      subjects.push_back({{"subject", tr.subject}, {"times", array(tr.times)}, {"values", array(tr.values)}});
    }
    strata.push_back({{"label", panel.strata[s]}, {"subjects", subjects}});
  }
  return {{"strata", strata}};
}

std::string tag(std::string_view metric, const ComparisonReport& report, double h) {
  if (report.options.bandwidths.size() <= 1) return std::string(metric);
  return fmt::format("{}.h{}", metric, format_number(h));
}

}  // namespace

std::vector<SeriesDocument> series_documents(const ComparisonReport& report) {
  std::vector<SeriesDocument> docs;
  for (const VariableReport& v : report.variables) {
    const auto add = [&](std::string name, json body) {
      body["kind"] = std::string(to_string(v.kind));
      docs.push_back({v.variable, std::move(name), std::move(body)});
    };
    for (const SmoothedMetrics& m : v.smoothed) {
      if (m.mean) add(tag("mean", report, m.bandwidth), profile_document(v.variable, "mean", "line", *m.mean));
      if (m.quantiles) {
        json doc = profile_document(v.variable, "quantiles", "line", *m.quantiles);
        if (m.outliers) {
          doc["original"]["outliers"] = outlier_side(m.outliers->original);
          doc["synthetic"]["outliers"] = outlier_side(m.outliers->synthetic);
        }
        add(tag("quantiles", report, m.bandwidth), std::move(doc));
      }
      if (m.variance) {
        add(tag("variance", report, m.bandwidth),
            profile_document(v.variable, "variance", "line", *m.variance));
      }
      if (m.variogram) {
        const auto side = [&](const VariogramSeries& s, const VarianceDecomposition* d) {
          json out = {{"series", json::array({array(s.gamma)})}, {"pair_count", s.pair_count}};
          if (d) out["decomposition"] = decomposition_json(*d);
          return out;
        };
        const bool dec = m.decomposition.has_value();
        add(tag("variogram", report, m.bandwidth),
            {{"variable", v.variable},
             {"metric", "variogram"},
             {"chart", "line"},
             {"x_label", "lag"},
             {"y_label", "semivariance"},
             {"x", array(m.variogram->original.lags)},
             {"components", json::array({"gamma"})},
             {"bandwidth", m.variogram->original.bandwidth},
             {"original", side(m.variogram->original, dec ? &m.decomposition->original : nullptr)},
             {"synthetic", side(m.variogram->synthetic, dec ? &m.decomposition->synthetic : nullptr)}});
      }
      if (m.rank_order) {
        add(tag("rank_order", report, m.bandwidth),
            {{"variable", v.variable},
             {"metric", "rank_order"},
             {"chart", "box"},
             {"x_label", "rank-order variability"},
             {"bandwidth", m.bandwidth},
             {"quantile_levels", m.rank_order->original.levels},
             {"original", rank_side(m.rank_order->original)},
             {"synthetic", rank_side(m.rank_order->synthetic)}});
      }
      if (m.classes) {
        add(tag("class_profile", report, m.bandwidth),
            profile_document(v.variable, "class_profile", "area", *m.classes));
      }
      if (m.transitions) {
        add(tag("transitions", report, m.bandwidth),
            {{"variable", v.variable},
             {"metric", "transitions"},
             {"chart", "transitions"},
             {"x_label", "time"},
             {"x", array(m.transitions->original.grid.points())},
             {"classes", m.transitions->original.classes},
             {"bandwidth", m.bandwidth},
             {"max_gap", optional_number(report.options.transitions.max_gap)},
             {"original", transition_side(m.transitions->original)},
             {"synthetic", transition_side(m.transitions->synthetic)}});
      }
    }
    if (v.trajectories) {
      add("trajectories", {{"variable", v.variable},
                           {"metric", "trajectories"},
                           {"chart", "trajectories"},
                           {"x_label", "time"},
                           {"per_stratum", report.options.per_stratum},
                           {"original", trajectory_side(v.trajectories->original)},
                           {"synthetic", trajectory_side(v.trajectories->synthetic)}});
    }
    if (v.measurement) {
      const Paired<ProfileSeries> density{v.measurement->original_density,
                                          v.measurement->synthetic_density};
      add("density", profile_document(v.variable, "density", "line", density));
    }
    if (v.at_risk) {
      json doc = profile_document(v.variable, "at_risk", "line", *v.at_risk);
      doc["plot"] = json::array({1});  // proportion only
      add("at_risk", std::move(doc));
    }
  }
  std::stable_sort(docs.begin(), docs.end(), [](const SeriesDocument& a, const SeriesDocument& b) {
    return std::tie(a.variable, a.name) < std::tie(b.variable, b.name);
  });
  return docs;
}

namespace {

std::string cell(const json& v) {
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_string()) return quote_field(v.get<std::string>(), ',');
  return {};
}

void csv_row(std::ostringstream& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k > 0) out << ',';
    out << fields[k];
  }
  out << '\n';
}

}  // namespace

std::string series_csv(const json& doc) {
  std::ostringstream out;
  const std::string chart = doc.at("chart").get<std::string>();
  const char* sides[] = {"original", "synthetic"};
  if (chart == "line" || chart == "area") {
    const auto& comps = doc.at("components");
    const bool ess = doc.at("original").contains("ess");
    std::vector<std::string> header{quote_field(doc.at("x_label").get<std::string>(), ',')};
    for (const char* side : sides) {
      for (const auto& c : comps) header.push_back(quote_field(fmt::format("{}.{}", side, c.get<std::string>()), ','));
      if (ess) header.push_back(fmt::format("{}.ess", side));
    }
    csv_row(out, header);
    const auto& xs = doc.at("x");
    for (std::size_t t = 0; t < xs.size(); ++t) {
      std::vector<std::string> row{cell(xs[t])};
      for (const char* side : sides) {
        const auto& s = doc.at(side);
        for (std::size_t c = 0; c < comps.size(); ++c) row.push_back(cell(s.at("series")[c][t]));
        if (ess) row.push_back(cell(s.at("ess")[t]));
      }
      csv_row(out, row);
    }
  } else if (chart == "box") {
    csv_row(out, {"side", "subject", "value"});
    for (const char* side : sides) {
      const auto& s = doc.at(side);
      for (std::size_t k = 0; k < s.at("values").size(); ++k) {
        csv_row(out, {side, cell(s.at("subjects")[k]), cell(s.at("values")[k])});
      }
    }
  } else if (chart == "transitions") {
    csv_row(out, {"time", "from", "to", "original", "synthetic"});
    const auto& xs = doc.at("x");
    const auto& classes = doc.at("classes");
    for (std::size_t t = 0; t < xs.size(); ++t) {
      for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = 0; b < classes.size(); ++b) {
          csv_row(out, {cell(xs[t]), cell(classes[a]), cell(classes[b]),
                        cell(doc.at("original").at("probability")[t][a][b]),
                        cell(doc.at("synthetic").at("probability")[t][a][b])});
        }
      }
    }
  } else if (chart == "trajectories") {
    csv_row(out, {"side", "stratum", "subject", "time", "value"});
    for (const char* side : sides) {
      for (const auto& stratum : doc.at(side).at("strata")) {
        for (const auto& subject : stratum.at("subjects")) {
          for (std::size_t k = 0; k < subject.at("times").size(); ++k) {
            csv_row(out, {side, cell(stratum.at("label")), cell(subject.at("subject")),
                          cell(subject.at("times")[k]), cell(subject.at("values")[k])});
          }
        }
      }
    }
  }
  return out.str();
}

}  // namespace detail

std::string value_with_reference(double value, double reference) {
  return fmt::format("{:.2f} ({:.2f})", value, reference);
}

namespace {

using detail::write_file_atomic;

json stat_json(const SummaryStat& s) { return {{"mean", s.mean}, {"sd", s.sd ? json(*s.sd) : json(nullptr)}}; }

json block_json(const MeasurementBlock& b) {
  return {{"similarity", stat_json(b.similarity)},
          {"frobenius", stat_json(b.frobenius)},
          {"dropout_divergence", stat_json(b.dropout_divergence)},
          {"subsample_size", b.subsample_size}};
}

json measurement_summary(const MeasurementReport& m) {
  const auto entry = [](const SummaryStat& value, const SummaryStat& reference) {
    return json{{"value", value.mean},
                {"sd", value.sd ? json(*value.sd) : json(nullptr)},
                {"reference", reference.mean},
                {"reference_sd", reference.sd ? json(*reference.sd) : json(nullptr)},
                {"display", value_with_reference(value.mean, reference.mean)}};
  };
  return {{"similarity", entry(m.comparison.similarity, m.reference.similarity)},
          {"frobenius", entry(m.comparison.frobenius, m.reference.frobenius)},
          {"dropout_divergence",
           entry(m.comparison.dropout_divergence, m.reference.dropout_divergence)},
          {"subsample_size", m.comparison.subsample_size},
          {"reference_subsample_size", m.reference.subsample_size},
          {"iterations", m.iterations},
          {"seed", m.seed}};
}

json summary_json(const ComparisonReport& report) {
  json vars = json::object();
  for (const VariableReport& v : report.variables) {
    json entry = json::object();
    if (v.measurement) entry["measurement"] = measurement_summary(*v.measurement);
    json decomposition = json::array();
    json rank = json::array();
    for (const SmoothedMetrics& m : v.smoothed) {
      if (m.decomposition) {
        decomposition.push_back({{"bandwidth", m.bandwidth},
                                 {"original", detail::decomposition_json(m.decomposition->original)},
                                 {"synthetic", detail::decomposition_json(m.decomposition->synthetic)}});
      }
      if (m.rank_order) {
        const auto mean = [](const std::vector<double>& xs) {
          return xs.empty() ? json(nullptr)
                            : json(std::accumulate(xs.begin(), xs.end(), 0.0) /
                                   static_cast<double>(xs.size()));
        };
        rank.push_back({{"bandwidth", m.bandwidth},
                        {"original_mean", mean(m.rank_order->original.values)},
                        {"synthetic_mean", mean(m.rank_order->synthetic.values)}});
      }
    }
    if (!decomposition.empty()) entry["variance_decomposition"] = decomposition;
    if (!rank.empty()) entry["rank_order"] = rank;
    vars[v.variable] = std::move(entry);
  }
  return {{"variables", vars}, {"failures", report.failures.size()}};
}

json metadata_json(const ComparisonReport& report, const RunMetadata& metadata) {
  json config;
  try {
    config = json::parse(metadata.config_json);
  } catch (const json::parse_error&) {
    config = metadata.config_json;
  }
  json vars = json::array();
  for (const VariableReport& v : report.variables) {
    json entry = {{"variable", v.variable},
                  {"kind", std::string(to_string(v.kind))},
                  {"grid", {{"start", v.grid.t_min()}, {"end", v.grid.t_max()},
                            {"step", v.grid.step()}, {"points", v.grid.size()}}},
                  {"seed", v.seed}};
    if (v.kind == VariableKind::discrete) {
      entry["classes"] = v.classes;
      entry["synthetic_only_classes"] = v.synthetic_only_classes;
      entry["absent_in_synthetic"] = v.absent_in_synthetic;
    }
    vars.push_back(std::move(entry));
  }
  return {{"tool", "tempfid"},
          {"version", std::string(tool_version())},
          {"run_id", metadata.run_id},
          {"config", config},
          {"variables", vars},
          {"original_only", report.original_only},
          {"synthetic_only", report.synthetic_only}};
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

std::vector<std::filesystem::path> emit_series(const ComparisonReport& report,
                                               const std::filesystem::path& directory,
                                               const RunMetadata& metadata) {
  std::vector<std::filesystem::path> written;
  const auto write = [&](const std::filesystem::path& path, const std::string& content) {
    write_file_atomic(path, content);
    written.push_back(path);
  };
  write(directory / "metadata.json", dump(metadata_json(report, metadata)));
  if (!report.failures.empty()) {
    json failures = json::array();
    for (const MetricFailure& f : report.failures) {
      failures.push_back({{"variable", f.variable}, {"metric", f.metric}, {"message", f.message}});
    }
    write(directory / "failures.json", dump(failures));
  }
  if (report.variables.empty()) return written;
  write(directory / "summary.json", dump(summary_json(report)));
  for (const auto& doc : detail::series_documents(report)) {
    const std::filesystem::path base = directory / doc.variable / doc.name;
    write(std::filesystem::path(base).concat(".json"), dump(doc.body));
    write(std::filesystem::path(base).concat(".csv"), detail::series_csv(doc.body));
  }
  return written;
}

std::vector<std::filesystem::path> render_charts(const ComparisonReport& report,
                                                 const std::filesystem::path& directory,
                                                 const ChartOptions& options) {
  std::vector<std::filesystem::path> written;
  for (const auto& doc : detail::series_documents(report)) {
    const auto path = (directory / doc.variable / doc.name).concat(".svg");
    write_file_atomic(path, detail::render_svg(doc.body, options));
    written.push_back(path);
  }
  return written;
}

std::vector<std::filesystem::path> render_directory(const std::filesystem::path& directory,
                                                    const ChartOptions& options) {
  if (!std::filesystem::is_directory(directory)) {
    throw ConfigError(fmt::format("'{}' is not a directory", directory.string()));
  }
  std::vector<std::filesystem::path> inputs;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(directory)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    if (entry.path().parent_path() == directory) continue;  // run-level documents
    inputs.push_back(entry.path());
  }
  std::sort(inputs.begin(), inputs.end());
  std::vector<std::filesystem::path> written;
  for (const auto& input : inputs) {
    std::ifstream in(input);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
      doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
      throw DataError(fmt::format("{}: not a series document: {}", input.string(), e.what()));
    }
    if (!doc.is_object() || !doc.contains("chart")) {
      spdlog::warn("{}: no chart type, skipped", input.string());
      continue;
    }
    auto output = input;
    output.replace_extension(".svg");
    write_file_atomic(output, detail::render_svg(doc, options));
    written.push_back(output);
  }
  return written;
}

std::string reference_summary(const std::map<VariableId, MeasurementBlock>& blocks,
                              std::size_t iterations, std::uint64_t seed) {
  json vars = json::object();
  for (const auto& [variable, block] : blocks) {
    json entry = block_json(block);
    entry["display"] = {{"similarity", fmt::format("({:.2f})", block.similarity.mean)},
                        {"frobenius", fmt::format("({:.2f})", block.frobenius.mean)},
                        {"dropout_divergence", fmt::format("({:.2f})", block.dropout_divergence.mean)}};
    vars[variable] = std::move(entry);
  }
  return dump({{"variables", vars}, {"iterations", iterations}, {"seed", seed}});
}

}  // namespace tempfid
