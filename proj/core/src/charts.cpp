#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "series_document.hpp"
#include "svg.hpp"

namespace tempfid::detail {

namespace {

using nlohmann::json;

constexpr double kPanelWidth = 440.0;
constexpr double kPanelHeight = 280.0;
constexpr double kSmallPanelHeight = 170.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 44.0;
constexpr double kHeader = 30.0;
constexpr double kLegend = 28.0;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr const char* kSides[] = {"original", "synthetic"};
constexpr const char* kSyntheticDash = "5 3";

std::string_view color(std::size_t k) { return kPalette[k % std::size(kPalette)]; }

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void add(const Range& r) {
    add(r.lo);
    add(r.hi);
  }
};

struct Frame {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
  double height = 0.0;
  Axis x;
  Axis y;

  double px(double v) const { return x0 + (v - x.lo) / (x.hi - x.lo) * width; }
  double py(double v) const { return y0 + height - (v - y.lo) / (y.hi - y.lo) * height; }
};

// Panel grid: one column in overlay mode, otherwise original left and synthetic right.
struct Layout {
  std::size_t columns = 2;
  std::size_t rows = 1;
  double panel_height = kPanelHeight;

  double width() const { return static_cast<double>(columns) * kPanelWidth; }
  double height() const { return kHeader + static_cast<double>(rows) * panel_height + kLegend; }

  Frame frame(std::size_t row, std::size_t column, const Axis& x, const Axis& y) const {
    Frame f;
    f.x0 = static_cast<double>(column) * kPanelWidth + kLeft;
    f.y0 = kHeader + static_cast<double>(row) * panel_height + kTop;
    f.width = kPanelWidth - kLeft - kRight;
    f.height = panel_height - kTop - kBottom;
    f.x = x;
    f.y = y;
    return f;
  }
};

void draw_frame(Svg& svg, const Frame& f, std::string_view title, std::string_view x_label,
                std::string_view y_label) {
  svg.rect(f.x0, f.y0, f.width, f.height, "none", "#444444");
  for (const double t : f.x.ticks) {
    const double x = f.px(t);
    svg.line(x, f.y0 + f.height, x, f.y0 + f.height + 4, "#444444");
    svg.text(x, f.y0 + f.height + 16, tick_label(t), 10, "middle");
  }
  for (const double t : f.y.ticks) {
    const double y = f.py(t);
    svg.line(f.x0 - 4, y, f.x0, y, "#444444");
    svg.line(f.x0, y, f.x0 + f.width, y, "#eeeeee", 0.5);
    svg.text(f.x0 - 6, y + 3.5, tick_label(t), 10, "end");
  }
  svg.text(f.x0 + f.width / 2, f.y0 - 8, title, 12, "middle");
  if (!x_label.empty()) svg.text(f.x0 + f.width / 2, f.y0 + f.height + 32, x_label, 11, "middle");
  if (!y_label.empty()) {
    svg.text(f.x0 - 46, f.y0 + f.height / 2, y_label, 11, "middle", -90.0);
  }
}

std::string header(const json& doc) {
  std::string title = fmt::format("{}: {}", doc.value("variable", std::string{}),
                                  doc.value("metric", std::string{}));
  if (doc.contains("bandwidth") && doc["bandwidth"].is_number()) {
    title += fmt::format(" (h = {})", tick_label(doc["bandwidth"].get<double>()));
  }
  return title;
}

void legend(Svg& svg, const Layout& layout, const std::vector<std::string>& labels,
            bool overlay) {
  double x = 12.0;
  const double y = layout.height() - 10.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    svg.rect(x, y - 9, 10, 10, color(k));
    svg.text(x + 14, y, labels[k], 10);
    x += 24.0 + 6.5 * static_cast<double>(labels[k].size());
  }
  if (overlay) svg.text(layout.width() - 12, y, "solid: original, dashed: synthetic", 10, "end");
}

std::string panel_title(std::size_t side, bool overlay) {
  return overlay ? "original vs synthetic" : kSides[side];
}

std::vector<double> numbers(const json& array) {
  std::vector<double> out;
  out.reserve(array.size());
  for (const auto& v : array) out.push_back(number_or_nan(v));
  return out;
}

// Polylines over runs of defined points; lone points become dots.
void draw_series(Svg& svg, const Frame& f, const std::vector<double>& xs,
                 const std::vector<double>& ys, std::string_view stroke, std::string_view dash) {
  std::vector<Point> run;
  const auto flush = [&] {
    if (run.size() == 1) svg.circle(run[0].first, run[0].second, 2.0, stroke);
    if (run.size() > 1) svg.polyline(run, stroke, 1.5, dash);
    run.clear();
  };
  for (std::size_t k = 0; k < xs.size() && k < ys.size(); ++k) {
    if (!std::isfinite(ys[k])) {
      flush();
      continue;
    }
    run.emplace_back(f.px(xs[k]), f.py(ys[k]));
  }
  flush();
}

Range x_range(const std::vector<double>& xs) {
  Range r;
  for (const double x : xs) r.add(x);
  return r;
}

// Shared or per-side y-axes.
std::array<Axis, 2> y_axes(const std::array<Range, 2>& ranges, const ChartOptions& options) {
  if (options.free_y && !options.overlay) return {nice_axis(ranges[0].lo, ranges[0].hi),
                                                  nice_axis(ranges[1].lo, ranges[1].hi)};
  Range shared = ranges[0];
  shared.add(ranges[1]);
  const Axis axis = nice_axis(shared.lo, shared.hi);
  return {axis, axis};
}

std::string render_line(const json& doc, const ChartOptions& options) {
  const std::vector<double> xs = numbers(doc.at("x"));
  std::vector<std::string> components = doc.at("components").get<std::vector<std::string>>();
  std::vector<std::size_t> plot;
  if (doc.contains("plot")) {
    plot = doc["plot"].get<std::vector<std::size_t>>();
  } else {
    for (std::size_t c = 0; c < components.size(); ++c) plot.push_back(c);
  }
  std::array<Range, 2> ranges;
  for (std::size_t s = 0; s < 2; ++s) {
    const json& side = doc.at(kSides[s]);
    for (const std::size_t c : plot) {
      for (const double v : numbers(side.at("series")[c])) ranges[s].add(v);
    }
    if (side.contains("outliers")) {
      for (const auto& o : side["outliers"]) ranges[s].add(number_or_nan(o.at("value")));
    }
  }
  const Layout layout{options.overlay ? 1u : 2u, 1, kPanelHeight};
  const Range xr = x_range(xs);
  const Axis xa = nice_axis(xr.lo, xr.hi);
  const auto ya = y_axes(ranges, options);
  const double threshold = doc.value("low_support_ess", 0.0);

  Svg svg(layout.width(), layout.height());
  svg.text(12, 20, header(doc), 14);
  for (std::size_t s = 0; s < 2; ++s) {
    const std::size_t column = options.overlay ? 0 : s;
    const Frame f = layout.frame(0, column, xa, ya[s]);
    const json& side = doc.at(kSides[s]);
    if (s == 0 || !options.overlay) {
      draw_frame(svg, f, panel_title(s, options.overlay), doc.value("x_label", ""),
                 doc.value("y_label", ""));
    }
    if (threshold > 0.0 && side.contains("ess") && xs.size() > 1) {
      const std::vector<double> ess = numbers(side["ess"]);
      const double half = (xs[1] - xs[0]) / 2.0;
      for (std::size_t k = 0; k < ess.size(); ++k) {
        if (!(ess[k] < threshold)) continue;
        const double a = f.px(std::max(xs[k] - half, xa.lo));
        const double b = f.px(std::min(xs[k] + half, xa.hi));
        svg.rect(a, f.y0, b - a, f.height, "#999999", "none", 0.15);
      }
    }
    const std::string_view dash = options.overlay && s == 1 ? kSyntheticDash : "";
    for (std::size_t k = 0; k < plot.size(); ++k) {
      draw_series(svg, f, xs, numbers(side.at("series")[plot[k]]), color(k), dash);
    }
    if (side.contains("outliers")) {
      for (const auto& o : side["outliers"]) {
        svg.circle(f.px(number_or_nan(o.at("time"))), f.py(number_or_nan(o.at("value"))), 1.5,
                   o.at("above").get<bool>() ? "#b22222" : "#4169e1");
      }
    }
  }
  std::vector<std::string> labels;
  for (const std::size_t c : plot) labels.push_back(components[c]);
  legend(svg, layout, labels, options.overlay);
  return svg.str();
}

// Stacked bands over the component rows; a time is drawn only when every
// component is defined there, so masked points leave a gap.
void draw_stack(Svg& svg, const Frame& f, const std::vector<double>& xs,
                const std::vector<std::vector<double>>& rows, bool outline_only) {
  const std::size_t n = xs.size();
  std::vector<bool> defined(n, true);
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(row[k])) defined[k] = false;
    }
  }
  const double half = n > 1 ? (xs[1] - xs[0]) / 4.0 : 0.25;
  std::size_t k = 0;
  while (k < n) {
    if (!defined[k]) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < n && defined[end]) ++end;
    std::vector<double> segment_x(xs.begin() + static_cast<std::ptrdiff_t>(k),
                                  xs.begin() + static_cast<std::ptrdiff_t>(end));
    if (segment_x.size() == 1) segment_x = {segment_x[0] - half, segment_x[0] + half};
    const auto value_at = [&](std::size_t row, std::size_t j) {
      return rows[row][end - k == 1 ? k : k + j];
    };
    std::vector<double> lower(segment_x.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::vector<double> upper(segment_x.size());
      for (std::size_t j = 0; j < segment_x.size(); ++j) upper[j] = lower[j] + value_at(r, j);
      if (outline_only) {
        std::vector<Point> line;
        for (std::size_t j = 0; j < segment_x.size(); ++j) {
          line.emplace_back(f.px(segment_x[j]), f.py(upper[j]));
        }
        svg.polyline(line, "#222222", 1.0, kSyntheticDash);
      } else {
        std::vector<Point> polygon;
        for (std::size_t j = 0; j < segment_x.size(); ++j) {
          polygon.emplace_back(f.px(segment_x[j]), f.py(upper[j]));
        }
        for (std::size_t j = segment_x.size(); j-- > 0;) {
          polygon.emplace_back(f.px(segment_x[j]), f.py(lower[j]));
        }
        svg.polygon(polygon, color(r), 0.85);
      }
      lower = std::move(upper);
    }
    k = end;
  }
}

std::string render_area(const json& doc, const ChartOptions& options) {
  const std::vector<double> xs = numbers(doc.at("x"));
  const auto components = doc.at("components").get<std::vector<std::string>>();
  const Layout layout{options.overlay ? 1u : 2u, 1, kPanelHeight};
  const Range xr = x_range(xs);
  const Axis xa = nice_axis(xr.lo, xr.hi);
  const Axis ya = nice_axis(0.0, 1.0);
  Svg svg(layout.width(), layout.height());
  svg.text(12, 20, header(doc), 14);
  for (std::size_t s = 0; s < 2; ++s) {
    const Frame f = layout.frame(0, options.overlay ? 0 : s, xa, ya);
    std::vector<std::vector<double>> rows;
    for (const auto& series : doc.at(kSides[s]).at("series")) rows.push_back(numbers(series));
    if (s == 0 || !options.overlay) {
      draw_frame(svg, f, panel_title(s, options.overlay), doc.value("x_label", ""), "proportion");
    }
    draw_stack(svg, f, xs, rows, options.overlay && s == 1);
  }
  legend(svg, layout, components, options.overlay);
  return svg.str();
}

std::string render_transitions(const json& doc, const ChartOptions& options) {
  const std::vector<double> xs = numbers(doc.at("x"));
  const auto classes = doc.at("classes").get<std::vector<std::string>>();
  const Layout layout{options.overlay ? 1u : 2u, std::max<std::size_t>(classes.size(), 1),
                      kSmallPanelHeight};
  const Range xr = x_range(xs);
  const Axis xa = nice_axis(xr.lo, xr.hi);
  const Axis ya = nice_axis(0.0, 1.0);
  Svg svg(layout.width(), layout.height());
  svg.text(12, 20, header(doc), 14);
  for (std::size_t s = 0; s < 2; ++s) {
    const json& probability = doc.at(kSides[s]).at("probability");
    for (std::size_t a = 0; a < classes.size(); ++a) {
      const Frame f = layout.frame(a, options.overlay ? 0 : s, xa, ya);
      std::vector<std::vector<double>> rows(classes.size(), std::vector<double>(xs.size()));
      for (std::size_t t = 0; t < xs.size(); ++t) {
        for (std::size_t b = 0; b < classes.size(); ++b) {
          rows[b][t] = number_or_nan(probability[t][a][b]);
        }
      }
      if (s == 0 || !options.overlay) {
        draw_frame(svg, f, fmt::format("{}: from {}", panel_title(s, options.overlay), classes[a]),
                   a + 1 == classes.size() ? doc.value("x_label", "") : "", "probability");
      }
      draw_stack(svg, f, xs, rows, options.overlay && s == 1);
    }
  }
  legend(svg, layout, classes, options.overlay);
  return svg.str();
}

std::string render_box(const json& doc, const ChartOptions& options) {
  const Layout layout{options.overlay ? 1u : 2u, 1, kPanelHeight};
  const Axis xa = nice_axis(-1.0, 1.0);
  std::array<Range, 2> ranges;
  for (std::size_t s = 0; s < 2; ++s) {
    ranges[s].add(0.0);
    const json& side = doc.at(kSides[s]);
    if (side.at("density").is_object()) {
      for (const double y : numbers(side["density"].at("y"))) ranges[s].add(y * 1.35);
    }
  }
  const auto ya = y_axes(ranges, options);
  Svg svg(layout.width(), layout.height());
  svg.text(12, 20, header(doc), 14);
  for (std::size_t s = 0; s < 2; ++s) {
    const Frame f = layout.frame(0, options.overlay ? 0 : s, xa, ya[s]);
    const json& side = doc.at(kSides[s]);
    if (s == 0 || !options.overlay) {
      draw_frame(svg, f, panel_title(s, options.overlay), doc.value("x_label", ""), "density");
    }
    const std::string_view stroke = color(s);
    const std::string_view dash = options.overlay && s == 1 ? kSyntheticDash : "";
    if (!side.at("box").is_object()) {
      svg.text(f.x0 + f.width / 2, f.y0 + f.height / 2 + 14.0 * static_cast<double>(s),
               fmt::format("{}: no subject with two observations", kSides[s]), 11, "middle");
      continue;
    }
    draw_series(svg, f, numbers(side["density"].at("x")), numbers(side["density"].at("y")), stroke,
                dash);
    const json& box = side["box"];
    const double center = f.y0 + 16.0 + (options.overlay ? 22.0 * static_cast<double>(s) : 0.0);
    const double q1 = f.px(box.at("q1").get<double>());
    const double q3 = f.px(box.at("q3").get<double>());
    const double median = f.px(box.at("median").get<double>());
    const double lo = f.px(box.at("whisker_low").get<double>());
    const double hi = f.px(box.at("whisker_high").get<double>());
    svg.line(lo, center, q1, center, stroke, 1.2, dash);
    svg.line(q3, center, hi, center, stroke, 1.2, dash);
    svg.line(lo, center - 5, lo, center + 5, stroke, 1.2);
    svg.line(hi, center - 5, hi, center + 5, stroke, 1.2);
    svg.rect(q1, center - 8, std::max(q3 - q1, 0.5), 16, "none", stroke);
    svg.line(median, center - 8, median, center + 8, stroke, 2.0);
  }
  legend(svg, layout, {"original", "synthetic"}, options.overlay);
  return svg.str();
}

std::string render_trajectories(const json& doc, const ChartOptions& options) {
  std::vector<std::string> strata;
  for (const char* side : kSides) {
    for (const auto& s : doc.at(side).at("strata")) {
      const auto label = s.at("label").get<std::string>();
      if (std::find(strata.begin(), strata.end(), label) == strata.end()) strata.push_back(label);
    }
  }
  const Layout layout{options.overlay ? 1u : 2u, std::max<std::size_t>(strata.size(), 1),
                      kSmallPanelHeight};
  Range xr;
  std::array<Range, 2> ranges;
  for (std::size_t s = 0; s < 2; ++s) {
    for (const auto& stratum : doc.at(kSides[s]).at("strata")) {
      for (const auto& subject : stratum.at("subjects")) {
        for (const double t : numbers(subject.at("times"))) xr.add(t);
        for (const double v : numbers(subject.at("values"))) ranges[s].add(v);
      }
    }
  }
  const Axis xa = nice_axis(xr.lo, xr.hi);
  const auto ya = y_axes(ranges, options);
  Svg svg(layout.width(), layout.height());
  svg.text(12, 20, header(doc), 14);
  for (std::size_t s = 0; s < 2; ++s) {
    const std::string_view dash = options.overlay && s == 1 ? kSyntheticDash : "";
    for (std::size_t r = 0; r < strata.size(); ++r) {
      const Frame f = layout.frame(r, options.overlay ? 0 : s, xa, ya[s]);
      if (s == 0 || !options.overlay) {
        draw_frame(svg, f, fmt::format("{}: {}", panel_title(s, options.overlay), strata[r]),
                   r + 1 == strata.size() ? doc.value("x_label", "") : "", "value");
      }
      for (const auto& stratum : doc.at(kSides[s]).at("strata")) {
        if (stratum.at("label").get<std::string>() != strata[r]) continue;
        std::size_t k = 0;
        for (const auto& subject : stratum.at("subjects")) {
          const std::string_view stroke = options.overlay ? color(s) : color(k++);
          draw_series(svg, f, numbers(subject.at("times")), numbers(subject.at("values")), stroke,
                      dash);
        }
      }
    }
  }
  legend(svg, layout, {}, options.overlay);
  return svg.str();
}

}  // namespace

std::string render_svg(const json& doc, const ChartOptions& options) {
  const std::string chart = doc.at("chart").get<std::string>();
  if (chart == "line") return render_line(doc, options);
  if (chart == "area") return render_area(doc, options);
  if (chart == "transitions") return render_transitions(doc, options);
  if (chart == "box") return render_box(doc, options);
  if (chart == "trajectories") return render_trajectories(doc, options);
  throw std::invalid_argument(fmt::format("unknown chart type '{}'", chart));
}

}  // namespace tempfid::detail
