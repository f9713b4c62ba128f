#include "svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace tempfid::detail {

namespace {

std::string coord(double v) {
  std::string s = fmt::format("{:.2f}", v);
  if (s == "-0.00") s = "0.00";
  return s;
}

}  // namespace

Svg::Svg(double width, double height) : width_(width), height_(height) {}

void Svg::rect(double x, double y, double w, double h, std::string_view fill,
               std::string_view stroke, double opacity) {
  body_ += fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="{}")",
                       coord(x), coord(y), coord(w), coord(h), fill, stroke);
  if (opacity < 1.0) body_ += fmt::format(R"( fill-opacity="{}")", coord(opacity));
  body_ += "/>\n";
}

void Svg::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width,
               std::string_view dash) {
  body_ += fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}")",
                       coord(x1), coord(y1), coord(x2), coord(y2), stroke, coord(width));
  if (!dash.empty()) body_ += fmt::format(R"( stroke-dasharray="{}")", dash);
  body_ += "/>\n";
}

void Svg::polyline(const std::vector<Point>& points, std::string_view stroke, double width,
                   std::string_view dash) {
  body_ += R"(<polyline fill="none" points=")";
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k > 0) body_ += ' ';
    body_ += coord(points[k].first) + ',' + coord(points[k].second);
  }
  body_ += fmt::format(R"(" stroke="{}" stroke-width="{}")", stroke, coord(width));
  if (!dash.empty()) body_ += fmt::format(R"( stroke-dasharray="{}")", dash);
  body_ += "/>\n";
}

void Svg::polygon(const std::vector<Point>& points, std::string_view fill, double opacity) {
  body_ += R"(<polygon points=")";
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k > 0) body_ += ' ';
    body_ += coord(points[k].first) + ',' + coord(points[k].second);
  }
  body_ += fmt::format(R"(" fill="{}" stroke="none")", fill);
  if (opacity < 1.0) body_ += fmt::format(R"( fill-opacity="{}")", coord(opacity));
  body_ += "/>\n";
}

void Svg::circle(double x, double y, double r, std::string_view fill) {
  body_ += fmt::format(R"(<circle cx="{}" cy="{}" r="{}" fill="{}"/>)", coord(x), coord(y),
                       coord(r), fill);
  body_ += '\n';
}

void Svg::text(double x, double y, std::string_view content, double size, std::string_view anchor,
               double rotate) {
  body_ += fmt::format(R"(<text x="{}" y="{}" font-size="{}" text-anchor="{}")", coord(x),
                       coord(y), coord(size), anchor);
  if (rotate != 0.0) {
    body_ += fmt::format(" transform=\"rotate({} {} {})\"", coord(rotate), coord(x), coord(y));
  }
  body_ += fmt::format(">{}</text>\n", xml_escape(content));
}

std::string Svg::str() const {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n{2}</svg>\n",
      coord(width_), coord(height_), body_);
}

Axis nice_axis(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) {
    const double half = std::max(0.5, 0.05 * std::abs(lo));
    lo -= half;
    hi += half;
  }
  const double raw = (hi - lo) / 5.0;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  const double fraction = raw / magnitude;
  const double step = (fraction <= 1.0 ? 1.0 : fraction <= 2.0 ? 2.0 : fraction <= 5.0 ? 5.0 : 10.0) *
                      magnitude;
  Axis axis;
  axis.lo = std::floor(lo / step + 1e-9) * step;
  axis.hi = std::ceil(hi / step - 1e-9) * step;
  const auto count = static_cast<long>(std::llround((axis.hi - axis.lo) / step));
  for (long k = 0; k <= count; ++k) axis.ticks.push_back(axis.lo + static_cast<double>(k) * step);
  return axis;
}

std::string tick_label(double value) {
  if (std::abs(value) < 1e-12) return "0";
  return fmt::format("{:.6g}", value);
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace tempfid::detail
