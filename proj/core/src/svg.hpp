#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tempfid::detail {

using Point = std::pair<double, double>;

/// Minimal SVG builder. Coordinates are written with two decimals so output
/// bytes depend only on the inputs.
class Svg {
 public:
  Svg(double width, double height);

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view stroke = "none", double opacity = 1.0);
  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            double width = 1.0, std::string_view dash = {});
  void polyline(const std::vector<Point>& points, std::string_view stroke, double width = 1.5,
                std::string_view dash = {});
  void polygon(const std::vector<Point>& points, std::string_view fill, double opacity = 1.0);
  void circle(double x, double y, double r, std::string_view fill);
  void text(double x, double y, std::string_view content, double size = 11.0,
            std::string_view anchor = "start", double rotate = 0.0);

  std::string str() const;

 private:
  double width_;
  double height_;
  std::string body_;
};

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> ticks;
};

/// Rounded range and ticks covering [lo, hi]; an empty or zero-width range
/// is widened so the axis always spans a nonzero interval.
Axis nice_axis(double lo, double hi);

std::string tick_label(double value);
std::string xml_escape(std::string_view text);

}  // namespace tempfid::detail
