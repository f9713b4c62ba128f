#pragma once

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "tempfid/report.hpp"

namespace tempfid::detail {

struct SeriesDocument {
  VariableId variable;
  std::string name;  // file stem, e.g. "mean" or "mean.h6"
  nlohmann::json body;
};

/// One document per (variable, metric[, bandwidth]), sorted by variable then name.
std::vector<SeriesDocument> series_documents(const ComparisonReport& report);

std::string series_csv(const nlohmann::json& document);

/// SVG chart for a series document; identical documents give identical bytes.
std::string render_svg(const nlohmann::json& document, const ChartOptions& options);

/// JSON null reads back as NaN.
inline double number_or_nan(const nlohmann::json& value) {
  return value.is_number() ? value.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace tempfid::detail
