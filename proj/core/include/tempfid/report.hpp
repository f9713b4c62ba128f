#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tempfid/evaluation.hpp"
#include "tempfid/measurement.hpp"

namespace tempfid {

std::string_view tool_version();

struct RunMetadata {
  std::string run_id;
  std::string config_json = "{}";  // resolved configuration echoed into metadata.json
};

struct ChartOptions {
  bool free_y = false;   // separate y-axes for the original and synthetic panels
  bool overlay = false;  // one panel with both sides instead of side by side
};

/// Writes metadata.json, summary.json, failures.json (when any metric failed)
/// and one {variable}/{metric}[.hN].json plus .csv per series into
/// `directory`. Multi-bandwidth runs tag smoothed metrics with .hN. Output is
/// byte-identical for identical reports. Returns the files written.
std::vector<std::filesystem::path> emit_series(const ComparisonReport& report,
                                               const std::filesystem::path& directory,
                                               const RunMetadata& metadata);

/// SVG charts for every series of the report, next to the series files.
std::vector<std::filesystem::path> render_charts(const ComparisonReport& report,
                                                 const std::filesystem::path& directory,
                                                 const ChartOptions& options = {});

/// Renders the series documents already emitted under a run directory.
std::vector<std::filesystem::path> render_directory(const std::filesystem::path& directory,
                                                    const ChartOptions& options = {});

/// Two-decimal "value (reference)" display string.
std::string value_with_reference(double value, double reference);

/// Original-versus-original baseline document, keyed by variable.
std::string reference_summary(const std::map<VariableId, MeasurementBlock>& blocks,
                              std::size_t iterations, std::uint64_t seed);

namespace detail {
/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
}  // namespace detail

}  // namespace tempfid
