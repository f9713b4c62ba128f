#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tempfid/evaluation.hpp"

namespace tempfid::cli {

/// Every setting a run depends on. Defaults are the documented ones.
struct RunConfig {
  std::string original;
  std::string synthetic;
  std::string spec;
  std::string out = "reports";
  std::string model;
  std::string strata;
  std::string synthetic_strata;
  std::vector<double> bandwidths{kDefaultBandwidth};
  std::optional<double> grid_step;
  std::vector<double> quantiles{0.05, 0.25, 0.50, 0.75, 0.95};
  std::size_t subsample = kDefaultSubsampleSize;
  std::size_t iterations = kDefaultIterations;
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
  std::vector<std::string> vars;
  std::vector<std::string> exclude;
  std::optional<double> variogram_bandwidth;
  std::optional<double> max_gap;
  std::size_t per_stratum = kDefaultPerStratum;
  std::size_t jobs = 1;
  bool free_y = false;
  bool overlay = false;
  bool charts = true;
  bool measurement = true;
};

/// Applies the keys of a JSON config document on top of `config`. Keys use
/// the long flag names with underscores. Throws ConfigError naming the key.
void apply_config_document(RunConfig& config, std::string_view text);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Canonical JSON echo of the resolved configuration (sorted keys).
std::string config_json(const RunConfig& config);

/// 16 hex digits derived from the canonical echo.
std::string run_id(const RunConfig& config);

/// Comma-separated numbers, e.g. "6,12"; ConfigError names the flag.
std::vector<double> parse_number_list(std::string_view text, std::string_view flag);
std::vector<std::string> parse_name_list(std::string_view text);

EvaluationOptions evaluation_options(const RunConfig& config);

}  // namespace tempfid::cli
