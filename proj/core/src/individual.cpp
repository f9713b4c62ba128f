#include "tempfid/individual.hpp"

#include <algorithm>
#include <map>

#include "number_format.hpp"
#include "tempfid/covariance.hpp"
#include "tempfid/random.hpp"

namespace tempfid {

std::vector<std::string> percentile_class_labels(std::span<const double> boundaries) {
  std::vector<std::string> labels;
  std::string previous = "0";
  for (std::size_t k = 0; k <= boundaries.size(); ++k) {
    const std::string upper =
        k < boundaries.size() ? detail::format_number(boundaries[k] * 100.0, 6) : "100";
    labels.push_back((k == 0 ? "[" : "(") + previous + ", " + upper + "]");
    previous = upper;
  }
  return labels;
}

StratumAssignment baseline_strata(const LongDataset& dataset, const VariableId& variable,
                                  const TimeGrid& grid, Bandwidth h,
                                  std::span<const double> boundaries) {
  const ProfileSeries quantiles = quantile_profile(dataset, variable, grid, h, boundaries);
  StratumAssignment out;
  out.strata = percentile_class_labels(boundaries);
  const auto all_series = dataset.series(variable);
  std::vector<double> row(boundaries.size());
  for (std::size_t i = 0; i < all_series.size(); ++i) {
    const Series& s = all_series[i];
    if (s.empty()) continue;
    const std::size_t g = grid.nearest(s.times.front());
    for (std::size_t q = 0; q < boundaries.size(); ++q) row[q] = quantiles.at(g, q);
    const std::size_t bin = quantile_bin(s.values.front(), row);
    out.stratum_of.emplace(dataset.subjects()[i], out.strata[bin - 1]);
  }
  return out;
}

TrajectoryPanel sample_trajectories(const LongDataset& dataset, const VariableId& variable,
                                    const StratumAssignment& strata, std::size_t per_stratum,
                                    std::uint64_t seed) {
  TrajectoryPanel panel;
  panel.variable = variable;
  panel.strata = strata.strata;
  panel.samples.resize(strata.strata.size());

  std::map<std::string, std::size_t> slot;
  for (std::size_t s = 0; s < strata.strata.size(); ++s) slot.emplace(strata.strata[s], s);

  const auto all_series = dataset.series(variable);
  std::vector<std::vector<std::size_t>> members(strata.strata.size());
  for (std::size_t i = 0; i < all_series.size(); ++i) {
    if (all_series[i].empty()) continue;
    const auto it = strata.stratum_of.find(dataset.subjects()[i]);
    if (it == strata.stratum_of.end()) continue;
    const auto s = slot.find(it->second);
    if (s == slot.end()) continue;
    members[s->second].push_back(i);
  }

  for (std::size_t s = 0; s < members.size(); ++s) {
    Rng rng(derive_seed(seed, s));
    auto picks = sample_without_replacement(members[s].size(), per_stratum, rng);
    std::sort(picks.begin(), picks.end());
    for (const std::size_t p : picks) {
      const std::size_t i = members[s][p];
      panel.samples[s].push_back(
          {dataset.subjects()[i], all_series[i].times, all_series[i].values});
    }
  }
  return panel;
}

}  // namespace tempfid
