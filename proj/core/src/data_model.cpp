#include "tempfid/data_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "tempfid/errors.hpp"

namespace tempfid {

std::string_view to_string(VariableKind kind) {
  return kind == VariableKind::continuous ? "continuous" : "discrete";
}

VariableKind parse_variable_kind(std::string_view text) {
  if (text == "continuous") return VariableKind::continuous;
  if (text == "discrete") return VariableKind::discrete;
  throw ConfigError(fmt::format("unknown variable kind '{}' (expected continuous or discrete)", text));
}

void VariableSpec::validate() const {
  if (id.empty()) throw ConfigError("variable id must not be empty");
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw ConfigError(fmt::format("variable '{}': grid_step must be a positive finite number", id));
  }
  if (kind == VariableKind::discrete) {
    if (classes.empty()) {
      throw ConfigError(fmt::format("variable '{}': discrete variables need a class set", id));
    }
    std::set<ClassLabel> seen;
    for (const auto& label : classes) {
      if (!seen.insert(label).second) {
        throw ConfigError(fmt::format("variable '{}': duplicate class label '{}'", id, label));
      }
    }
  }
}

std::optional<std::size_t> VariableSpec::class_index(std::string_view label) const {
  const auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes.begin());
}

// ---------------------------------------------------------------------------
// LongDataset

LongDataset::Builder::Builder(SpecMap specs) : specs_(std::move(specs)) {
  for (const auto& [id, spec] : specs_) {
    if (id != spec.id) throw ConfigError(fmt::format("spec key '{}' does not match id '{}'", id, spec.id));
    spec.validate();
  }
}

LongDataset::Builder& LongDataset::Builder::add(const Observation& obs) {
  const auto spec_it = specs_.find(obs.variable);
  if (spec_it == specs_.end()) {
    throw DataError(fmt::format("unknown variable '{}'", obs.variable));
  }
  if (!std::isfinite(obs.time)) {
    throw DataError(fmt::format("subject '{}', variable '{}': non-finite time", obs.subject,
                                obs.variable));
  }
  const VariableSpec& spec = spec_it->second;
  double payload = 0.0;
  if (spec.kind == VariableKind::continuous) {
    const auto* value = std::get_if<double>(&obs.value);
    if (value == nullptr) {
      throw DataError(fmt::format("variable '{}' is continuous but got a class label", obs.variable));
    }
    if (!std::isfinite(*value)) {
      throw DataError(fmt::format("subject '{}', variable '{}': non-finite value", obs.subject,
                                  obs.variable));
    }
    payload = *value;
  } else {
    const auto* label = std::get_if<ClassLabel>(&obs.value);
    if (label == nullptr) {
      throw DataError(fmt::format("variable '{}' is discrete but got a number", obs.variable));
    }
    const auto index = spec.class_index(*label);
    if (!index) {
      throw DataError(fmt::format("variable '{}': label '{}' is not in the declared class set",
                                  obs.variable, *label));
    }
    payload = static_cast<double>(*index);
  }
  rows_[obs.subject][obs.variable].emplace_back(obs.time, payload);
  return *this;
}

LongDataset::Builder& LongDataset::Builder::add_subject(const SubjectId& subject) {
  rows_[subject];
  return *this;
}

LongDataset LongDataset::Builder::build() && {
  LongDataset out;
  out.specs_ = std::move(specs_);
  out.subjects_.reserve(rows_.size());
  for (const auto& [subject, unused] : rows_) out.subjects_.push_back(subject);
  const std::size_t n = out.subjects_.size();
  for (const auto& [id, spec] : out.specs_) out.series_[id].resize(n);

  std::size_t row = 0;
  for (auto& [subject, by_variable] : rows_) {
    for (auto& [variable, points] : by_variable) {
      std::stable_sort(points.begin(), points.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      Series& series = out.series_[variable][row];
      series.times.reserve(points.size());
      series.values.reserve(points.size());
      for (const auto& [t, v] : points) {
        series.times.push_back(t);
        series.values.push_back(v);
      }
    }
    ++row;
  }
  rows_.clear();
  return out;
}

const VariableSpec& LongDataset::spec(const VariableId& variable) const {
  const auto it = specs_.find(variable);
  if (it == specs_.end()) throw DataError(fmt::format("unknown variable '{}'", variable));
  return it->second;
}

std::vector<VariableId> LongDataset::variables() const {
  std::vector<VariableId> ids;
  ids.reserve(specs_.size());
  for (const auto& [id, spec] : specs_) ids.push_back(id);
  return ids;
}

std::span<const Series> LongDataset::series(const VariableId& variable) const {
  const auto it = series_.find(variable);
  if (it == series_.end()) throw DataError(fmt::format("unknown variable '{}'", variable));
  return it->second;
}

std::size_t LongDataset::observation_count(const VariableId& variable) const {
  std::size_t total = 0;
  for (const auto& s : series(variable)) total += s.size();
  return total;
}

std::vector<double> LongDataset::times(const VariableId& variable) const {
  std::vector<double> out;
  out.reserve(observation_count(variable));
  for (const auto& s : series(variable)) out.insert(out.end(), s.times.begin(), s.times.end());
  return out;
}

std::vector<Observation> LongDataset::observations() const {
  std::vector<Observation> out;
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    for (const auto& [variable, all_series] : series_) {
      const VariableSpec& sp = specs_.at(variable);
      const Series& s = all_series[i];
      for (std::size_t k = 0; k < s.size(); ++k) {
        Value value = sp.kind == VariableKind::continuous ? Value{s.values[k]}
                                                           : Value{sp.classes[s.code(k)]};
        out.push_back(Observation{subjects_[i], variable, s.times[k], std::move(value)});
      }
    }
  }
  return out;
}

LongDataset LongDataset::select_subjects(std::span<const std::size_t> indices) const {
  LongDataset out;
  out.specs_ = specs_;
  out.subjects_.reserve(indices.size());
  for (const std::size_t i : indices) {
    if (i >= subjects_.size()) throw DataError("subject index out of range");
    out.subjects_.push_back(subjects_[i]);
  }
  for (const auto& [variable, all_series] : series_) {
    auto& dest = out.series_[variable];
    dest.reserve(indices.size());
    for (const std::size_t i : indices) dest.push_back(all_series[i]);
  }
  return out;
}

LongDataset LongDataset::restrict_variables(const std::set<VariableId>& keep) const {
  LongDataset out;
  out.subjects_ = subjects_;
  for (const auto& id : keep) {
    const auto it = specs_.find(id);
    if (it == specs_.end()) continue;
    out.specs_.emplace(id, it->second);
    out.series_.emplace(id, series_.at(id));
  }
  return out;
}

LongDataset LongDataset::recode(const SpecMap& specs) const {
  LongDataset out = *this;
  for (auto& [id, spec] : out.specs_) {
    const auto it = specs.find(id);
    if (it == specs.end()) continue;
    const VariableSpec& target = it->second;
    if (target.kind != spec.kind) {
      throw DataError(fmt::format("variable '{}': cannot recode across kinds", id));
    }
    if (spec.kind == VariableKind::discrete) {
      std::vector<double> mapping(spec.classes.size());
      for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const auto index = target.class_index(spec.classes[c]);
        if (!index) {
          throw DataError(fmt::format("variable '{}': class '{}' missing from the new class set", id,
                                      spec.classes[c]));
        }
        mapping[c] = static_cast<double>(*index);
      }
      for (Series& s : out.series_[id]) {
        for (double& v : s.values) v = mapping[static_cast<std::size_t>(v)];
      }
    }
    spec = target;
  }
  return out;
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(double t_min, double t_max, double step)
    : t_min_(t_min), t_max_(t_max), step_(step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ConfigError("grid step must be a positive finite number");
  }
  if (!std::isfinite(t_min) || !std::isfinite(t_max) || t_max < t_min) {
    throw ConfigError("grid bounds must be finite with t_min <= t_max");
  }
  auto count = static_cast<std::size_t>(std::floor((t_max - t_min) / step));
  // Guard the floor against representation error in the division.
  while (t_min + static_cast<double>(count + 1) * step <= t_max) ++count;
  while (count > 0 && t_min + static_cast<double>(count) * step > t_max) --count;
  points_.reserve(count + 1);
  for (std::size_t m = 0; m <= count; ++m) points_.push_back(t_min + static_cast<double>(m) * step);
}

std::size_t TimeGrid::nearest(double t) const {
  if (t <= points_.front()) return 0;
  if (t >= points_.back()) return points_.size() - 1;
  auto lo = static_cast<std::size_t>(std::floor((t - t_min_) / step_));
  lo = std::min(lo, points_.size() - 1);
  // Correct for division rounding so that points_[lo] <= t < points_[lo + 1].
  while (lo > 0 && points_[lo] > t) --lo;
  while (lo + 1 < points_.size() && points_[lo + 1] <= t) ++lo;
  if (lo + 1 == points_.size()) return lo;
  return (t - points_[lo] <= points_[lo + 1] - t) ? lo : lo + 1;
}

TimeGrid build_time_grid(std::span<const double> original_times,
                         std::span<const double> synthetic_times, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ConfigError("grid step must be a positive finite number");
  }
  if (original_times.empty() && synthetic_times.empty()) {
    throw DataError("no measurements for variable");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto set : {original_times, synthetic_times}) {
    for (const double t : set) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  return TimeGrid(lo, hi, step);
}

// ---------------------------------------------------------------------------
// MeasurementMatrix

MeasurementMatrix::MeasurementMatrix(std::vector<SubjectId> subjects, TimeGrid grid)
    : subjects_(std::move(subjects)),
      grid_(std::move(grid)),
      words_((grid_.size() + 63) / 64),
      bits_(subjects_.size() * words_, 0) {}

MeasurementMatrix MeasurementMatrix::from_rows(const TimeGrid& grid,
                                               const std::vector<std::vector<int>>& rows) {
  std::vector<SubjectId> ids;
  ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) ids.push_back(fmt::format("row{}", i));
  MeasurementMatrix m(std::move(ids), grid);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != grid.size()) throw DataError("row length does not match grid size");
    for (std::size_t t = 0; t < rows[i].size(); ++t) {
      if (rows[i][t] != 0) m.set(i, t);
    }
  }
  return m;
}

bool MeasurementMatrix::test(std::size_t row, std::size_t col) const {
  return (bits_[row * words_ + col / 64] >> (col % 64)) & 1U;
}

void MeasurementMatrix::set(std::size_t row, std::size_t col) {
  bits_[row * words_ + col / 64] |= std::uint64_t{1} << (col % 64);
}

std::span<const std::uint64_t> MeasurementMatrix::row_words(std::size_t row) const {
  return std::span<const std::uint64_t>(bits_).subspan(row * words_, words_);
}

std::size_t MeasurementMatrix::count() const {
  std::size_t total = 0;
  for (const auto word : bits_) total += static_cast<std::size_t>(std::popcount(word));
  return total;
}

std::size_t MeasurementMatrix::column_count(std::size_t col) const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < rows(); ++i) total += test(i, col) ? 1 : 0;
  return total;
}

MeasurementMatrix MeasurementMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<SubjectId> ids;
  ids.reserve(rows.size());
  for (const std::size_t r : rows) ids.push_back(subjects_.at(r));
  MeasurementMatrix out(std::move(ids), grid_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(bits_.begin() + static_cast<std::ptrdiff_t>(rows[i] * words_), words_,
                out.bits_.begin() + static_cast<std::ptrdiff_t>(i * words_));
  }
  return out;
}

MeasurementMatrix build_measurement_matrix(const LongDataset& dataset, const VariableId& variable,
                                           const TimeGrid& grid) {
  MeasurementMatrix m(dataset.subjects(), grid);
  const auto all_series = dataset.series(variable);
  for (std::size_t i = 0; i < all_series.size(); ++i) {
    for (const double t : all_series[i].times) m.set(i, grid.nearest(t));
  }
  return m;
}

DropoutVector dropout_points(const MeasurementMatrix& matrix) {
  DropoutVector out{matrix.grid(), {}};
  out.points.reserve(matrix.rows());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    std::optional<std::size_t> last;
    const auto words = matrix.row_words(i);
    for (std::size_t w = words.size(); w-- > 0;) {
      if (words[w] != 0) {
        last = w * 64 + 63 - static_cast<std::size_t>(std::countl_zero(words[w]));
        break;
      }
    }
    out.points.push_back(last);
  }
  return out;
}

}  // namespace tempfid
