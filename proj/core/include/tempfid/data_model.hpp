#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tempfid {

using SubjectId = std::string;
using VariableId = std::string;
using ClassLabel = std::string;

enum class VariableKind { continuous, discrete };

std::string_view to_string(VariableKind kind);
VariableKind parse_variable_kind(std::string_view text);

/// Declares how a variable is measured and on which grid it is evaluated.
struct VariableSpec {
  VariableId id;
  VariableKind kind = VariableKind::continuous;
  std::vector<ClassLabel> classes;  // ordered class set, discrete only
  std::string time_unit = "hour";
  double grid_step = 1.0;

  /// Throws ConfigError when the declaration is inconsistent.
  void validate() const;

  std::optional<std::size_t> class_index(std::string_view label) const;

  bool operator==(const VariableSpec&) const = default;
};

using SpecMap = std::map<VariableId, VariableSpec>;

/// Continuous payload or discrete class label.
using Value = std::variant<double, ClassLabel>;

struct Observation {
  SubjectId subject;
  VariableId variable;
  double time = 0.0;
  Value value;

  bool operator==(const Observation&) const = default;
};

/// Time-ordered measurements of one variable for one subject. Discrete
/// variables store the class index (into VariableSpec::classes) in `values`.
struct Series {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  std::size_t code(std::size_t k) const { return static_cast<std::size_t>(values[k]); }
};

/// Long-format longitudinal dataset: one series per (subject, variable),
/// subjects in a stable roster order. Immutable once built.
class LongDataset {
 public:
  class Builder {
   public:
    explicit Builder(SpecMap specs);

    /// Validates against the variable's spec; throws DataError on violation.
    Builder& add(const Observation& observation);

    /// Adds a subject to the roster even if it never gets an observation.
    Builder& add_subject(const SubjectId& subject);

    LongDataset build() &&;

   private:
    SpecMap specs_;
    std::map<SubjectId, std::map<VariableId, std::vector<std::pair<double, double>>>> rows_;
  };

  LongDataset() = default;

  const std::vector<SubjectId>& subjects() const { return subjects_; }
  std::size_t subject_count() const { return subjects_.size(); }
  const SpecMap& specs() const { return specs_; }

  /// Throws DataError for unknown variables.
  const VariableSpec& spec(const VariableId& variable) const;
  bool has_variable(const VariableId& variable) const { return specs_.contains(variable); }
  std::vector<VariableId> variables() const;

  /// One series per roster subject (possibly empty).
  std::span<const Series> series(const VariableId& variable) const;

  std::size_t observation_count(const VariableId& variable) const;

  /// All observation times of the variable across subjects.
  std::vector<double> times(const VariableId& variable) const;

  /// Every observation, ordered by subject roster, variable id, then time.
  std::vector<Observation> observations() const;

  /// Subset of subjects, in the order given.
  LongDataset select_subjects(std::span<const std::size_t> indices) const;

  LongDataset restrict_variables(const std::set<VariableId>& keep) const;

  /// Re-expresses discrete values against new class lists. Each new list must
  /// contain every label of the old one.
  LongDataset recode(const SpecMap& specs) const;

 private:
  std::vector<SubjectId> subjects_;
  SpecMap specs_;
  std::map<VariableId, std::vector<Series>> series_;
};

/// Regular evaluation grid t_min + m * step, m = 0..floor((t_max - t_min) / step).
class TimeGrid {
 public:
  TimeGrid(double t_min, double t_max, double step);

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double step() const { return step_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t m) const { return points_[m]; }
  std::span<const double> points() const { return points_; }

  /// Index of the nearest grid point, ties toward the earlier point. Times
  /// outside the grid snap to the first or last point.
  std::size_t nearest(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double t_min_;
  double t_max_;
  double step_;
  std::vector<double> points_;
};

/// Grid spanning the union of both time sets. Throws DataError when both
/// are empty and ConfigError for a non-positive step.
TimeGrid build_time_grid(std::span<const double> original_times,
                         std::span<const double> synthetic_times, double step);

/// Binary subject x grid-point matrix: bit set iff the subject has at least
/// one observation snapping to that grid point.
class MeasurementMatrix {
 public:
  MeasurementMatrix(std::vector<SubjectId> subjects, TimeGrid grid);

  /// Test/interop constructor from explicit 0/1 rows.
  static MeasurementMatrix from_rows(const TimeGrid& grid,
                                     const std::vector<std::vector<int>>& rows);

  std::size_t rows() const { return subjects_.size(); }
  std::size_t cols() const { return grid_.size(); }
  const TimeGrid& grid() const { return grid_; }
  const std::vector<SubjectId>& subjects() const { return subjects_; }

  bool test(std::size_t row, std::size_t col) const;
  std::span<const std::uint64_t> row_words(std::size_t row) const;
  std::size_t words_per_row() const { return words_; }

  std::size_t count() const;
  std::size_t column_count(std::size_t col) const;

  MeasurementMatrix select_rows(std::span<const std::size_t> rows) const;

 private:
  friend MeasurementMatrix build_measurement_matrix(const LongDataset&, const VariableId&,
                                                    const TimeGrid&);
  void set(std::size_t row, std::size_t col);

  std::vector<SubjectId> subjects_;
  TimeGrid grid_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

MeasurementMatrix build_measurement_matrix(const LongDataset& dataset, const VariableId& variable,
                                           const TimeGrid& grid);

/// Per-subject dropout point as a grid index; nullopt for subjects without
/// any measurement of the variable.
struct DropoutVector {
  TimeGrid grid;
  std::vector<std::optional<std::size_t>> points;
};

DropoutVector dropout_points(const MeasurementMatrix& matrix);

}  // namespace tempfid
