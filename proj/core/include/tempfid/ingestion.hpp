#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tempfid/data_model.hpp"

namespace tempfid {

/// Column names of a long-format table and its field delimiter.
struct ColumnSchema {
  std::string subject = "subject_id";
  std::string variable = "variable_id";
  std::string time = "time";
  std::string value = "value";
  char delimiter = ',';
};

/// Parses a delimiter-separated long table with a header row.
///
/// With `specs`, every variable must be declared; discrete declarations that
/// omit `classes` get them inferred from the labels in this table. Without
/// `specs`, a variable whose values all parse as finite numbers is treated
/// as continuous and anything else as discrete. Inferred class sets are the
/// observed labels in lexicographic order.
LongDataset parse_long_table(std::istream& in, const ColumnSchema& schema = {},
                             const SpecMap* specs = nullptr);

LongDataset read_long_table(const std::filesystem::path& path, const ColumnSchema& schema = {},
                            const SpecMap* specs = nullptr);

void write_long_table(std::ostream& out, const LongDataset& dataset,
                      const ColumnSchema& schema = {});

/// Spec document (JSON):
///   {"time_unit": "hour",
///    "variables": {"sbp": {"kind": "continuous", "grid_step": 1},
///                  "gcs": {"kind": "discrete", "classes": ["R-3", "R-15"]}}}
SpecMap parse_spec_document(std::string_view text);
SpecMap load_spec_file(const std::filesystem::path& path);
std::string spec_document(const SpecMap& specs);

struct ClassPresence {
  bool in_original = false;
  bool in_synthetic = false;
};

/// Variable declaration shared by both sides of a pair; `presence` runs
/// parallel to `spec.classes`.
struct UnifiedSpec {
  VariableSpec spec;
  std::vector<ClassPresence> presence;

  std::vector<ClassLabel> synthetic_only() const;
  std::vector<ClassLabel> absent_in_synthetic() const;
};

struct DatasetPair {
  LongDataset original;
  LongDataset synthetic;
  std::map<VariableId, UnifiedSpec> unified;
  std::vector<VariableId> original_only;
  std::vector<VariableId> synthetic_only;
};

/// Matches variables by id and unions discrete class sets (original order,
/// then labels only the synthetic side has). One-sided variables are
/// reported and dropped from both datasets.
DatasetPair pair_datasets(const LongDataset& original, const LongDataset& synthetic);

/// Seeded disjoint halves of the roster; the first half gets the extra
/// subject when the count is odd. Each half keeps roster order.
std::pair<LongDataset, LongDataset> split_reference(const LongDataset& dataset, std::uint64_t seed);

/// Subject -> stratum label, with the ordered list of strata.
struct StratumAssignment {
  std::vector<std::string> strata;
  std::map<SubjectId, std::string> stratum_of;
};

/// Two-column table (subject_id, stratum). Every roster subject must appear
/// exactly once.
StratumAssignment parse_strata_table(std::istream& in, const LongDataset& dataset,
                                     char delimiter = ',');

}  // namespace tempfid
