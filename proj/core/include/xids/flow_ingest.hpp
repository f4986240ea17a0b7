#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xids/dataset.hpp"

namespace xids {

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

enum class CellKind : std::uint8_t {
  kFinite,
  kNaN,
  kPosInf,
  kNegInf,
  kUnparseable,
};

struct Cell {
  CellKind kind = CellKind::kFinite;
  double value = 0.0;  // meaningful only for kFinite

  bool operator==(const Cell&) const = default;
};

/// Tags one text cell. Recognizes "NaN", "nan", "Infinity", "inf" and "Inf"
/// with an optional sign; an empty cell is treated as NaN.
Cell parse_cell(std::string_view text);

struct ParseOptions {
  std::string label_column = "Label";
  char delimiter = ',';
};

/// A data row whose cell count disagreed with the header; the row is skipped.
struct RowError {
  std::size_t line = 0;  // 1-based physical line in the source
  std::size_t expected_cells = 0;
  std::size_t actual_cells = 0;
};

/// Parsed but uncleaned flow records. `cells` is row-major, rows() x P, where
/// P excludes the label column.
struct RawDataset {
  FeatureSchema schema;
  std::vector<Cell> cells;
  std::vector<std::string> raw_labels;
  std::vector<RowError> row_errors;

  std::size_t rows() const noexcept { return raw_labels.size(); }
  std::size_t cols() const noexcept { return schema.size(); }
  const Cell& at(std::size_t i, std::size_t j) const { return cells[i * cols() + j]; }
};

/// Reads a flow CSV with a header row. Leading '#' comment lines and blank
/// lines are ignored. Throws DataError for a missing header, a missing label
/// column, or zero usable data rows.
RawDataset parse_flow_csv(std::istream& in, const ParseOptions& options = {});
RawDataset parse_flow_csv(const std::filesystem::path& path,
                          const ParseOptions& options = {});

/// Row-wise concatenation; every part must share the same schema.
RawDataset concatenate(std::vector<RawDataset> parts);

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

enum class NanStrategy { kColumnMedian, kColumnMean, kConstant };
enum class InfStrategy { kClampToFinite, kConstant };

/// How non-finite cells become finite. Unparseable cells follow the NaN
/// strategy. Under kClampToFinite, +Inf becomes the column's largest finite
/// value and -Inf its smallest.
struct CleaningPolicy {
  NanStrategy nan_strategy = NanStrategy::kColumnMedian;
  double nan_constant = 0.0;
  InfStrategy inf_strategy = InfStrategy::kClampToFinite;
  double inf_constant = 0.0;
  bool drop_row_if_all_missing = true;
};

struct ColumnCleaning {
  std::string name;
  std::size_t nan_imputed = 0;
  std::size_t unparseable_imputed = 0;
  std::size_t pos_inf_replaced = 0;
  std::size_t neg_inf_replaced = 0;
  double nan_fill = 0.0;
};

struct CleaningReport {
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::vector<std::size_t> dropped_all_missing;  // source row indices
  std::vector<std::size_t> dropped_bad_label;    // source row indices
  std::size_t malformed_rows = 0;                // parse-time RowErrors
  std::vector<ColumnCleaning> columns;
  std::map<std::string, std::size_t> raw_label_counts;

  std::size_t total_nan_imputed() const;
  std::size_t total_inf_replaced() const;

  /// {"rows_in", "rows_out", "dropped_all_missing", ..., "columns": [...]}
  std::string to_json() const;
};

/// Finite feature matrix produced by clean(), still without labels.
struct CleanedMatrix {
  FeatureSchema schema;
  std::vector<double> values;           // row-major
  std::vector<std::size_t> source_rows;  // raw row index of each output row
  CleaningReport report;
};

/// Throws DataError naming the column if a column-statistic strategy finds no
/// finite value to compute from.
CleanedMatrix clean(const RawDataset& raw, const CleaningPolicy& policy = {});

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Trims surrounding whitespace and lowercases ASCII.
std::string normalize_label(std::string_view raw);

/// Maps raw label strings to {0, 1}. When `positive_class_names` is empty,
/// anything outside `benign_names` is an attack; otherwise exactly the listed
/// names are attacks. Names are compared after normalize_label().
struct LabelMap {
  std::set<std::string> benign_names{"benign"};
  std::set<std::string> positive_class_names;

  Label operator()(std::string_view raw) const;
};

struct LabelEncoding {
  std::vector<Label> labels;             // same length as the input
  std::vector<std::size_t> error_rows;  // rows with an empty label (encoded 0)
};

LabelEncoding encode_labels(std::span<const std::string> raw_labels,
                            const LabelMap& map = {});

/// clean() + encode_labels(), dropping rows whose label could not be encoded.
Dataset build_dataset(const RawDataset& raw, const CleaningPolicy& policy,
                      const LabelMap& labels, CleaningReport* report = nullptr);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Per-column min-max scaling to [0, 1]. Columns with min == max map to
/// kConstantColumnValue. Values outside the fitted range extrapolate linearly;
/// nothing is clamped.
class Normalizer {
 public:
  static constexpr double kConstantColumnValue = 0.0;

  Normalizer() = default;
  Normalizer(FeatureSchema schema, std::vector<double> mins, std::vector<double> maxs);

  static Normalizer fit(const Dataset& train);

  double transform(std::size_t column, double value) const;
  /// Inverse of transform(); only defined for non-constant columns.
  double inverse(std::size_t column, double scaled) const;
  Dataset apply(const Dataset& data) const;

  const FeatureSchema& schema() const noexcept { return schema_; }
  std::span<const double> mins() const noexcept { return mins_; }
  std::span<const double> maxs() const noexcept { return maxs_; }

  std::string to_json() const;
  static Normalizer from_json(std::string_view text);

 private:
  FeatureSchema schema_;
  std::vector<double> mins_;
  std::vector<double> maxs_;
};

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// Writes the dataset as flow CSV: feature columns then a "Label" column
/// holding "BENIGN" or "ATTACK", values in shortest round-trip form. Feeding
/// the output back through parse_flow_csv + build_dataset reproduces the
/// dataset exactly. Each entry of `comments` is written as a leading '#' line.
void write_dataset_csv(std::ostream& out, const Dataset& data,
                       std::span<const std::string> comments = {});

/// {"features": [ordered names], "source_count": n}
std::string schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(std::string_view text);

}  // namespace xids
