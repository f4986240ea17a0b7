#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xids {

/// Binary class label: 0 = benign ("Normal"), 1 = attack ("APT").
using Label = std::uint8_t;

inline constexpr Label kBenign = 0;
inline constexpr Label kAttack = 1;
inline constexpr std::size_t kNumClasses = 2;

/// Display name used in reports.
std::string_view class_display_name(Label label);

/// Ordered, unique feature names with name -> column lookup.
class FeatureSchema {
 public:
  FeatureSchema() = default;

  /// Throws DataError if any name is duplicated.
  explicit FeatureSchema(std::vector<std::string> names,
                         std::size_t source_count = 0);

  /// Builds a schema from raw header cells: trims surrounding whitespace and
  /// renames the k-th repeat of a name to "name.k" (k = 2, 3, ...).
  static FeatureSchema from_header(std::span<const std::string> raw_names,
                                   std::size_t source_count = 0);

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t column) const { return names_.at(column); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Column count of the file the schema was read from (includes the label
  /// column and any dropped columns).
  std::size_t source_count() const noexcept { return source_count_; }

  bool operator==(const FeatureSchema& other) const {
    return names_ == other.names_;
  }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::size_t source_count_ = 0;
};

/// Clean N x P numeric matrix (row-major) with binary labels.
///
/// Invariants, checked on construction: N > 0, P > 0, every value finite,
/// every label in {0, 1}.
class Dataset {
 public:
  Dataset() = default;
  Dataset(FeatureSchema schema, std::vector<double> values,
          std::vector<Label> labels);

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return schema_.size(); }

  const FeatureSchema& schema() const noexcept { return schema_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const Label> labels() const noexcept { return labels_; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * cols(), cols());
  }
  double at(std::size_t i, std::size_t j) const {
    return values_[i * cols() + j];
  }
  Label label(std::size_t i) const { return labels_[i]; }

  std::vector<double> column(std::size_t j) const;

  /// Per-class row counts, indexed by label.
  std::array<std::size_t, kNumClasses> class_counts() const;

  /// Rows `indices` in the given order.
  Dataset select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset& other) const = default;

 private:
  FeatureSchema schema_;
  std::vector<double> values_;
  std::vector<Label> labels_;
};

}  // namespace xids
