#include "xids/dataset.hpp"

#include <array>
#include <cmath>
#include <string>

#include "xids/error.hpp"

namespace xids {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string_view class_display_name(Label label) {
  return label == kAttack ? "APT" : "Normal";
}

FeatureSchema::FeatureSchema(std::vector<std::string> names,
                             std::size_t source_count)
    : names_(std::move(names)),
      source_count_(source_count == 0 ? names_.size() : source_count) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw DataError("duplicate feature name '" + names_[i] + "'");
    }
  }
}

FeatureSchema FeatureSchema::from_header(std::span<const std::string> raw_names,
                                         std::size_t source_count) {
  std::vector<std::string> names;
  names.reserve(raw_names.size());
  std::map<std::string, std::size_t, std::less<>> seen;
  for (const auto& raw : raw_names) {
    std::string base = trim(raw);
    const std::size_t occurrence = ++seen[base];
    if (occurrence == 1) {
      names.push_back(base);
      continue;
    }
    // A suffixed name can itself collide with a literal header cell; keep
    // counting until it is unique.
    std::size_t k = occurrence;
    std::string candidate = base + "." + std::to_string(k);
    while (seen.contains(candidate)) {
      candidate = base + "." + std::to_string(++k);
    }
    seen[candidate] = 1;
    names.push_back(std::move(candidate));
  }
  return FeatureSchema(std::move(names), source_count);
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Dataset::Dataset(FeatureSchema schema, std::vector<double> values,
                 std::vector<Label> labels)
    : schema_(std::move(schema)),
      values_(std::move(values)),
      labels_(std::move(labels)) {
  if (labels_.empty()) throw DataError("dataset has no rows");
  if (schema_.empty()) throw DataError("dataset has no feature columns");
  if (values_.size() != labels_.size() * schema_.size()) {
    throw DataError("dataset value count " + std::to_string(values_.size()) +
                    " does not match " + std::to_string(labels_.size()) +
                    " rows x " + std::to_string(schema_.size()) + " columns");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw DataError("non-finite value at row " +
                      std::to_string(k / schema_.size()) + ", column '" +
                      schema_.name(k % schema_.size()) + "'");
    }
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] > kAttack) {
      throw DataError("label at row " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, j);
  return out;
}

std::array<std::size_t, kNumClasses> Dataset::class_counts() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (const Label y : labels_) ++counts[y];
  return counts;
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  std::vector<double> values;
  values.reserve(indices.size() * cols());
  std::vector<Label> labels;
  labels.reserve(indices.size());
  for (const std::size_t i : indices) {
    const auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
    labels.push_back(labels_[i]);
  }
  return Dataset(schema_, std::move(values), std::move(labels));
}

}  // namespace xids
