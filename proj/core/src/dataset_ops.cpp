#include "xids/dataset_ops.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include "xids/csv.hpp"
#include "xids/error.hpp"
#include "xids/random.hpp"

namespace xids {
namespace {

std::array<std::vector<std::size_t>, kNumClasses> rows_by_class(const Dataset& data) {
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < data.rows(); ++i) by_class[data.label(i)].push_back(i);
  return by_class;
}

}  // namespace

SplitResult stratified_split(const Dataset& data, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  }
  std::vector<SplitSide> assignment(data.rows(), SplitSide::kTest);
  auto by_class = rows_by_class(data);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    const auto n_train = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(rows.size()) + 0.5));
    if (n_train == 0 || n_train == rows.size()) {
      throw DataError("class '" + std::string(class_display_name(static_cast<Label>(c))) +
                      "' has " + std::to_string(rows.size()) +
                      " row(s); a " + std::to_string(spec.train_fraction) +
                      " split would leave one side without it");
    }
    SplitMix64 rng(spec.seed ^ static_cast<std::uint64_t>(c));
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t k = 0; k < n_train; ++k) assignment[rows[k]] = SplitSide::kTrain;
  }
  return apply_assignment(data, assignment);
}

SplitResult apply_assignment(const Dataset& data, std::span<const SplitSide> assignment) {
  if (assignment.size() != data.rows()) {
    throw DataError("split assignment has " + std::to_string(assignment.size()) +
                    " rows but the dataset has " + std::to_string(data.rows()));
  }
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    (assignment[i] == SplitSide::kTrain ? train_rows : test_rows).push_back(i);
  }
  if (train_rows.empty() || test_rows.empty()) {
    throw DataError("split assignment leaves one side empty");
  }
  return SplitResult{data.select_rows(train_rows), data.select_rows(test_rows),
                     std::vector<SplitSide>(assignment.begin(), assignment.end())};
}

void write_assignment_csv(std::ostream& out, std::span<const SplitSide> assignment,
                          std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "row_index,split\n";
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out << i << ',' << (assignment[i] == SplitSide::kTrain ? "train" : "test") << '\n';
  }
}

std::vector<SplitSide> read_assignment_csv(std::istream& in) {
  std::size_t line = 0;
  const auto header = csv::next_record(in, line);
  if (!header || csv::split_record(*header) != std::vector<std::string>{"row_index", "split"}) {
    throw DataError("split assignment CSV must start with 'row_index,split'");
  }
  std::vector<SplitSide> out;
  while (const auto record = csv::next_record(in, line)) {
    const auto fields = csv::split_record(*record);
    if (fields.size() != 2 || fields[0] != std::to_string(out.size())) {
      throw DataError("split assignment CSV is malformed at line " + std::to_string(line));
    }
    if (fields[1] == "train") {
      out.push_back(SplitSide::kTrain);
    } else if (fields[1] == "test") {
      out.push_back(SplitSide::kTest);
    } else {
      throw DataError("unknown split '" + fields[1] + "' at line " + std::to_string(line));
    }
  }
  return out;
}

Dataset project_columns(const Dataset& data, std::span<const std::string> keep) {
  std::vector<std::size_t> columns;
  columns.reserve(keep.size());
  for (const auto& name : keep) {
    const auto index = data.schema().index_of(name);
    if (!index) throw DataError("unknown feature '" + name + "'");
    columns.push_back(*index);
  }
  std::vector<double> values;
  values.reserve(data.rows() * columns.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto row = data.row(i);
    for (const std::size_t j : columns) values.push_back(row[j]);
  }
  return Dataset(FeatureSchema(std::vector<std::string>(keep.begin(), keep.end()),
                               data.schema().source_count()),
                 std::move(values),
                 std::vector<Label>(data.labels().begin(), data.labels().end()));
}

Dataset subsample_rows(const Dataset& data, std::size_t max_per_class, std::uint64_t seed) {
  if (max_per_class == 0) throw ConfigError("max_per_class must be at least 1");
  auto by_class = rows_by_class(data);
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& rows = by_class[c];
    if (rows.size() > max_per_class) {
      SplitMix64 rng(seed ^ static_cast<std::uint64_t>(c));
      rng.shuffle(std::span<std::size_t>(rows));
      rows.resize(max_per_class);
    }
    kept.insert(kept.end(), rows.begin(), rows.end());
  }
  std::sort(kept.begin(), kept.end());
  return data.select_rows(kept);
}

}  // namespace xids
