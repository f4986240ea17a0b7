#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "xids/dataset.hpp"

namespace xids {

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

enum class SplitSide : std::uint8_t { kTrain, kTest };

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<SplitSide> assignment;  // per input row, original order
};

/// Stratified split on the label column. Per class c with count n_c, the
/// train side receives round(train_fraction * n_c) rows (halves round toward
/// train) and the test side the remainder. Rows of class c are shuffled with
/// SplitMix64(seed ^ c); both output datasets keep original row order.
///
/// Throws ConfigError for a fraction outside (0, 1) and DataError if some
/// present class would leave one side empty.
SplitResult stratified_split(const Dataset& data, const SplitSpec& spec);

/// Rebuilds a split from a stored assignment vector.
SplitResult apply_assignment(const Dataset& data, std::span<const SplitSide> assignment);

/// "row_index,split" CSV with "train"/"test" values.
void write_assignment_csv(std::ostream& out, std::span<const SplitSide> assignment,
                          std::span<const std::string> comments = {});
std::vector<SplitSide> read_assignment_csv(std::istream& in);

/// Columns `keep`, in that order. Throws DataError naming an unknown feature.
Dataset project_columns(const Dataset& data, std::span<const std::string> keep);

/// Keeps min(count, max_per_class) rows of each class, chosen by a seeded
/// shuffle, in their original relative order.
Dataset subsample_rows(const Dataset& data, std::size_t max_per_class, std::uint64_t seed);

}  // namespace xids
