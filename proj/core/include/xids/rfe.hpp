#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xids/dataset.hpp"
#include "xids/forest.hpp"
#include "xids/metrics.hpp"

namespace xids {

struct RfeConfig {
  std::size_t target_features = 20;
  std::size_t step = 1;
  double f1_floor = 0.90;
  ForestConfig forest;
  /// Held-out share of the training rows used for validation F1 when no
  /// explicit validation set is given.
  double validation_fraction = 0.25;
  std::uint64_t validation_seed = 0;
  std::optional<Dataset> validation;
  std::size_t threads = 1;
};

struct RfeIteration {
  std::vector<std::string> surviving;  // features the forest was trained on
  std::vector<double> importance;      // MDI, aligned with `surviving`
  std::vector<std::string> eliminated;
  MetricsReport validation;
  double train_ms = 0.0;
};

/// One record per elimination round, followed by an evaluation of the model
/// trained on the final feature set.
struct RfeTrace {
  std::vector<RfeIteration> iterations;
  FeatureSchema final_schema;
  std::vector<double> final_importance;
  MetricsReport final_validation;
  double final_train_ms = 0.0;
  double f1_floor = 0.0;
  bool floor_violated = false;
  /// Index into `iterations`; iterations.size() refers to the final model.
  std::optional<std::size_t> first_violation;

  std::string to_json() const;
  /// iteration,remaining_count,f1,wall_time_ms; the final model is the last
  /// row.
  std::string to_csv() const;
};

/// Recursive feature elimination. Each round trains a forest on the
/// surviving features (always from the same forest seed), records validation
/// F1, and drops the min(step, remaining - target) least important features.
/// Among equal importances the lexicographically greatest names go first.
/// Stops when exactly `target_features` remain; falling below the F1 floor
/// is flagged, never fatal.
RfeTrace run_rfe(const Dataset& train, const RfeConfig& config);

struct RankEntry {
  std::size_t rank = 0;  // 1-based
  std::string name;
  double importance = 0.0;

  bool operator==(const RankEntry&) const = default;
};

/// Sorted by importance descending, ties by name ascending.
std::vector<RankEntry> rank_features(std::span<const std::string> names,
                                     std::span<const double> importance);

/// Ranking from the model trained on the final feature set.
std::vector<RankEntry> rank_report(const RfeTrace& trace);
/// Ranking from the first round (all input features).
std::vector<RankEntry> initial_rank_report(const RfeTrace& trace);

std::string ranking_csv(std::span<const RankEntry> ranking);

}  // namespace xids
