#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "xids/flow_ingest.hpp"
#include "xids/forest.hpp"

namespace xids::cli {

/// Settings shared by every stage. Loaded from a flat "key = value" file
/// ('#' starts a comment), then overridden by command-line flags.
struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path workspace = "xids_workspace";
  std::uint64_t seed = 42;
  std::size_t threads = 1;

  // ingest
  std::string label_column = "Label";
  std::vector<std::string> benign_labels{"BENIGN"};
  std::vector<std::string> positive_labels;
  std::string nan_strategy = "median";  // median | mean | constant
  double nan_constant = 0.0;
  std::string inf_strategy = "clamp";  // clamp | constant
  double inf_constant = 0.0;
  bool drop_all_missing = true;

  // split
  double train_fraction = 0.8;
  bool normalize = true;

  // forest
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0 = floor(sqrt(P))
  bool bootstrap = true;

  // rfe
  std::size_t rfe_target = 20;
  std::size_t rfe_step = 1;
  std::size_t rfe_trees = 50;
  double f1_floor = 0.90;
  double validation_fraction = 0.25;

  // evaluate
  std::size_t latency_rows = 1000;
  std::size_t latency_warmup = 10;

  // explain
  std::string explain_target = "APT";  // APT | Normal
  std::size_t explain_sample = 200;
  std::size_t top_k = 5;
  std::size_t beeswarm_features = 10;

  /// Applies one key; throws ConfigError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Reads a config file; `line` numbers appear in error messages.
  void load_file(const std::filesystem::path& path);

  /// Every setting that affects results, as key -> text. Paths and the
  /// thread count are left out so artifacts do not depend on them.
  std::map<std::string, std::string> effective() const;
  /// FNV-1a over effective(), as 16 hex digits.
  std::string hash() const;

  CleaningPolicy cleaning_policy() const;
  LabelMap label_map() const;
  ForestConfig forest_config(std::size_t trees, std::uint64_t stream) const;
  Label target_label() const;
};

/// Seed streams drawn from the master seed, one per pipeline step.
enum class SeedStream : std::uint64_t {
  kSplit = 1,
  kRfeForest = 2,
  kRfeValidation = 3,
  kTrainForest = 4,
  kExplainSample = 5,
};
std::uint64_t stream_seed(const RunConfig& config, SeedStream stream);

}  // namespace xids::cli
