#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xids/dataset.hpp"
#include "xids/random.hpp"

namespace xids {

/// Per-class sample counts at a node, indexed by Label.
using ClassCounts = std::array<std::uint64_t, kNumClasses>;

/// 1 - sum_k (c_k / total)^2. Throws std::invalid_argument on an empty node.
double gini_impurity(const ClassCounts& counts);

/// Gini(parent) - |L|/|P| Gini(L) - |R|/|P| Gini(R). The one formula used both
/// to choose splits and to compute importances, so the two always agree.
double gini_decrease(const ClassCounts& parent, const ClassCounts& left,
                     const ClassCounts& right);

/// Splits whose impurity decrease does not exceed this are not taken. It sits
/// well above the rounding noise of gini_decrease() on an exactly
/// uninformative split and well below any real decrease at desk scale.
inline constexpr double kMinImpurityDecrease = 1e-12;

struct TreeConfig {
  std::optional<std::size_t> max_depth;  // nullopt: grow until pure
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  /// Candidate features drawn per split; 0 means floor(sqrt(P)), at least 1.
  std::size_t max_features = 0;

  std::size_t resolved_max_features(std::size_t num_features) const;
  /// Throws ConfigError when a count is out of range for `num_features`.
  void validate(std::size_t num_features) const;

  bool operator==(const TreeConfig&) const = default;
};

struct ForestConfig {
  std::size_t n_trees = 100;
  TreeConfig tree;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  bool operator==(const ForestConfig&) const = default;
};

/// A fitted CART tree in structure-of-arrays form. Node 0 is the root and
/// every child index is greater than its parent's. Leaves have feature == -1
/// and left == right == -1. A sample goes left when x[feature] <= threshold.
struct TrainedTree {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
  std::vector<ClassCounts> counts;
  std::vector<std::uint64_t> cover;
  std::vector<double> impurity;

  std::size_t size() const noexcept { return feature.size(); }
  bool is_leaf(std::size_t node) const { return feature[node] < 0; }
  std::size_t depth() const;

  /// Index of the leaf reached by `x`.
  std::size_t leaf_for(std::span<const double> x) const;
  /// Fraction of the node's training samples in class `target`.
  double node_value(std::size_t node, Label target) const;
  double predict(std::span<const double> x, Label target = kAttack) const {
    return node_value(leaf_for(x), target);
  }
  /// Impurity decrease recorded at an internal node.
  double split_decrease(std::size_t node) const;

  /// Appends a leaf holding `c` and returns its index.
  std::size_t add_leaf(const ClassCounts& c);
  /// Turns leaf `node` into an internal node over two existing children.
  void make_split(std::size_t node, std::size_t split_feature, double split_threshold,
                  std::size_t left_child, std::size_t right_child);

  /// Checks structure, cover conservation, leaf count sums and, when
  /// `num_features` is nonzero, feature bounds. Throws DataError.
  void validate(std::size_t num_features = 0) const;

  bool operator==(const TrainedTree&) const = default;
};

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

/// Best Gini split of `rows` (indices into `data`, repeats allowed) over the
/// `candidates` features. Thresholds are midpoints of consecutive distinct
/// values; ties in decrease (within kMinImpurityDecrease) go to the lower
/// feature index, then the lower threshold. Returns nullopt when fewer than min_samples_split rows are given
/// or no admissible split decreases impurity by more than
/// kMinImpurityDecrease.
std::optional<SplitChoice> best_split(const Dataset& data, std::span<const std::size_t> rows,
                                      std::span<const std::size_t> candidates,
                                      const TreeConfig& config);

/// Grows one tree on all rows of `data`, drawing split candidates from `rng`.
TrainedTree train_tree(const Dataset& data, const TreeConfig& config, SplitMix64& rng);

/// Grows one tree on `rows` (indices into `data`, repeats allowed).
TrainedTree train_tree(const Dataset& data, std::span<const std::size_t> rows,
                       const TreeConfig& config, SplitMix64& rng);

struct Forest {
  FeatureSchema schema;
  ForestConfig config;
  std::vector<TrainedTree> trees;

  std::size_t num_features() const noexcept { return schema.size(); }
  bool operator==(const Forest&) const = default;
};

/// Tree t is grown from SplitMix64(derive_seed(config.seed, t)): first its
/// bootstrap sample (n draws with replacement), then its split candidates.
/// The result does not depend on `threads`.
Forest train_forest(const Dataset& data, const ForestConfig& config, std::size_t threads = 1);

/// (p_normal, p_attack): leaf class proportions averaged over trees. Throws
/// DataError on a wrong-length or non-finite input.
std::array<double, kNumClasses> predict_proba(const Forest& model, std::span<const double> x);

/// argmax of predict_proba; a tie goes to Normal.
Label predict_label(const Forest& model, std::span<const double> x);

std::vector<Label> predict_labels(const Forest& model, const Dataset& data);

/// Mean-decrease-impurity importance: for each tree, sum of
/// (node cover / root cover) * decrease over the nodes splitting on each
/// feature; averaged over trees and normalized to sum to 1. All zeros when no
/// tree has a split.
std::vector<double> feature_importance_mdi(const Forest& model);

/// JSON model document. Serialization is deterministic: equal forests give
/// byte-identical text, and load(save(f)) == f.
std::string save_forest_json(const Forest& model);
Forest load_forest_json(std::string_view text);

}  // namespace xids
