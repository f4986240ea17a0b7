#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xids/dataset.hpp"
#include "xids/forest.hpp"

namespace xids {

/// Shapley attribution of one model output. Local accuracy:
/// base_value + sum(phi) == output.
struct ShapExplanation {
  std::vector<double> phi;
  std::vector<double> values;  // the explained instance
  double base_value = 0.0;
  double output = 0.0;
  Label target_class = kAttack;

  double phi_sum() const;
};

/// Path-dependent conditional expectation v(S) of the tree's class-`target`
/// proportion given the features in `known` (indexed by feature). Splits on
/// known features follow `x`; splits on unknown features average both
/// children weighted by cover. Throws DataError at a zero-cover internal node.
double tree_expectation(const TrainedTree& tree, std::span<const double> x,
                        const std::vector<bool>& known, Label target = kAttack);

/// Largest feature count brute_force_shap() accepts.
inline constexpr std::size_t kBruteForceMaxFeatures = 20;

/// Exact Shapley values by enumerating all 2^P feature subsets of
/// tree_expectation(). Throws ConfigError above kBruteForceMaxFeatures.
ShapExplanation brute_force_shap(const TrainedTree& tree, std::span<const double> x,
                                 Label target = kAttack);

/// Polynomial-time path-dependent TreeSHAP (Lundberg et al.): one traversal
/// that tracks, for each feature on the current root-to-node path, the
/// fraction of cover that flows through when the feature is unknown (zero
/// fraction) or known (one fraction). Equal to brute_force_shap() up to
/// rounding. Throws DataError on non-finite input.
ShapExplanation tree_shap(const TrainedTree& tree, std::span<const double> x,
                          Label target = kAttack);

/// Mean of per-tree explanations; `output` is predict_proba(model, x)[target].
ShapExplanation forest_shap(const Forest& model, std::span<const double> x,
                            Label target = kAttack);

/// forest_shap() for each listed row, optionally in parallel. Output order
/// follows `rows`.
std::vector<ShapExplanation> explain_rows(const Forest& model, const Dataset& data,
                                          std::span<const std::size_t> rows,
                                          Label target = kAttack, std::size_t threads = 1);

/// Up to `max_rows` row indices chosen by a seeded shuffle, in ascending order.
std::vector<std::size_t> sample_rows(std::size_t n, std::size_t max_rows, std::uint64_t seed);

struct GlobalImportanceEntry {
  std::string feature;
  std::size_t index = 0;
  double mean_abs_phi = 0.0;
};

/// Mean |phi| per feature, sorted descending (ties by name).
struct GlobalImportance {
  std::vector<GlobalImportanceEntry> entries;
  std::size_t sample_size = 0;

  std::string to_csv() const;
};

GlobalImportance global_importance(const FeatureSchema& schema,
                                   std::span<const ShapExplanation> explanations);

/// Explains a seeded sample of at most `max_rows` rows of `sample`.
GlobalImportance global_importance(const Forest& model, const Dataset& sample,
                                   std::size_t max_rows, std::uint64_t seed,
                                   Label target = kAttack, std::size_t threads = 1);

struct BeeswarmPoint {
  std::string feature;
  double value = 0.0;
  double phi = 0.0;
};

/// One point per (explanation, feature) for the `k` features with the
/// largest mean |phi|, grouped by feature in that order.
std::vector<BeeswarmPoint> beeswarm(const FeatureSchema& schema,
                                    std::span<const ShapExplanation> explanations,
                                    std::size_t k);
std::string beeswarm_csv(std::span<const BeeswarmPoint> points);

struct AttributionEntry {
  std::string feature;
  double value = 0.0;
  double phi = 0.0;
};

/// The `k` largest |phi| features, ties by name ascending. Throws ConfigError
/// unless 1 <= k <= P.
std::vector<AttributionEntry> top_k_report(const ShapExplanation& explanation,
                                           const FeatureSchema& schema, std::size_t k);

/// {"base_value", "output", "target_class", "entries": [{feature, value, phi}]}
std::string explanation_json(const ShapExplanation& explanation,
                             std::span<const AttributionEntry> entries);

}  // namespace xids
