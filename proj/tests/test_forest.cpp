#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "test_support.hpp"
#include "xids/dataset_ops.hpp"
#include "xids/error.hpp"
#include "xids/forest.hpp"
#include "xids/synth.hpp"

namespace xids {
namespace {

using testing::column_dataset;
using testing::make_dataset;

// --- independent split oracle ----------------------------------------------

double oracle_gini(double n0, double n1) {
  const double n = n0 + n1;
  return 1.0 - (n0 / n) * (n0 / n) - (n1 / n) * (n1 / n);
}

struct OracleSplit {
  std::size_t feature;
  double threshold;
  double decrease;
};

// Tries every (feature, midpoint) pair and evaluates the weighted Gini
// decrease from scratch.
std::optional<OracleSplit> oracle_best_split(const Dataset& data, std::size_t min_leaf) {
  double n0 = 0;
  double n1 = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) (data.label(i) ? n1 : n0) += 1;
  const double parent = oracle_gini(n0, n1);
  std::optional<OracleSplit> best;
  for (std::size_t f = 0; f < data.cols(); ++f) {
    std::vector<double> distinct = data.column(f);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
      const double t = (distinct[k] + distinct[k + 1]) / 2.0;
      double l0 = 0, l1 = 0, r0 = 0, r1 = 0;
      for (std::size_t i = 0; i < data.rows(); ++i) {
        const bool left = data.at(i, f) <= t;
        const bool attack = data.label(i) == kAttack;
        (left ? (attack ? l1 : l0) : (attack ? r1 : r0)) += 1;
      }
      if (l0 + l1 < static_cast<double>(min_leaf) || r0 + r1 < static_cast<double>(min_leaf)) {
        continue;
      }
      const double n = l0 + l1 + r0 + r1;
      const double dec = parent - (l0 + l1) / n * oracle_gini(l0, l1) -
                         (r0 + r1) / n * oracle_gini(r0, r1);
      if (dec > 1e-12 && (!best || dec > best->decrease + 1e-12)) best = OracleSplit{f, t, dec};
    }
  }
  return best;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

std::vector<std::size_t> all_features(const Dataset& d) {
  std::vector<std::size_t> f(d.cols());
  std::iota(f.begin(), f.end(), std::size_t{0});
  return f;
}

// --- gini ------------------------------------------------------------------

TEST(Gini, PureNodeIsZero) { EXPECT_EQ(gini_impurity({10, 0}), 0.0); }
TEST(Gini, BalancedNodeIsHalf) { EXPECT_EQ(gini_impurity({5, 5}), 0.5); }
TEST(Gini, OneToThree) { EXPECT_DOUBLE_EQ(gini_impurity({1, 3}), 0.375); }
TEST(Gini, EmptyNodeThrows) { EXPECT_THROW(gini_impurity({0, 0}), std::invalid_argument); }

// --- best_split ------------------------------------------------------------

TEST(BestSplit, FourPointsSplitAtMidpoint) {
  const Dataset d = column_dataset({1, 2, 3, 4}, {0, 0, 1, 1});
  const auto split = best_split(d, all_rows(d), all_features(d), TreeConfig{});
  ASSERT_TRUE(split.has_value());
  EXPECT_EQ(split->feature, 0u);
  EXPECT_DOUBLE_EQ(split->threshold, 2.5);
  EXPECT_DOUBLE_EQ(split->decrease, 0.5);
}

TEST(BestSplit, PureRowsHaveNoSplit) {
  const Dataset d = column_dataset({1, 2, 3, 4}, {1, 1, 1, 1});
  EXPECT_FALSE(best_split(d, all_rows(d), all_features(d), TreeConfig{}).has_value());
}

TEST(BestSplit, ConstantCandidateHasNoSplit) {
  const Dataset d = make_dataset({"c", "x"}, {7, 1, 7, 2, 7, 3, 7, 4}, {0, 0, 1, 1});
  const std::vector<std::size_t> only_constant{0};
  EXPECT_FALSE(best_split(d, all_rows(d), only_constant, TreeConfig{}).has_value());
}

TEST(BestSplit, TooFewRowsHaveNoSplit) {
  const Dataset d = column_dataset({1, 2, 3, 4}, {0, 0, 1, 1});
  TreeConfig config;
  config.min_samples_split = 5;
  EXPECT_FALSE(best_split(d, all_rows(d), all_features(d), config).has_value());
}

TEST(BestSplit, MinSamplesLeafIsRespected) {
  // The best unconstrained split isolates the single attack at the end.
  const Dataset d = column_dataset({1, 2, 3, 4, 5}, {0, 0, 0, 0, 1});
  TreeConfig config;
  config.min_samples_leaf = 2;
  const auto split = best_split(d, all_rows(d), all_features(d), config);
  ASSERT_TRUE(split.has_value());
  EXPECT_DOUBLE_EQ(split->threshold, 3.5);
}

TEST(BestSplit, TiesGoToLowerFeatureIndex) {
  // Both columns separate the classes perfectly.
  const Dataset d = make_dataset({"a", "b"}, {0, 10, 1, 11, 2, 12, 3, 13}, {0, 0, 1, 1});
  const auto split = best_split(d, all_rows(d), std::vector<std::size_t>{1, 0}, TreeConfig{});
  ASSERT_TRUE(split.has_value());
  EXPECT_EQ(split->feature, 0u);
}

TEST(BestSplit, MatchesExhaustiveOracleOnRandomData) {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 4 + rng.uniform(30);
    const std::size_t p = 1 + rng.uniform(4);
    std::vector<double> values(n * p);
    // Small integer grid so duplicate values and ties are common.
    for (double& v : values) v = static_cast<double>(rng.uniform(6));
    std::vector<Label> labels(n);
    for (auto& y : labels) y = static_cast<Label>(rng.uniform(2));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
    const Dataset d = make_dataset(names, values, labels);
    const std::size_t min_leaf = 1 + rng.uniform(2);
    TreeConfig config;
    config.min_samples_leaf = min_leaf;

    const auto got = best_split(d, all_rows(d), all_features(d), config);
    const auto want = oracle_best_split(d, min_leaf);
    ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << trial;
    if (!got) continue;
    EXPECT_NEAR(got->decrease, want->decrease, 1e-12) << "trial " << trial;
    if (got->feature == want->feature) EXPECT_DOUBLE_EQ(got->threshold, want->threshold);
  }
}

// --- train_tree ------------------------------------------------------------

TEST(TrainTree, SingleRowIsOneLeaf) {
  const Dataset d = column_dataset({3.0}, {1});
  SplitMix64 rng(1);
  const TrainedTree tree = train_tree(d, TreeConfig{}, rng);
  ASSERT_EQ(tree.size(), 1u);
  EXPECT_TRUE(tree.is_leaf(0));
  EXPECT_EQ(tree.cover[0], 1u);
}

TEST(TrainTree, SeparableDataIsFitExactly) {
  std::vector<double> xs;
  std::vector<Label> ys;
  SplitMix64 gen(5);
  for (int i = 0; i < 200; ++i) {
    const double x = gen.unit() * 2.0 - 1.0;
    xs.push_back(x);
    ys.push_back(x > 0 ? kAttack : kBenign);
  }
  const Dataset d = column_dataset(xs, ys);
  TreeConfig config;
  config.max_features = 1;
  SplitMix64 rng(9);
  const TrainedTree tree = train_tree(d, config, rng);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    EXPECT_EQ(tree.predict(d.row(i)) > 0.5 ? kAttack : kBenign, d.label(i));
  }
}

TEST(TrainTree, SameSeedGivesIdenticalTree) {
  const Dataset d = synth::planted_signal({.rows = 300, .seed = 3});
  SplitMix64 a(42);
  SplitMix64 b(42);
  Forest fa{d.schema(), {}, {train_tree(d, TreeConfig{}, a)}};
  Forest fb{d.schema(), {}, {train_tree(d, TreeConfig{}, b)}};
  EXPECT_EQ(save_forest_json(fa), save_forest_json(fb));
}

TEST(TrainTree, MaxDepthLimitsGrowth) {
  const Dataset d = synth::planted_signal({.rows = 400, .seed = 3});
  TreeConfig config;
  config.max_depth = 3;
  SplitMix64 rng(1);
  EXPECT_LE(train_tree(d, config, rng).depth(), 3u);
}

TEST(TrainTree, InvalidConfigThrows) {
  const Dataset d = column_dataset({1, 2}, {0, 1});
  SplitMix64 rng(1);
  TreeConfig config;
  config.max_features = 2;
  EXPECT_THROW(train_tree(d, config, rng), ConfigError);
  config = TreeConfig{};
  config.min_samples_split = 1;
  EXPECT_THROW(train_tree(d, config, rng), ConfigError);
}

// --- train_forest / predict --------------------------------------------------

TEST(Forest, SingleTreeWithoutBootstrapMatchesTree) {
  const Dataset d = synth::planted_signal({.rows = 300, .seed = 4});
  ForestConfig config{.n_trees = 1, .bootstrap = false, .seed = 17};
  const Forest forest = train_forest(d, config);
  SplitMix64 rng(derive_seed(17, 0));
  std::vector<std::size_t> rows = all_rows(d);
  const TrainedTree tree = train_tree(d, rows, config.tree, rng);
  EXPECT_EQ(forest.trees[0], tree);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    EXPECT_EQ(predict_proba(forest, d.row(i))[kAttack], tree.predict(d.row(i)));
  }
}

TEST(Forest, DeterministicAcrossRunsAndThreadCounts) {
  const Dataset d = synth::planted_signal({.rows = 500, .seed = 8});
  const ForestConfig config{.n_trees = 12, .seed = 99};
  const std::string one = save_forest_json(train_forest(d, config, 1));
  EXPECT_EQ(one, save_forest_json(train_forest(d, config, 1)));
  EXPECT_EQ(one, save_forest_json(train_forest(d, config, 4)));
  EXPECT_EQ(one, save_forest_json(train_forest(d, config, 64)));
}

TEST(Forest, DifferentSeedsGiveDifferentModels) {
  const Dataset d = synth::planted_signal({.rows = 300, .seed = 8});
  EXPECT_NE(save_forest_json(train_forest(d, {.n_trees = 3, .seed = 1})),
            save_forest_json(train_forest(d, {.n_trees = 3, .seed = 2})));
}

TEST(Forest, TwoClustersAreSeparatedOnHeldOutRows) {
  const Dataset d = synth::two_clusters({.rows = 200, .features = 5, .separation = 5.0});
  const SplitResult split = stratified_split(d, {0.8, 5});
  const Forest forest = train_forest(split.train, {.n_trees = 25, .seed = 3});
  const auto predicted = predict_labels(forest, split.test);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == split.test.label(i);
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(predicted.size()), 0.95);
}

TEST(Forest, TreesSatisfyBookkeepingInvariants) {
  const Dataset d = synth::planted_signal({.rows = 800, .seed = 10});
  const Forest forest = train_forest(d, {.n_trees = 10, .seed = 4});
  for (const auto& tree : forest.trees) {
    EXPECT_NO_THROW(tree.validate(d.cols()));
    EXPECT_EQ(tree.cover[0], d.rows());
    for (std::size_t node = 0; node < tree.size(); ++node) {
      if (!tree.is_leaf(node)) EXPECT_GT(tree.split_decrease(node), 0.0);
    }
  }
}

TEST(PredictProba, PureLeaf) {
  TrainedTree tree;
  tree.add_leaf({5, 0});
  const Forest forest{FeatureSchema({"x"}), {}, {tree}};
  const std::vector<double> x{0.0};
  const auto p = predict_proba(forest, x);
  EXPECT_EQ(p[kBenign], 1.0);
  EXPECT_EQ(p[kAttack], 0.0);
}

TEST(PredictProba, TieGoesToNormal) {
  TrainedTree normal;
  normal.add_leaf({4, 0});
  TrainedTree attack;
  attack.add_leaf({0, 4});
  const Forest forest{FeatureSchema({"x"}), {}, {normal, attack}};
  const std::vector<double> x{0.0};
  const auto p = predict_proba(forest, x);
  EXPECT_EQ(p[kBenign], 0.5);
  EXPECT_EQ(p[kAttack], 0.5);
  EXPECT_EQ(predict_label(forest, x), kBenign);
}

TEST(PredictProba, SumsToOne) {
  const Dataset d = synth::planted_signal({.rows = 400, .seed = 12});
  const Forest forest = train_forest(d, {.n_trees = 15, .seed = 2});
  SplitMix64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const auto x = testing::random_instance(rng, d.cols());
    const auto p = predict_proba(forest, x);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  }
}

TEST(PredictProba, RejectsBadInput) {
  TrainedTree tree;
  tree.add_leaf({1, 1});
  const Forest forest{FeatureSchema({"a", "b"}), {}, {tree}};
  EXPECT_THROW(predict_proba(forest, std::vector<double>{1.0}), DataError);
  EXPECT_THROW(predict_proba(forest, std::vector<double>{1.0, NAN}), DataError);
  EXPECT_THROW(predict_proba(forest, std::vector<double>{INFINITY, 0.0}), DataError);
}

// --- importance ----------------------------------------------------------------

TEST(Importance, OnlySplitFeatureGetsEverything) {
  TrainedTree tree;
  const auto root = tree.add_leaf({4, 4});
  const auto l = tree.add_leaf({4, 0});
  const auto r = tree.add_leaf({0, 4});
  tree.make_split(root, 3, 0.5, l, r);
  const Forest forest{FeatureSchema({"a", "b", "c", "d", "e"}), {}, {tree}};
  EXPECT_EQ(feature_importance_mdi(forest), (std::vector<double>{0, 0, 0, 1, 0}));
}

TEST(Importance, NoSplitsGiveZeros) {
  TrainedTree tree;
  tree.add_leaf({3, 0});
  const Forest forest{FeatureSchema({"a", "b"}), {}, {tree, tree}};
  EXPECT_EQ(feature_importance_mdi(forest), (std::vector<double>{0, 0}));
}

TEST(Importance, StumpDecreaseMatchesHandComputation) {
  // x = 0: 1 benign + 3 attacks; x = 1: 3 benign + 1 attack.
  // Parent Gini 0.5, each child 0.375 with weight 1/2 -> decrease 0.125.
  const Dataset d = make_dataset({"x", "flat"}, {0, 5, 0, 5, 0, 5, 0, 5, 1, 5, 1, 5, 1, 5, 1, 5},
                                 {0, 1, 1, 1, 0, 0, 0, 1});
  TreeConfig config;
  config.max_features = 2;
  config.max_depth = 1;
  SplitMix64 rng(1);
  const TrainedTree tree = train_tree(d, config, rng);
  ASSERT_EQ(tree.size(), 3u);
  EXPECT_EQ(tree.feature[0], 0);
  EXPECT_DOUBLE_EQ(tree.split_decrease(0), 0.125);
  EXPECT_EQ(tree.counts[1], (ClassCounts{1, 3}));
  EXPECT_EQ(tree.counts[2], (ClassCounts{3, 1}));
  const Forest forest{d.schema(), {}, {tree}};
  EXPECT_EQ(feature_importance_mdi(forest), (std::vector<double>{1.0, 0.0}));
}

TEST(Importance, NonNegativeAndNormalized) {
  const Dataset d = synth::planted_signal({.rows = 600, .seed = 21});
  const auto imp = feature_importance_mdi(train_forest(d, {.n_trees = 10, .seed = 5}));
  for (const double v : imp) EXPECT_GE(v, 0.0);
  EXPECT_NEAR(std::accumulate(imp.begin(), imp.end(), 0.0), 1.0, 1e-9);
}

TEST(Forest, ColumnPermutationPermutesImportances) {
  const Dataset d = synth::two_clusters({.rows = 120, .features = 4, .separation = 1.0, .seed = 3});
  const std::vector<std::string> permuted_names{"x2", "x0", "x3", "x1"};
  const Dataset permuted = project_columns(d, permuted_names);
  // Shallow trees keep nodes large, so no two features tie on a split.
  const ForestConfig config{
      .n_trees = 5, .tree = {.max_depth = 3, .max_features = 4}, .bootstrap = false, .seed = 1};
  const Forest a = train_forest(d, config);
  const Forest b = train_forest(permuted, config);

  const auto imp_a = feature_importance_mdi(a);
  const auto imp_b = feature_importance_mdi(b);
  for (std::size_t k = 0; k < permuted_names.size(); ++k) {
    EXPECT_NEAR(imp_b[k], imp_a[*d.schema().index_of(permuted_names[k])], 1e-12);
  }
  for (std::size_t i = 0; i < d.rows(); ++i) {
    EXPECT_EQ(predict_proba(a, d.row(i)), predict_proba(b, permuted.row(i)));
  }
}

// --- model file ------------------------------------------------------------

TEST(ModelFile, RoundTripIsExact) {
  const Dataset d = synth::planted_signal({.rows = 400, .seed = 30});
  ForestConfig config{.n_trees = 6, .seed = 8};
  config.tree.max_depth = 9;
  const Forest model = train_forest(d, config);
  const std::string text = save_forest_json(model);
  const Forest loaded = load_forest_json(text);
  EXPECT_EQ(loaded, model);
  EXPECT_EQ(save_forest_json(loaded), text);
  EXPECT_EQ(feature_importance_mdi(loaded), feature_importance_mdi(model));
  for (std::size_t i = 0; i < d.rows(); ++i) {
    EXPECT_EQ(predict_proba(loaded, d.row(i)), predict_proba(model, d.row(i)));
  }
}

TEST(ModelFile, RejectsMalformedDocuments) {
  EXPECT_THROW(load_forest_json("{"), DataError);
  EXPECT_THROW(load_forest_json(R"({"format":"other"})"), DataError);
  TrainedTree tree;
  const auto root = tree.add_leaf({2, 2});
  const auto l = tree.add_leaf({2, 0});
  const auto r = tree.add_leaf({0, 2});
  tree.make_split(root, 0, 0.5, l, r);
  Forest model{FeatureSchema({"x"}), {.n_trees = 1}, {tree}};
  std::string text = save_forest_json(model);
  EXPECT_NO_THROW(load_forest_json(text));
  model.trees[0].cover[1] = 3;  // breaks cover conservation
  EXPECT_THROW(load_forest_json(save_forest_json(model)), DataError);
}

}  // namespace
}  // namespace xids
