#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "test_support.hpp"
#include "xids/error.hpp"
#include "xids/shap.hpp"
#include "xids/synth.hpp"

namespace xids {
namespace {

using testing::random_instance;
using testing::random_tree;

// Root splits feature 0 at 0.5 with children covering 60 and 40 rows;
// class-1 proportions are 0 on the left and 1 on the right.
TrainedTree stump_60_40(std::size_t feature = 0) {
  TrainedTree tree;
  const auto root = tree.add_leaf({60, 40});
  const auto l = tree.add_leaf({60, 0});
  const auto r = tree.add_leaf({0, 40});
  tree.make_split(root, feature, 0.5, l, r);
  return tree;
}

// Feature 1 splits twice along the same root-to-leaf path.
TrainedTree repeated_feature_tree() {
  TrainedTree t;
  const auto root = t.add_leaf({50, 50});
  const auto a = t.add_leaf({30, 10});
  const auto b = t.add_leaf({20, 40});
  t.make_split(root, 1, 0.5, a, b);
  const auto a_l = t.add_leaf({25, 2});
  const auto a_r = t.add_leaf({5, 8});
  t.make_split(a, 0, 0.3, a_l, a_r);
  const auto b_l = t.add_leaf({15, 10});
  const auto b_r = t.add_leaf({5, 30});
  t.make_split(b, 2, 0.6, b_l, b_r);
  const auto a_r_l = t.add_leaf({4, 1});
  const auto a_r_r = t.add_leaf({1, 7});
  t.make_split(a_r, 1, 0.2, a_r_l, a_r_r);  // feature 1 again
  const auto b_r_l = t.add_leaf({1, 20});
  const auto b_r_r = t.add_leaf({4, 10});
  t.make_split(b_r, 1, 0.8, b_r_l, b_r_r);  // and again on the other side
  return t;
}

TEST(TreeExpectation, AllKnownEqualsPrediction) {
  SplitMix64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const TrainedTree tree = random_tree(rng, 5, 4);
    const auto x = random_instance(rng, 5);
    EXPECT_DOUBLE_EQ(tree_expectation(tree, x, std::vector<bool>(5, true)), tree.predict(x));
  }
}

TEST(TreeExpectation, SingleLeafIsLeafProportion) {
  TrainedTree tree;
  tree.add_leaf({3, 1});
  EXPECT_DOUBLE_EQ(tree_expectation(tree, std::vector<double>{0.0}, {}), 0.25);
}

TEST(TreeExpectation, StumpWithNothingKnownIsCoverWeighted) {
  EXPECT_DOUBLE_EQ(tree_expectation(stump_60_40(), std::vector<double>{0.9}, {}), 0.4);
}

TEST(TreeExpectation, MatchesLeafSumOracle) {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = 1 + rng.uniform(6);
    const TrainedTree tree = random_tree(rng, p, 4);
    const auto x = random_instance(rng, p);
    std::vector<bool> known(p);
    for (std::size_t j = 0; j < p; ++j) known[j] = rng.uniform(2) == 1;
    EXPECT_NEAR(tree_expectation(tree, x, known),
                testing::leaf_sum_expectation(tree, x, known, kAttack), 1e-14);
  }
}

TEST(TreeExpectation, ZeroCoverInternalNodeThrows) {
  TrainedTree tree = stump_60_40();
  tree.cover[0] = 0;
  EXPECT_THROW(tree_expectation(tree, std::vector<double>{0.1}, {}), DataError);
}

TEST(BruteForceShap, ConstantModelHasZeroAttribution) {
  TrainedTree tree;
  tree.add_leaf({3, 1});
  const auto e = brute_force_shap(tree, std::vector<double>{0.1, 0.2, 0.3});
  EXPECT_EQ(e.phi, (std::vector<double>{0, 0, 0}));
  EXPECT_DOUBLE_EQ(e.base_value, 0.25);
}

TEST(BruteForceShap, StumpAttributesEverythingToItsFeature) {
  const TrainedTree tree = stump_60_40(0);
  const std::vector<double> x{0.9, 0.1, 0.7};
  const auto e = brute_force_shap(tree, x);
  EXPECT_NEAR(e.phi[0], tree.predict(x) - 0.4, 1e-15);
  EXPECT_EQ(e.phi[1], 0.0);
  EXPECT_EQ(e.phi[2], 0.0);
}

TEST(BruteForceShap, AgreesWithPermutationDefinition) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = 2 + rng.uniform(4);
    const TrainedTree tree = random_tree(rng, p, 4);
    const auto x = random_instance(rng, p);
    const auto e = brute_force_shap(tree, x);
    const auto want = testing::permutation_shapley(tree, x, kAttack);
    for (std::size_t j = 0; j < p; ++j) EXPECT_NEAR(e.phi[j], want[j], 1e-12);
  }
}

TEST(BruteForceShap, EfficiencyHolds) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const TrainedTree tree = random_tree(rng, 6, 4);
    const auto x = random_instance(rng, 6);
    const auto e = brute_force_shap(tree, x);
    EXPECT_NEAR(e.base_value + e.phi_sum(), tree.predict(x), 1e-9);
  }
}

TEST(BruteForceShap, RefusesWideInputs) {
  TrainedTree tree;
  tree.add_leaf({1, 1});
  EXPECT_THROW(brute_force_shap(tree, std::vector<double>(21, 0.0)), ConfigError);
}

TEST(TreeShap, SingleLeafIsZero) {
  TrainedTree tree;
  tree.add_leaf({2, 6});
  const auto e = tree_shap(tree, std::vector<double>{1.0, 2.0});
  EXPECT_EQ(e.phi, (std::vector<double>{0, 0}));
  EXPECT_DOUBLE_EQ(e.base_value, 0.75);
  EXPECT_DOUBLE_EQ(e.output, 0.75);
}

TEST(TreeShap, RepeatedFeatureOnPathMatchesOracle) {
  const TrainedTree tree = repeated_feature_tree();
  tree.validate(3);
  SplitMix64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_instance(rng, 3);
    for (const Label target : {kBenign, kAttack}) {
      const auto fast = tree_shap(tree, x, target);
      const auto slow = brute_force_shap(tree, x, target);
      for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(fast.phi[j], slow.phi[j], 1e-12);
      EXPECT_NEAR(fast.base_value, slow.base_value, 1e-15);
    }
  }
}

TEST(TreeShap, MatchesOracleOnRandomTrees) {
  SplitMix64 rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 1 + rng.uniform(8);
    const TrainedTree tree = random_tree(rng, p, 1 + rng.uniform(4));
    for (int k = 0; k < 5; ++k) {
      const auto x = random_instance(rng, p);
      const auto fast = tree_shap(tree, x);
      const auto slow = brute_force_shap(tree, x);
      for (std::size_t j = 0; j < p; ++j) worst = std::max(worst, std::abs(fast.phi[j] - slow.phi[j]));
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(TreeShap, MatchesOracleOnTrainedTrees) {
  const Dataset d = synth::planted_signal({.rows = 400, .informative = 3, .noise = 5, .seed = 2});
  const Forest forest = train_forest(d, {.n_trees = 3, .tree = {.max_depth = 6}, .seed = 7});
  for (const auto& tree : forest.trees) {
    for (std::size_t i = 0; i < 20; ++i) {
      const auto fast = tree_shap(tree, d.row(i));
      const auto slow = brute_force_shap(tree, d.row(i));
      for (std::size_t j = 0; j < d.cols(); ++j) EXPECT_NEAR(fast.phi[j], slow.phi[j], 1e-9);
    }
  }
}

TEST(TreeShap, RejectsNonFiniteInput) {
  EXPECT_THROW(tree_shap(stump_60_40(), std::vector<double>{NAN}), DataError);
}

TEST(TreeShap, SymmetricFeaturesGetEqualAttribution) {
  // AND of x0 > 0.5 and x1 > 0.5 with a uniform cover split at each node:
  // v({0}) == v({1}) == 0.5, so both features must share the credit.
  TrainedTree t;
  const auto root = t.add_leaf({75, 25});
  const auto low = t.add_leaf({50, 0});
  const auto high = t.add_leaf({25, 25});
  t.make_split(root, 0, 0.5, low, high);
  const auto high_l = t.add_leaf({25, 0});
  const auto high_r = t.add_leaf({0, 25});
  t.make_split(high, 1, 0.5, high_l, high_r);
  const std::vector<double> x{0.7, 0.7, 0.2};
  const auto e = tree_shap(t, x);
  EXPECT_NEAR(e.phi[0], e.phi[1], 1e-15);
  EXPECT_NEAR(e.phi[0], 0.375, 1e-15);
  EXPECT_EQ(e.phi[2], 0.0);
}

TEST(ForestShap, SingleTreeForestEqualsTreeShap) {
  SplitMix64 rng(8);
  const TrainedTree tree = random_tree(rng, 4, 4);
  const Forest forest{FeatureSchema({"a", "b", "c", "d"}), {}, {tree}};
  const auto x = random_instance(rng, 4);
  const auto f = forest_shap(forest, x);
  const auto t = tree_shap(tree, x);
  EXPECT_EQ(f.phi, t.phi);
  EXPECT_EQ(f.base_value, t.base_value);
}

TEST(ForestShap, LocalAccuracyAndLinearity) {
  const Dataset d = synth::planted_signal({.rows = 500, .seed = 9});
  const Forest forest = train_forest(d, {.n_trees = 10, .seed = 3});
  for (std::size_t i = 0; i < 25; ++i) {
    const auto x = d.row(i);
    const auto e = forest_shap(forest, x);
    EXPECT_NEAR(e.base_value + e.phi_sum(), predict_proba(forest, x)[kAttack], 1e-9);

    std::vector<double> mean(d.cols(), 0.0);
    for (const auto& tree : forest.trees) {
      const auto te = tree_shap(tree, x);
      for (std::size_t j = 0; j < d.cols(); ++j) mean[j] += te.phi[j] / 10.0;
    }
    for (std::size_t j = 0; j < d.cols(); ++j) EXPECT_NEAR(e.phi[j], mean[j], 1e-12);
  }
}

TEST(ForestShap, CertainNormalPredictionCancelsBase) {
  // Every tree sends x to a pure benign leaf, so P(attack) = 0 and the
  // attributions must exactly undo the base value.
  const Forest forest{FeatureSchema({"x", "y"}), {}, {stump_60_40(0), stump_60_40(1)}};
  const std::vector<double> x{0.1, 0.2};
  ASSERT_EQ(predict_proba(forest, x)[kBenign], 1.0);
  const auto e = forest_shap(forest, x);
  EXPECT_NEAR(e.phi_sum(), -e.base_value, 1e-9);
}

TEST(ForestShap, UnusedFeatureIsNullPlayer) {
  const Forest forest{FeatureSchema({"x", "unused", "y"}), {}, {stump_60_40(0), stump_60_40(2)}};
  SplitMix64 rng(10);
  for (int k = 0; k < 20; ++k) {
    const auto e = forest_shap(forest, random_instance(rng, 3));
    EXPECT_EQ(e.phi[1], 0.0);
  }
}

TEST(GlobalImportance, SingleRowIsAbsolutePhi) {
  const Dataset d = synth::planted_signal({.rows = 300, .seed = 11});
  const Forest forest = train_forest(d, {.n_trees = 5, .seed = 3});
  const Dataset one = d.select_rows(std::vector<std::size_t>{7});
  const auto gi = global_importance(forest, one, 10, 1);
  const auto e = forest_shap(forest, one.row(0));
  ASSERT_EQ(gi.sample_size, 1u);
  for (const auto& entry : gi.entries) EXPECT_EQ(entry.mean_abs_phi, std::abs(e.phi[entry.index]));
  for (std::size_t r = 1; r < gi.entries.size(); ++r) {
    EXPECT_GE(gi.entries[r - 1].mean_abs_phi, gi.entries[r].mean_abs_phi);
  }
}

TEST(GlobalImportance, UnusedFeatureIsExactlyZero) {
  const Forest forest{FeatureSchema({"x", "unused"}), {}, {stump_60_40(0)}};
  const Dataset d = testing::make_dataset({"x", "unused"}, {0.1, 5, 0.9, 6, 0.4, 7}, {0, 1, 0});
  const auto gi = global_importance(forest, d, 3, 1);
  EXPECT_EQ(gi.entries.back().feature, "unused");
  EXPECT_EQ(gi.entries.back().mean_abs_phi, 0.0);
}

TEST(GlobalImportance, DeterministicForSeedAndThreads) {
  const Dataset d = synth::planted_signal({.rows = 400, .seed = 12});
  const Forest forest = train_forest(d, {.n_trees = 5, .seed = 3});
  const auto a = global_importance(forest, d, 50, 77, kAttack, 1);
  const auto b = global_importance(forest, d, 50, 77, kAttack, 4);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_EQ(a.sample_size, 50u);
}

TEST(Beeswarm, PointsComeFromExplanations) {
  const Dataset d = synth::planted_signal({.rows = 300, .seed = 13});
  const Forest forest = train_forest(d, {.n_trees = 5, .seed = 3});
  const auto rows = sample_rows(d.rows(), 20, 5);
  const auto explanations = explain_rows(forest, d, rows);
  const auto points = beeswarm(d.schema(), explanations, 4);
  ASSERT_EQ(points.size(), 4 * explanations.size());
  const auto gi = global_importance(d.schema(), explanations);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t k = 0; k < explanations.size(); ++k) {
      const auto& pt = points[r * explanations.size() + k];
      EXPECT_EQ(pt.feature, gi.entries[r].feature);
      EXPECT_EQ(pt.phi, explanations[k].phi[gi.entries[r].index]);
      EXPECT_EQ(pt.value, d.at(rows[k], gi.entries[r].index));
    }
  }
}

TEST(TopK, AbsoluteValueOrdering) {
  ShapExplanation e;
  e.phi = {0.5, -0.7, 0.1};
  e.values = {1, 2, 3};
  const auto top = top_k_report(e, FeatureSchema({"first", "second", "third"}), 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].feature, "second");
  EXPECT_EQ(top[0].value, 2.0);
  EXPECT_EQ(top[0].phi, -0.7);
  EXPECT_EQ(top[1].feature, "first");
}

TEST(TopK, FullOrderingWithNameTies) {
  ShapExplanation e;
  e.phi = {0.2, -0.2, 0.0, 0.9};
  e.values = {0, 0, 0, 0};
  const auto top = top_k_report(e, FeatureSchema({"b", "a", "c", "d"}), 4);
  ASSERT_EQ(top.size(), 4u);
  EXPECT_EQ(top[0].feature, "d");
  EXPECT_EQ(top[1].feature, "a");
  EXPECT_EQ(top[2].feature, "b");
  EXPECT_EQ(top[3].feature, "c");
}

TEST(TopK, FiveFeatureLocalReport) {
  const Dataset d = synth::planted_signal({.rows = 300, .seed = 14});
  const Forest forest = train_forest(d, {.n_trees = 5, .seed = 3});
  const auto e = forest_shap(forest, d.row(0));
  EXPECT_EQ(top_k_report(e, d.schema(), 5).size(), 5u);
  EXPECT_THROW(top_k_report(e, d.schema(), 0), ConfigError);
  EXPECT_THROW(top_k_report(e, d.schema(), d.cols() + 1), ConfigError);
}

}  // namespace
}  // namespace xids
