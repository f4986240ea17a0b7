#include "xids/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "xids/error.hpp"

namespace xids {
namespace {

ClassCounts count_classes(const Dataset& data, std::span<const std::size_t> rows) {
  ClassCounts c{};
  for (const std::size_t i : rows) ++c[data.label(i)];
  return c;
}

std::uint64_t total(const ClassCounts& c) { return c[0] + c[1]; }

// Midpoint of a < b that still separates them under the `x <= t` rule.
double midpoint(double a, double b) {
  const double mid = a / 2.0 + b / 2.0;
  return (mid >= b || mid < a) ? a : mid;
}

}  // namespace

double gini_impurity(const ClassCounts& counts) {
  const auto n = total(counts);
  if (n == 0) throw std::invalid_argument("gini impurity of an empty node");
  const double p0 = static_cast<double>(counts[0]) / static_cast<double>(n);
  const double p1 = static_cast<double>(counts[1]) / static_cast<double>(n);
  return 1.0 - p0 * p0 - p1 * p1;
}

double gini_decrease(const ClassCounts& parent, const ClassCounts& left,
                     const ClassCounts& right) {
  const double n = static_cast<double>(total(parent));
  const auto n_left = total(left);
  const auto n_right = total(right);
  double result = gini_impurity(parent);
  if (n_left > 0) result -= static_cast<double>(n_left) / n * gini_impurity(left);
  if (n_right > 0) result -= static_cast<double>(n_right) / n * gini_impurity(right);
  return result;
}

// ---------------------------------------------------------------------------

std::size_t TreeConfig::resolved_max_features(std::size_t num_features) const {
  if (max_features != 0) return max_features;
  const auto m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(num_features))));
  return std::max<std::size_t>(1, m);
}

void TreeConfig::validate(std::size_t num_features) const {
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
  if (min_samples_split < 2) throw ConfigError("min_samples_split must be at least 2");
  if (num_features == 0) throw ConfigError("cannot train on zero features");
  if (resolved_max_features(num_features) > num_features) {
    throw ConfigError("max_features " + std::to_string(max_features) +
                      " exceeds the feature count " + std::to_string(num_features));
  }
}

// ---------------------------------------------------------------------------

std::size_t TrainedTree::depth() const {
  std::vector<std::size_t> d(size(), 0);
  std::size_t deepest = 0;
  for (std::size_t node = 0; node < size(); ++node) {
    deepest = std::max(deepest, d[node]);
    if (!is_leaf(node)) {
      d[static_cast<std::size_t>(left[node])] = d[node] + 1;
      d[static_cast<std::size_t>(right[node])] = d[node] + 1;
    }
  }
  return deepest;
}

std::size_t TrainedTree::leaf_for(std::span<const double> x) const {
  std::size_t node = 0;
  while (!is_leaf(node)) {
    const auto f = static_cast<std::size_t>(feature[node]);
    node = static_cast<std::size_t>(x[f] <= threshold[node] ? left[node] : right[node]);
  }
  return node;
}

double TrainedTree::node_value(std::size_t node, Label target) const {
  return static_cast<double>(counts[node][target]) / static_cast<double>(cover[node]);
}

double TrainedTree::split_decrease(std::size_t node) const {
  return gini_decrease(counts[node], counts[static_cast<std::size_t>(left[node])],
                       counts[static_cast<std::size_t>(right[node])]);
}

std::size_t TrainedTree::add_leaf(const ClassCounts& c) {
  feature.push_back(-1);
  threshold.push_back(0.0);
  left.push_back(-1);
  right.push_back(-1);
  counts.push_back(c);
  cover.push_back(total(c));
  impurity.push_back(total(c) > 0 ? gini_impurity(c) : 0.0);
  return size() - 1;
}

void TrainedTree::make_split(std::size_t node, std::size_t split_feature,
                             double split_threshold, std::size_t left_child,
                             std::size_t right_child) {
  feature[node] = static_cast<std::int32_t>(split_feature);
  threshold[node] = split_threshold;
  left[node] = static_cast<std::int32_t>(left_child);
  right[node] = static_cast<std::int32_t>(right_child);
}

void TrainedTree::validate(std::size_t num_features) const {
  const std::size_t n = size();
  auto fail = [](std::size_t node, const std::string& what) {
    throw DataError("tree node " + std::to_string(node) + ": " + what);
  };
  if (n == 0) throw DataError("tree has no nodes");
  if (threshold.size() != n || left.size() != n || right.size() != n ||
      counts.size() != n || cover.size() != n || impurity.size() != n) {
    throw DataError("tree node arrays have different lengths");
  }
  std::vector<int> parents(n, 0);
  for (std::size_t node = 0; node < n; ++node) {
    if (cover[node] == 0) fail(node, "zero cover");
    if (total(counts[node]) != cover[node]) fail(node, "class counts do not sum to cover");
    if (std::abs(impurity[node] - gini_impurity(counts[node])) > 1e-12) {
      fail(node, "impurity does not match class counts");
    }
    if (is_leaf(node)) {
      if (left[node] != -1 || right[node] != -1) fail(node, "leaf with children");
      continue;
    }
    if (num_features != 0 && static_cast<std::size_t>(feature[node]) >= num_features) {
      fail(node, "feature index out of range");
    }
    if (!std::isfinite(threshold[node])) fail(node, "non-finite threshold");
    for (const std::int32_t child : {left[node], right[node]}) {
      if (child <= static_cast<std::int32_t>(node) || child >= static_cast<std::int32_t>(n)) {
        fail(node, "child index not after parent");
      }
      ++parents[static_cast<std::size_t>(child)];
    }
    const auto l = static_cast<std::size_t>(left[node]);
    const auto r = static_cast<std::size_t>(right[node]);
    if (cover[l] + cover[r] != cover[node]) fail(node, "cover not conserved");
    if (counts[l][0] + counts[r][0] != counts[node][0] ||
        counts[l][1] + counts[r][1] != counts[node][1]) {
      fail(node, "class counts not conserved");
    }
  }
  if (parents[0] != 0) fail(0, "root has a parent");
  for (std::size_t node = 1; node < n; ++node) {
    if (parents[node] != 1) fail(node, "node is not reached exactly once");
  }
}

// ---------------------------------------------------------------------------

std::optional<SplitChoice> best_split(const Dataset& data, std::span<const std::size_t> rows,
                                      std::span<const std::size_t> candidates,
                                      const TreeConfig& config) {
  const std::size_t n = rows.size();
  if (n < config.min_samples_split || n < 2 * config.min_samples_leaf) return std::nullopt;

  const ClassCounts parent = count_classes(data, rows);
  if (parent[0] == 0 || parent[1] == 0) return std::nullopt;

  std::vector<std::size_t> features(candidates.begin(), candidates.end());
  std::sort(features.begin(), features.end());

  std::optional<SplitChoice> best;
  std::vector<std::pair<double, Label>> column(n);
  for (const std::size_t f : features) {
    for (std::size_t k = 0; k < n; ++k) column[k] = {data.at(rows[k], f), data.label(rows[k])};
    std::sort(column.begin(), column.end());
    if (column.front().first == column.back().first) continue;

    ClassCounts left{};
    for (std::size_t k = 1; k < n; ++k) {
      ++left[column[k - 1].second];
      if (column[k - 1].first == column[k].first) continue;
      if (k < config.min_samples_leaf || n - k < config.min_samples_leaf) continue;
      const ClassCounts right{parent[0] - left[0], parent[1] - left[1]};
      const double decrease = gini_decrease(parent, left, right);
      if (decrease > kMinImpurityDecrease &&
          (!best || decrease > best->decrease + kMinImpurityDecrease)) {
        best = SplitChoice{f, midpoint(column[k - 1].first, column[k].first), decrease};
      }
    }
  }
  return best;
}

TrainedTree train_tree(const Dataset& data, const TreeConfig& config, SplitMix64& rng) {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return train_tree(data, rows, config, rng);
}

TrainedTree train_tree(const Dataset& data, std::span<const std::size_t> rows,
                       const TreeConfig& config, SplitMix64& rng) {
  const std::size_t p = data.cols();
  config.validate(p);
  if (rows.empty()) throw DataError("cannot train a tree on zero rows");
  const std::size_t m = config.resolved_max_features(p);

  std::vector<std::size_t> work(rows.begin(), rows.end());
  std::vector<std::size_t> features(p);
  std::iota(features.begin(), features.end(), std::size_t{0});

  TrainedTree tree;
  tree.add_leaf(count_classes(data, work));

  struct Task {
    std::size_t node;
    std::size_t begin;
    std::size_t end;
    std::size_t depth;
  };
  std::vector<Task> stack{{0, 0, work.size(), 0}};
  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    const std::size_t cover = task.end - task.begin;
    if (cover < config.min_samples_split) continue;
    if (config.max_depth && task.depth >= *config.max_depth) continue;
    if (tree.impurity[task.node] == 0.0) continue;

    // Partial Fisher-Yates: the first m entries become a uniform draw without
    // replacement.
    for (std::size_t k = 0; k < m; ++k) {
      const auto j = k + static_cast<std::size_t>(rng.uniform(p - k));
      std::swap(features[k], features[j]);
    }
    const std::span<std::size_t> node_rows(work.data() + task.begin, cover);
    const auto split = best_split(data, node_rows,
                                  std::span<const std::size_t>(features.data(), m), config);
    if (!split) continue;

    const auto mid = std::partition(node_rows.begin(), node_rows.end(), [&](std::size_t i) {
      return data.at(i, split->feature) <= split->threshold;
    });
    const auto n_left = static_cast<std::size_t>(mid - node_rows.begin());
    const ClassCounts left_counts = count_classes(data, node_rows.first(n_left));
    const ClassCounts& node_counts = tree.counts[task.node];
    const ClassCounts right_counts{node_counts[0] - left_counts[0],
                                   node_counts[1] - left_counts[1]};
    const std::size_t l = tree.add_leaf(left_counts);
    const std::size_t r = tree.add_leaf(right_counts);
    tree.make_split(task.node, split->feature, split->threshold, l, r);
    stack.push_back({r, task.begin + n_left, task.end, task.depth + 1});
    stack.push_back({l, task.begin, task.begin + n_left, task.depth + 1});
  }
  return tree;
}

// ---------------------------------------------------------------------------

Forest train_forest(const Dataset& data, const ForestConfig& config, std::size_t threads) {
  if (config.n_trees == 0) throw ConfigError("n_trees must be at least 1");
  config.tree.validate(data.cols());

  Forest forest{data.schema(), config, std::vector<TrainedTree>(config.n_trees)};
  const std::size_t n = data.rows();

  auto grow = [&](std::size_t t) {
    SplitMix64 rng(derive_seed(config.seed, t));
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform(n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    forest.trees[t] = train_tree(data, rows, config.tree, rng);
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, config.n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < config.n_trees; ++t) grow(t);
    return forest;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < config.n_trees; t = next++) {
        try {
          grow(t);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
  return forest;
}

std::array<double, kNumClasses> predict_proba(const Forest& model, std::span<const double> x) {
  if (x.size() != model.num_features()) {
    throw DataError("instance has " + std::to_string(x.size()) + " features; model expects " +
                    std::to_string(model.num_features()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) {
      throw DataError("non-finite value for feature '" + model.schema.name(j) + "'");
    }
  }
  std::array<double, kNumClasses> proba{};
  for (const auto& tree : model.trees) {
    const std::size_t leaf = tree.leaf_for(x);
    proba[kBenign] += tree.node_value(leaf, kBenign);
    proba[kAttack] += tree.node_value(leaf, kAttack);
  }
  const auto n_trees = static_cast<double>(model.trees.size());
  proba[kBenign] /= n_trees;
  proba[kAttack] /= n_trees;
  return proba;
}

Label predict_label(const Forest& model, std::span<const double> x) {
  const auto proba = predict_proba(model, x);
  return proba[kAttack] > proba[kBenign] ? kAttack : kBenign;
}

std::vector<Label> predict_labels(const Forest& model, const Dataset& data) {
  std::vector<Label> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) out[i] = predict_label(model, data.row(i));
  return out;
}

std::vector<double> feature_importance_mdi(const Forest& model) {
  std::vector<double> importance(model.num_features(), 0.0);
  if (model.trees.empty()) throw DataError("forest has no trees");
  for (const auto& tree : model.trees) {
    const auto root_cover = static_cast<double>(tree.cover[0]);
    for (std::size_t node = 0; node < tree.size(); ++node) {
      if (tree.is_leaf(node)) continue;
      importance[static_cast<std::size_t>(tree.feature[node])] +=
          static_cast<double>(tree.cover[node]) / root_cover * tree.split_decrease(node);
    }
  }
  const double sum = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (sum > 0.0) {
    for (double& v : importance) v /= sum;
  }
  return importance;
}

}  // namespace xids
