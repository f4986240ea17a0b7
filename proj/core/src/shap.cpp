#include "xids/shap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "xids/csv.hpp"
#include "xids/error.hpp"
#include "xids/random.hpp"

namespace xids {
namespace {

void require_finite(std::span<const double> x) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) {
      throw DataError("cannot explain an instance with a non-finite value at feature " +
                      std::to_string(j));
    }
  }
}

std::size_t child(const TrainedTree& tree, std::size_t node, bool go_left) {
  return static_cast<std::size_t>(go_left ? tree.left[node] : tree.right[node]);
}

// --- TreeSHAP path bookkeeping ---------------------------------------------
//
// A path element records a feature seen on the way down, the share of cover
// that reaches the current node when that feature is unknown (zero_fraction)
// or known (one_fraction, 1 or 0), and `weight`, the permutation weight of
// subsets of a given size that the extension recurrence maintains.

struct PathElement {
  std::int64_t feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

void extend_path(std::span<PathElement> path, std::size_t depth, double zero_fraction,
                 double one_fraction, std::int64_t feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  const auto d = static_cast<double>(depth);
  for (std::size_t i = depth; i-- > 0;) {
    const auto fi = static_cast<double>(i);
    path[i + 1].weight += one_fraction * path[i].weight * (fi + 1.0) / (d + 1.0);
    path[i].weight = zero_fraction * path[i].weight * (d - fi) / (d + 1.0);
  }
}

// Inverse of extend_path() for the element at `index`; the path shrinks by one.
void unwind_path(std::span<PathElement> path, std::size_t depth, std::size_t index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  const auto d = static_cast<double>(depth);
  double next_one = path[depth].weight;
  for (std::size_t i = depth; i-- > 0;) {
    const auto fi = static_cast<double>(i);
    if (one_fraction != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next_one * (d + 1.0) / ((fi + 1.0) * one_fraction);
      next_one = tmp - path[i].weight * zero_fraction * (d - fi) / (d + 1.0);
    } else {
      path[i].weight = path[i].weight * (d + 1.0) / (zero_fraction * (d - fi));
    }
  }
  for (std::size_t i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

// Total weight the path would have with element `index` unwound, without
// modifying it.
double unwound_path_sum(std::span<const PathElement> path, std::size_t depth, std::size_t index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  const auto d = static_cast<double>(depth);
  double next_one = path[depth].weight;
  double total = 0.0;
  for (std::size_t i = depth; i-- > 0;) {
    const auto fi = static_cast<double>(i);
    if (one_fraction != 0.0) {
      const double tmp = next_one * (d + 1.0) / ((fi + 1.0) * one_fraction);
      total += tmp;
      next_one = path[i].weight - tmp * zero_fraction * (d - fi) / (d + 1.0);
    } else {
      total += path[i].weight / zero_fraction / ((d - fi) / (d + 1.0));
    }
  }
  return total;
}

class TreeShapRecursion {
 public:
  TreeShapRecursion(const TrainedTree& tree, std::span<const double> x, Label target,
                    std::span<double> phi)
      : tree_(tree), x_(x), target_(target), phi_(phi) {
    // Each recursion level copies the parent's path (at most depth + 2
    // elements) into the next slice of one shared buffer.
    const std::size_t max_len = tree.depth() + 2;
    buffer_.resize(max_len * (max_len + 1) / 2);
  }

  void run() { recurse(0, 0, 0, 0, 1.0, 1.0, -1); }

 private:
  void recurse(std::size_t node, std::size_t depth, std::size_t parent_offset,
               std::size_t offset, double zero_fraction, double one_fraction,
               std::int64_t feature) {
    std::span<PathElement> path(buffer_.data() + offset, depth + 1);
    if (depth > 0) {
      std::copy_n(buffer_.begin() + static_cast<std::ptrdiff_t>(parent_offset), depth,
                  path.begin());
    }
    extend_path(path, depth, zero_fraction, one_fraction, feature);

    if (tree_.is_leaf(node)) {
      const double value = tree_.node_value(node, target_);
      for (std::size_t i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        const auto& el = path[i];
        phi_[static_cast<std::size_t>(el.feature)] +=
            w * (el.one_fraction - el.zero_fraction) * value;
      }
      return;
    }

    const auto split = static_cast<std::size_t>(tree_.feature[node]);
    const bool go_left = x_[split] <= tree_.threshold[node];
    const std::size_t hot = child(tree_, node, go_left);
    const std::size_t cold = child(tree_, node, !go_left);
    const auto cover = static_cast<double>(tree_.cover[node]);
    if (cover == 0.0) throw DataError("zero-cover internal node " + std::to_string(node));
    const double hot_zero = static_cast<double>(tree_.cover[hot]) / cover;
    const double cold_zero = static_cast<double>(tree_.cover[cold]) / cover;

    // A feature already on the path is unwound and re-extended with its
    // fractions combined, so each feature appears at most once.
    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    std::size_t path_depth = depth;
    for (std::size_t k = 0; k <= depth; ++k) {
      if (path[k].feature == static_cast<std::int64_t>(split)) {
        incoming_zero = path[k].zero_fraction;
        incoming_one = path[k].one_fraction;
        unwind_path(path, depth, k);
        --path_depth;
        break;
      }
    }

    const std::size_t child_offset = offset + depth + 1;
    const auto f = static_cast<std::int64_t>(split);
    recurse(hot, path_depth + 1, offset, child_offset, hot_zero * incoming_zero, incoming_one, f);
    recurse(cold, path_depth + 1, offset, child_offset, cold_zero * incoming_zero, 0.0, f);
  }

  const TrainedTree& tree_;
  std::span<const double> x_;
  Label target_;
  std::span<double> phi_;
  std::vector<PathElement> buffer_;
};

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            const std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

double ShapExplanation::phi_sum() const {
  return std::accumulate(phi.begin(), phi.end(), 0.0);
}

double tree_expectation(const TrainedTree& tree, std::span<const double> x,
                        const std::vector<bool>& known, Label target) {
  struct Frame {
    std::size_t node;
    double weight;
  };
  double result = 0.0;
  std::vector<Frame> stack{{0, 1.0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (tree.is_leaf(f.node)) {
      result += f.weight * tree.node_value(f.node, target);
      continue;
    }
    const auto split = static_cast<std::size_t>(tree.feature[f.node]);
    if (split < known.size() && known[split]) {
      stack.push_back({child(tree, f.node, x[split] <= tree.threshold[f.node]), f.weight});
      continue;
    }
    const auto cover = static_cast<double>(tree.cover[f.node]);
    if (cover == 0.0) throw DataError("zero-cover internal node " + std::to_string(f.node));
    for (const bool left : {true, false}) {
      const std::size_t c = child(tree, f.node, left);
      stack.push_back({c, f.weight * static_cast<double>(tree.cover[c]) / cover});
    }
  }
  return result;
}

ShapExplanation brute_force_shap(const TrainedTree& tree, std::span<const double> x,
                                 Label target) {
  const std::size_t p = x.size();
  if (p > kBruteForceMaxFeatures) {
    throw ConfigError("brute-force Shapley enumeration is limited to " +
                      std::to_string(kBruteForceMaxFeatures) + " features (got " +
                      std::to_string(p) + "); use tree_shap");
  }
  require_finite(x);

  const std::size_t n_subsets = std::size_t{1} << p;
  std::vector<double> value(n_subsets);
  std::vector<bool> known(p);
  for (std::size_t mask = 0; mask < n_subsets; ++mask) {
    for (std::size_t j = 0; j < p; ++j) known[j] = (mask >> j) & 1U;
    value[mask] = tree_expectation(tree, x, known, target);
  }

  // |S|! (P - |S| - 1)! / P! = 1 / (P * C(P - 1, |S|))
  std::vector<double> weight(p, 0.0);
  for (std::size_t s = 0; s < p; ++s) {
    double binom = 1.0;
    for (std::size_t k = 1; k <= s; ++k) {
      binom = binom * static_cast<double>(p - 1 - s + k) / static_cast<double>(k);
    }
    weight[s] = 1.0 / (static_cast<double>(p) * binom);
  }

  ShapExplanation out;
  out.phi.assign(p, 0.0);
  out.values.assign(x.begin(), x.end());
  out.target_class = target;
  out.base_value = value[0];
  out.output = value[n_subsets - 1];
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    double acc = 0.0;
    for (std::size_t mask = 0; mask < n_subsets; ++mask) {
      if (mask & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      acc += weight[size] * (value[mask | bit] - value[mask]);
    }
    out.phi[j] = acc;
  }
  return out;
}

ShapExplanation tree_shap(const TrainedTree& tree, std::span<const double> x, Label target) {
  require_finite(x);
  ShapExplanation out;
  out.phi.assign(x.size(), 0.0);
  out.values.assign(x.begin(), x.end());
  out.target_class = target;
  out.base_value = tree_expectation(tree, x, {}, target);
  out.output = tree.predict(x, target);
  TreeShapRecursion(tree, x, target, out.phi).run();
  return out;
}

ShapExplanation forest_shap(const Forest& model, std::span<const double> x, Label target) {
  const auto proba = predict_proba(model, x);  // validates length and finiteness
  ShapExplanation out;
  out.phi.assign(x.size(), 0.0);
  out.values.assign(x.begin(), x.end());
  out.target_class = target;
  for (const auto& tree : model.trees) {
    const ShapExplanation e = tree_shap(tree, x, target);
    for (std::size_t j = 0; j < x.size(); ++j) out.phi[j] += e.phi[j];
    out.base_value += e.base_value;
  }
  const auto n_trees = static_cast<double>(model.trees.size());
  for (double& v : out.phi) v /= n_trees;
  out.base_value /= n_trees;
  out.output = proba[target];
  return out;
}

std::vector<ShapExplanation> explain_rows(const Forest& model, const Dataset& data,
                                          std::span<const std::size_t> rows, Label target,
                                          std::size_t threads) {
  if (!(data.schema() == model.schema)) {
    throw DataError("dataset features do not match the model's features");
  }
  std::vector<ShapExplanation> out(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    out[k] = forest_shap(model, data.row(rows[k]), target);
  });
  return out;
}

std::vector<std::size_t> sample_rows(std::size_t n, std::size_t max_rows, std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (n > max_rows) {
    SplitMix64 rng(seed);
    rng.shuffle(std::span<std::size_t>(rows));
    rows.resize(max_rows);
    std::sort(rows.begin(), rows.end());
  }
  return rows;
}

GlobalImportance global_importance(const FeatureSchema& schema,
                                   std::span<const ShapExplanation> explanations) {
  GlobalImportance out;
  out.sample_size = explanations.size();
  std::vector<double> sums(schema.size(), 0.0);
  for (const auto& e : explanations) {
    for (std::size_t j = 0; j < sums.size(); ++j) sums[j] += std::abs(e.phi[j]);
  }
  for (std::size_t j = 0; j < sums.size(); ++j) {
    const double mean = explanations.empty() ? 0.0
                                             : sums[j] / static_cast<double>(explanations.size());
    out.entries.push_back({schema.name(j), j, mean});
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const GlobalImportanceEntry& a, const GlobalImportanceEntry& b) {
              if (a.mean_abs_phi != b.mean_abs_phi) return a.mean_abs_phi > b.mean_abs_phi;
              return a.feature < b.feature;
            });
  return out;
}

GlobalImportance global_importance(const Forest& model, const Dataset& sample,
                                   std::size_t max_rows, std::uint64_t seed, Label target,
                                   std::size_t threads) {
  if (max_rows == 0) throw ConfigError("global importance needs at least one row");
  const auto rows = sample_rows(sample.rows(), max_rows, seed);
  const auto explanations = explain_rows(model, sample, rows, target, threads);
  return global_importance(model.schema, explanations);
}

std::string GlobalImportance::to_csv() const {
  std::ostringstream out;
  out << "feature,mean_abs_phi\n";
  for (const auto& e : entries) {
    out << csv::escape(e.feature) << ',' << csv::format_double(e.mean_abs_phi) << '\n';
  }
  return out.str();
}

std::vector<BeeswarmPoint> beeswarm(const FeatureSchema& schema,
                                    std::span<const ShapExplanation> explanations,
                                    std::size_t k) {
  const GlobalImportance ranking = global_importance(schema, explanations);
  k = std::min(k, schema.size());
  std::vector<BeeswarmPoint> out;
  out.reserve(k * explanations.size());
  for (std::size_t r = 0; r < k; ++r) {
    const auto& entry = ranking.entries[r];
    for (const auto& e : explanations) {
      out.push_back({entry.feature, e.values[entry.index], e.phi[entry.index]});
    }
  }
  return out;
}

std::string beeswarm_csv(std::span<const BeeswarmPoint> points) {
  std::ostringstream out;
  out << "feature,value,phi\n";
  for (const auto& p : points) {
    out << csv::escape(p.feature) << ',' << csv::format_double(p.value) << ','
        << csv::format_double(p.phi) << '\n';
  }
  return out.str();
}

std::vector<AttributionEntry> top_k_report(const ShapExplanation& explanation,
                                           const FeatureSchema& schema, std::size_t k) {
  const std::size_t p = explanation.phi.size();
  if (schema.size() != p) throw DataError("explanation and schema disagree on feature count");
  if (k < 1 || k > p) {
    throw ConfigError("top-k must lie in [1, " + std::to_string(p) + "], got " +
                      std::to_string(k));
  }
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double pa = std::abs(explanation.phi[a]);
    const double pb = std::abs(explanation.phi[b]);
    if (pa != pb) return pa > pb;
    return schema.name(a) < schema.name(b);
  });
  std::vector<AttributionEntry> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t j = order[r];
    out.push_back({schema.name(j), explanation.values[j], explanation.phi[j]});
  }
  return out;
}

std::string explanation_json(const ShapExplanation& explanation,
                             std::span<const AttributionEntry> entries) {
  nlohmann::ordered_json j;
  j["base_value"] = explanation.base_value;
  j["output"] = explanation.output;
  j["target_class"] = explanation.target_class;
  j["target_name"] = class_display_name(explanation.target_class);
  j["phi_sum"] = explanation.phi_sum();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : entries) arr.push_back({{"feature", e.feature}, {"value", e.value}, {"phi", e.phi}});
  j["entries"] = std::move(arr);
  return j.dump(2);
}

}  // namespace xids
