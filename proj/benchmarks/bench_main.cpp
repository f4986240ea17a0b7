#include <benchmark/benchmark.h>

#include <map>

#include "xids/dataset_ops.hpp"
#include "xids/forest.hpp"
#include "xids/shap.hpp"
#include "xids/synth.hpp"

namespace {

using namespace xids;

const Dataset& wide_table() {
  static const Dataset d = synth::wide_flows({.rows = 5000, .features = 80, .seed = 13});
  return d;
}

// Training cost against column count: the first `state.range(0)` columns.
void BM_TrainForest(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> keep(wide_table().schema().names().begin(),
                                wide_table().schema().names().begin() + static_cast<long>(k));
  const Dataset d = project_columns(wide_table(), keep);
  for (auto _ : state) {
    Forest f = train_forest(d, {.n_trees = 10, .seed = 1});
    benchmark::DoNotOptimize(f.trees.data());
  }
  state.SetLabel(std::to_string(k) + " features");
}
BENCHMARK(BM_TrainForest)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);

struct ShapFixture {
  Dataset data;
  Forest model;
};

const ShapFixture& shap_fixture(std::size_t p) {
  static std::map<std::size_t, ShapFixture> cache;
  auto it = cache.find(p);
  if (it == cache.end()) {
    Dataset d = synth::planted_signal({.rows = 2000, .informative = 5, .noise = p - 5, .seed = 3});
    Forest f = train_forest(d, {.n_trees = 1, .tree = {.max_depth = 8}, .seed = 4});
    it = cache.emplace(p, ShapFixture{std::move(d), std::move(f)}).first;
  }
  return it->second;
}

void BM_TreeShap(benchmark::State& state) {
  const auto& fx = shap_fixture(static_cast<std::size_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    auto e = tree_shap(fx.model.trees[0], fx.data.row(i++ % fx.data.rows()));
    benchmark::DoNotOptimize(e.phi.data());
  }
}
BENCHMARK(BM_TreeShap)->Arg(8)->Arg(12)->Arg(16);

void BM_BruteForceShap(benchmark::State& state) {
  const auto& fx = shap_fixture(static_cast<std::size_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    auto e = brute_force_shap(fx.model.trees[0], fx.data.row(i++ % fx.data.rows()));
    benchmark::DoNotOptimize(e.phi.data());
  }
}
BENCHMARK(BM_BruteForceShap)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_PredictProba(benchmark::State& state) {
  static const Dataset d = synth::planted_signal({.rows = 4000, .seed = 7});
  static const Forest f = train_forest(d, {.n_trees = 100, .seed = 1});
  std::size_t i = 0;
  for (auto _ : state) {
    auto p = predict_proba(f, d.row(i++ % d.rows()));
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_PredictProba)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
