#include <string>

#include "json.hpp"
#include "xids/error.hpp"
#include "xids/forest.hpp"

namespace xids {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormatName = "xids.forest";
constexpr int kFormatVersion = 1;

}  // namespace

// Layout (format_version 1):
//   format, format_version, features[], source_count, classes[],
//   config{n_trees, bootstrap, seed, max_depth|null, min_samples_leaf,
//          min_samples_split, max_features, max_features_resolved},
//   trees[]{feature[], threshold[], left[], right[], counts[[n0, n1]],
//           cover[], impurity[]}
std::string save_forest_json(const Forest& model) {
  json j;
  j["format"] = kFormatName;
  j["format_version"] = kFormatVersion;
  j["features"] = model.schema.names();
  j["source_count"] = model.schema.source_count();
  j["classes"] = json::array({{{"label", 0}, {"name", class_display_name(kBenign)}},
                              {{"label", 1}, {"name", class_display_name(kAttack)}}});

  const auto& c = model.config;
  json config;
  config["n_trees"] = c.n_trees;
  config["bootstrap"] = c.bootstrap;
  config["seed"] = c.seed;
  config["max_depth"] = c.tree.max_depth ? json(*c.tree.max_depth) : json(nullptr);
  config["min_samples_leaf"] = c.tree.min_samples_leaf;
  config["min_samples_split"] = c.tree.min_samples_split;
  config["max_features"] = c.tree.max_features;  // 0: floor(sqrt(P))
  config["max_features_resolved"] = c.tree.resolved_max_features(model.num_features());
  j["config"] = std::move(config);

  json trees = json::array();
  for (const auto& tree : model.trees) {
    json t;
    t["feature"] = tree.feature;
    t["threshold"] = tree.threshold;
    t["left"] = tree.left;
    t["right"] = tree.right;
    t["counts"] = tree.counts;
    t["cover"] = tree.cover;
    t["impurity"] = tree.impurity;
    trees.push_back(std::move(t));
  }
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

Forest load_forest_json(std::string_view text) {
  Forest model;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormatName) {
      throw DataError("not an xids forest model");
    }
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw DataError("unsupported model format version " + j.at("format_version").dump());
    }
    model.schema = FeatureSchema(j.at("features").get<std::vector<std::string>>(),
                                 j.value("source_count", std::size_t{0}));

    const auto& c = j.at("config");
    model.config.n_trees = c.at("n_trees").get<std::size_t>();
    model.config.bootstrap = c.at("bootstrap").get<bool>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    if (!c.at("max_depth").is_null()) {
      model.config.tree.max_depth = c.at("max_depth").get<std::size_t>();
    }
    model.config.tree.min_samples_leaf = c.at("min_samples_leaf").get<std::size_t>();
    model.config.tree.min_samples_split = c.at("min_samples_split").get<std::size_t>();
    model.config.tree.max_features = c.at("max_features").get<std::size_t>();

    for (const auto& t : j.at("trees")) {
      TrainedTree tree;
      tree.feature = t.at("feature").get<std::vector<std::int32_t>>();
      tree.threshold = t.at("threshold").get<std::vector<double>>();
      tree.left = t.at("left").get<std::vector<std::int32_t>>();
      tree.right = t.at("right").get<std::vector<std::int32_t>>();
      tree.counts = t.at("counts").get<std::vector<ClassCounts>>();
      tree.cover = t.at("cover").get<std::vector<std::uint64_t>>();
      tree.impurity = t.at("impurity").get<std::vector<double>>();
      tree.validate(model.num_features());
      model.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
  if (model.trees.empty()) throw DataError("model has no trees");
  return model;
}

}  // namespace xids
