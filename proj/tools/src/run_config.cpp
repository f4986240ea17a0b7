#include "xids_cli/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "xids/csv.hpp"
#include "xids/error.hpp"
#include "xids/random.hpp"

namespace xids::cli {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& part : csv::split_record(s)) {
    auto item = trim(part);
    if (!item.empty()) out.push_back(std::move(item));
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k > 0) out += ',';
    out += items[k];
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("invalid value '" + std::string(text) + "' for '" + std::string(key) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for '" + std::string(key) + "'");
}

std::string one_of(std::string_view key, std::string_view text,
                   std::initializer_list<std::string_view> allowed) {
  for (const auto a : allowed) {
    if (a == text) return std::string(text);
  }
  std::string list;
  for (const auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ConfigError("'" + std::string(key) + "' must be one of " + list);
}

}  // namespace

void RunConfig::set(std::string_view raw_key, std::string_view raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  using S = std::size_t;
  if (key == "input") {
    inputs.clear();
    for (auto& p : split_list(value)) inputs.emplace_back(p);
  } else if (key == "workspace") {
    workspace = value;
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    threads = parse_number<S>(key, value);
  } else if (key == "label_column") {
    label_column = value;
  } else if (key == "benign_labels") {
    benign_labels = split_list(value);
  } else if (key == "positive_labels") {
    positive_labels = split_list(value);
  } else if (key == "nan_strategy") {
    nan_strategy = one_of(key, value, {"median", "mean", "constant"});
  } else if (key == "nan_constant") {
    nan_constant = parse_number<double>(key, value);
  } else if (key == "inf_strategy") {
    inf_strategy = one_of(key, value, {"clamp", "constant"});
  } else if (key == "inf_constant") {
    inf_constant = parse_number<double>(key, value);
  } else if (key == "drop_all_missing") {
    drop_all_missing = parse_bool(key, value);
  } else if (key == "train_fraction") {
    train_fraction = parse_number<double>(key, value);
  } else if (key == "normalize") {
    normalize = parse_bool(key, value);
  } else if (key == "n_trees") {
    n_trees = parse_number<S>(key, value);
  } else if (key == "max_depth") {
    max_depth = parse_number<S>(key, value);
  } else if (key == "min_samples_leaf") {
    min_samples_leaf = parse_number<S>(key, value);
  } else if (key == "min_samples_split") {
    min_samples_split = parse_number<S>(key, value);
  } else if (key == "max_features") {
    max_features = parse_number<S>(key, value);
  } else if (key == "bootstrap") {
    bootstrap = parse_bool(key, value);
  } else if (key == "rfe_target") {
    rfe_target = parse_number<S>(key, value);
  } else if (key == "rfe_step") {
    rfe_step = parse_number<S>(key, value);
  } else if (key == "rfe_trees") {
    rfe_trees = parse_number<S>(key, value);
  } else if (key == "f1_floor") {
    f1_floor = parse_number<double>(key, value);
  } else if (key == "validation_fraction") {
    validation_fraction = parse_number<double>(key, value);
  } else if (key == "latency_rows") {
    latency_rows = parse_number<S>(key, value);
  } else if (key == "latency_warmup") {
    latency_warmup = parse_number<S>(key, value);
  } else if (key == "explain_target") {
    explain_target = one_of(key, value, {"APT", "Normal"});
  } else if (key == "explain_sample") {
    explain_sample = parse_number<S>(key, value);
  } else if (key == "top_k") {
    top_k = parse_number<S>(key, value);
  } else if (key == "beeswarm_features") {
    beeswarm_features = parse_number<S>(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      set(std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

std::map<std::string, std::string> RunConfig::effective() const {
  auto num = [](auto v) { return csv::format_double(static_cast<double>(v)); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  return {
      {"seed", std::to_string(seed)},
      {"label_column", label_column},
      {"benign_labels", join(benign_labels)},
      {"positive_labels", join(positive_labels)},
      {"nan_strategy", nan_strategy},
      {"nan_constant", num(nan_constant)},
      {"inf_strategy", inf_strategy},
      {"inf_constant", num(inf_constant)},
      {"drop_all_missing", flag(drop_all_missing)},
      {"train_fraction", num(train_fraction)},
      {"normalize", flag(normalize)},
      {"n_trees", std::to_string(n_trees)},
      {"max_depth", std::to_string(max_depth)},
      {"min_samples_leaf", std::to_string(min_samples_leaf)},
      {"min_samples_split", std::to_string(min_samples_split)},
      {"max_features", std::to_string(max_features)},
      {"bootstrap", flag(bootstrap)},
      {"rfe_target", std::to_string(rfe_target)},
      {"rfe_step", std::to_string(rfe_step)},
      {"rfe_trees", std::to_string(rfe_trees)},
      {"f1_floor", num(f1_floor)},
      {"validation_fraction", num(validation_fraction)},
      {"latency_rows", std::to_string(latency_rows)},
      {"latency_warmup", std::to_string(latency_warmup)},
      {"explain_target", explain_target},
      {"explain_sample", std::to_string(explain_sample)},
      {"top_k", std::to_string(top_k)},
      {"beeswarm_features", std::to_string(beeswarm_features)},
  };
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : effective()) {
    for (const char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CleaningPolicy RunConfig::cleaning_policy() const {
  CleaningPolicy p;
  p.nan_strategy = nan_strategy == "median" ? NanStrategy::kColumnMedian
                   : nan_strategy == "mean" ? NanStrategy::kColumnMean
                                            : NanStrategy::kConstant;
  p.nan_constant = nan_constant;
  p.inf_strategy = inf_strategy == "clamp" ? InfStrategy::kClampToFinite : InfStrategy::kConstant;
  p.inf_constant = inf_constant;
  p.drop_row_if_all_missing = drop_all_missing;
  return p;
}

LabelMap RunConfig::label_map() const {
  LabelMap m;
  m.benign_names = {benign_labels.begin(), benign_labels.end()};
  m.positive_class_names = {positive_labels.begin(), positive_labels.end()};
  return m;
}

ForestConfig RunConfig::forest_config(std::size_t trees, std::uint64_t stream) const {
  ForestConfig c;
  c.n_trees = trees;
  c.bootstrap = bootstrap;
  c.seed = stream;
  if (max_depth > 0) c.tree.max_depth = max_depth;
  c.tree.min_samples_leaf = min_samples_leaf;
  c.tree.min_samples_split = min_samples_split;
  c.tree.max_features = max_features;
  return c;
}

Label RunConfig::target_label() const { return explain_target == "Normal" ? kBenign : kAttack; }

std::uint64_t stream_seed(const RunConfig& config, SeedStream stream) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(stream));
}

}  // namespace xids::cli
