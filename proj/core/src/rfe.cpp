#include "xids/rfe.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "xids/csv.hpp"
#include "xids/dataset_ops.hpp"
#include "xids/error.hpp"

namespace xids {
namespace {

struct RoundResult {
  std::vector<double> importance;
  MetricsReport validation;
  double train_ms = 0.0;
};

RoundResult run_round(const Dataset& fit, const Dataset& validation,
                      std::span<const std::string> features, const RfeConfig& config) {
  const Dataset fit_view = project_columns(fit, features);
  const Dataset val_view = project_columns(validation, features);
  Forest model;
  RoundResult out;
  out.train_ms = time_block([&] { model = train_forest(fit_view, config.forest, config.threads); });
  out.importance = feature_importance_mdi(model);
  const auto predicted = predict_labels(model, val_view);
  out.validation = compute_metrics(confusion(val_view.labels(), predicted));
  return out;
}

nlohmann::ordered_json metrics_json(const MetricsReport& m) {
  return nlohmann::ordered_json::parse(m.to_json());
}

}  // namespace

RfeTrace run_rfe(const Dataset& train, const RfeConfig& config) {
  const std::size_t p = train.cols();
  if (config.target_features < 1 || config.target_features >= p) {
    throw ConfigError("RFE target of " + std::to_string(config.target_features) +
                      " features must be at least 1 and below the " + std::to_string(p) +
                      " available");
  }
  if (config.step < 1) throw ConfigError("RFE step must be at least 1");

  Dataset fit = train;
  Dataset validation;
  if (config.validation) {
    validation = *config.validation;
  } else {
    SplitResult split = stratified_split(
        train, SplitSpec{1.0 - config.validation_fraction, config.validation_seed});
    fit = std::move(split.train);
    validation = std::move(split.test);
  }

  RfeTrace trace;
  trace.f1_floor = config.f1_floor;
  auto check_floor = [&](const MetricsReport& m, std::size_t index) {
    if (m.f1 < config.f1_floor && !trace.floor_violated) {
      trace.floor_violated = true;
      trace.first_violation = index;
    }
  };

  std::vector<std::string> surviving = train.schema().names();
  while (surviving.size() > config.target_features) {
    RoundResult round = run_round(fit, validation, surviving, config);
    check_floor(round.validation, trace.iterations.size());

    const std::size_t n_drop = std::min(config.step, surviving.size() - config.target_features);
    std::vector<std::size_t> order(surviving.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (round.importance[a] != round.importance[b]) {
        return round.importance[a] < round.importance[b];
      }
      return surviving[a] > surviving[b];
    });

    RfeIteration it;
    it.surviving = surviving;
    it.importance = round.importance;
    it.validation = round.validation;
    it.train_ms = round.train_ms;
    std::vector<bool> dropped(surviving.size(), false);
    for (std::size_t k = 0; k < n_drop; ++k) {
      dropped[order[k]] = true;
      it.eliminated.push_back(surviving[order[k]]);
    }
    std::vector<std::string> next;
    for (std::size_t j = 0; j < surviving.size(); ++j) {
      if (!dropped[j]) next.push_back(surviving[j]);
    }
    surviving = std::move(next);
    trace.iterations.push_back(std::move(it));
  }

  RoundResult final_round = run_round(fit, validation, surviving, config);
  check_floor(final_round.validation, trace.iterations.size());
  trace.final_schema = FeatureSchema(surviving, train.schema().source_count());
  trace.final_importance = std::move(final_round.importance);
  trace.final_validation = final_round.validation;
  trace.final_train_ms = final_round.train_ms;
  return trace;
}

std::string RfeTrace::to_json() const {
  nlohmann::ordered_json j;
  j["f1_floor"] = f1_floor;
  j["floor_violated"] = floor_violated;
  j["first_violation"] = first_violation ? nlohmann::ordered_json(*first_violation)
                                         : nlohmann::ordered_json(nullptr);
  auto iters = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    const auto& it = iterations[i];
    nlohmann::ordered_json e;
    e["iteration"] = i;
    e["remaining_count"] = it.surviving.size();
    e["surviving"] = it.surviving;
    e["importance"] = it.importance;
    e["eliminated"] = it.eliminated;
    e["f1"] = it.validation.f1;
    e["validation"] = metrics_json(it.validation);
    e["wall_time_ms"] = it.train_ms;
    iters.push_back(std::move(e));
  }
  j["iterations"] = std::move(iters);
  j["final"] = {{"features", final_schema.names()},
                {"importance", final_importance},
                {"f1", final_validation.f1},
                {"validation", metrics_json(final_validation)},
                {"wall_time_ms", final_train_ms}};
  return j.dump(2);
}

std::string RfeTrace::to_csv() const {
  std::ostringstream out;
  out << "iteration,remaining_count,f1,wall_time_ms\n";
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    out << i << ',' << iterations[i].surviving.size() << ','
        << csv::format_double(iterations[i].validation.f1) << ','
        << csv::format_double(iterations[i].train_ms) << '\n';
  }
  out << iterations.size() << ',' << final_schema.size() << ','
      << csv::format_double(final_validation.f1) << ','
      << csv::format_double(final_train_ms) << '\n';
  return out.str();
}

std::vector<RankEntry> rank_features(std::span<const std::string> names,
                                     std::span<const double> importance) {
  std::vector<RankEntry> out;
  out.reserve(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) out.push_back({0, names[j], importance[j]});
  std::sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.name < b.name;
  });
  for (std::size_t r = 0; r < out.size(); ++r) out[r].rank = r + 1;
  return out;
}

std::vector<RankEntry> rank_report(const RfeTrace& trace) {
  return rank_features(trace.final_schema.names(), trace.final_importance);
}

std::vector<RankEntry> initial_rank_report(const RfeTrace& trace) {
  if (trace.iterations.empty()) return rank_report(trace);
  const auto& first = trace.iterations.front();
  return rank_features(first.surviving, first.importance);
}

std::string ranking_csv(std::span<const RankEntry> ranking) {
  std::ostringstream out;
  out << "rank,feature,importance\n";
  for (const auto& e : ranking) {
    out << e.rank << ',' << csv::escape(e.name) << ',' << csv::format_double(e.importance) << '\n';
  }
  return out.str();
}

}  // namespace xids
