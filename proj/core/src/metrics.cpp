#include "xids/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace xids {
namespace {

double nearest_rank(const std::vector<double>& sorted, double q) {
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

}  // namespace

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred,
                          Label positive) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(y_true.size()) +
                                " true labels vs " + std::to_string(y_pred.size()) +
                                " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] > kAttack || y_pred[i] > kAttack) {
      throw std::invalid_argument("confusion: label outside {0, 1} at row " + std::to_string(i));
    }
    const bool actual = y_true[i] == positive;
    const bool predicted = y_pred[i] == positive;
    if (actual && predicted) {
      ++cm.tp;
    } else if (!actual && !predicted) {
      ++cm.tn;
    } else if (predicted) {
      ++cm.fp;
    } else {
      ++cm.fn;
    }
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("metrics of an empty confusion matrix");
  MetricsReport r;
  r.confusion = cm;
  const auto tp = static_cast<double>(cm.tp);
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  if (cm.tp + cm.fp == 0) {
    r.precision_undefined = true;
  } else {
    r.precision = tp / static_cast<double>(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn == 0) {
    r.recall_undefined = true;
  } else {
    r.recall = tp / static_cast<double>(cm.tp + cm.fn);
  }
  if (r.precision + r.recall == 0.0) {
    r.f1_undefined = true;
  } else {
    r.f1 = 2.0 * (r.precision * r.recall) / (r.precision + r.recall);
  }
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["confusion"] = {{"tp", confusion.tp}, {"tn", confusion.tn},
                    {"fp", confusion.fp}, {"fn", confusion.fn}};
  j["accuracy"] = accuracy;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["precision_undefined"] = precision_undefined;
  j["recall_undefined"] = recall_undefined;
  j["f1_undefined"] = f1_undefined;
  return j.dump(2);
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "actual,predicted_Normal,predicted_APT\n";
  out << "Normal," << cm.tn << ',' << cm.fp << '\n';
  out << "APT," << cm.fn << ',' << cm.tp << '\n';
  return out.str();
}

std::string TimingReport::to_json() const {
  nlohmann::ordered_json j;
  j["training_ms"] = training_ms;
  j["latency_mean_ms"] = latency_mean_ms;
  j["latency_p50_ms"] = latency_p50_ms;
  j["latency_p95_ms"] = latency_p95_ms;
  j["latency_max_ms"] = latency_max_ms;
  j["batch_size"] = batch_size;
  j["warmup"] = warmup;
  j["feature_count"] = feature_count;
  return j.dump(2);
}

TimingReport measure_latency(const Forest& model, const Dataset& rows, std::size_t warmup) {
  if (warmup >= rows.rows()) {
    throw std::invalid_argument("warmup count must be smaller than the row count");
  }
  constexpr std::size_t kMinMeasured = 100;
  const std::size_t measured = std::max(kMinMeasured, rows.rows() - warmup);

  std::vector<double> latencies;
  latencies.reserve(measured);
  double sink = 0.0;
  for (std::size_t k = 0; k < warmup + measured; ++k) {
    const auto x = rows.row(k % rows.rows());
    const double ms = time_block([&] { sink += predict_proba(model, x)[kAttack]; });
    if (k >= warmup) latencies.push_back(ms);
  }
  // Keep the predictions observable so the calls are not optimized away.
  if (std::isnan(sink)) throw std::logic_error("prediction produced NaN");

  std::sort(latencies.begin(), latencies.end());
  TimingReport report;
  report.batch_size = latencies.size();
  report.warmup = warmup;
  report.feature_count = model.num_features();
  report.latency_mean_ms =
      std::accumulate(latencies.begin(), latencies.end(), 0.0) / static_cast<double>(latencies.size());
  report.latency_p50_ms = nearest_rank(latencies, 0.50);
  report.latency_p95_ms = nearest_rank(latencies, 0.95);
  report.latency_max_ms = latencies.back();
  return report;
}

}  // namespace xids
