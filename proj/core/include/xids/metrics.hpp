#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "xids/dataset.hpp"
#include "xids/forest.hpp"

namespace xids {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Counts with `positive` as the positive class. Throws std::invalid_argument
/// on a length mismatch or a label outside {0, 1}.
ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred,
                          Label positive = kAttack);

/// Accuracy, precision, recall and F1:
///   accuracy  = (TP + TN) / (TP + TN + FP + FN)
///   precision = TP / (TP + FP)
///   recall    = TP / (TP + FN)
///   f1        = 2 * precision * recall / (precision + recall)
/// A zero denominator reports 0 and sets the matching *_undefined flag.
struct MetricsReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;

  std::string to_json() const;
};

/// Throws std::invalid_argument on an all-zero matrix.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

/// Confusion matrix as a 2x2 CSV (rows: actual, columns: predicted).
std::string confusion_csv(const ConfusionMatrix& cm);

/// Milliseconds elapsed on the monotonic clock while running `fn`.
template <typename Fn>
double time_block(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  std::forward<Fn>(fn)();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

struct TimingReport {
  double training_ms = 0.0;  // 0 when not measured
  double latency_mean_ms = 0.0;
  double latency_p50_ms = 0.0;
  double latency_p95_ms = 0.0;
  double latency_max_ms = 0.0;
  std::size_t batch_size = 0;  // measured instances
  std::size_t warmup = 0;
  std::size_t feature_count = 0;

  std::string to_json() const;
};

/// Times single-instance predict_proba calls on successive rows, discarding
/// the first `warmup` calls. Rows are reused cyclically until at least 100
/// measurements exist. Percentiles use the nearest-rank rule. Throws
/// std::invalid_argument unless 0 <= warmup < rows.
TimingReport measure_latency(const Forest& model, const Dataset& rows, std::size_t warmup);

}  // namespace xids
