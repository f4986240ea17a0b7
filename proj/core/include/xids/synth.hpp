#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "xids/dataset.hpp"

namespace xids::synth {

/// Label = majority vote of `informative` threshold indicators
/// [x_j > threshold] over uniform [0, 1) features; the remaining `noise`
/// columns are independent uniform noise. Informative columns are named
/// "Signal 1".., noise columns "Noise 1"... With indicator_rate q each
/// indicator fires with probability q, so the attack share is
/// P(Binomial(informative, q) > informative / 2).
struct PlantedSignalSpec {
  std::size_t rows = 4000;
  std::size_t informative = 5;
  std::size_t noise = 15;
  double indicator_rate = 0.3;
  std::uint64_t seed = 7;
};
Dataset planted_signal(const PlantedSignalSpec& spec);

/// Two Gaussian clusters with unit variance per column whose means differ by
/// `separation` standard deviations in every column.
struct TwoClusterSpec {
  std::size_t rows = 200;
  std::size_t features = 5;
  double separation = 5.0;
  double attack_share = 0.5;
  std::uint64_t seed = 11;
};
Dataset two_clusters(const TwoClusterSpec& spec);

/// Wide flow-like table: a few informative columns (half of them noisy copies
/// of each other), heavy-tailed nuisance columns and pure noise. Used for
/// feature-selection and timing runs at the 80-column width of flow exports.
struct WideFlowSpec {
  std::size_t rows = 2000;
  std::size_t features = 80;
  std::size_t informative = 8;
  double attack_share = 0.2;
  std::uint64_t seed = 13;
};
Dataset wide_flows(const WideFlowSpec& spec);

/// Writes `data` as a raw flow CSV in the style of public flow exports: a
/// leading space in header names, the label column last, benign rows labeled
/// "BENIGN" and attack rows a rotating attack name. A `dirty_rate` share of
/// the cells in noise columns (names starting with "Noise") is replaced by
/// "NaN" or "Infinity".
void write_flow_csv(std::ostream& out, const Dataset& data, double dirty_rate,
                    std::uint64_t seed);

}  // namespace xids::synth
