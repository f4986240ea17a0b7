#include "xids/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "xids/csv.hpp"
#include "xids/error.hpp"
#include "xids/random.hpp"

namespace xids::synth {
namespace {

// Box-Muller; the first uniform is shifted into (0, 1] so log() is finite.
double standard_normal(SplitMix64& rng) {
  const double u1 = 1.0 - rng.unit();
  const double u2 = rng.unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Threshold t with P(U > t) = rate for U ~ Uniform[0, 1).
double threshold_for_rate(double rate) { return 1.0 - rate; }

}  // namespace

Dataset planted_signal(const PlantedSignalSpec& spec) {
  if (spec.rows == 0 || spec.informative == 0) {
    throw ConfigError("planted-signal data needs rows and informative features");
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < spec.informative; ++j) names.push_back("Signal " + std::to_string(j + 1));
  for (std::size_t j = 0; j < spec.noise; ++j) names.push_back("Noise " + std::to_string(j + 1));

  const std::size_t p = names.size();
  const double t = threshold_for_rate(spec.indicator_rate);
  SplitMix64 rng(spec.seed);
  std::vector<double> values(spec.rows * p);
  std::vector<Label> labels(spec.rows);
  for (std::size_t i = 0; i < spec.rows; ++i) {
    std::size_t votes = 0;
    for (std::size_t j = 0; j < p; ++j) {
      const double v = rng.unit();
      values[i * p + j] = v;
      if (j < spec.informative && v > t) ++votes;
    }
    labels[i] = 2 * votes > spec.informative ? kAttack : kBenign;
  }
  return Dataset(FeatureSchema(std::move(names)), std::move(values), std::move(labels));
}

Dataset two_clusters(const TwoClusterSpec& spec) {
  if (spec.rows == 0 || spec.features == 0) throw ConfigError("two-cluster data needs rows and features");
  std::vector<std::string> names;
  for (std::size_t j = 0; j < spec.features; ++j) names.push_back("x" + std::to_string(j));
  SplitMix64 rng(spec.seed);
  std::vector<double> values(spec.rows * spec.features);
  std::vector<Label> labels(spec.rows);
  const auto n_attack = static_cast<std::size_t>(std::llround(spec.attack_share * static_cast<double>(spec.rows)));
  for (std::size_t i = 0; i < spec.rows; ++i) {
    labels[i] = i < n_attack ? kAttack : kBenign;
    const double center = labels[i] == kAttack ? spec.separation : 0.0;
    for (std::size_t j = 0; j < spec.features; ++j) {
      values[i * spec.features + j] = center + standard_normal(rng);
    }
  }
  return Dataset(FeatureSchema(std::move(names)), std::move(values), std::move(labels));
}

Dataset wide_flows(const WideFlowSpec& spec) {
  if (spec.rows == 0 || spec.features < spec.informative || spec.informative < 2) {
    throw ConfigError("wide-flow data needs rows and at least two informative features");
  }
  const std::size_t p = spec.features;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) {
    const std::string idx = (j < 9 ? "0" : "") + std::to_string(j + 1);
    names.push_back((j < spec.informative ? "Flow Signal " : "Flow Aux ") + idx);
  }

  SplitMix64 rng(spec.seed);
  std::vector<double> values(spec.rows * p);
  std::vector<Label> labels(spec.rows);
  const std::size_t half = spec.informative / 2;
  for (std::size_t i = 0; i < spec.rows; ++i) {
    const bool attack = rng.unit() < spec.attack_share;
    labels[i] = attack ? kAttack : kBenign;
    double* row = values.data() + i * p;
    // Informative: class-shifted Gaussians; the second half are noisy copies
    // of the first half.
    for (std::size_t j = 0; j < half; ++j) {
      const double shift = attack ? 1.0 + 0.25 * static_cast<double>(j) : 0.0;
      row[j] = shift + standard_normal(rng);
    }
    for (std::size_t j = half; j < spec.informative; ++j) {
      row[j] = row[j - half] + 0.5 * standard_normal(rng);
    }
    for (std::size_t j = spec.informative; j < p; ++j) {
      // Alternate between log-normal (rate-like) and uniform nuisance columns.
      row[j] = (j % 2 == 0) ? std::exp(standard_normal(rng)) : rng.unit() * 1000.0;
    }
  }
  return Dataset(FeatureSchema(std::move(names)), std::move(values), std::move(labels));
}

void write_flow_csv(std::ostream& out, const Dataset& data, double dirty_rate,
                    std::uint64_t seed) {
  static constexpr std::array<const char*, 7> kAttackNames = {
      "DDoS", "PortScan", "Bot", "FTP-Patator", "SSH-Patator", "DoS Hulk", "Infiltration"};

  const std::size_t p = data.cols();
  std::vector<bool> dirty_column(p);
  std::vector<std::string> fields;
  for (std::size_t j = 0; j < p; ++j) {
    dirty_column[j] = data.schema().name(j).rfind("Noise", 0) == 0;
    fields.push_back(" " + data.schema().name(j));
  }
  fields.emplace_back(" Label");
  csv::write_record(out, fields);

  SplitMix64 rng(seed);
  std::size_t attack_index = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      if (dirty_column[j] && rng.unit() < dirty_rate) {
        fields[j] = rng.unit() < 0.5 ? "NaN" : "Infinity";
      } else {
        fields[j] = csv::format_double(row[j]);
      }
    }
    fields[p] = data.label(i) == kAttack
                    ? kAttackNames[attack_index++ % kAttackNames.size()]
                    : "BENIGN";
    csv::write_record(out, fields);
  }
}

}  // namespace xids::synth
