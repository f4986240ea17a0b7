#include "xids/flow_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "xids/csv.hpp"
#include "xids/error.hpp"

namespace xids {
namespace {

using json = nlohmann::json;

std::string_view trim_view(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool iequals(std::string_view a, std::string_view b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) ==
           std::tolower(static_cast<unsigned char>(y));
  });
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2.0;
}

bool is_missing(CellKind kind) {
  return kind == CellKind::kNaN || kind == CellKind::kUnparseable;
}

}  // namespace

Cell parse_cell(std::string_view text) {
  std::string_view s = trim_view(text);
  if (s.empty()) return {CellKind::kNaN, 0.0};

  bool negative = false;
  std::string_view body = s;
  if (body.front() == '+' || body.front() == '-') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  if (iequals(body, "nan")) return {CellKind::kNaN, 0.0};
  if (iequals(body, "inf") || iequals(body, "infinity")) {
    return {negative ? CellKind::kNegInf : CellKind::kPosInf, 0.0};
  }

  // from_chars rejects a leading '+', so parse the unsigned body and re-apply
  // the sign.
  if (body.empty() || body.front() == '+' || body.front() == '-') {
    return {CellKind::kUnparseable, 0.0};
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ptr != body.data() + body.size()) return {CellKind::kUnparseable, 0.0};
  if (ec == std::errc::result_out_of_range) {
    // Overflow is an infinity; underflow is zero.
    const bool overflow = body.find_first_of("eE") != std::string_view::npos &&
                          body.find("e-") == std::string_view::npos &&
                          body.find("E-") == std::string_view::npos;
    if (overflow) return {negative ? CellKind::kNegInf : CellKind::kPosInf, 0.0};
    return {CellKind::kFinite, negative ? -0.0 : 0.0};
  }
  if (ec != std::errc{}) return {CellKind::kUnparseable, 0.0};
  return {CellKind::kFinite, negative ? -value : value};
}

RawDataset parse_flow_csv(std::istream& in, const ParseOptions& options) {
  std::size_t line_number = 0;
  const auto header_line = csv::next_record(in, line_number);
  if (!header_line) throw DataError("flow CSV has no header row");

  const auto header = csv::split_record(*header_line, options.delimiter);
  const std::string_view wanted = trim_view(options.label_column);
  std::size_t label_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim_view(header[c]) == wanted) {
      label_col = c;
      break;
    }
  }
  if (label_col == header.size()) {
    throw DataError("label column '" + std::string(wanted) + "' not found in header");
  }

  std::vector<std::string> feature_names;
  feature_names.reserve(header.size() - 1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) feature_names.push_back(header[c]);
  }

  RawDataset raw;
  raw.schema = FeatureSchema::from_header(feature_names, header.size());
  if (raw.schema.empty()) throw DataError("flow CSV has no feature columns");

  while (const auto line = csv::next_record(in, line_number)) {
    auto fields = csv::split_record(*line, options.delimiter);
    if (fields.size() != header.size()) {
      raw.row_errors.push_back({line_number, header.size(), fields.size()});
      continue;
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == label_col) continue;
      raw.cells.push_back(parse_cell(fields[c]));
    }
    raw.raw_labels.emplace_back(trim_view(fields[label_col]));
  }
  if (raw.rows() == 0) {
    throw DataError("flow CSV has no valid data rows (" +
                    std::to_string(raw.row_errors.size()) + " malformed)");
  }
  return raw;
}

RawDataset parse_flow_csv(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return parse_flow_csv(in, options);
}

RawDataset concatenate(std::vector<RawDataset> parts) {
  if (parts.empty()) throw DataError("nothing to concatenate");
  RawDataset out = std::move(parts.front());
  for (std::size_t k = 1; k < parts.size(); ++k) {
    auto& part = parts[k];
    if (!(part.schema == out.schema)) {
      throw DataError("input file " + std::to_string(k + 1) +
                      " has a different feature header than the first input");
    }
    out.cells.insert(out.cells.end(), part.cells.begin(), part.cells.end());
    out.raw_labels.insert(out.raw_labels.end(),
                          std::make_move_iterator(part.raw_labels.begin()),
                          std::make_move_iterator(part.raw_labels.end()));
    out.row_errors.insert(out.row_errors.end(), part.row_errors.begin(),
                          part.row_errors.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t CleaningReport::total_nan_imputed() const {
  std::size_t total = 0;
  for (const auto& c : columns) total += c.nan_imputed + c.unparseable_imputed;
  return total;
}

std::size_t CleaningReport::total_inf_replaced() const {
  std::size_t total = 0;
  for (const auto& c : columns) total += c.pos_inf_replaced + c.neg_inf_replaced;
  return total;
}

std::string CleaningReport::to_json() const {
  json j;
  j["rows_in"] = rows_in;
  j["rows_out"] = rows_out;
  j["malformed_rows"] = malformed_rows;
  j["dropped_all_missing"] = dropped_all_missing;
  j["dropped_bad_label"] = dropped_bad_label;
  j["total_nan_imputed"] = total_nan_imputed();
  j["total_inf_replaced"] = total_inf_replaced();
  json cols = json::array();
  for (const auto& c : columns) {
    cols.push_back({{"name", c.name},
                    {"nan_imputed", c.nan_imputed},
                    {"unparseable_imputed", c.unparseable_imputed},
                    {"pos_inf_replaced", c.pos_inf_replaced},
                    {"neg_inf_replaced", c.neg_inf_replaced},
                    {"nan_fill", c.nan_fill}});
  }
  j["columns"] = std::move(cols);
  j["raw_label_counts"] = raw_label_counts;
  return j.dump(2);
}

CleanedMatrix clean(const RawDataset& raw, const CleaningPolicy& policy) {
  const std::size_t p = raw.cols();
  if (raw.rows() == 0) throw DataError("cannot clean an empty dataset");

  CleanedMatrix out;
  out.schema = raw.schema;
  out.report.rows_in = raw.rows();
  out.report.malformed_rows = raw.row_errors.size();

  for (std::size_t i = 0; i < raw.rows(); ++i) {
    bool all_missing = true;
    for (std::size_t j = 0; j < p && all_missing; ++j) {
      all_missing = is_missing(raw.at(i, j).kind);
    }
    if (all_missing && policy.drop_row_if_all_missing) {
      out.report.dropped_all_missing.push_back(i);
    } else {
      out.source_rows.push_back(i);
    }
  }
  if (out.source_rows.empty()) throw DataError("every row is entirely missing");

  const std::size_t n = out.source_rows.size();
  out.values.assign(n * p, 0.0);
  out.report.columns.resize(p);

  for (std::size_t j = 0; j < p; ++j) {
    ColumnCleaning& col = out.report.columns[j];
    col.name = raw.schema.name(j);

    std::vector<double> finite;
    finite.reserve(n);
    for (const std::size_t i : out.source_rows) {
      const Cell& cell = raw.at(i, j);
      switch (cell.kind) {
        case CellKind::kFinite: finite.push_back(cell.value); break;
        case CellKind::kNaN: ++col.nan_imputed; break;
        case CellKind::kUnparseable: ++col.unparseable_imputed; break;
        case CellKind::kPosInf: ++col.pos_inf_replaced; break;
        case CellKind::kNegInf: ++col.neg_inf_replaced; break;
      }
    }

    const bool needs_nan_stat = policy.nan_strategy != NanStrategy::kConstant &&
                                col.nan_imputed + col.unparseable_imputed > 0;
    const bool needs_inf_stat = policy.inf_strategy == InfStrategy::kClampToFinite &&
                                col.pos_inf_replaced + col.neg_inf_replaced > 0;
    if ((needs_nan_stat || needs_inf_stat) && finite.empty()) {
      throw DataError("column '" + col.name +
                      "' has no finite values to impute from");
    }

    double max_finite = 0.0;
    double min_finite = 0.0;
    if (!finite.empty()) {
      const auto [lo, hi] = std::minmax_element(finite.begin(), finite.end());
      min_finite = *lo;
      max_finite = *hi;
    }
    switch (policy.nan_strategy) {
      case NanStrategy::kColumnMedian:
        col.nan_fill = needs_nan_stat ? median_of(finite) : 0.0;
        break;
      case NanStrategy::kColumnMean:
        col.nan_fill = needs_nan_stat
                           ? std::accumulate(finite.begin(), finite.end(), 0.0) /
                                 static_cast<double>(finite.size())
                           : 0.0;
        break;
      case NanStrategy::kConstant: col.nan_fill = policy.nan_constant; break;
    }
    const bool clamp = policy.inf_strategy == InfStrategy::kClampToFinite;
    const double pos_fill = clamp ? max_finite : policy.inf_constant;
    const double neg_fill = clamp ? min_finite : policy.inf_constant;

    for (std::size_t r = 0; r < n; ++r) {
      const Cell& cell = raw.at(out.source_rows[r], j);
      double v = cell.value;
      switch (cell.kind) {
        case CellKind::kFinite: break;
        case CellKind::kNaN:
        case CellKind::kUnparseable: v = col.nan_fill; break;
        case CellKind::kPosInf: v = pos_fill; break;
        case CellKind::kNegInf: v = neg_fill; break;
      }
      out.values[r * p + j] = v;
    }
  }
  out.report.rows_out = n;
  return out;
}

// ---------------------------------------------------------------------------

std::string normalize_label(std::string_view raw) {
  std::string out(trim_view(raw));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Label LabelMap::operator()(std::string_view raw) const {
  const std::string name = normalize_label(raw);
  if (!positive_class_names.empty()) {
    for (const auto& positive : positive_class_names) {
      if (normalize_label(positive) == name) return kAttack;
    }
    return kBenign;
  }
  for (const auto& benign : benign_names) {
    if (normalize_label(benign) == name) return kBenign;
  }
  return kAttack;
}

LabelEncoding encode_labels(std::span<const std::string> raw_labels, const LabelMap& map) {
  LabelEncoding out;
  out.labels.reserve(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    if (trim_view(raw_labels[i]).empty()) {
      out.error_rows.push_back(i);
      out.labels.push_back(kBenign);
      continue;
    }
    out.labels.push_back(map(raw_labels[i]));
  }
  return out;
}

Dataset build_dataset(const RawDataset& raw, const CleaningPolicy& policy,
                      const LabelMap& labels, CleaningReport* report) {
  CleanedMatrix cleaned = clean(raw, policy);
  const std::size_t p = cleaned.schema.size();

  std::vector<std::string> kept_labels;
  kept_labels.reserve(cleaned.source_rows.size());
  for (const std::size_t i : cleaned.source_rows) kept_labels.push_back(raw.raw_labels[i]);
  const LabelEncoding encoded = encode_labels(kept_labels, labels);

  std::vector<double> values;
  std::vector<Label> y;
  values.reserve(cleaned.values.size());
  y.reserve(kept_labels.size());
  std::size_t next_error = 0;
  for (std::size_t r = 0; r < kept_labels.size(); ++r) {
    if (next_error < encoded.error_rows.size() && encoded.error_rows[next_error] == r) {
      cleaned.report.dropped_bad_label.push_back(cleaned.source_rows[r]);
      ++next_error;
      continue;
    }
    const auto begin = cleaned.values.begin() + static_cast<std::ptrdiff_t>(r * p);
    values.insert(values.end(), begin, begin + static_cast<std::ptrdiff_t>(p));
    y.push_back(encoded.labels[r]);
    ++cleaned.report.raw_label_counts[kept_labels[r]];
  }
  cleaned.report.rows_out = y.size();
  if (y.empty()) throw DataError("no rows with a usable label");

  if (report != nullptr) *report = std::move(cleaned.report);
  return Dataset(std::move(cleaned.schema), std::move(values), std::move(y));
}

// ---------------------------------------------------------------------------

Normalizer::Normalizer(FeatureSchema schema, std::vector<double> mins, std::vector<double> maxs)
    : schema_(std::move(schema)), mins_(std::move(mins)), maxs_(std::move(maxs)) {
  if (mins_.size() != schema_.size() || maxs_.size() != schema_.size()) {
    throw DataError("normalizer range count does not match its schema");
  }
}

Normalizer Normalizer::fit(const Dataset& train) {
  const std::size_t p = train.cols();
  std::vector<double> mins(p, std::numeric_limits<double>::infinity());
  std::vector<double> maxs(p, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto row = train.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      mins[j] = std::min(mins[j], row[j]);
      maxs[j] = std::max(maxs[j], row[j]);
    }
  }
  return Normalizer(train.schema(), std::move(mins), std::move(maxs));
}

double Normalizer::transform(std::size_t column, double value) const {
  const double lo = mins_[column];
  const double hi = maxs_[column];
  if (!(hi > lo)) return kConstantColumnValue;
  return (value - lo) / (hi - lo);
}

double Normalizer::inverse(std::size_t column, double scaled) const {
  const double lo = mins_[column];
  const double hi = maxs_[column];
  if (!(hi > lo)) throw DataError("column '" + schema_.name(column) + "' is constant");
  return lo + scaled * (hi - lo);
}

Dataset Normalizer::apply(const Dataset& data) const {
  if (!(data.schema() == schema_)) {
    throw DataError("normalizer was fitted on a different feature schema");
  }
  const std::size_t p = data.cols();
  std::vector<double> values(data.values().begin(), data.values().end());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = transform(k % p, values[k]);
  return Dataset(data.schema(), std::move(values),
                 std::vector<Label>(data.labels().begin(), data.labels().end()));
}

std::string Normalizer::to_json() const {
  json j;
  j["kind"] = "min-max";
  j["features"] = schema_.names();
  j["min"] = mins_;
  j["max"] = maxs_;
  j["constant_column_value"] = kConstantColumnValue;
  return j.dump(2);
}

Normalizer Normalizer::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    return Normalizer(FeatureSchema(j.at("features").get<std::vector<std::string>>()),
                      j.at("min").get<std::vector<double>>(),
                      j.at("max").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed normalizer JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

void write_dataset_csv(std::ostream& out, const Dataset& data,
                       std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  std::vector<std::string> fields(data.schema().names());
  fields.emplace_back("Label");
  csv::write_record(out, fields);
  const std::size_t p = data.cols();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < p; ++j) fields[j] = csv::format_double(row[j]);
    fields[p] = data.label(i) == kAttack ? "ATTACK" : "BENIGN";
    csv::write_record(out, fields);
  }
}

std::string schema_to_json(const FeatureSchema& schema) {
  json j;
  j["features"] = schema.names();
  j["source_count"] = schema.source_count();
  return j.dump(2);
}

FeatureSchema schema_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    return FeatureSchema(j.at("features").get<std::vector<std::string>>(),
                         j.value("source_count", std::size_t{0}));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed schema JSON: ") + e.what());
  }
}

}  // namespace xids
