#include "xids_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "xids/csv.hpp"
#include "xids/dataset_ops.hpp"
#include "xids/error.hpp"
#include "xids/flow_ingest.hpp"
#include "xids/forest.hpp"
#include "xids/metrics.hpp"
#include "xids/rfe.hpp"
#include "xids/shap.hpp"
#include "xids/synth.hpp"
#include "xids_cli/run_config.hpp"
#include "xids_cli/svg_chart.hpp"

namespace xids::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr const char* kCleaned = "cleaned.csv";
constexpr const char* kSchema = "schema.json";
constexpr const char* kCleaningReport = "cleaning_report.json";
constexpr const char* kAssignment = "split_assignment.csv";
constexpr const char* kNormalizer = "normalizer.json";
constexpr const char* kRfeJson = "rfe_trace.json";
constexpr const char* kRfeCsv = "rfe_trace.csv";
constexpr const char* kSelected = "selected_features.json";
constexpr const char* kRankInitial = "ranking_initial.csv";
constexpr const char* kRankFinal = "ranking_final.csv";
constexpr const char* kGlobalCsv = "global_importance.csv";
constexpr const char* kGlobalSvg = "global_importance.svg";
constexpr const char* kBeeswarm = "beeswarm.csv";
constexpr const char* kReportJson = "report.json";
constexpr const char* kReportMd = "report.md";

// Refusal to overwrite existing outputs; reported as a usage error.
class OverwriteRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary file so an interrupted run never leaves a
// truncated artifact behind.
void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out.flush()) throw DataError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

ojson parse_json_file(const fs::path& path) {
  try {
    return ojson::parse(read_text(path));
  } catch (const ojson::exception& e) {
    throw DataError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

struct Context {
  RunConfig config;
  bool force = false;
  std::ostream& out;

  fs::path file(const std::string& name) const { return config.workspace / name; }

  fs::path require(const std::string& name, const std::string& stage) const {
    const fs::path p = file(name);
    if (!fs::exists(p)) throw MissingArtifactError(p.string(), stage);
    return p;
  }

  void guard(const std::vector<std::string>& outputs) const {
    fs::create_directories(config.workspace);
    if (force) return;
    for (const auto& name : outputs) {
      if (fs::exists(file(name))) {
        throw OverwriteRefused("'" + file(name).string() +
                               "' already exists; pass --force to overwrite");
      }
    }
  }

  ojson provenance(const std::string& stage) const {
    ojson cfg = ojson::object();
    for (const auto& [k, v] : config.effective()) cfg[k] = v;
    return {{"stage", stage},
            {"config_hash", config.hash()},
            {"seed", config.seed},
            {"config", std::move(cfg)}};
  }

  // Prepends a "provenance" member to a JSON object.
  std::string stamp_json(const ojson& body, const std::string& stage) const {
    ojson j = ojson::object();
    j["provenance"] = provenance(stage);
    for (const auto& [k, v] : body.items()) j[k] = v;
    return j.dump(2) + "\n";
  }
  std::string stamp_text(std::string_view body, const std::string& stage) const {
    return stamp_json(ojson::parse(body), stage);
  }

  std::vector<std::string> comments(const std::string& stage) const {
    std::string cfg;
    for (const auto& [k, v] : config.effective()) cfg += (cfg.empty() ? "" : "; ") + k + "=" + v;
    return {"xids " + stage, "config_hash=" + config.hash() + " seed=" + std::to_string(config.seed),
            "config: " + cfg};
  }

  std::string stamp_csv(const std::string& body, const std::string& stage) const {
    std::string out;
    for (const auto& c : comments(stage)) out += "# " + c + "\n";
    return out + body;
  }
};

// --- shared loading --------------------------------------------------------

Dataset load_cleaned(const Context& ctx) {
  const fs::path path = ctx.require(kCleaned, "ingest");
  return build_dataset(parse_flow_csv(path), CleaningPolicy{}, LabelMap{});
}

struct SplitData {
  Dataset train;
  Dataset test;
};

SplitData load_split(const Context& ctx) {
  const Dataset data = load_cleaned(ctx);
  std::ifstream in(ctx.require(kAssignment, "split"));
  const auto assignment = read_assignment_csv(in);
  SplitResult split = apply_assignment(data, assignment);
  if (!ctx.config.normalize) return {std::move(split.train), std::move(split.test)};
  const Normalizer norm = Normalizer::from_json(read_text(ctx.require(kNormalizer, "split")));
  return {norm.apply(split.train), norm.apply(split.test)};
}

std::vector<std::string> load_selected(const Context& ctx) {
  return schema_from_json(read_text(ctx.require(kSelected, "rfe"))).names();
}

std::string mode_file(const char* stem, const std::string& mode, const char* ext) {
  return std::string(stem) + "_" + mode + ext;
}

Forest load_model(const Context& ctx, const std::string& mode) {
  const auto path = ctx.require(mode_file("model", mode, ".json"), "train --features " + mode);
  return load_forest_json(read_text(path));
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- stages ----------------------------------------------------------------

void cmd_ingest(Context& ctx) {
  const auto& cfg = ctx.config;
  if (cfg.inputs.empty()) throw ConfigError("no input CSV given (use --input or 'input =')");
  for (const auto& p : cfg.inputs) {
    if (!fs::exists(p)) throw DataError("input file '" + p.string() + "' does not exist");
  }
  ctx.guard({kCleaned, kSchema, kCleaningReport});

  ParseOptions options;
  options.label_column = cfg.label_column;
  std::vector<RawDataset> parts;
  for (const auto& p : cfg.inputs) parts.push_back(parse_flow_csv(p, options));
  const RawDataset raw = concatenate(std::move(parts));

  CleaningReport report;
  const Dataset data = build_dataset(raw, cfg.cleaning_policy(), cfg.label_map(), &report);

  std::ostringstream csv_out;
  write_dataset_csv(csv_out, data, ctx.comments("ingest"));
  write_text(ctx.file(kCleaned), csv_out.str());
  write_text(ctx.file(kSchema), ctx.stamp_text(schema_to_json(data.schema()), "ingest"));
  write_text(ctx.file(kCleaningReport), ctx.stamp_text(report.to_json(), "ingest"));

  const auto counts = data.class_counts();
  ctx.out << "ingested " << data.rows() << " rows x " << data.cols() << " features ("
          << counts[kBenign] << " Normal, " << counts[kAttack] << " APT)\n"
          << "imputed " << report.total_nan_imputed() << " missing cells, replaced "
          << report.total_inf_replaced() << " infinities, skipped " << report.malformed_rows
          << " malformed rows, dropped "
          << report.dropped_all_missing.size() + report.dropped_bad_label.size() << " rows\n";
}

void cmd_split(Context& ctx) {
  const Dataset data = load_cleaned(ctx);
  ctx.guard({kAssignment, kNormalizer});
  const SplitResult split = stratified_split(
      data, {ctx.config.train_fraction, stream_seed(ctx.config, SeedStream::kSplit)});

  std::ostringstream a;
  write_assignment_csv(a, split.assignment, ctx.comments("split"));
  write_text(ctx.file(kAssignment), a.str());
  write_text(ctx.file(kNormalizer),
             ctx.stamp_text(Normalizer::fit(split.train).to_json(), "split"));

  const auto tr = split.train.class_counts();
  const auto te = split.test.class_counts();
  ctx.out << "train " << split.train.rows() << " rows (" << tr[0] << " Normal, " << tr[1]
          << " APT), test " << split.test.rows() << " rows (" << te[0] << " Normal, " << te[1]
          << " APT)\n";
}

void cmd_rfe(Context& ctx) {
  const auto& cfg = ctx.config;
  const SplitData data = load_split(ctx);
  ctx.guard({kRfeJson, kRfeCsv, kSelected, kRankInitial, kRankFinal});

  RfeConfig rc;
  rc.target_features = cfg.rfe_target;
  rc.step = cfg.rfe_step;
  rc.f1_floor = cfg.f1_floor;
  rc.forest = cfg.forest_config(cfg.rfe_trees, stream_seed(cfg, SeedStream::kRfeForest));
  rc.validation_fraction = cfg.validation_fraction;
  rc.validation_seed = stream_seed(cfg, SeedStream::kRfeValidation);
  rc.threads = cfg.threads;
  const RfeTrace trace = run_rfe(data.train, rc);

  write_text(ctx.file(kRfeJson), ctx.stamp_text(trace.to_json(), "rfe"));
  write_text(ctx.file(kRfeCsv), ctx.stamp_csv(trace.to_csv(), "rfe"));
  ojson selected = ojson::parse(schema_to_json(trace.final_schema));
  selected["validation_f1"] = trace.final_validation.f1;
  selected["floor_violated"] = trace.floor_violated;
  write_text(ctx.file(kSelected), ctx.stamp_json(selected, "rfe"));
  write_text(ctx.file(kRankInitial),
             ctx.stamp_csv(ranking_csv(initial_rank_report(trace)), "rfe"));
  write_text(ctx.file(kRankFinal), ctx.stamp_csv(ranking_csv(rank_report(trace)), "rfe"));

  ctx.out << "RFE " << data.train.cols() << " -> " << trace.final_schema.size() << " features in "
          << trace.iterations.size() << " rounds; validation F1 of final model "
          << fmt(trace.final_validation.f1) << "\n";
  if (trace.floor_violated) {
    const std::size_t at = *trace.first_violation;
    ctx.out << "warning: validation F1 fell below the " << fmt(cfg.f1_floor, 2) << " floor "
            << (at < trace.iterations.size() ? "at round " + std::to_string(at)
                                             : std::string("on the final model"))
            << "\n";
  }
  for (const auto& e : rank_report(trace)) {
    ctx.out << "  " << e.rank << ". " << e.name << "  " << fmt(e.importance) << "\n";
  }
}

void check_mode(const std::string& mode) {
  if (mode != "selected" && mode != "full") {
    throw ConfigError("--features must be 'selected' or 'full'");
  }
}

void cmd_train(Context& ctx, const std::string& mode) {
  check_mode(mode);
  const auto& cfg = ctx.config;
  SplitData data = load_split(ctx);
  Dataset train = mode == "selected" ? project_columns(data.train, load_selected(ctx))
                                     : std::move(data.train);
  const std::string model_name = mode_file("model", mode, ".json");
  const std::string timing_name = mode_file("train_timing", mode, ".json");
  ctx.guard({model_name, timing_name});

  Forest model;
  const ForestConfig fc = cfg.forest_config(cfg.n_trees, stream_seed(cfg, SeedStream::kTrainForest));
  const double ms = time_block([&] { model = train_forest(train, fc, cfg.threads); });

  write_text(ctx.file(model_name), ctx.stamp_text(save_forest_json(model), "train"));
  const ojson timing = {{"features", mode},
                        {"training_ms", ms},
                        {"feature_count", train.cols()},
                        {"train_rows", train.rows()}};
  write_text(ctx.file(timing_name), ctx.stamp_json(timing, "train"));
  ctx.out << "trained " << fc.n_trees << " trees on " << train.rows() << " rows x "
          << train.cols() << " features in " << fmt(ms, 1) << " ms\n";
}

void cmd_evaluate(Context& ctx, const std::string& mode) {
  check_mode(mode);
  const auto& cfg = ctx.config;
  const Forest model = load_model(ctx, mode);
  const ojson train_timing = parse_json_file(
      ctx.require(mode_file("train_timing", mode, ".json"), "train --features " + mode));
  const SplitData data = load_split(ctx);
  const Dataset test = project_columns(data.test, model.schema.names());
  const std::string metrics_name = mode_file("metrics", mode, ".json");
  const std::string timing_name = mode_file("timing", mode, ".json");
  const std::string confusion_name = mode_file("confusion", mode, ".csv");
  ctx.guard({metrics_name, timing_name, confusion_name});

  const auto predicted = predict_labels(model, test);
  const MetricsReport m = compute_metrics(confusion(test.labels(), predicted));

  std::vector<std::size_t> rows(std::min(std::max<std::size_t>(cfg.latency_rows, 2), test.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const Dataset batch = test.select_rows(rows);
  TimingReport timing = measure_latency(model, batch, std::min(cfg.latency_warmup, batch.rows() - 1));
  timing.training_ms = train_timing.at("training_ms").get<double>();

  ojson metrics = ojson::parse(m.to_json());
  metrics["features"] = mode;
  metrics["feature_count"] = model.num_features();
  metrics["test_rows"] = test.rows();
  write_text(ctx.file(metrics_name), ctx.stamp_json(metrics, "evaluate"));
  ojson tj = ojson::parse(timing.to_json());
  tj["features"] = mode;
  write_text(ctx.file(timing_name), ctx.stamp_json(tj, "evaluate"));
  write_text(ctx.file(confusion_name), ctx.stamp_csv(confusion_csv(m.confusion), "evaluate"));

  ctx.out << "features=" << mode << " (" << model.num_features() << ")  accuracy "
          << fmt(m.accuracy) << "  precision " << fmt(m.precision) << "  recall "
          << fmt(m.recall) << "  F1 " << fmt(m.f1) << "\n"
          << "training " << fmt(timing.training_ms, 1) << " ms; latency mean "
          << fmt(timing.latency_mean_ms, 4) << " ms, p50 " << fmt(timing.latency_p50_ms, 4)
          << " ms, p95 " << fmt(timing.latency_p95_ms, 4) << " ms over " << timing.batch_size
          << " predictions\n";
}

void cmd_explain(Context& ctx, const std::string& mode, const std::vector<std::size_t>& rows) {
  check_mode(mode);
  const auto& cfg = ctx.config;
  const Forest model = load_model(ctx, mode);
  const SplitData data = load_split(ctx);
  const Dataset test = project_columns(data.test, model.schema.names());
  for (const std::size_t r : rows) {
    if (r >= test.rows()) {
      throw ConfigError("row " + std::to_string(r) + " is out of range; the test split has " +
                        std::to_string(test.rows()) + " rows");
    }
  }
  std::vector<std::string> outputs{kGlobalCsv, kGlobalSvg, kBeeswarm};
  for (const std::size_t r : rows) outputs.push_back("explanation_row" + std::to_string(r) + ".json");
  ctx.guard(outputs);

  const Label target = cfg.target_label();
  double worst_gap = 0.0;
  for (const std::size_t r : rows) {
    const ShapExplanation e = forest_shap(model, test.row(r), target);
    worst_gap = std::max(worst_gap, std::abs(e.base_value + e.phi_sum() - e.output));
    const auto top = top_k_report(e, model.schema, cfg.top_k);
    ojson j = ojson::parse(explanation_json(e, top));
    j["row"] = r;
    j["features"] = mode;
    j["actual_label"] = std::string(class_display_name(test.label(r)));
    write_text(ctx.file("explanation_row" + std::to_string(r) + ".json"),
               ctx.stamp_json(j, "explain"));

    ctx.out << "row " << r << " (actual " << class_display_name(test.label(r)) << "): P("
            << class_display_name(target) << ") = " << fmt(e.output) << ", base "
            << fmt(e.base_value) << "\n";
    for (const auto& a : top) {
      ctx.out << "  " << a.feature << " = " << fmt(a.value) << "  phi " << (a.phi >= 0 ? "+" : "")
              << fmt(a.phi) << "\n";
    }
  }

  const auto sample = sample_rows(test.rows(), cfg.explain_sample,
                                  stream_seed(cfg, SeedStream::kExplainSample));
  const auto explanations = explain_rows(model, test, sample, target, cfg.threads);
  for (const auto& e : explanations) {
    worst_gap = std::max(worst_gap, std::abs(e.base_value + e.phi_sum() - e.output));
  }
  const GlobalImportance gi = global_importance(model.schema, explanations);
  write_text(ctx.file(kGlobalCsv), ctx.stamp_csv(gi.to_csv(), "explain"));

  std::vector<Bar> bars;
  for (std::size_t k = 0; k < std::min<std::size_t>(gi.entries.size(), 20); ++k) {
    bars.push_back({gi.entries[k].feature, gi.entries[k].mean_abs_phi});
  }
  std::string note;
  for (const auto& c : ctx.comments("explain")) note += (note.empty() ? "" : " | ") + c;
  write_text(ctx.file(kGlobalSvg),
             bar_chart_svg(bars,
                           "Mean |SHAP| for P(" + std::string(class_display_name(target)) +
                               ") over " + std::to_string(gi.sample_size) + " test rows",
                           note));

  const auto points = beeswarm(model.schema, explanations,
                               std::min(cfg.beeswarm_features, model.num_features()));
  write_text(ctx.file(kBeeswarm), ctx.stamp_csv(beeswarm_csv(points), "explain"));

  ctx.out << "global importance over " << gi.sample_size << " rows; largest local-accuracy gap "
          << worst_gap << "\n";
}

void cmd_report(Context& ctx) {
  const fs::path selected_metrics = ctx.require(mode_file("metrics", "selected", ".json"),
                                                "evaluate --features selected");
  ctx.guard({kReportJson, kReportMd});

  ojson report = ojson::object();
  std::ostringstream md;
  md << "# xids run report\n\n"
     << "config hash `" << ctx.config.hash() << "`, seed " << ctx.config.seed << "\n\n"
     << "| features | count | accuracy | precision | recall | F1 | training ms | latency mean ms "
        "| latency p95 ms |\n"
     << "|---|---|---|---|---|---|---|---|---|\n";

  std::optional<double> train_ms[2];
  const std::string modes[2] = {"full", "selected"};
  for (int k = 0; k < 2; ++k) {
    const fs::path mpath = ctx.file(mode_file("metrics", modes[k], ".json"));
    const fs::path tpath = ctx.file(mode_file("timing", modes[k], ".json"));
    if (!fs::exists(mpath) || !fs::exists(tpath)) continue;
    ojson m = parse_json_file(mpath);
    ojson t = parse_json_file(tpath);
    m.erase("provenance");
    t.erase("provenance");
    train_ms[k] = t.at("training_ms").get<double>();
    md << "| " << modes[k] << " | " << m.at("feature_count").get<std::size_t>() << " | "
       << fmt(m.at("accuracy").get<double>()) << " | " << fmt(m.at("precision").get<double>()) << " | "
       << fmt(m.at("recall").get<double>()) << " | " << fmt(m.at("f1").get<double>()) << " | "
       << fmt(t.at("training_ms").get<double>(), 1) << " | " << fmt(t.at("latency_mean_ms").get<double>()) << " | "
       << fmt(t.at("latency_p95_ms").get<double>()) << " |\n";
    report[modes[k]] = {{"metrics", std::move(m)}, {"timing", std::move(t)}};
  }
  (void)selected_metrics;
  if (train_ms[0] && train_ms[1] && *train_ms[0] > 0) {
    const double reduction = 1.0 - *train_ms[1] / *train_ms[0];
    report["training_time_reduction"] = reduction;
    md << "\nTraining on the selected features took " << fmt(100.0 * reduction, 1)
       << "% less time than on all features.\n";
  }

  if (fs::exists(ctx.file(kRfeJson))) {
    const ojson trace = parse_json_file(ctx.file(kRfeJson));
    const auto& fin = trace.at("final");
    report["rfe"] = {{"rounds", trace.at("iterations").size()},
                     {"final_features", fin.at("features")},
                     {"final_validation_f1", fin.at("f1")},
                     {"f1_floor", trace.at("f1_floor")},
                     {"floor_violated", trace.at("floor_violated")}};
    md << "\nRFE: " << trace.at("iterations").size() << " rounds, "
       << fin.at("features").size() << " features kept, validation F1 "
       << fmt(fin.at("f1").get<double>()) << " (floor " << fmt(trace.at("f1_floor").get<double>(), 2) << ", "
       << (trace.at("floor_violated").get<bool>() ? "violated" : "held") << ").\n";
  }

  if (fs::exists(ctx.file(kGlobalCsv))) {
    std::ifstream in(ctx.file(kGlobalCsv));
    std::size_t line = 0;
    csv::next_record(in, line);  // header
    md << "\nTop features by mean |SHAP|:\n\n";
    ojson top = ojson::array();
    for (int k = 0; k < 10; ++k) {
      const auto rec = csv::next_record(in, line);
      if (!rec) break;
      const auto fields = csv::split_record(*rec);
      md << k + 1 << ". " << fields.at(0) << " (" << fields.at(1) << ")\n";
      top.push_back({{"feature", fields.at(0)}, {"mean_abs_phi", std::stod(fields.at(1))}});
    }
    report["global_importance_top"] = std::move(top);
  }

  write_text(ctx.file(kReportJson), ctx.stamp_json(report, "report"));
  write_text(ctx.file(kReportMd), md.str());
  ctx.out << md.str();
}

struct SynthOptions {
  std::string kind = "planted";
  std::size_t rows = 4000;
  std::size_t features = 80;
  std::size_t informative = 5;
  std::size_t noise = 15;
  double dirty_rate = 0.01;
  std::string output;
};

void cmd_synth(Context& ctx, const SynthOptions& o) {
  const fs::path path = o.output;
  if (fs::exists(path) && !ctx.force) {
    throw OverwriteRefused("'" + path.string() + "' already exists; pass --force to overwrite");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  Dataset data;
  if (o.kind == "planted") {
    data = synth::planted_signal({.rows = o.rows,
                                  .informative = o.informative,
                                  .noise = o.noise,
                                  .seed = ctx.config.seed});
  } else if (o.kind == "clusters") {
    data = synth::two_clusters({.rows = o.rows, .features = o.features, .seed = ctx.config.seed});
  } else if (o.kind == "wide") {
    data = synth::wide_flows({.rows = o.rows,
                              .features = o.features,
                              .informative = std::min(o.informative, o.features),
                              .seed = ctx.config.seed});
  } else {
    throw ConfigError("--kind must be planted, clusters or wide");
  }
  std::ostringstream out;
  synth::write_flow_csv(out, data, o.dirty_rate, ctx.config.seed);
  write_text(path, out.str());
  const auto counts = data.class_counts();
  ctx.out << "wrote " << data.rows() << " rows x " << data.cols() << " features ("
          << counts[kAttack] << " attack rows) to " << path.string() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explainable intrusion detection: random-forest feature selection, training, "
               "evaluation and SHAP explanations over network-flow CSV data.",
               "xids"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "xids 0.1.0");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> workspace;
  std::optional<std::size_t> threads;
  bool force = false;
  app.add_option("--config", config_path, "Key-value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--workspace", workspace, "Directory holding stage artifacts");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_flag("--force", force, "Overwrite existing artifacts");

  std::vector<std::pair<std::string, std::string>> overrides;
  auto keyed = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                   const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  };

  auto* ingest = app.add_subcommand("ingest", "Parse and clean flow CSV files");
  std::vector<std::string> inputs;
  ingest->add_option("--input,-i", inputs, "Flow CSV file (repeatable)");
  keyed(ingest, "--label-column", "label_column", "Name of the label column");

  auto* split = app.add_subcommand("split", "Stratified train/test split and normalizer");
  keyed(split, "--train-fraction", "train_fraction", "Share of each class used for training");

  auto* rfe = app.add_subcommand("rfe", "Recursive feature elimination on the training split");
  keyed(rfe, "--target", "rfe_target", "Number of features to keep");
  keyed(rfe, "--step", "rfe_step", "Features removed per round");
  keyed(rfe, "--trees", "rfe_trees", "Trees per RFE forest");
  keyed(rfe, "--f1-floor", "f1_floor", "Validation F1 below which a warning is raised");

  std::string mode = "selected";
  auto* train = app.add_subcommand("train", "Train the random forest");
  train->add_option("--features", mode, "selected or full")->capture_default_str();
  keyed(train, "--trees", "n_trees", "Number of trees");

  auto* evaluate = app.add_subcommand("evaluate", "Metrics and latency on the test split");
  evaluate->add_option("--features", mode, "selected or full")->capture_default_str();

  auto* explain = app.add_subcommand("explain", "SHAP explanations for test rows");
  explain->add_option("--features", mode, "selected or full")->capture_default_str();
  std::vector<std::size_t> rows{0};
  explain->add_option("--row", rows, "Test-split row index (repeatable)")->capture_default_str();
  keyed(explain, "--top-k", "top_k", "Features listed per local explanation");
  keyed(explain, "--sample", "explain_sample", "Rows explained for global importance");
  keyed(explain, "--target", "explain_target", "Explained class: APT or Normal");

  auto* report = app.add_subcommand("report", "Summarize evaluation and explanation artifacts");

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic flow CSV");
  synth->add_option("--kind", synth_opts.kind, "planted, clusters or wide")->capture_default_str();
  synth->add_option("--rows", synth_opts.rows, "Row count")->capture_default_str();
  synth->add_option("--features", synth_opts.features, "Columns (clusters, wide)")
      ->capture_default_str();
  synth->add_option("--informative", synth_opts.informative, "Informative columns")
      ->capture_default_str();
  synth->add_option("--noise", synth_opts.noise, "Noise columns (planted)")->capture_default_str();
  synth->add_option("--dirty-rate", synth_opts.dirty_rate, "Share of noise cells made NaN/Inf")
      ->capture_default_str();
  synth->add_option("--output,-o", synth_opts.output, "Destination CSV")->required();

  std::vector<const char*> argv{"xids"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config.load_file(config_path);
    for (const auto& [k, v] : overrides) config.set(k, v);
    if (!inputs.empty()) {
      config.inputs.assign(inputs.begin(), inputs.end());
    }
    if (seed) config.seed = *seed;
    if (workspace) config.workspace = *workspace;
    if (threads) config.threads = *threads;
    if (config.threads == 0) config.threads = std::max(1u, std::thread::hardware_concurrency());

    Context ctx{std::move(config), force, out};
    if (*ingest) cmd_ingest(ctx);
    else if (*split) cmd_split(ctx);
    else if (*rfe) cmd_rfe(ctx);
    else if (*train) cmd_train(ctx, mode);
    else if (*evaluate) cmd_evaluate(ctx, mode);
    else if (*explain) cmd_explain(ctx, mode, rows);
    else if (*report) cmd_report(ctx);
    else if (*synth) cmd_synth(ctx, synth_opts);
    return kExitOk;
  } catch (const MissingArtifactError& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissingArtifact;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const OverwriteRefused& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace xids::cli
