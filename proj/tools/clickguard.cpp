// clickguard: clickbait-detection pipeline CLI.
// Exit codes: 0 success, 2 input/config error, 3 numerical divergence,
// 4 corrupt artifact.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clickguard/clickguard.hpp"

namespace fs = std::filesystem;
using namespace clickguard;

namespace {

// ---------------------------------------------------------------------------
// Run configuration: plain-text "key = value" file, '#' comments, every key
// has a default, unknown keys are errors.
// ---------------------------------------------------------------------------

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "dataset.path", "dataset.format", "dataset.text_column", "dataset.label_column",
      "split.ratio", "seed", "ablation",
      "model.d_model", "model.fusion_dim", "model.lstm_x1", "model.lstm_x2",
      "model.lstm_y1", "model.lstm_y2", "model.bilstm_hidden", "model.conv_filters",
      "model.conv_window", "model.dropout_rate", "model.mha_heads", "model.head_dim",
      "model.vocab_buckets", "model.max_len", "model.encoder_mode",
      "model.embedding_file", "model.rfe_target",
      "train.epochs", "train.batch_size", "train.eta_max", "train.eta_min",
      "train.cycle_length", "train.lr_search_budget",
      "trust.deletion_prob", "trust.typo_prob", "trust.max_synonym_swaps",
      "trust.pfi_repeats", "trust.lime_samples", "trust.lime_kernel_width",
      "trust.lime_top", "trust.lime_records", "trust.max_records",
      "dump.stages",
      "out.dir",
  };
  return keys;
}

struct RunConfig {
  std::map<std::string, std::string> kv;

  static RunConfig from_file(const fs::path& path) {
    RunConfig cfg;
    std::string text = read_text_file(path);
    std::size_t line_no = 0;
    for (const auto& raw_line : split(text, '\n')) {
      ++line_no;
      std::string line = raw_line;
      if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (!known_keys().count(key))
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": unknown key '" + key + "'");
      cfg.kv[key] = value;
    }
    return cfg;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  }
  double get_double(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    auto v = parse_double(it->second);
    if (!v) throw ConfigError("config key '" + key + "' is not a number");
    return *v;
  }
  long long get_int(const std::string& key, long long fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    auto v = parse_int(it->second);
    if (!v) throw ConfigError("config key '" + key + "' is not an integer");
    return *v;
  }
  void set_if_absent(const std::string& key, const std::string& value) {
    if (!kv.count(key)) kv[key] = value;
  }
};

// Table-2-style ablation names -> flag settings.
void apply_ablation(const std::string& name, ModelConfig& config) {
  if (name == "full") {
    return;
  } else if (name == "fixed-alpha") {
    config.alpha_mode = AlphaMode::kFixedEqual;
  } else if (name == "no-ssafb") {
    config.use_ssafb = false;
  } else if (name == "no-mha") {
    config.use_mha = false;
    config.use_ssafb = false;
  } else if (name == "contextual-only") {
    config.use_sfg = false;
    config.use_pos = false;
    config.alpha_mode = AlphaMode::kFixedEqual;
  } else if (name == "structural-only") {
    config.use_contextual = false;
  } else if (name == "sfg-only") {
    config.use_contextual = false;
    config.use_pos = false;
  } else if (name == "pos-only") {
    config.use_contextual = false;
    config.use_sfg = false;
  } else {
    throw ConfigError("unknown ablation '" + name +
                      "' (full, fixed-alpha, no-ssafb, no-mha, contextual-only, "
                      "structural-only, sfg-only, pos-only)");
  }
}

ModelConfig model_config_from(const RunConfig& cfg) {
  ModelConfig m;
  m.d_model = static_cast<std::size_t>(cfg.get_int("model.d_model", 64));
  m.fusion_dim = static_cast<std::size_t>(cfg.get_int("model.fusion_dim", 64));
  m.lstm_x1 = static_cast<std::size_t>(cfg.get_int("model.lstm_x1", 32));
  m.lstm_x2 = static_cast<std::size_t>(cfg.get_int("model.lstm_x2", 16));
  m.lstm_y1 = static_cast<std::size_t>(cfg.get_int("model.lstm_y1", 16));
  m.lstm_y2 = static_cast<std::size_t>(cfg.get_int("model.lstm_y2", 16));
  m.bilstm_hidden = static_cast<std::size_t>(cfg.get_int("model.bilstm_hidden", 8));
  m.conv_filters = static_cast<std::size_t>(cfg.get_int("model.conv_filters", 8));
  m.conv_window = static_cast<std::size_t>(cfg.get_int("model.conv_window", 3));
  m.dropout_rate = cfg.get_double("model.dropout_rate", 0.4);
  m.mha_heads = static_cast<std::size_t>(cfg.get_int("model.mha_heads", 4));
  m.head_dim = static_cast<std::size_t>(cfg.get_int("model.head_dim", 32));
  m.vocab_buckets = static_cast<std::size_t>(cfg.get_int("model.vocab_buckets", 1 << 15));
  m.max_len = static_cast<std::size_t>(cfg.get_int("model.max_len", 64));
  m.encoder_mode = parse_encoder_mode(cfg.get("model.encoder_mode", "hash_embedding"));
  m.rfe_target = static_cast<std::size_t>(cfg.get_int("model.rfe_target", 10));
  apply_ablation(cfg.get("ablation", "full"), m);
  m.validate();
  return m;
}

TrainConfig train_config_from(const RunConfig& cfg, std::uint64_t seed) {
  TrainConfig t;
  t.epochs = static_cast<std::size_t>(cfg.get_int("train.epochs", 10));
  t.batch_size = static_cast<std::size_t>(cfg.get_int("train.batch_size", 32));
  t.eta_max = cfg.get_double("train.eta_max", 1e-3);
  t.eta_min = cfg.get_double("train.eta_min", 1e-6);
  t.cycle_length = static_cast<std::size_t>(cfg.get_int("train.cycle_length", 100));
  t.base_lr_search_budget =
      static_cast<std::size_t>(cfg.get_int("train.lr_search_budget", 0));
  t.seed = seed;
  t.validate();
  return t;
}

LoadResult load_from(const RunConfig& cfg) {
  std::string path = cfg.get("dataset.path", "");
  if (path.empty()) throw ConfigError("dataset.path is required (or pass --dataset)");
  LoadOptions opt;
  opt.text_column = cfg.get("dataset.text_column", "headline");
  opt.label_column = cfg.get("dataset.label_column", "label");
  auto format = parse_dataset_format(cfg.get("dataset.format", "csv"));
  return load_dataset(path, format, opt);
}

std::optional<PrecomputedEmbeddings> load_embeddings(const RunConfig& cfg,
                                                     const ModelConfig& model_cfg) {
  if (model_cfg.encoder_mode != EncoderMode::kPrecomputedFile) return std::nullopt;
  std::string path = cfg.get("model.embedding_file", "");
  if (path.empty())
    throw ConfigError("model.embedding_file is required in precomputed_file mode");
  return PrecomputedEmbeddings::load(path, model_cfg.max_len, model_cfg.d_model);
}

void print_metrics(const std::string& label, const Metrics& m) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("n/a");
  };
  std::cout << label << ": accuracy=" << format_double(m.accuracy)
            << " precision=" << opt(m.precision) << " recall=" << opt(m.recall)
            << " f1=" << opt(m.f1) << " loss=" << format_double(m.loss) << "\n";
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_extract_features(const RunConfig& cfg, bool radar) {
  auto loaded = load_from(cfg);
  fs::path out_dir = cfg.get("out.dir", "out");
  fs::create_directories(out_dir);

  std::string csv;
  const auto& names = feature_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) csv += ",";
    csv += names[j];
  }
  csv += "\n";
  std::vector<std::array<double, kFeatureCount>> rows;
  for (const auto& r : loaded.records) {
    auto arr = extract_features(r.text).as_array();
    rows.push_back(arr);
    for (std::size_t j = 0; j < arr.size(); ++j) {
      if (j) csv += ",";
      csv += format_double(arr[j]);
    }
    csv += "\n";
  }
  write_text_file(out_dir / "features.csv", csv);

  nlohmann::json summary;
  summary["rows"] = loaded.records.size();
  summary["dropped_missing"] = loaded.dropped_missing;
  summary["skipped_malformed"] = loaded.skipped_malformed;
  nlohmann::json means = nlohmann::json::object();
  for (std::size_t j = 0; j < names.size(); ++j) {
    double acc = 0.0;
    for (const auto& row : rows) acc += row[j];
    means[names[j]] = acc / static_cast<double>(rows.size());
  }
  summary["feature_means"] = means;
  write_text_file(out_dir / "summary.json", summary.dump(1) + "\n");

  if (radar) write_text_file(out_dir / "radar.csv", radar_csv(export_radar(loaded.records)));

  std::cout << "wrote " << (out_dir / "features.csv").string() << " ("
            << loaded.records.size() << " rows, " << loaded.dropped_missing
            << " dropped, " << loaded.skipped_malformed << " malformed)\n";
  return 0;
}

int cmd_train(RunConfig& cfg) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  auto loaded = load_from(cfg);
  const double ratio = cfg.get_double("split.ratio", 0.8);
  DatasetSplit data_split = stratified_split(loaded.records, ratio, seed);

  ModelConfig model_cfg = model_config_from(cfg);
  TrainConfig train_cfg = train_config_from(cfg, seed);
  auto embeddings = load_embeddings(cfg, model_cfg);
  const PrecomputedEmbeddings* emb = embeddings ? &*embeddings : nullptr;

  nlohmann::json summary;
  if (train_cfg.base_lr_search_budget > 0) {
    auto result = search_base_lr([&] { return make_model(model_cfg, seed); }, data_split,
                                 train_cfg.base_lr_search_budget, train_cfg);
    train_cfg.eta_min = result.best_eta_min;
    nlohmann::json tried = nlohmann::json::array();
    for (auto& [cand, score] : result.tried)
      tried.push_back({{"eta_min", cand},
                       {"val_loss", std::isfinite(score) ? nlohmann::json(score)
                                                         : nlohmann::json()}});
    summary["lr_search"] = {{"best_eta_min", result.best_eta_min}, {"tried", tried}};
    std::cout << "lr search picked eta_min=" << format_double(result.best_eta_min) << "\n";
  }

  ClickGuardModel model = make_model(model_cfg, seed);

  fs::path out_dir = cfg.get("out.dir", "out");
  fs::create_directories(out_dir);

  TrainHooks hooks;
  std::vector<DumpStage> stages;
  for (const auto& name : split(cfg.get("dump.stages", ""), ','))
    if (!trim(name).empty()) stages.push_back(parse_dump_stage(trim(name)));
  if (!stages.empty())
    hooks.on_epoch_end = [&](const ClickGuardModel& m, std::size_t epoch) {
      dump_features(m, data_split.test, epoch, stages, out_dir, builtin_lexicons(), emb);
    };

  TrainHistory history = train(model, data_split, train_cfg, builtin_lexicons(), hooks, emb);

  save_checkpoint(model, out_dir / "checkpoint.json");
  write_text_file(out_dir / "history.csv", history_csv(history));
  write_text_file(out_dir / "history.json", history_json(history).dump(1) + "\n");

  summary["ablation"] = cfg.get("ablation", "full");
  summary["seed"] = seed;
  summary["train_records"] = data_split.train.size();
  summary["test_records"] = data_split.test.size();
  if (!data_split.test.empty()) {
    Metrics m = evaluate(model, data_split.test, builtin_lexicons(), emb);
    nlohmann::json mj;
    metrics_to_json(m, mj);
    summary["test_metrics"] = mj;
    print_metrics("test", m);
  }
  if (!history.epochs.empty()) {
    summary["final_train_acc"] = history.epochs.back().train_acc;
    summary["final_train_loss"] = history.epochs.back().train_loss;
  }
  write_text_file(out_dir / "summary.json", summary.dump(1) + "\n");
  std::cout << "wrote " << (out_dir / "checkpoint.json").string() << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint) {
  ClickGuardModel model = load_checkpoint(checkpoint);
  auto embeddings = load_embeddings(cfg, model.config);
  auto loaded = load_from(cfg);
  Metrics m = evaluate(model, loaded.records, builtin_lexicons(),
                       embeddings ? &*embeddings : nullptr);
  fs::path out_dir = cfg.get("out.dir", "out");
  fs::create_directories(out_dir);
  nlohmann::json j;
  metrics_to_json(m, j);
  write_text_file(out_dir / "metrics.json", j.dump(1) + "\n");
  print_metrics("evaluate", m);
  return 0;
}

std::vector<HeadlineRecord> capped_records(const RunConfig& cfg, std::vector<HeadlineRecord> records) {
  auto cap = static_cast<std::size_t>(cfg.get_int("trust.max_records", 0));
  if (cap > 0 && records.size() > cap) records.resize(cap);
  return records;
}

PerturbationSpec perturbation_params(const RunConfig& cfg, std::uint64_t seed) {
  PerturbationSpec spec;
  spec.seed = seed;
  spec.deletion_prob = cfg.get_double("trust.deletion_prob", 0.1);
  spec.typo_prob = cfg.get_double("trust.typo_prob", 0.1);
  spec.max_synonym_swaps = static_cast<std::size_t>(cfg.get_int("trust.max_synonym_swaps", 2));
  spec.validate();
  return spec;
}

int cmd_perturb(const RunConfig& cfg, const std::string& checkpoint,
                const std::string& kinds_arg) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  ClickGuardModel model = load_checkpoint(checkpoint);
  auto embeddings = load_embeddings(cfg, model.config);
  auto records = capped_records(cfg, load_from(cfg).records);

  std::vector<PerturbationKind> kinds;
  if (kinds_arg.empty() || kinds_arg == "all") {
    kinds = all_perturbation_kinds();
  } else {
    for (const auto& name : split(kinds_arg, ','))
      kinds.push_back(parse_perturbation_kind(trim(name)));
  }

  SsafbTrustModel trust(model, records, builtin_lexicons(),
                        embeddings ? &*embeddings : nullptr);
  TrustReport report;
  report.params = perturbation_params(cfg, seed);
  for (PerturbationKind kind : kinds) {
    PerturbationSpec spec = report.params;
    spec.kind = kind;
    double apc = avg_prediction_change(trust, spec);
    report.perturbation.emplace_back(perturbation_kind_name(kind), apc);
    std::cout << perturbation_kind_name(kind) << " " << format_double(apc) << "\n";
  }

  fs::path out_dir = cfg.get("out.dir", "out");
  fs::create_directories(out_dir);
  write_text_file(out_dir / "perturbation.csv", perturbation_csv(report));
  return 0;
}

int cmd_explain(const RunConfig& cfg, const std::string& checkpoint,
                const std::vector<long long>& record_ids, std::size_t top) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  ClickGuardModel model = load_checkpoint(checkpoint);
  auto embeddings = load_embeddings(cfg, model.config);
  auto records = capped_records(cfg, load_from(cfg).records);

  SsafbTrustModel trust(model, records, builtin_lexicons(),
                        embeddings ? &*embeddings : nullptr);
  fs::path out_dir = cfg.get("out.dir", "out");
  fs::create_directories(out_dir);

  // PFI over every selected feature
  TrustReport report;
  report.pfi_metric = "accuracy";
  const auto repeats = static_cast<std::size_t>(cfg.get_int("trust.pfi_repeats", 5));
  auto labels = labels_of(records);
  auto names = trust.feature_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto r = pfi(trust, labels, j, repeats, PfiMetric::kAccuracy, seed ^ (j + 1));
    report.pfi_rows.push_back({names[j], r.importance, r.std_dev});
  }
  write_text_file(out_dir / "pfi.csv", pfi_csv(report));

  const auto samples = static_cast<std::size_t>(cfg.get_int("trust.lime_samples", 1000));
  const double kernel = cfg.get_double("trust.lime_kernel_width", 0.0);
  for (long long id : record_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= records.size())
      throw DataError("record id " + std::to_string(id) + " out of range");
    LimeExplanation exp = lime_explain(trust, static_cast<std::size_t>(id), samples,
                                       kernel, top, seed ^ 0xabcdefull ^ static_cast<std::uint64_t>(id));
    write_text_file(out_dir / ("lime_" + std::to_string(id) + ".csv"), lime_csv(exp));
    std::cout << "record " << id << " top-" << top << ":";
    for (const auto& e : exp.top)
      std::cout << " " << e.feature << (e.weight >= 0 ? "(+" : "(") << format_double(e.weight) << ")";
    std::cout << "\n";
  }
  std::cout << "wrote " << (out_dir / "pfi.csv").string() << "\n";
  return 0;
}

int cmd_pipeline(RunConfig& cfg) {
  fs::path out_dir = cfg.get("out.dir", "out");
  fs::create_directories(out_dir);

  int rc = cmd_extract_features(cfg, /*radar=*/true);
  if (rc != 0) return rc;
  rc = cmd_train(cfg);
  if (rc != 0) return rc;

  const std::string checkpoint = (out_dir / "checkpoint.json").string();
  rc = cmd_perturb(cfg, checkpoint, "all");
  if (rc != 0) return rc;

  std::vector<long long> ids;
  for (const auto& tok : split(cfg.get("trust.lime_records", "0"), ','))
    if (auto v = parse_int(trim(tok))) ids.push_back(*v);
  rc = cmd_explain(cfg, checkpoint, ids,
                   static_cast<std::size_t>(cfg.get_int("trust.lime_top", 5)));
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clickguard: clickbait detection toolkit"};
  app.require_subcommand(1);

  std::string config_path, dataset, format, ablation, out_dir, checkpoint, kinds;
  long long seed = -1, epochs = -1;
  std::vector<long long> record_ids;
  std::size_t top = 5;
  bool radar = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--dataset", dataset, "dataset file path");
    sub->add_option("--format", format, "dataset format: csv, tsv, jsonl");
    sub->add_option("--seed", seed, "global random seed");
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* extract = app.add_subcommand("extract-features", "write the Table 1 feature matrix");
  add_common(extract);
  extract->add_flag("--radar", radar, "also write radar.csv");

  auto* train_cmd = app.add_subcommand("train", "fit artifacts and train a model");
  add_common(train_cmd);
  train_cmd->add_option("--ablation", ablation,
                        "full, fixed-alpha, no-ssafb, no-mha, contextual-only, "
                        "structural-only, sfg-only, pos-only");
  train_cmd->add_option("--epochs", epochs, "override train.epochs");

  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a dataset");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

  auto* perturb_cmd = app.add_subcommand("perturb", "perturbation analysis");
  add_common(perturb_cmd);
  perturb_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  perturb_cmd->add_option("--kinds", kinds, "comma list of perturbation kinds (default all)");

  auto* explain_cmd = app.add_subcommand("explain", "PFI and LIME explanations");
  add_common(explain_cmd);
  explain_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  explain_cmd->add_option("--record", record_ids, "record id(s) to explain");
  explain_cmd->add_option("--top", top, "LIME entries per record");

  auto* pipeline_cmd = app.add_subcommand("pipeline",
                                          "extract + train + evaluate + perturb + explain");
  add_common(pipeline_cmd);
  pipeline_cmd->add_option("--ablation", ablation, "ablation configuration");
  pipeline_cmd->add_option("--epochs", epochs, "override train.epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_file(config_path);
    if (!dataset.empty()) cfg.kv["dataset.path"] = dataset;
    if (!format.empty()) cfg.kv["dataset.format"] = format;
    if (!ablation.empty()) cfg.kv["ablation"] = ablation;
    if (!out_dir.empty()) cfg.kv["out.dir"] = out_dir;
    if (seed >= 0) cfg.kv["seed"] = std::to_string(seed);
    if (epochs >= 0) cfg.kv["train.epochs"] = std::to_string(epochs);

    if (extract->parsed()) return cmd_extract_features(cfg, radar);
    if (train_cmd->parsed()) return cmd_train(cfg);
    if (eval_cmd->parsed()) return cmd_evaluate(cfg, checkpoint);
    if (perturb_cmd->parsed()) return cmd_perturb(cfg, checkpoint, kinds);
    if (explain_cmd->parsed()) {
      if (record_ids.empty()) record_ids.push_back(0);
      return cmd_explain(cfg, checkpoint, record_ids, top);
    }
    if (pipeline_cmd->parsed()) return cmd_pipeline(cfg);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
