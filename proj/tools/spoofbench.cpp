// spoofbench: command line front end.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "spoofbench/analysis.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/experiment.hpp"
#include "spoofbench/hashing.hpp"

namespace fs = std::filesystem;
using namespace spoofbench;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Common {
  unsigned jobs = 1;
  std::string preset = "paper";
  bool quiet = false;
};

ExperimentConfig base_config(const Common& c) { return preset(c.preset); }

std::ostream* log_stream(const Common& c) { return c.quiet ? nullptr : &std::cerr; }

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

struct EnumerateArgs {
  std::size_t k = 8;
  std::size_t length = 8;
  std::optional<std::uint64_t> budget;
  std::uint64_t limit = 1'000'000'000ULL;
  std::string out;
};

int cmd_enumerate(const EnumerateArgs& a, const Common& common) {
  MiniRepConfig cfg;
  cfg.k = a.k;
  cfg.length = a.length;
  cfg.step_budget = a.budget.value_or(MiniRepConfig::default_budget(a.length));
  cfg.enumeration_limit = a.limit;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto set = enumerate_landscape(cfg, common.jobs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ojson meta{{"source", "minirep"},
             {"version", cfg.version},
             {"config", {{"k", cfg.k}, {"length", cfg.length}, {"step_budget", cfg.step_budget}}},
             {"programs", cfg.program_count()},
             {"fraction", set.density()},
             {"wall_seconds", secs}};
  save_landscape_file(set, a.out, meta);
  std::cout << set.size() << " viable of " << cfg.program_count() << " programs ("
            << set.density() * 100 << "%) -> " << a.out << "\n";
  return kOk;
}

struct TrainArgs {
  std::string landscape;
  std::string alphabet;
  std::uint64_t seed = 0;
  std::string out_model;
  std::string out_metrics;
  std::string out_splits;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch;
};

int cmd_train(const TrainArgs& a, const Common& common) {
  auto cfg = base_config(common);
  cfg.seed = a.seed;
  if (a.epochs) cfg.trainer.epochs = *a.epochs;
  if (a.batch) cfg.trainer.batch_size = *a.batch;
  cfg.landscape = FileLandscape{a.landscape, a.alphabet};
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto set = load_landscape_file(a.landscape, a.alphabet);
  auto trained = train_on_landscape(set, cfg, log_stream(common));
  save_model(trained.model, a.out_model);
  auto metrics = training_metrics_json(trained);
  metrics["seed"] = cfg.seed;
  metrics["landscape_sha256"] = set.identity_hash();
  write_text(a.out_metrics, metrics.dump(2) + "\n");
  fs::path curves = a.out_metrics;
  curves.replace_extension(".curves.csv");
  write_text(curves, curves_csv(trained.report.curves));
  if (!a.out_splits.empty()) save_splits(trained.splits, set, a.out_splits);
  std::cout << "test accuracy " << trained.test.accuracy << ", recall " << trained.test.recall
            << ", mean BCE " << trained.test.mean_bce << "\n";
  return kOk;
}

struct EvalArgs {
  std::string model;
  std::string examples;
  double threshold = 0.5;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const auto model = load_model(a.model);
  const auto alphabet = Alphabet::lowercase(model.shape().alphabet_size);
  const auto examples = load_examples(a.examples, alphabet);
  for (const auto& ex : examples) {
    if (ex.sequence.length() != model.shape().length) {
      throw DataError(a.examples + ": sequence length does not match the model");
    }
  }
  const auto m = evaluate(model, examples, a.threshold);
  auto j = metrics_json(m);
  j["threshold"] = a.threshold;
  const auto text = j.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  return kOk;
}

struct SpoofArgs {
  std::string model;
  std::string landscape;
  std::size_t budget = 300;
  std::size_t replicates = 30;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_spoof(const SpoofArgs& a, const Common& common) {
  const auto model = load_model(a.model);
  const auto set = load_landscape_file(a.landscape);
  SpoofConfig cfg;
  cfg.budget = a.budget;
  cfg.replicates = a.replicates;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (model.shape().length != set.length() || model.shape().alphabet_size != set.alphabet().size()) {
    throw DataError("model (K=" + std::to_string(model.shape().alphabet_size) + ", L=" +
                    std::to_string(model.shape().length) + ") does not match the landscape (K=" +
                    std::to_string(set.alphabet().size()) + ", L=" + std::to_string(set.length()) + ")");
  }
  const auto runs = run_campaign(model, set, cfg, a.seed, common.jobs);
  const fs::path out = a.out;
  fs::create_directories(out);
  write_trajectory_log(runs, set.alphabet(), out / "trajectories.jsonl");
  ojson campaign{{"log_version", kTrajectoryLogVersion},
                 {"alphabet", set.alphabet().symbols()},
                 {"length", set.length()},
                 {"budget", cfg.budget},
                 {"replicates", cfg.replicates},
                 {"seed", a.seed},
                 {"runs", runs.size()},
                 {"landscape_sha256", set.identity_hash()},
                 {"model_sha256", sha256_file_hex(a.model)}};
  write_text(out / "campaign.json", campaign.dump(2) + "\n");
  const auto v = verify_endpoints(set, runs);
  ojson vj{{"high_confidence_threshold", v.high_confidence_threshold},
           {"runs", v.runs},
           {"replicator_endpoints", v.replicator_endpoints},
           {"high_confidence_runs", v.high_confidence_runs},
           {"high_confidence_non_replicators", v.high_confidence_non_replicators},
           {"false_attractor_rate", v.false_attractor_rate()}};
  write_text(out / "verification.json", vj.dump(2) + "\n");
  std::cout << runs.size() << " runs, " << v.high_confidence_runs << " reached "
            << v.high_confidence_threshold << ", " << v.high_confidence_non_replicators
            << " of those are non-replicators\n";
  return kOk;
}

struct AnalyzeArgs {
  std::string runs;
  std::string landscape;
  std::string out;
  std::string curves;
};

std::vector<EpochRecord> read_curves(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<EpochRecord> out;
  std::string line;
  std::getline(in, line);
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    EpochRecord e;
    char c1, c2, c3, c4;
    std::istringstream s(line);
    if (!(s >> e.epoch >> c1 >> e.train_loss >> c2 >> e.train_accuracy >> c3 >> e.validation_loss >> c4 >>
          e.validation_accuracy)) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": malformed curve row");
    }
    out.push_back(e);
  }
  return out;
}

int cmd_analyze(const AnalyzeArgs& a) {
  const fs::path runs = a.runs;
  const auto campaign = read_json(runs / "campaign.json");
  std::string alphabet;
  std::size_t budget = 0;
  try {
    alphabet = campaign.at("alphabet").get<std::string>();
    budget = campaign.at("budget").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError((runs / "campaign.json").string() + ": " + e.what());
  }
  const auto set = load_landscape_file(a.landscape, alphabet);
  const auto trajectories = read_trajectory_log(runs / "trajectories.jsonl", set.alphabet());
  if (trajectories.empty()) throw DataError("no trajectories in " + runs.string());
  std::vector<EpochRecord> curves;
  if (!a.curves.empty()) curves = read_curves(a.curves);
  LandscapeInfo info{"file", false, set.size(), set.density(), set.identity_hash()};
  fs::path side = a.landscape;
  side += ".json";
  if (fs::exists(side)) {
    const auto j = read_json(side);
    if (j.contains("source")) info.source = j["source"].get<std::string>();
    info.synthetic = info.source == "synthetic";
  }
  const auto inputs = analyze_campaign(trajectories, set, budget, info, std::move(curves));
  const auto files = emit_report(inputs, a.out);
  std::cout << "wrote " << files.size() << " files to " << a.out << "\n";
  return kOk;
}

int cmd_reproduce(const std::string& config_path, const std::string& out, const Common& common,
                  bool preset_given) {
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = load_config(config_path);
  } else if (preset_given) {
    cfg = base_config(common);
  } else {
    throw UsageError("reproduce needs a config file or --preset");
  }
  if (!out.empty()) cfg.output = out;
  const auto r = reproduce(cfg, common.jobs, log_stream(common));
  std::cout << "test accuracy " << r.test_metrics.accuracy << ", recall " << r.test_metrics.recall
            << "; " << r.verification.high_confidence_runs << "/" << r.verification.runs
            << " runs reached " << r.verification.high_confidence_threshold
            << ", false-attractor rate " << r.verification.false_attractor_rate() << "\n"
            << "manifest: " << r.manifest.string() << "\n";
  return kOk;
}

int cmd_info(bool json) {
  ojson j{{"tool", "spoofbench"},
          {"tool_version", kToolVersion},
          {"minirep", kMiniRepVersion},
          {"model_format", kModelFormatVersion},
          {"trajectory_log", kTrajectoryLogVersion},
          {"motif_landscape", kMotifLandscapeVersion},
          {"manifest", kManifestVersion},
          {"hardware_threads", std::thread::hardware_concurrency()}};
  if (json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "spoofbench " << kToolVersion << "\n"
              << "  vm semantics:    " << kMiniRepVersion << "\n"
              << "  model format:    " << kModelFormatVersion << "\n"
              << "  trajectory log:  " << kTrajectoryLogVersion << "\n"
              << "  motif landscape: " << kMotifLandscapeVersion << "\n"
              << "  manifest:        " << kManifestVersion << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spoofing benchmark for replicator classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Common common;
  app.add_option("--jobs,-j", common.jobs, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  auto* preset_opt = app.add_option("--preset", common.preset, "paper or micro")
                         ->check(CLI::IsMember({"paper", "micro"}));
  app.add_flag("--quiet,-q", common.quiet, "no progress output");

  EnumerateArgs en;
  auto* enumerate = app.add_subcommand("enumerate", "enumerate the MiniRep landscape");
  enumerate->add_option("--k", en.k, "instruction alphabet size")->capture_default_str();
  enumerate->add_option("--len", en.length, "program length")->capture_default_str();
  enumerate->add_option("--budget", en.budget, "VM step budget (default 2*len+1)");
  enumerate->add_option("--limit", en.limit, "refuse spaces larger than this")->capture_default_str();
  enumerate->add_option("--out", en.out, "replicator list path")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "train the classifier on a landscape");
  train->add_option("--landscape", tr.landscape, "replicator list")->required()->check(CLI::ExistingFile);
  train->add_option("--alphabet", tr.alphabet, "symbol string (default: sidecar or a-z)");
  train->add_option("--seed", tr.seed, "master seed")->required();
  train->add_option("--out-model", tr.out_model)->required();
  train->add_option("--out-metrics", tr.out_metrics)->required();
  train->add_option("--out-splits", tr.out_splits, "also write the splits here");
  train->add_option("--epochs", tr.epochs);
  train->add_option("--batch-size", tr.batch);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "score a labeled TSV with a model");
  eval->add_option("--model", ev.model)->required()->check(CLI::ExistingFile);
  eval->add_option("--examples", ev.examples, "sequence<TAB>label file")->required()->check(CLI::ExistingFile);
  eval->add_option("--threshold", ev.threshold)->capture_default_str();
  eval->add_option("--out", ev.out, "metrics JSON (default stdout)");

  SpoofArgs sp;
  auto* spoof = app.add_subcommand("spoof", "run the hill-climbing campaign");
  spoof->add_option("--model", sp.model)->required()->check(CLI::ExistingFile);
  spoof->add_option("--landscape", sp.landscape)->required()->check(CLI::ExistingFile);
  spoof->add_option("--budget", sp.budget)->capture_default_str();
  spoof->add_option("--replicates", sp.replicates)->capture_default_str();
  spoof->add_option("--seed", sp.seed)->required();
  spoof->add_option("--out", sp.out)->required();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "aggregate a campaign into the report");
  analyze->add_option("--runs", an.runs, "spoof output directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--landscape", an.landscape)->required()->check(CLI::ExistingFile);
  analyze->add_option("--curves", an.curves, "training curves CSV to include");
  analyze->add_option("--out", an.out)->required();

  std::string config_path, reproduce_out;
  auto* repro = app.add_subcommand("reproduce", "run the whole pipeline from a config");
  repro->add_option("config", config_path, "experiment config JSON")->check(CLI::ExistingFile);
  repro->add_option("--out", reproduce_out, "override the config's output directory");

  bool info_json = false;
  auto* info = app.add_subcommand("info", "print version tags");
  info->add_flag("--json", info_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*enumerate) return cmd_enumerate(en, common);
    if (*train) return cmd_train(tr, common);
    if (*eval) return cmd_eval(ev);
    if (*spoof) return cmd_spoof(sp, common);
    if (*analyze) return cmd_analyze(an);
    if (*repro) return cmd_reproduce(config_path, reproduce_out, common, preset_opt->count() > 0);
    if (*info) return cmd_info(info_json);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
