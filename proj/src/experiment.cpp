#include "spoofbench/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spoofbench/analysis.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/hashing.hpp"

namespace spoofbench {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::uint64_t ExperimentConfig::seed_for(SeedStream s) const {
  return derive_seed(seed, {static_cast<std::uint64_t>(s)});
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw std::invalid_argument("experiment name is empty");
  std::visit(
      [](const auto& src) {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, FileLandscape>) {
          if (src.path.empty()) throw std::invalid_argument("file landscape needs a path");
        } else {
          src.validate();
        }
      },
      landscape);
  MlpShape{2, 1, embedding_dim, hidden1, hidden2, dropout}.validate();
  if (!(init.embedding_bound > 0)) throw std::invalid_argument("embedding_bound must be positive");
  if (trainer.epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (trainer.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(trainer.optimizer.learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (trainer.optimizer.weight_decay < 0) throw std::invalid_argument("weight_decay must be >= 0");
  spoof.validate();
  if (output.empty()) throw std::invalid_argument("output directory is empty");
}

ExperimentConfig paper_preset() { return ExperimentConfig{}; }

ExperimentConfig micro_preset() {
  ExperimentConfig c;
  c.name = "micro";
  MotifLandscapeConfig m;
  m.alphabet_size = 6;
  m.length = 9;
  m.target_count = 200;
  m.families = 4;
  m.constrained_positions = 6;
  m.allowed_min = 2;
  m.allowed_max = 3;
  c.landscape = m;
  c.embedding_dim = 8;
  c.hidden1 = 32;
  c.hidden2 = 16;
  c.trainer.epochs = 30;
  c.trainer.batch_size = 32;
  c.spoof.budget = 60;
  c.spoof.replicates = 2;
  c.output = "runs/micro";
  return c;
}

ExperimentConfig preset(std::string_view name) {
  if (name == "paper") return paper_preset();
  if (name == "micro") return micro_preset();
  throw UsageError("unknown preset '" + std::string(name) + "' (expected paper or micro)");
}

namespace {

ojson landscape_json(const LandscapeSource& src) {
  return std::visit(
      [](const auto& s) -> ojson {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FileLandscape>) {
          ojson j{{"source", "file"}, {"path", s.path.generic_string()}};
          if (!s.alphabet.empty()) j["alphabet"] = s.alphabet;
          return j;
        } else if constexpr (std::is_same_v<T, MiniRepConfig>) {
          return {{"source", "minirep"},         {"k", s.k},
                  {"length", s.length},          {"step_budget", s.step_budget},
                  {"enumeration_limit", s.enumeration_limit}, {"version", s.version}};
        } else {
          return {{"source", "synthetic"},
                  {"alphabet_size", s.alphabet_size},
                  {"length", s.length},
                  {"target_count", s.target_count},
                  {"families", s.families},
                  {"constrained_positions", s.constrained_positions},
                  {"allowed_min", s.allowed_min},
                  {"allowed_max", s.allowed_max},
                  {"seed", s.seed},
                  {"version", s.version}};
        }
      },
      src);
}

// Reads keys from one JSON object and rejects any it did not consume.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw DataError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw DataError(where_ + "." + key + ": wrong type");
    }
  }

  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw DataError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

ojson to_json(const ExperimentConfig& c) {
  ojson j;
  j["name"] = c.name;
  j["landscape"] = landscape_json(c.landscape);
  j["seed"] = c.seed;
  j["model"] = {{"embedding_dim", c.embedding_dim},
                {"hidden1", c.hidden1},
                {"hidden2", c.hidden2},
                {"dropout", c.dropout},
                {"embedding_bound", c.init.embedding_bound}};
  j["trainer"] = {{"epochs", c.trainer.epochs},
                  {"batch_size", c.trainer.batch_size},
                  {"learning_rate", c.trainer.optimizer.learning_rate},
                  {"weight_decay", c.trainer.optimizer.weight_decay},
                  {"beta1", c.trainer.optimizer.beta1},
                  {"beta2", c.trainer.optimizer.beta2},
                  {"epsilon", c.trainer.optimizer.epsilon}};
  j["spoof"] = {{"budget", c.spoof.budget},
                {"replicates", c.spoof.replicates},
                {"uniform_starts", c.spoof.uniform_starts},
                {"random_starts", c.spoof.random_starts}};
  j["output"] = c.output.generic_string();
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  ObjectReader top(j, "config");
  top.get("name", c.name);
  top.get("seed", c.seed);
  std::string output = c.output.generic_string();
  top.get("output", output);
  c.output = output;

  const auto* land = top.child("landscape");
  if (!land) throw DataError("config: missing 'landscape'");
  {
    ObjectReader r(*land, "config.landscape");
    std::string source;
    r.get("source", source);
    if (source == "file") {
      FileLandscape f;
      std::string path;
      r.get("path", path);
      r.get("alphabet", f.alphabet);
      f.path = path;
      if (!f.path.empty() && f.path.is_relative() && !base_dir.empty()) f.path = base_dir / f.path;
      c.landscape = f;
    } else if (source == "minirep") {
      MiniRepConfig m;
      r.get("k", m.k);
      r.get("length", m.length);
      m.step_budget = MiniRepConfig::default_budget(m.length);
      r.get("step_budget", m.step_budget);
      r.get("enumeration_limit", m.enumeration_limit);
      r.get("version", m.version);
      c.landscape = m;
    } else if (source == "synthetic") {
      MotifLandscapeConfig m;
      r.get("alphabet_size", m.alphabet_size);
      r.get("length", m.length);
      r.get("target_count", m.target_count);
      r.get("families", m.families);
      r.get("constrained_positions", m.constrained_positions);
      r.get("allowed_min", m.allowed_min);
      r.get("allowed_max", m.allowed_max);
      r.get("seed", m.seed);
      r.get("version", m.version);
      c.landscape = m;
    } else {
      throw DataError("config.landscape.source must be file, minirep or synthetic");
    }
    r.finish();
  }
  if (const auto* m = top.child("model")) {
    ObjectReader r(*m, "config.model");
    r.get("embedding_dim", c.embedding_dim);
    r.get("hidden1", c.hidden1);
    r.get("hidden2", c.hidden2);
    r.get("dropout", c.dropout);
    r.get("embedding_bound", c.init.embedding_bound);
    r.finish();
  }
  if (const auto* t = top.child("trainer")) {
    ObjectReader r(*t, "config.trainer");
    r.get("epochs", c.trainer.epochs);
    r.get("batch_size", c.trainer.batch_size);
    r.get("learning_rate", c.trainer.optimizer.learning_rate);
    r.get("weight_decay", c.trainer.optimizer.weight_decay);
    r.get("beta1", c.trainer.optimizer.beta1);
    r.get("beta2", c.trainer.optimizer.beta2);
    r.get("epsilon", c.trainer.optimizer.epsilon);
    r.finish();
  }
  if (const auto* s = top.child("spoof")) {
    ObjectReader r(*s, "config.spoof");
    r.get("budget", c.spoof.budget);
    r.get("replicates", c.spoof.replicates);
    r.get("uniform_starts", c.spoof.uniform_starts);
    r.get("random_starts", c.spoof.random_starts);
    r.finish();
  }
  top.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

ReplicatorSet load_landscape_file(const fs::path& path, std::string alphabet) {
  if (alphabet.empty()) {
    fs::path sidecar = path;
    sidecar += ".json";
    if (fs::exists(sidecar)) {
      std::ifstream in(sidecar);
      try {
        const auto j = nlohmann::json::parse(in);
        if (j.contains("alphabet")) alphabet = j.at("alphabet").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw DataError(sidecar.string() + ": " + e.what());
      }
    }
  }
  if (alphabet.empty()) alphabet = Alphabet::lowercase().symbols();
  Alphabet a = [&] {
    try {
      return Alphabet(alphabet);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("bad alphabet: ") + e.what());
    }
  }();
  return load_replicators(path, a);
}

void save_landscape_file(const ReplicatorSet& set, const fs::path& path, ojson sidecar) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_replicators(set, path);
  sidecar["alphabet"] = set.alphabet().symbols();
  sidecar["length"] = set.length();
  sidecar["count"] = set.size();
  sidecar["density"] = set.density();
  sidecar["sha256"] = set.identity_hash();
  fs::path side = path;
  side += ".json";
  write_text(side, sidecar.dump(2) + "\n");
}

LoadedLandscape materialize_landscape(const LandscapeSource& source, unsigned jobs) {
  return std::visit(
      [jobs](const auto& s) -> LoadedLandscape {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FileLandscape>) {
          auto set = load_landscape_file(s.path, s.alphabet);
          return {std::move(set), "file", {{"source", "file"}, {"path", s.path.generic_string()}}};
        } else if constexpr (std::is_same_v<T, MiniRepConfig>) {
          return {enumerate_landscape(s, jobs), "minirep", landscape_json(s)};
        } else {
          auto land = generate_motif_landscape(s);
          auto desc = landscape_json(s);
          for (const auto& fam : land.families) {
            desc["families_drawn"].push_back(
                {{"pattern", describe(fam, land.set.alphabet())}, {"quota", fam.quota}});
          }
          return {std::move(land.set), "synthetic-motif", std::move(desc)};
        }
      },
      source);
}

ojson metrics_json(const EvalMetrics& m) {
  return {{"examples", m.total()},
          {"true_positives", m.true_positives},
          {"true_negatives", m.true_negatives},
          {"false_positives", m.false_positives},
          {"false_negatives", m.false_negatives},
          {"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"mean_bce", m.mean_bce}};
}

std::string curves_csv(const std::vector<EpochRecord>& curves) {
  std::ostringstream s;
  s << "epoch,train_loss,train_accuracy,validation_loss,validation_accuracy\n";
  s.precision(17);
  for (const auto& e : curves) {
    s << e.epoch << ',' << e.train_loss << ',' << e.train_accuracy << ',' << e.validation_loss << ','
      << e.validation_accuracy << '\n';
  }
  return s.str();
}

TrainedModel train_on_landscape(const ReplicatorSet& set, const ExperimentConfig& config,
                                std::ostream* log) {
  Rng split_rng(config.seed_for(SeedStream::kSplit));
  auto splits = build_splits(set, split_rng);
  splits.seed = config.seed_for(SeedStream::kSplit);

  const MlpShape shape{set.alphabet().size(), set.length(), config.embedding_dim,
                       config.hidden1,        config.hidden2, config.dropout};
  Rng init_rng(config.seed_for(SeedStream::kInit));
  Mlp model = Mlp::initialized(shape, init_rng, config.init);
  TrainerState<double> state(shape, config.trainer.optimizer);
  Rng train_rng(config.seed_for(SeedStream::kTrain));
  auto report = train_model(model, splits, state, config.trainer, train_rng, log);
  auto validation = evaluate(model, splits.validation);
  auto test = evaluate(model, splits.test);
  return {std::move(model), std::move(splits), std::move(report), validation, test};
}

ojson training_metrics_json(const TrainedModel& t) {
  ojson j;
  j["test"] = metrics_json(t.test);
  j["validation"] = metrics_json(t.validation);
  j["split_sizes"] = {{"train", t.splits.train.size()},
                      {"validation", t.splits.validation.size()},
                      {"test", t.splits.test.size()}};
  j["loss_decreased"] = t.report.loss_decreased;
  auto& epochs = j["epochs"] = ojson::array();
  for (const auto& e : t.report.curves) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"train_accuracy", e.train_accuracy},
                      {"validation_loss", e.validation_loss},
                      {"validation_accuracy", e.validation_accuracy}});
  }
  return j;
}

namespace {

template <typename F>
auto stage(const char* name, F&& body) {
  const std::string prefix = std::string("stage ") + name + ": ";
  try {
    return body();
  } catch (const UsageError& e) {
    throw UsageError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(prefix + e.what());
  } catch (const fs::filesystem_error& e) {
    throw DataError(prefix + e.what());
  }
}

}  // namespace

ReproduceResult reproduce(const ExperimentConfig& config, unsigned jobs, std::ostream* log) {
  config.validate();
  const fs::path root = config.output;
  std::vector<std::string> files;
  auto note = [&](const std::string& rel) { files.push_back(rel); };
  auto say = [&](const std::string& msg) {
    if (log) *log << msg << '\n';
  };

  stage("setup", [&] {
    fs::create_directories(root);
    // The output root is left out so identical configs give identical trees.
    auto resolved = to_json(config);
    resolved.erase("output");
    write_text(root / "config.json", resolved.dump(2) + "\n");
    note("config.json");
  });

  say("[landscape] building");
  auto land = stage("landscape", [&] { return materialize_landscape(config.landscape, jobs); });
  const auto& set = land.set;
  if (set.empty()) throw DataError("stage landscape: no replicators");
  stage("landscape", [&] {
    save_landscape_file(set, root / "landscape.txt", land.description);
    note("landscape.txt");
    note("landscape.txt.json");
  });
  say("[landscape] " + std::to_string(set.size()) + " replicators, sha256 " + set.identity_hash());

  say("[train] " + std::to_string(config.trainer.epochs) + " epochs");
  auto trained = stage("train", [&] { return train_on_landscape(set, config, log); });
  stage("train", [&] {
    save_splits(trained.splits, set, root / "splits");
    for (const char* f : {"splits/train.tsv", "splits/validation.tsv", "splits/test.tsv", "splits/splits.json"}) {
      note(f);
    }
    save_model(trained.model, root / "model.bin");
    note("model.bin");
    write_text(root / "metrics.json", training_metrics_json(trained).dump(2) + "\n");
    note("metrics.json");
    write_text(root / "curves.csv", curves_csv(trained.report.curves));
    note("curves.csv");
  });
  say("[eval] test accuracy " + std::to_string(trained.test.accuracy) + ", recall " +
      std::to_string(trained.test.recall));

  const auto spoof_seed = config.seed_for(SeedStream::kSpoof);
  say("[spoof] campaign");
  auto trajectories =
      stage("spoof", [&] { return run_campaign(trained.model, set, config.spoof, spoof_seed, jobs); });
  stage("spoof", [&] {
    fs::create_directories(root / "runs");
    write_trajectory_log(trajectories, set.alphabet(), root / "runs" / "trajectories.jsonl");
    note("runs/trajectories.jsonl");
    ojson campaign{{"log_version", kTrajectoryLogVersion},
                   {"alphabet", set.alphabet().symbols()},
                   {"length", set.length()},
                   {"budget", config.spoof.budget},
                   {"replicates", config.spoof.replicates},
                   {"seed", spoof_seed},
                   {"runs", trajectories.size()},
                   {"landscape_sha256", set.identity_hash()}};
    write_text(root / "runs" / "campaign.json", campaign.dump(2) + "\n");
    note("runs/campaign.json");
  });

  auto verification = stage("verify", [&] { return verify_endpoints(set, trajectories); });
  stage("verify", [&] {
    ojson v{{"high_confidence_threshold", verification.high_confidence_threshold},
            {"runs", verification.runs},
            {"replicator_endpoints", verification.replicator_endpoints},
            {"high_confidence_runs", verification.high_confidence_runs},
            {"high_confidence_non_replicators", verification.high_confidence_non_replicators},
            {"false_attractor_rate", verification.false_attractor_rate()}};
    write_text(root / "verification.json", v.dump(2) + "\n");
    note("verification.json");
  });
  say("[verify] " + std::to_string(verification.high_confidence_runs) + " high-confidence runs, " +
      std::to_string(verification.high_confidence_non_replicators) + " non-replicators");

  stage("analyze", [&] {
    LandscapeInfo info{land.source, land.source == "synthetic-motif", set.size(), set.density(),
                       set.identity_hash()};
    auto inputs = analyze_campaign(trajectories, set, config.spoof.budget, info, trained.report.curves);
    for (const auto& f : emit_report(inputs, root / "report")) note("report/" + f);
  });

  fs::path manifest_path = root / "manifest.json";
  stage("manifest", [&] {
    ojson m;
    m["manifest_version"] = kManifestVersion;
    m["tool_version"] = kToolVersion;
    m["experiment"] = config.name;
    m["versions"] = {{"minirep", kMiniRepVersion},
                     {"motif_landscape", kMotifLandscapeVersion},
                     {"model_format", kModelFormatVersion},
                     {"trajectory_log", kTrajectoryLogVersion}};
    m["seeds"] = {{"master", config.seed},
                  {"split", config.seed_for(SeedStream::kSplit)},
                  {"init", config.seed_for(SeedStream::kInit)},
                  {"train", config.seed_for(SeedStream::kTrain)},
                  {"spoof", spoof_seed}};
    m["landscape"] = {{"source", land.source}, {"count", set.size()}, {"sha256", set.identity_hash()}};
    auto& listing = m["files"] = ojson::array();
    std::sort(files.begin(), files.end());
    for (const auto& f : files) listing.push_back({{"path", f}, {"sha256", sha256_file_hex(root / f)}});
    write_text(manifest_path, m.dump(2) + "\n");
  });
  say("[done] manifest " + manifest_path.string());

  return {trained.test, std::move(trained.report), std::move(verification), std::move(trajectories),
          manifest_path};
}

}  // namespace spoofbench
