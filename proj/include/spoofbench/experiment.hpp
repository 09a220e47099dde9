#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spoofbench/landscape.hpp"
#include "spoofbench/minirep.hpp"
#include "spoofbench/neural.hpp"
#include "spoofbench/spoof.hpp"
#include "spoofbench/synthetic.hpp"
#include "spoofbench/training.hpp"

namespace spoofbench {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kManifestVersion = "spoofbench-manifest-1";

struct FileLandscape {
  std::filesystem::path path;
  /// Empty means: read the sidecar, else assume a-z.
  std::string alphabet;
};

using LandscapeSource = std::variant<FileLandscape, MiniRepConfig, MotifLandscapeConfig>;

/// Stream ids fed to derive_seed(master, {id}).
enum class SeedStream : std::uint64_t { kSplit = 1, kInit = 2, kTrain = 3, kSpoof = 4 };

struct ExperimentConfig {
  std::string name = "paper";
  LandscapeSource landscape = MotifLandscapeConfig{};
  std::uint64_t seed = 20250317;
  /// Embedding and hidden sizes; alphabet size and length come from the landscape.
  std::size_t embedding_dim = 32;
  std::size_t hidden1 = 512;
  std::size_t hidden2 = 256;
  double dropout = 0.1;
  InitConfig init;
  TrainConfig trainer;
  SpoofConfig spoof;
  std::filesystem::path output = "runs/paper";

  std::uint64_t seed_for(SeedStream s) const;
  void validate() const;
};

ExperimentConfig paper_preset();
ExperimentConfig micro_preset();
/// "paper" or "micro"; throws UsageError otherwise.
ExperimentConfig preset(std::string_view name);

nlohmann::ordered_json to_json(const ExperimentConfig& config);
/// Unknown keys and type mismatches raise DataError. Relative file
/// landscape paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct LoadedLandscape {
  ReplicatorSet set;
  std::string source;  // "file", "minirep", "synthetic-motif"
  nlohmann::ordered_json description;
};

LoadedLandscape materialize_landscape(const LandscapeSource& source, unsigned jobs = 1);

/// Reads a replicator list. The alphabet comes from `alphabet` if nonempty,
/// otherwise from "<path>.json" ("alphabet" key) if present, otherwise a-z.
ReplicatorSet load_landscape_file(const std::filesystem::path& path, std::string alphabet = {});
/// Writes the list plus its "<path>.json" sidecar.
void save_landscape_file(const ReplicatorSet& set, const std::filesystem::path& path,
                         nlohmann::ordered_json sidecar);

nlohmann::ordered_json metrics_json(const EvalMetrics& m);
std::string curves_csv(const std::vector<EpochRecord>& curves);

struct TrainedModel {
  Mlp model;
  DatasetSplits splits;
  TrainingReport report;
  EvalMetrics validation;
  EvalMetrics test;
};

/// Splits, initialization and training with the config's derived seeds.
TrainedModel train_on_landscape(const ReplicatorSet& set, const ExperimentConfig& config,
                                std::ostream* log = nullptr);

/// {"test": ..., "validation": ..., "loss_decreased": ..., "epochs": [...]}.
nlohmann::ordered_json training_metrics_json(const TrainedModel& trained);

/// Writes `text` to `path`, raising DataError on failure.
void write_text(const std::filesystem::path& path, std::string_view text);

struct ReproduceResult {
  EvalMetrics test_metrics;
  TrainingReport training;
  VerificationReport verification;
  std::vector<SpoofTrajectory> trajectories;
  std::filesystem::path manifest;
};

/// Full pipeline into config.output: landscape, splits, training, test
/// evaluation, campaign, verification, report and manifest. A failing stage
/// rethrows its error with the stage name prefixed, keeping the error type.
ReproduceResult reproduce(const ExperimentConfig& config, unsigned jobs = 1,
                          std::ostream* log = nullptr);

}  // namespace spoofbench
