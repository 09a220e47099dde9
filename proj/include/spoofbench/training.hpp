#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spoofbench/landscape.hpp"
#include "spoofbench/neural.hpp"

namespace spoofbench {

struct LabeledExample {
  Sequence sequence;
  int label = 0;  // 1 = replicator
};

struct DatasetSplits {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> validation;
  std::vector<LabeledExample> test;
  std::uint64_t seed = 0;
};

struct EvalMetrics {
  std::size_t true_positives = 0;
  std::size_t true_negatives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double mean_bce = 0.0;

  std::size_t total() const {
    return true_positives + true_negatives + false_positives + false_negatives;
  }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 8192;
  AdamWConfig optimizer;
};

struct TrainingReport {
  std::vector<EpochRecord> curves;
  /// Final-epoch training loss below the first epoch's.
  bool loss_decreased = false;
};

/// Shuffles the positives and partitions them floor(0.8N) / floor(0.1N) /
/// rest, then pairs every positive with one negative drawn uniformly from
/// the full space. Negatives are never members and never repeat, within or
/// across splits. A negative draw that fails `max_rejections` times in a row
/// raises DataError.
DatasetSplits build_splits(const ReplicatorSet& set, Rng& rng,
                           std::size_t max_rejections = 100000);

/// Threshold rule: predicted positive iff p > threshold.
EvalMetrics evaluate(const Mlp& model, std::span<const LabeledExample> examples,
                     double threshold = 0.5);

/// Minibatch AdamW over `splits.train` for config.epochs epochs, reshuffling
/// each epoch from `rng` (which also drives dropout). After each epoch the
/// train and validation splits are scored in inference mode. A non-finite
/// batch loss aborts with NumericalError. Progress lines go to `log` if set.
TrainingReport train_model(Mlp& model, const DatasetSplits& splits, TrainerState<double>& state,
                           const TrainConfig& config, Rng& rng, std::ostream* log = nullptr);

/// Writes train.tsv / validation.tsv / test.tsv ("sequence<TAB>label") and
/// splits.json into `dir`.
void save_splits(const DatasetSplits& splits, const ReplicatorSet& set,
                 const std::filesystem::path& dir);

std::vector<LabeledExample> load_examples(const std::filesystem::path& path,
                                          const Alphabet& alphabet);

}  // namespace spoofbench
