#include "spoofbench/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "spoofbench/errors.hpp"

namespace spoofbench {

DatasetSplits build_splits(const ReplicatorSet& set, Rng& rng, std::size_t max_rejections) {
  if (set.empty()) throw std::invalid_argument("cannot build splits from an empty landscape");
  DatasetSplits splits;
  splits.seed = rng.seed();

  auto positives = set.members();
  rng.shuffle(positives);
  const std::size_t n = positives.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_validation = n / 10;

  const auto K = set.alphabet().size();
  std::unordered_set<std::uint64_t> used_negatives;
  used_negatives.reserve(2 * n);

  auto fill = [&](std::vector<LabeledExample>& split, std::size_t begin, std::size_t end) {
    split.reserve(2 * (end - begin));
    for (std::size_t i = begin; i < end; ++i) split.push_back({positives[i], 1});
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t failures = 0;
      for (;;) {
        auto s = random_sequence(set.alphabet(), set.length(), rng);
        if (!set.contains(s) && used_negatives.insert(encode(s, K)).second) {
          split.push_back({std::move(s), 0});
          break;
        }
        if (++failures >= max_rejections) {
          throw DataError("negative sampling failed " + std::to_string(failures) +
                          " times in a row; the landscape is too dense for balanced splits "
                          "(raise the rejection limit or use a sparser landscape)");
        }
      }
    }
  };
  fill(splits.train, 0, n_train);
  fill(splits.validation, n_train, n_train + n_validation);
  fill(splits.test, n_train + n_validation, n);
  return splits;
}

EvalMetrics evaluate(const Mlp& model, std::span<const LabeledExample> examples, double threshold) {
  if (examples.empty()) throw std::invalid_argument("evaluate on an empty example list");
  constexpr std::size_t kChunk = 8192;
  EvalMetrics m;
  std::vector<double> losses;
  losses.reserve(examples.size());
  std::vector<Sequence> batch;
  for (std::size_t begin = 0; begin < examples.size(); begin += kChunk) {
    const std::size_t end = std::min(examples.size(), begin + kChunk);
    batch.clear();
    for (std::size_t i = begin; i < end; ++i) batch.push_back(examples[i].sequence);
    const auto probs = forward(model, std::span<const Sequence>(batch), Mode::kInference);
    for (std::size_t i = begin; i < end; ++i) {
      const double p = probs[i - begin];
      const int y = examples[i].label;
      const bool predicted = p > threshold;
      if (predicted && y == 1) ++m.true_positives;
      else if (predicted) ++m.false_positives;
      else if (y == 1) ++m.false_negatives;
      else ++m.true_negatives;
      losses.push_back(bce_loss(p, y));
    }
  }
  // Sorting before summing makes the mean independent of example order.
  std::sort(losses.begin(), losses.end());
  m.mean_bce = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
  const auto total = static_cast<double>(m.total());
  m.accuracy = static_cast<double>(m.true_positives + m.true_negatives) / total;
  const auto predicted_pos = m.true_positives + m.false_positives;
  const auto actual_pos = m.true_positives + m.false_negatives;
  m.precision = predicted_pos ? static_cast<double>(m.true_positives) / static_cast<double>(predicted_pos) : 0.0;
  m.recall = actual_pos ? static_cast<double>(m.true_positives) / static_cast<double>(actual_pos) : 0.0;
  return m;
}

TrainingReport train_model(Mlp& model, const DatasetSplits& splits, TrainerState<double>& state,
                           const TrainConfig& config, Rng& rng, std::ostream* log) {
  if (splits.train.empty()) throw std::invalid_argument("training split is empty");
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be positive");

  TrainingReport report;
  std::vector<std::size_t> order(splits.train.size());
  std::vector<Sequence> batch;
  std::vector<int> labels;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      batch.clear();
      labels.clear();
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(splits.train[order[i]].sequence);
        labels.push_back(splits.train[order[i]].label);
      }
      auto cache = forward_cached(model, std::span<const Sequence>(batch), Mode::kTrain, &rng);
      const double loss = mean_bce<double>(cache.probabilities, labels);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss " << loss << " at epoch " << epoch << ", batch "
            << batch_index + 1;
        throw NumericalError(msg.str());
      }
      const auto grads = backward(model, cache, std::span<const int>(labels), Mode::kTrain);
      adamw_step(model, grads, state);
    }

    const auto train_metrics = evaluate(model, splits.train);
    EpochRecord rec{epoch, train_metrics.mean_bce, train_metrics.accuracy, 0.0, 0.0};
    if (!splits.validation.empty()) {
      const auto val = evaluate(model, splits.validation);
      rec.validation_loss = val.mean_bce;
      rec.validation_accuracy = val.accuracy;
    }
    report.curves.push_back(rec);
    if (log) {
      *log << "epoch " << epoch << "  train_loss " << rec.train_loss << "  train_acc "
           << rec.train_accuracy << "  val_loss " << rec.validation_loss << "  val_acc "
           << rec.validation_accuracy << '\n';
    }
  }

  if (!report.curves.empty()) {
    report.loss_decreased = report.curves.back().train_loss < report.curves.front().train_loss;
    if (!report.loss_decreased && log && report.curves.size() > 1) {
      *log << "warning: final training loss did not improve on epoch 1\n";
    }
  }
  return report;
}

namespace {

void write_examples(const std::vector<LabeledExample>& examples, const Alphabet& alphabet,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& e : examples) out << to_string(e.sequence, alphabet) << '\t' << e.label << '\n';
}

std::size_t count_label(const std::vector<LabeledExample>& v, int label) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [label](const auto& e) { return e.label == label; }));
}

}  // namespace

void save_splits(const DatasetSplits& splits, const ReplicatorSet& set,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_examples(splits.train, set.alphabet(), dir / "train.tsv");
  write_examples(splits.validation, set.alphabet(), dir / "validation.tsv");
  write_examples(splits.test, set.alphabet(), dir / "test.tsv");

  nlohmann::ordered_json manifest;
  manifest["seed"] = splits.seed;
  manifest["landscape_sha256"] = set.identity_hash();
  manifest["landscape_count"] = set.size();
  for (const auto& [name, split] : {std::pair{"train", &splits.train},
                                    std::pair{"validation", &splits.validation},
                                    std::pair{"test", &splits.test}}) {
    manifest["splits"][name] = {{"total", split->size()},
                                {"positives", count_label(*split, 1)},
                                {"negatives", count_label(*split, 0)}};
  }
  std::ofstream out(dir / "splits.json", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "splits.json").string());
  out << manifest.dump(2) << '\n';
}

std::vector<LabeledExample> load_examples(const std::filesystem::path& path,
                                          const Alphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab + 2 != line.size() ||
        (line[tab + 1] != '0' && line[tab + 1] != '1')) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 'sequence<TAB>label'");
    }
    out.push_back({parse_sequence(std::string_view(line).substr(0, tab), alphabet), line[tab + 1] - '0'});
  }
  return out;
}

}  // namespace spoofbench
