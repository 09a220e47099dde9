#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "spoofbench/errors.hpp"
#include "spoofbench/training.hpp"

using namespace spoofbench;
namespace fs = std::filesystem;

namespace {

ReplicatorSet toy_set(std::size_t members, std::uint64_t seed = 1) {
  const auto a = Alphabet::lowercase(4);
  Rng rng(seed);
  std::set<Sequence> picked;
  while (picked.size() < members) picked.insert(random_sequence(a, 3, rng));
  return ReplicatorSet(a, 3, {picked.begin(), picked.end()});
}

std::multiset<Sequence> sequences(const std::vector<LabeledExample>& xs, int label) {
  std::multiset<Sequence> out;
  for (const auto& x : xs) {
    if (x.label == label) out.insert(x.sequence);
  }
  return out;
}

// A model whose output is a fixed logistic(bias): every weight zero.
Mlp constant_model(std::size_t k, std::size_t length, double bias) {
  MlpShape shape;
  shape.alphabet_size = k;
  shape.length = length;
  shape.embedding_dim = 2;
  shape.hidden1 = 3;
  shape.hidden2 = 2;
  shape.dropout = 0.0;
  auto params = MlpParams<double>::zeros(shape);
  params.b3(0) = bias;
  return Mlp(shape, params);
}

}  // namespace

TEST_CASE("split arithmetic on ten positives") {
  const auto set = toy_set(10);
  Rng rng(5);
  const auto s = build_splits(set, rng);
  CHECK(s.train.size() == 16);
  CHECK(s.validation.size() == 2);
  CHECK(s.test.size() == 2);
}

TEST_CASE("splits are balanced, disjoint and never mislabel members") {
  const auto set = toy_set(20);
  Rng rng(6);
  const auto s = build_splits(set, rng);
  std::multiset<Sequence> all_pos, all_neg;
  for (const auto* split : {&s.train, &s.validation, &s.test}) {
    const auto pos = sequences(*split, 1);
    const auto neg = sequences(*split, 0);
    CHECK(pos.size() == neg.size());
    for (const auto& p : pos) CHECK(set.contains(p));
    for (const auto& n : neg) CHECK_FALSE(set.contains(n));
    all_pos.insert(pos.begin(), pos.end());
    all_neg.insert(neg.begin(), neg.end());
  }
  // each positive used once; negatives unique across splits
  CHECK(all_pos.size() == 20);
  CHECK(std::set<Sequence>(all_pos.begin(), all_pos.end()).size() == 20);
  CHECK(std::set<Sequence>(all_neg.begin(), all_neg.end()).size() == all_neg.size());
}

TEST_CASE("splits are deterministic in the seed") {
  const auto set = toy_set(20);
  Rng a(8), b(8), c(9);
  const auto sa = build_splits(set, a), sb = build_splits(set, b), sc = build_splits(set, c);
  auto same = [](const DatasetSplits& x, const DatasetSplits& y) {
    if (x.train.size() != y.train.size()) return false;
    for (std::size_t i = 0; i < x.train.size(); ++i) {
      if (x.train[i].sequence != y.train[i].sequence || x.train[i].label != y.train[i].label) return false;
    }
    return true;
  };
  CHECK(same(sa, sb));
  CHECK_FALSE(same(sa, sc));
}

TEST_CASE("negative sampling gives up on a saturated space") {
  // 60 of 64 sequences are members: 48 positives in train need 48 negatives
  const auto set = toy_set(60);
  Rng rng(1);
  CHECK_THROWS_AS(build_splits(set, rng, 1000), DataError);
}

TEST_CASE("evaluate counts against a hand-built model") {
  const auto a = Alphabet::lowercase(4);
  std::vector<LabeledExample> xs = {{parse_sequence("abc", a), 1},
                                    {parse_sequence("bbb", a), 1},
                                    {parse_sequence("ccc", a), 0},
                                    {parse_sequence("ddd", a), 0}};
  // logistic(0) = 0.5 exactly: ties go negative
  const auto half = evaluate(constant_model(4, 3, 0.0), xs);
  CHECK(half.true_positives == 0);
  CHECK(half.false_negatives == 2);
  CHECK(half.true_negatives == 2);
  CHECK(half.false_positives == 0);
  CHECK(half.accuracy == doctest::Approx(0.5));
  CHECK(half.recall == doctest::Approx(0.0));
  CHECK(half.mean_bce == doctest::Approx(std::log(2.0)));

  const auto high = evaluate(constant_model(4, 3, 2.0), xs);
  const double p = 1.0 / (1.0 + std::exp(-2.0));
  CHECK(high.true_positives == 2);
  CHECK(high.false_positives == 2);
  CHECK(high.precision == doctest::Approx(0.5));
  CHECK(high.recall == doctest::Approx(1.0));
  CHECK(high.mean_bce == doctest::Approx((-std::log(p) - std::log(1 - p)) / 2));
  // threshold below the constant output flips the tie rule
  CHECK(evaluate(constant_model(4, 3, 0.0), xs, 0.49).true_positives == 2);
  CHECK(high.total() == 4);
}

TEST_CASE("evaluate is order invariant") {
  Rng rng(2);
  const auto set = toy_set(20);
  auto splits = build_splits(set, rng);
  MlpShape shape;
  shape.alphabet_size = 4;
  shape.length = 3;
  shape.embedding_dim = 4;
  shape.hidden1 = 8;
  shape.hidden2 = 4;
  const auto model = Mlp::initialized(shape, rng);
  auto xs = splits.train;
  const auto m1 = evaluate(model, xs);
  std::reverse(xs.begin(), xs.end());
  const auto m2 = evaluate(model, xs);
  rng.shuffle(xs);
  const auto m3 = evaluate(model, xs);
  CHECK(m1.mean_bce == m2.mean_bce);
  CHECK(m1.mean_bce == m3.mean_bce);
  CHECK(m1.true_positives == m3.true_positives);
}

TEST_CASE("training lowers the loss and is reproducible") {
  const auto set = toy_set(24, 3);
  MlpShape shape;
  shape.alphabet_size = 4;
  shape.length = 3;
  shape.embedding_dim = 4;
  shape.hidden1 = 16;
  shape.hidden2 = 8;
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 8;

  auto run = [&](std::ostream* log) {
    Rng split_rng(1), init_rng(2), train_rng(3);
    const auto splits = build_splits(set, split_rng);
    auto model = Mlp::initialized(shape, init_rng);
    TrainerState<double> state(shape, cfg.optimizer);
    auto report = train_model(model, splits, state, cfg, train_rng, log);
    return std::pair{std::move(model), std::move(report)};
  };
  std::ostringstream log;
  auto [m1, r1] = run(&log);
  auto [m2, r2] = run(nullptr);
  REQUIRE(r1.curves.size() == 30);
  CHECK(r1.loss_decreased);
  CHECK(r1.curves.back().train_loss < r1.curves.front().train_loss);
  CHECK(r1.curves.front().epoch == 1);
  CHECK(log.str().find("epoch 30") != std::string::npos);
  for (std::size_t i = 0; i < r1.curves.size(); ++i) {
    CHECK(r1.curves[i].train_loss == r2.curves[i].train_loss);
    CHECK(r1.curves[i].validation_accuracy == r2.curves[i].validation_accuracy);
  }
  CHECK(serialize_model(m1) == serialize_model(m2));
}

TEST_CASE("a diverging run stops with a numerical error") {
  const auto set = toy_set(24, 3);
  MlpShape shape;
  shape.alphabet_size = 4;
  shape.length = 3;
  shape.embedding_dim = 4;
  shape.hidden1 = 8;
  shape.hidden2 = 4;
  Rng rng(1);
  const auto splits = build_splits(set, rng);
  auto model = Mlp::initialized(shape, rng);
  model.params().w3(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainerState<double> state(shape, {});
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  CHECK_THROWS_AS(train_model(model, splits, state, cfg, rng), NumericalError);
}

TEST_CASE("split files round trip") {
  const auto set = toy_set(20);
  Rng rng(4);
  const auto s = build_splits(set, rng);
  const auto dir = fs::temp_directory_path() / "spoofbench_split_test";
  fs::remove_all(dir);
  save_splits(s, set, dir);
  for (const char* f : {"train.tsv", "validation.tsv", "test.tsv", "splits.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto train = load_examples(dir / "train.tsv", set.alphabet());
  REQUIRE(train.size() == s.train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    CHECK(train[i].sequence == s.train[i].sequence);
    CHECK(train[i].label == s.train[i].label);
  }
  std::ofstream(dir / "broken.tsv") << "abc\t7\n";
  CHECK_THROWS_AS(load_examples(dir / "broken.tsv", set.alphabet()), DataError);
}
