#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "spoofbench/neural.hpp"

using namespace spoofbench;

namespace {

MlpShape tiny_shape(double dropout = 0.0) {
  MlpShape s;
  s.alphabet_size = 4;
  s.length = 3;
  s.embedding_dim = 5;
  s.hidden1 = 8;
  s.hidden2 = 4;
  s.dropout = dropout;
  return s;
}

std::vector<Sequence> tiny_batch() {
  // Symbol 3 never appears.
  return {Sequence({0, 1, 2}), Sequence({2, 2, 0}), Sequence({1, 0, 1}), Sequence({0, 0, 2}),
          Sequence({2, 1, 1})};
}

double batch_loss(const Mlp& model, const std::vector<Sequence>& batch, const std::vector<int>& labels) {
  auto c = forward_cached(model, std::span<const Sequence>(batch), Mode::kInference);
  return mean_bce<double>(c.probabilities, labels);
}

}  // namespace

TEST_CASE("gelu anchors") {
  CHECK(gelu(0.0) == 0.0);
  CHECK(std::abs(gelu(10.0) - 10.0) < 1e-6);
  // 1 * Phi(1); Phi(1) = 0.841344746068542948585232545632... (mpmath, 50 digits)
  CHECK(std::abs(gelu(1.0) - 0.8413447460685429) < 1e-15);
  CHECK(std::abs(gelu(-1.0) - (-1.0 + 0.8413447460685429)) < 1e-15);
}

TEST_CASE("gelu derivative matches central differences") {
  for (double x : {-3.0, -1.0, -0.2, 0.0, 0.5, 2.0}) {
    const double h = 1e-6;
    const double fd = (gelu(x + h) - gelu(x - h)) / (2 * h);
    CHECK(std::abs(gelu_derivative(x) - fd) < 1e-8);
  }
}

TEST_CASE("bce loss values") {
  CHECK(bce_loss(0.5, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce_loss(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce_loss(0.9, 0) == doctest::Approx(-std::log(0.1)).epsilon(1e-12));
  CHECK(bce_loss(1.0 - 1e-12, 1) < 1e-6);
  // the clamp keeps the loss finite at the ends
  CHECK(std::isfinite(bce_loss(0.0, 1)));
  CHECK(bce_loss(0.0, 1) == doctest::Approx(-std::log(kBceEpsilon)));
}

TEST_CASE("zero model predicts one half") {
  Mlp model(tiny_shape());
  auto probs = forward(model, std::span<const Sequence>(tiny_batch()), Mode::kInference);
  for (double p : probs) CHECK(p == 0.5);
  CHECK(predict_confidence(model, Sequence({3, 3, 3})) == 0.5);
}

TEST_CASE("forward output is a probability and inference is deterministic") {
  Rng rng(7);
  auto model = Mlp::initialized(tiny_shape(0.1), rng);
  const auto batch = tiny_batch();
  auto a = forward(model, std::span<const Sequence>(batch), Mode::kInference);
  auto b = forward(model, std::span<const Sequence>(batch), Mode::kInference);
  CHECK(a == b);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(a[i] > 0.0);
    CHECK(a[i] < 1.0);
    CHECK(predict_confidence(model, batch[i]) == a[i]);
  }
}

TEST_CASE("forward rejects mismatched sequences") {
  Mlp model(tiny_shape());
  std::vector<Sequence> wrong_len{Sequence({0, 1})};
  CHECK_THROWS_AS(forward(model, std::span<const Sequence>(wrong_len), Mode::kInference),
                  std::invalid_argument);
  std::vector<Sequence> wrong_sym{Sequence({0, 1, 4})};
  CHECK_THROWS_AS(forward(model, std::span<const Sequence>(wrong_sym), Mode::kInference),
                  std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(11);
  auto model = Mlp::initialized(tiny_shape(), rng);
  // bias blocks start at zero; perturb so every block sees a generic point
  for (std::size_t i = 0; i < MlpParams<double>::kBlockCount; ++i) {
    auto block = model.params().block(i);
    for (Eigen::Index k = 0; k < block.size(); ++k) block.data()[k] += 0.3 * (rng.uniform_real() - 0.5);
  }
  const auto batch = tiny_batch();
  const std::vector<int> labels{1, 0, 1, 0, 1};
  auto cache = forward_cached(model, std::span<const Sequence>(batch), Mode::kInference);
  const auto grads = backward(model, cache, std::span<const int>(labels), Mode::kInference);

  const double h = 1e-5;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < MlpParams<double>::kBlockCount; ++i) {
    CAPTURE(MlpParams<double>::kBlockNames[i]);
    auto block = model.params().block(i);
    const auto g = grads.block(i);
    for (Eigen::Index k = 0; k < block.size(); ++k) {
      const double saved = block.data()[k];
      block.data()[k] = saved + h;
      const double up = batch_loss(model, batch, labels);
      block.data()[k] = saved - h;
      const double down = batch_loss(model, batch, labels);
      block.data()[k] = saved;
      const double fd = (up - down) / (2 * h);
      const double an = g.data()[k];
      if (std::abs(an) > 1e-8) {
        CHECK(std::abs(an - fd) / std::max(std::abs(an), std::abs(fd)) < 1e-3);
        ++checked;
      } else {
        CHECK(std::abs(fd) < 1e-7);
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("embedding rows absent from the batch get zero gradient") {
  Rng rng(5);
  auto model = Mlp::initialized(tiny_shape(), rng);
  const auto batch = tiny_batch();
  const std::vector<int> labels{1, 0, 1, 0, 1};
  auto cache = forward_cached(model, std::span<const Sequence>(batch), Mode::kInference);
  const auto grads = backward(model, cache, std::span<const int>(labels), Mode::kInference);
  CHECK(grads.embedding.row(3).isZero(0.0));
  CHECK(!grads.embedding.row(0).isZero(0.0));
}

TEST_CASE("gradient of a duplicated batch equals the single-batch gradient") {
  // mean over B: stacking the batch twice leaves the mean gradient unchanged
  Rng rng(9);
  auto model = Mlp::initialized(tiny_shape(), rng);
  auto batch = tiny_batch();
  std::vector<int> labels{1, 0, 1, 0, 1};
  auto c1 = forward_cached(model, std::span<const Sequence>(batch), Mode::kInference);
  auto g1 = backward(model, c1, std::span<const int>(labels), Mode::kInference);
  auto batch2 = batch;
  batch2.insert(batch2.end(), batch.begin(), batch.end());
  auto labels2 = labels;
  labels2.insert(labels2.end(), labels.begin(), labels.end());
  auto c2 = forward_cached(model, std::span<const Sequence>(batch2), Mode::kInference);
  auto g2 = backward(model, c2, std::span<const int>(labels2), Mode::kInference);
  for (std::size_t i = 0; i < MlpParams<double>::kBlockCount; ++i) {
    CHECK(g1.block(i).isApprox(g2.block(i), 1e-12));
  }
}

TEST_CASE("train-mode gradients reuse the forward dropout mask") {
  Rng init(3);
  auto model = Mlp::initialized(tiny_shape(0.1), init);
  const auto batch = tiny_batch();
  const std::vector<int> labels{1, 0, 1, 0, 1};
  Rng rng(99);
  auto cache = forward_cached(model, std::span<const Sequence>(batch), Mode::kTrain, &rng);
  const auto grads = backward(model, cache, std::span<const int>(labels), Mode::kTrain);

  // Finite differences through a forward pass that replays the same masks.
  auto masked_loss = [&](const Mlp& m) {
    Rng replay(99);
    auto c = forward_cached(m, std::span<const Sequence>(batch), Mode::kTrain, &replay);
    return mean_bce<double>(c.probabilities, labels);
  };
  const double h = 1e-5;
  auto block = model.params().block(1);
  for (Eigen::Index k = 0; k < block.size(); k += 7) {
    const double saved = block.data()[k];
    block.data()[k] = saved + h;
    const double up = masked_loss(model);
    block.data()[k] = saved - h;
    const double down = masked_loss(model);
    block.data()[k] = saved;
    const double fd = (up - down) / (2 * h);
    const double an = grads.w1.data()[k];
    if (std::abs(an) > 1e-8) CHECK(std::abs(an - fd) / std::abs(an) < 1e-3);
  }
  CHECK_THROWS_AS(backward(model, cache, std::span<const int>(labels), Mode::kInference),
                  std::invalid_argument);
}

TEST_CASE("dropout zero rate and inverted scaling") {
  Rng rng(2024);
  const auto mask = detail::dropout_mask<double>(400, 250, 0.1, rng);
  const double zeros = static_cast<double>((mask.array() == 0.0).count());
  const double rate = zeros / static_cast<double>(mask.size());
  CHECK(rate > 0.09);
  CHECK(rate < 0.11);
  CHECK(((mask.array() == 0.0) || (mask.array() == 1.0 / 0.9)).all());
}

TEST_CASE("logistic output is monotone in the head bias") {
  Rng rng(4);
  auto model = Mlp::initialized(tiny_shape(), rng);
  const Sequence s({0, 1, 2});
  double previous = 0.0;
  for (double bias = -5.0; bias <= 5.0; bias += 0.5) {
    model.params().b3(0) = bias;
    const double p = predict_confidence(model, s);
    CHECK(p > previous);
    previous = p;
  }
}

TEST_CASE("adamw: zero gradients") {
  Rng rng(1);
  auto model = Mlp::initialized(tiny_shape(), rng);
  const auto before = model.params();
  const auto zero = MlpParams<double>::zeros(model.shape());

  SUBCASE("no decay leaves parameters unchanged") {
    TrainerState<double> state(model.shape(), AdamWConfig{2e-3, 0.0});
    for (int i = 0; i < 5; ++i) adamw_step(model, zero, state);
    CHECK(state.step == 5);
    for (std::size_t i = 0; i < MlpParams<double>::kBlockCount; ++i) {
      CHECK(model.params().block(i) == before.block(i));
    }
  }
  SUBCASE("decay shrinks by (1 - lr*wd) per step") {
    TrainerState<double> state(model.shape(), AdamWConfig{2e-3, 1e-4});
    for (int i = 0; i < 3; ++i) adamw_step(model, zero, state);
    const double factor = std::pow(1.0 - 2e-3 * 1e-4, 3);
    CHECK(model.params().w1.isApprox(before.w1 * factor, 1e-14));
  }
}

TEST_CASE("adamw: constant gradient update approaches the learning rate") {
  // Scalar reference: with constant g the bias-corrected m_hat = g and
  // v_hat = g^2 exactly, so every step moves by lr * |g| / (|g| + eps).
  MlpShape shape = tiny_shape();
  Mlp model(shape);
  TrainerState<double> state(shape, AdamWConfig{1e-3, 0.0});
  auto grads = MlpParams<double>::zeros(shape);
  grads.b3(0) = 0.25;
  double previous = 0.0;
  for (int step = 1; step <= 200; ++step) {
    adamw_step(model, grads, state);
    const double moved = previous - model.params().b3(0);
    previous = model.params().b3(0);
    if (step > 10) CHECK(moved == doctest::Approx(1e-3 * 0.25 / (0.25 + 1e-8)).epsilon(1e-9));
  }
}

TEST_CASE("adamw rejects non-finite gradients") {
  Mlp model(tiny_shape());
  TrainerState<double> state(model.shape(), AdamWConfig{});
  auto grads = MlpParams<double>::zeros(model.shape());
  grads.w2(0, 0) = std::nan("");
  try {
    adamw_step(model, grads, state);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("layer2.weight") != std::string::npos);
  }
  CHECK(state.step == 0);
}

TEST_CASE("checkpoint round trip") {
  Rng rng(8);
  auto model = Mlp::initialized(tiny_shape(0.1), rng);
  const auto dir = std::filesystem::temp_directory_path() / "spoofbench_test_model";
  std::filesystem::create_directories(dir);
  save_model(model, dir / "a.bin");
  const auto loaded = load_model(dir / "a.bin");
  CHECK(loaded.shape() == model.shape());
  save_model(loaded, dir / "b.bin");
  CHECK(serialize_model(model) == serialize_model(loaded));

  const Sequence s({1, 2, 3});
  CHECK(predict_confidence(model, s) == predict_confidence(loaded, s));

  SUBCASE("corruption is detected") {
    auto bytes = serialize_model(model);
    bytes[bytes.size() / 2] ^= 0x01;
    CHECK_THROWS_AS(deserialize_model(bytes), DataError);
  }
  SUBCASE("truncation is detected") {
    auto bytes = serialize_model(model);
    CHECK_THROWS_AS(deserialize_model(std::string_view(bytes).substr(0, bytes.size() - 9)), DataError);
    CHECK_THROWS_AS(deserialize_model(std::string_view(bytes).substr(0, 10)), DataError);
  }
  std::filesystem::remove_all(dir);
}
