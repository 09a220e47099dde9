#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spoofbench/errors.hpp"
#include "spoofbench/seqcore.hpp"

namespace spoofbench {

inline constexpr std::string_view kModelFormatVersion = "spoofbench-mlp-1";

/// Architecture: per-position embedding, concatenated, then two GELU layers
/// with dropout and a logistic head.
struct MlpShape {
  std::size_t alphabet_size = 26;
  std::size_t length = 9;
  std::size_t embedding_dim = 32;
  std::size_t hidden1 = 512;
  std::size_t hidden2 = 256;
  double dropout = 0.1;

  std::size_t input_dim() const { return length * embedding_dim; }
  void validate() const;
  bool operator==(const MlpShape&) const = default;
};

enum class Mode { kTrain, kInference };

struct InitConfig {
  /// Embedding entries are uniform in [-bound, bound].
  double embedding_bound = 1.0;
};

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// All learned tensors. Also used for gradients and optimizer moments, which
/// share the parameter layout block for block.
template <typename Scalar>
struct MlpParams {
  MatrixX<Scalar> embedding;  // K x E
  MatrixX<Scalar> w1;         // (L*E) x H1
  VectorX<Scalar> b1;
  MatrixX<Scalar> w2;  // H1 x H2
  VectorX<Scalar> b2;
  MatrixX<Scalar> w3;  // H2 x 1
  VectorX<Scalar> b3;  // 1

  static constexpr std::size_t kBlockCount = 7;
  static constexpr std::array<std::string_view, kBlockCount> kBlockNames = {
      "embedding", "layer1.weight", "layer1.bias", "layer2.weight",
      "layer2.bias", "head.weight", "head.bias"};

  static MlpParams zeros(const MlpShape& shape) {
    MlpParams p;
    p.embedding = MatrixX<Scalar>::Zero(shape.alphabet_size, shape.embedding_dim);
    p.w1 = MatrixX<Scalar>::Zero(shape.input_dim(), shape.hidden1);
    p.b1 = VectorX<Scalar>::Zero(shape.hidden1);
    p.w2 = MatrixX<Scalar>::Zero(shape.hidden1, shape.hidden2);
    p.b2 = VectorX<Scalar>::Zero(shape.hidden2);
    p.w3 = MatrixX<Scalar>::Zero(shape.hidden2, 1);
    p.b3 = VectorX<Scalar>::Zero(1);
    return p;
  }

  /// Block i viewed as a matrix (biases as column vectors).
  Eigen::Map<MatrixX<Scalar>> block(std::size_t i) {
    switch (i) {
      case 0: return {embedding.data(), embedding.rows(), embedding.cols()};
      case 1: return {w1.data(), w1.rows(), w1.cols()};
      case 2: return {b1.data(), b1.rows(), 1};
      case 3: return {w2.data(), w2.rows(), w2.cols()};
      case 4: return {b2.data(), b2.rows(), 1};
      case 5: return {w3.data(), w3.rows(), w3.cols()};
      case 6: return {b3.data(), b3.rows(), 1};
    }
    throw std::out_of_range("parameter block index");
  }
  Eigen::Map<const MatrixX<Scalar>> block(std::size_t i) const {
    auto& self = const_cast<MlpParams&>(*this);
    auto m = self.block(i);
    return {m.data(), m.rows(), m.cols()};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < kBlockCount; ++i) n += static_cast<std::size_t>(block(i).size());
    return n;
  }

  bool all_finite() const {
    for (std::size_t i = 0; i < kBlockCount; ++i) {
      if (!block(i).allFinite()) return false;
    }
    return true;
  }
};

template <typename Scalar>
class BasicMlp {
 public:
  /// Zero-initialized model; predicts exactly 0.5 everywhere.
  explicit BasicMlp(MlpShape shape) : shape_(shape) {
    shape_.validate();
    params_ = MlpParams<Scalar>::zeros(shape_);
  }
  BasicMlp(MlpShape shape, MlpParams<Scalar> params) : shape_(shape), params_(std::move(params)) {
    shape_.validate();
    auto expected = MlpParams<Scalar>::zeros(shape_);
    for (std::size_t i = 0; i < MlpParams<Scalar>::kBlockCount; ++i) {
      if (params_.block(i).rows() != expected.block(i).rows() ||
          params_.block(i).cols() != expected.block(i).cols()) {
        throw std::invalid_argument("parameter block '" +
                                    std::string(MlpParams<Scalar>::kBlockNames[i]) +
                                    "' does not match the shape");
      }
    }
  }

  /// Glorot-uniform weights, uniform embeddings, zero biases. Draw order:
  /// embedding, layer1, layer2, head, each row-major.
  static BasicMlp initialized(const MlpShape& shape, Rng& rng, const InitConfig& init = {}) {
    BasicMlp model(shape);
    auto fill = [&rng](MatrixX<Scalar>& m, double bound) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          m(r, c) = static_cast<Scalar>((2.0 * rng.uniform_real() - 1.0) * bound);
        }
      }
    };
    auto glorot = [](Eigen::Index fan_in, Eigen::Index fan_out) {
      return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    };
    auto& p = model.params_;
    fill(p.embedding, init.embedding_bound);
    fill(p.w1, glorot(p.w1.rows(), p.w1.cols()));
    fill(p.w2, glorot(p.w2.rows(), p.w2.cols()));
    fill(p.w3, glorot(p.w3.rows(), p.w3.cols()));
    return model;
  }

  const MlpShape& shape() const { return shape_; }
  const MlpParams<Scalar>& params() const { return params_; }
  MlpParams<Scalar>& params() { return params_; }

 private:
  MlpShape shape_;
  MlpParams<Scalar> params_;
};

using Mlp = BasicMlp<double>;
using MlpGradients = MlpParams<double>;

/// x * Phi(x), exact erf form.
template <typename Scalar>
Scalar gelu(Scalar x) {
  using std::erf;
  using std::sqrt;
  return Scalar(0.5) * x * (Scalar(1) + erf(x / sqrt(Scalar(2))));
}

/// Phi(x) + x * phi(x).
template <typename Scalar>
Scalar gelu_derivative(Scalar x) {
  using std::erf;
  using std::exp;
  using std::sqrt;
  const Scalar cdf = Scalar(0.5) * (Scalar(1) + erf(x / sqrt(Scalar(2))));
  const Scalar pdf = exp(Scalar(-0.5) * x * x) / sqrt(Scalar(2 * M_PI));
  return cdf + x * pdf;
}

template <typename Scalar>
Scalar logistic(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// Clamp applied to probabilities inside the loss only.
inline constexpr double kBceEpsilon = 1e-7;

template <typename Scalar>
Scalar bce_loss(Scalar p, int label) {
  using std::log;
  const Scalar eps = static_cast<Scalar>(kBceEpsilon);
  p = std::min(std::max(p, eps), Scalar(1) - eps);
  return label == 1 ? -log(p) : -log(Scalar(1) - p);
}

/// Activations retained by a forward pass for the matching backward pass.
template <typename Scalar>
struct ForwardCache {
  Mode mode = Mode::kInference;
  std::vector<Sequence> batch;
  MatrixX<Scalar> x;       // B x (L*E)
  MatrixX<Scalar> z1;      // pre-activations
  MatrixX<Scalar> mask1;   // 0 or 1/(1-rate); empty when no dropout applied
  MatrixX<Scalar> h1;      // post-dropout activations
  MatrixX<Scalar> z2;
  MatrixX<Scalar> mask2;
  MatrixX<Scalar> h2;
  VectorX<Scalar> logits;
  VectorX<Scalar> probabilities;
};

namespace detail {

template <typename Scalar>
void check_batch(const MlpShape& shape, std::span<const Sequence> batch) {
  for (const auto& s : batch) {
    if (s.length() != shape.length) {
      throw std::invalid_argument("sequence length " + std::to_string(s.length()) +
                                  " does not match model length " + std::to_string(shape.length));
    }
    for (Symbol sym : s.symbols) {
      if (sym >= shape.alphabet_size) throw std::invalid_argument("symbol outside model alphabet");
    }
  }
}

template <typename Scalar>
MatrixX<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  MatrixX<Scalar> mask(rows, cols);
  const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  // Row-major draw order: sample by sample.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      mask(r, c) = rng.uniform_real() < rate ? Scalar(0) : keep_scale;
    }
  }
  return mask;
}

}  // namespace detail

/// Full forward pass. Train mode applies inverted dropout drawn from `rng`
/// (required when the dropout rate is positive); inference mode ignores it.
template <typename Scalar>
ForwardCache<Scalar> forward_cached(const BasicMlp<Scalar>& model, std::span<const Sequence> batch,
                                    Mode mode, Rng* rng = nullptr) {
  const auto& shape = model.shape();
  const auto& p = model.params();
  detail::check_batch<Scalar>(shape, batch);
  const bool drop = mode == Mode::kTrain && shape.dropout > 0.0;
  if (drop && rng == nullptr) throw std::invalid_argument("train-mode forward needs an Rng");

  ForwardCache<Scalar> c;
  c.mode = mode;
  c.batch.assign(batch.begin(), batch.end());
  const auto B = static_cast<Eigen::Index>(batch.size());
  const auto E = static_cast<Eigen::Index>(shape.embedding_dim);

  c.x.resize(B, static_cast<Eigen::Index>(shape.input_dim()));
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& s = batch[static_cast<std::size_t>(b)];
    for (std::size_t pos = 0; pos < shape.length; ++pos) {
      c.x.row(b).segment(static_cast<Eigen::Index>(pos) * E, E) = p.embedding.row(s[pos]);
    }
  }

  const auto act = [](Scalar v) { return gelu(v); };

  c.z1.noalias() = c.x * p.w1;
  c.z1.rowwise() += p.b1.transpose();
  c.h1 = c.z1.unaryExpr(act);
  if (drop) {
    c.mask1 = detail::dropout_mask<Scalar>(B, c.h1.cols(), shape.dropout, *rng);
    c.h1.array() *= c.mask1.array();
  }

  c.z2.noalias() = c.h1 * p.w2;
  c.z2.rowwise() += p.b2.transpose();
  c.h2 = c.z2.unaryExpr(act);
  if (drop) {
    c.mask2 = detail::dropout_mask<Scalar>(B, c.h2.cols(), shape.dropout, *rng);
    c.h2.array() *= c.mask2.array();
  }

  c.logits.noalias() = c.h2 * p.w3.col(0);
  c.logits.array() += p.b3(0);
  c.probabilities = c.logits.unaryExpr([](Scalar z) { return logistic(z); });
  return c;
}

template <typename Scalar>
std::vector<Scalar> forward(const BasicMlp<Scalar>& model, std::span<const Sequence> batch,
                            Mode mode, Rng* rng = nullptr) {
  auto c = forward_cached(model, batch, mode, rng);
  return {c.probabilities.data(), c.probabilities.data() + c.probabilities.size()};
}

/// Gradient of the mean BCE over the cached batch. The logit gradient uses
/// the unclamped p - y form.
template <typename Scalar>
MlpParams<Scalar> backward(const BasicMlp<Scalar>& model, const ForwardCache<Scalar>& cache,
                           std::span<const int> labels, Mode mode) {
  if (cache.mode != mode) throw std::invalid_argument("backward mode differs from cached forward");
  if (labels.size() != cache.batch.size()) {
    throw std::invalid_argument("label count does not match cached batch");
  }
  if (cache.batch.empty()) throw std::invalid_argument("backward on an empty batch");
  const auto& shape = model.shape();
  const auto& p = model.params();
  const auto B = static_cast<Eigen::Index>(cache.batch.size());
  const auto E = static_cast<Eigen::Index>(shape.embedding_dim);

  VectorX<Scalar> dlogit(B);
  for (Eigen::Index b = 0; b < B; ++b) {
    dlogit(b) = (cache.probabilities(b) - static_cast<Scalar>(labels[static_cast<std::size_t>(b)])) /
                static_cast<Scalar>(B);
  }

  auto g = MlpParams<Scalar>::zeros(shape);
  g.w3.col(0).noalias() = cache.h2.transpose() * dlogit;
  g.b3(0) = dlogit.sum();

  MatrixX<Scalar> d2 = dlogit * p.w3.col(0).transpose();
  if (cache.mask2.size() != 0) d2.array() *= cache.mask2.array();
  d2.array() *= cache.z2.unaryExpr([](Scalar v) { return gelu_derivative(v); }).array();
  g.w2.noalias() = cache.h1.transpose() * d2;
  g.b2 = d2.colwise().sum().transpose();

  MatrixX<Scalar> d1 = d2 * p.w2.transpose();
  if (cache.mask1.size() != 0) d1.array() *= cache.mask1.array();
  d1.array() *= cache.z1.unaryExpr([](Scalar v) { return gelu_derivative(v); }).array();
  g.w1.noalias() = cache.x.transpose() * d1;
  g.b1 = d1.colwise().sum().transpose();

  MatrixX<Scalar> dx = d1 * p.w1.transpose();
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& s = cache.batch[static_cast<std::size_t>(b)];
    for (std::size_t pos = 0; pos < shape.length; ++pos) {
      g.embedding.row(s[pos]) += dx.row(b).segment(static_cast<Eigen::Index>(pos) * E, E);
    }
  }
  return g;
}

/// Mean BCE (clamped) over a batch of probabilities.
template <typename Scalar>
Scalar mean_bce(const VectorX<Scalar>& probabilities, std::span<const int> labels) {
  Scalar total = 0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    total += bce_loss(probabilities(i), labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<Scalar>(probabilities.size());
}

/// Deterministic single-sequence confidence (inference mode).
template <typename Scalar>
Scalar predict_confidence(const BasicMlp<Scalar>& model, const Sequence& s) {
  return forward(model, std::span<const Sequence>(&s, 1), Mode::kInference)[0];
}

struct AdamWConfig {
  double learning_rate = 2e-3;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct TrainerState {
  AdamWConfig config;
  std::uint64_t step = 0;
  MlpParams<Scalar> first_moment;
  MlpParams<Scalar> second_moment;

  TrainerState(const MlpShape& shape, AdamWConfig cfg)
      : config(cfg),
        first_moment(MlpParams<Scalar>::zeros(shape)),
        second_moment(MlpParams<Scalar>::zeros(shape)) {}
};

/// One AdamW step: decoupled decay p *= (1 - lr*wd), then the bias-corrected
/// Adam update. Throws NumericalError naming the first non-finite gradient
/// block; the model is untouched in that case.
template <typename Scalar>
void adamw_step(BasicMlp<Scalar>& model, const MlpParams<Scalar>& grads, TrainerState<Scalar>& state) {
  using Params = MlpParams<Scalar>;
  for (std::size_t i = 0; i < Params::kBlockCount; ++i) {
    if (grads.block(i).rows() != model.params().block(i).rows() ||
        grads.block(i).cols() != model.params().block(i).cols()) {
      throw std::invalid_argument("gradient block '" + std::string(Params::kBlockNames[i]) +
                                  "' has the wrong shape");
    }
    if (!grads.block(i).allFinite()) {
      throw NumericalError("non-finite gradient in block '" + std::string(Params::kBlockNames[i]) +
                           "'");
    }
  }
  const auto& cfg = state.config;
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const auto lr = static_cast<Scalar>(cfg.learning_rate);
  const auto decay = static_cast<Scalar>(1.0 - cfg.learning_rate * cfg.weight_decay);
  const auto b1 = static_cast<Scalar>(cfg.beta1);
  const auto b2 = static_cast<Scalar>(cfg.beta2);
  const auto correction1 = static_cast<Scalar>(1.0 - std::pow(cfg.beta1, t));
  const auto correction2 = static_cast<Scalar>(1.0 - std::pow(cfg.beta2, t));
  const auto eps = static_cast<Scalar>(cfg.epsilon);

  for (std::size_t i = 0; i < Params::kBlockCount; ++i) {
    auto param = model.params().block(i);
    const auto g = grads.block(i);
    auto m = state.first_moment.block(i);
    auto v = state.second_moment.block(i);
    m.array() = b1 * m.array() + (Scalar(1) - b1) * g.array();
    v.array() = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
    param.array() *= decay;
    param.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
  }
}

/// Binary checkpoint, layout in docs/formats.md. Throws DataError on I/O
/// failure, version mismatch, truncation, or checksum mismatch.
void save_model(const Mlp& model, const std::filesystem::path& path);
Mlp load_model(const std::filesystem::path& path);
std::string serialize_model(const Mlp& model);
Mlp deserialize_model(std::string_view bytes);

}  // namespace spoofbench
