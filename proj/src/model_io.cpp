#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spoofbench/hashing.hpp"
#include "spoofbench/neural.hpp"

namespace spoofbench {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

void MlpShape::validate() const {
  if (alphabet_size < 2) throw std::invalid_argument("model alphabet size must be >= 2");
  if (length == 0 || embedding_dim == 0 || hidden1 == 0 || hidden2 == 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
}

namespace {

constexpr char kMagic[8] = {'S', 'P', 'B', 'M', 'L', 'P', '\0', '\n'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("model checkpoint is truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

// Layout (little-endian):
//   magic[8] | u32 version_len | version bytes
//   u32 alphabet_size, length, embedding_dim, hidden1, hidden2 | f64 dropout
//   u64 parameter_count | f64 parameters, block by block, each row-major
//   sha256[32] over everything above
std::string serialize_model(const Mlp& model) {
  const auto& shape = model.shape();
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kModelFormatVersion.size()));
  out.append(kModelFormatVersion);
  for (auto dim : {shape.alphabet_size, shape.length, shape.embedding_dim, shape.hidden1,
                   shape.hidden2}) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  }
  put<double>(out, shape.dropout);
  put<std::uint64_t>(out, model.params().parameter_count());
  for (std::size_t i = 0; i < MlpParams<double>::kBlockCount; ++i) {
    const auto block = model.params().block(i);
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      for (Eigen::Index c = 0; c < block.cols(); ++c) put<double>(out, block(r, c));
    }
  }
  const auto digest = sha256(out);
  out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return out;
}

Mlp deserialize_model(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) + 32) throw DataError("model checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a spoofbench model checkpoint");
  }
  const auto body = bytes.substr(0, bytes.size() - 32);
  const auto digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + body.size(), 32) != 0) {
    throw DataError("model checkpoint checksum mismatch (corrupted or truncated)");
  }

  Reader in(body);
  in.take(sizeof(kMagic));
  const auto version = in.take(in.get<std::uint32_t>());
  if (version != kModelFormatVersion) {
    throw DataError("model format version '" + std::string(version) + "' is not supported (expected '" +
                    std::string(kModelFormatVersion) + "')");
  }
  MlpShape shape;
  shape.alphabet_size = in.get<std::uint32_t>();
  shape.length = in.get<std::uint32_t>();
  shape.embedding_dim = in.get<std::uint32_t>();
  shape.hidden1 = in.get<std::uint32_t>();
  shape.hidden2 = in.get<std::uint32_t>();
  shape.dropout = in.get<double>();
  try {
    shape.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model checkpoint has an invalid shape: ") + e.what());
  }
  auto params = MlpParams<double>::zeros(shape);
  if (in.get<std::uint64_t>() != params.parameter_count()) {
    throw DataError("model checkpoint parameter count does not match its shape");
  }
  for (std::size_t i = 0; i < MlpParams<double>::kBlockCount; ++i) {
    auto block = params.block(i);
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      for (Eigen::Index c = 0; c < block.cols(); ++c) block(r, c) = in.get<double>();
    }
  }
  if (in.position() != body.size()) throw DataError("model checkpoint has trailing bytes");
  return Mlp(shape, std::move(params));
}

void save_model(const Mlp& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

Mlp load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace spoofbench
