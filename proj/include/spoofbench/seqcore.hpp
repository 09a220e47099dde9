#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spoofbench {

using Symbol = std::uint8_t;

/// Ordered set of single-character symbols. Symbol i renders as symbols()[i].
class Alphabet {
 public:
  explicit Alphabet(std::string symbols);

  /// First `k` lowercase letters; k == 26 gives a-z.
  static Alphabet lowercase(std::size_t k = 26);

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbols() const { return symbols_; }
  char render(Symbol s) const { return symbols_[s]; }
  /// Index of `c`, or -1 when `c` is not in the alphabet.
  int index_of(char c) const;

  bool operator==(const Alphabet& other) const = default;

 private:
  std::string symbols_;
  std::vector<int> lookup_;
};

/// Fixed-length genotype stored as alphabet indices.
struct Sequence {
  std::vector<Symbol> symbols;

  Sequence() = default;
  explicit Sequence(std::vector<Symbol> s) : symbols(std::move(s)) {}

  std::size_t length() const { return symbols.size(); }
  Symbol operator[](std::size_t i) const { return symbols[i]; }
  Symbol& operator[](std::size_t i) { return symbols[i]; }

  auto operator<=>(const Sequence&) const = default;
};

std::string to_string(const Sequence& s, const Alphabet& alphabet);
/// Throws DataError on an unknown character.
Sequence parse_sequence(std::string_view text, const Alphabet& alphabet);

/// Seeded 64-bit generator. Bounded draws use rejection sampling on the
/// raw engine output so that streams do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform_real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based seed derivation: folds each counter into the master seed
/// through mix64, so (master, c0, c1, ...) maps to an independent stream.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters);

/// Number of positions where a and b differ. Throws std::invalid_argument on
/// length mismatch.
std::size_t hamming(const Sequence& a, const Sequence& b);

/// Copy of `s` with one uniformly chosen position set to one of the K-1
/// other symbols, chosen uniformly.
Sequence propose_point_mutation(const Sequence& s, std::size_t alphabet_size, Rng& rng);

/// K sequences; the i-th repeats symbol i `length` times.
std::vector<Sequence> uniform_sequences(const Alphabet& alphabet, std::size_t length);

Sequence random_sequence(const Alphabet& alphabet, std::size_t length, Rng& rng);

/// Base-K integer code, first symbol most significant, so code order is
/// lexicographic order. Requires K^L < 2^64 (see fits_code).
std::uint64_t encode(const Sequence& s, std::size_t alphabet_size);
Sequence decode(std::uint64_t code, std::size_t alphabet_size, std::size_t length);
bool fits_code(std::size_t alphabet_size, std::size_t length);
/// K^L, saturating at UINT64_MAX.
std::uint64_t space_size(std::size_t alphabet_size, std::size_t length);

}  // namespace spoofbench
