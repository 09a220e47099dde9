#include "spoofbench/seqcore.hpp"

#include <limits>
#include <stdexcept>

#include "spoofbench/errors.hpp"

namespace spoofbench {

Alphabet::Alphabet(std::string symbols) : symbols_(std::move(symbols)), lookup_(256, -1) {
  if (symbols_.size() < 2) throw std::invalid_argument("alphabet needs at least two symbols");
  if (symbols_.size() > 255) throw std::invalid_argument("alphabet too large");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto c = static_cast<unsigned char>(symbols_[i]);
    if (lookup_[c] != -1) throw std::invalid_argument("alphabet symbols must be unique");
    lookup_[c] = static_cast<int>(i);
  }
}

Alphabet Alphabet::lowercase(std::size_t k) {
  if (k < 2 || k > 26) throw std::invalid_argument("lowercase alphabet size must be in [2, 26]");
  std::string s;
  for (std::size_t i = 0; i < k; ++i) s.push_back(static_cast<char>('a' + i));
  return Alphabet(s);
}

int Alphabet::index_of(char c) const { return lookup_[static_cast<unsigned char>(c)]; }

std::string to_string(const Sequence& s, const Alphabet& alphabet) {
  std::string out;
  out.reserve(s.length());
  for (Symbol sym : s.symbols) out.push_back(alphabet.render(sym));
  return out;
}

Sequence parse_sequence(std::string_view text, const Alphabet& alphabet) {
  Sequence s;
  s.symbols.reserve(text.size());
  for (char c : text) {
    int idx = alphabet.index_of(c);
    if (idx < 0) throw DataError("symbol '" + std::string(1, c) + "' is not in the alphabet");
    s.symbols.push_back(static_cast<Symbol>(idx));
  }
  return s;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t c : counters) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

std::size_t hamming(const Sequence& a, const Sequence& b) {
  if (a.length() != b.length()) {
    throw std::invalid_argument("hamming: sequences of length " + std::to_string(a.length()) +
                                " and " + std::to_string(b.length()) + " are incompatible");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.length(); ++i) d += a[i] != b[i];
  return d;
}

Sequence propose_point_mutation(const Sequence& s, std::size_t alphabet_size, Rng& rng) {
  Sequence out = s;
  const auto pos = static_cast<std::size_t>(rng.uniform_index(s.length()));
  // Draw from the K-1 alternatives and skip over the current symbol.
  auto sym = static_cast<Symbol>(rng.uniform_index(alphabet_size - 1));
  if (sym >= s[pos]) ++sym;
  out[pos] = sym;
  return out;
}

std::vector<Sequence> uniform_sequences(const Alphabet& alphabet, std::size_t length) {
  if (length == 0) throw std::invalid_argument("sequence length must be positive");
  std::vector<Sequence> out;
  out.reserve(alphabet.size());
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    out.emplace_back(std::vector<Symbol>(length, static_cast<Symbol>(i)));
  }
  return out;
}

Sequence random_sequence(const Alphabet& alphabet, std::size_t length, Rng& rng) {
  if (length == 0) throw std::invalid_argument("sequence length must be positive");
  Sequence s;
  s.symbols.resize(length);
  for (auto& sym : s.symbols) sym = static_cast<Symbol>(rng.uniform_index(alphabet.size()));
  return s;
}

std::uint64_t space_size(std::size_t alphabet_size, std::size_t length) {
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < length; ++i) {
    if (n > std::numeric_limits<std::uint64_t>::max() / alphabet_size) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    n *= alphabet_size;
  }
  return n;
}

bool fits_code(std::size_t alphabet_size, std::size_t length) {
  return space_size(alphabet_size, length) != std::numeric_limits<std::uint64_t>::max();
}

std::uint64_t encode(const Sequence& s, std::size_t alphabet_size) {
  std::uint64_t code = 0;
  for (Symbol sym : s.symbols) code = code * alphabet_size + sym;
  return code;
}

Sequence decode(std::uint64_t code, std::size_t alphabet_size, std::size_t length) {
  Sequence s;
  s.symbols.resize(length);
  for (std::size_t i = length; i > 0; --i) {
    s.symbols[i - 1] = static_cast<Symbol>(code % alphabet_size);
    code /= alphabet_size;
  }
  return s;
}

}  // namespace spoofbench
