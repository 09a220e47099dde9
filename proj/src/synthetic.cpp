#include "spoofbench/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace spoofbench {

void MotifLandscapeConfig::validate() const {
  if (alphabet_size < 2 || alphabet_size > 26) {
    throw std::invalid_argument("motif landscape alphabet size must be in [2, 26]");
  }
  if (length == 0 || !fits_code(alphabet_size, length)) {
    throw std::invalid_argument("motif landscape length out of range");
  }
  if (target_count == 0) throw std::invalid_argument("motif landscape target count must be positive");
  if (families == 0) throw std::invalid_argument("motif landscape needs at least one family");
  if (constrained_positions == 0 || constrained_positions > length) {
    throw std::invalid_argument("constrained positions must be in [1, length]");
  }
  if (allowed_min == 0 || allowed_min > allowed_max || allowed_max >= alphabet_size) {
    throw std::invalid_argument("allowed subset size range must satisfy 1 <= min <= max < K");
  }
  if (version != kMotifLandscapeVersion) {
    throw std::invalid_argument("unsupported motif landscape version '" + version + "'");
  }
}

double MotifFamily::region_size() const {
  double n = 1.0;
  for (const auto& a : allowed) n *= static_cast<double>(a.size());
  return n;
}

bool MotifFamily::matches(const Sequence& s) const {
  if (s.length() != allowed.size()) return false;
  for (std::size_t p = 0; p < allowed.size(); ++p) {
    if (!std::binary_search(allowed[p].begin(), allowed[p].end(), s[p])) return false;
  }
  return true;
}

namespace {

// Uniform k-subset of [0, n) by partial Fisher-Yates, returned ascending.
std::vector<std::size_t> sample_subset(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

MotifLandscape generate_motif_landscape(const MotifLandscapeConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t K = config.alphabet_size;
  const std::size_t L = config.length;

  std::vector<MotifFamily> families(config.families);
  for (std::size_t f = 0; f < config.families; ++f) {
    auto& fam = families[f];
    fam.allowed.assign(L, {});
    auto pinned = sample_subset(L, config.constrained_positions, rng);
    for (std::size_t p = 0; p < L; ++p) {
      std::size_t n = K;
      if (std::binary_search(pinned.begin(), pinned.end(), p)) {
        n = config.allowed_min +
            static_cast<std::size_t>(rng.uniform_index(config.allowed_max - config.allowed_min + 1));
      }
      if (n == K) {
        for (std::size_t sym = 0; sym < K; ++sym) fam.allowed[p].push_back(static_cast<Symbol>(sym));
      } else {
        for (auto sym : sample_subset(K, n, rng)) fam.allowed[p].push_back(static_cast<Symbol>(sym));
      }
    }
    fam.quota = config.target_count / config.families + (f < config.target_count % config.families);
    if (fam.region_size() < 2.0 * static_cast<double>(fam.quota)) {
      throw std::invalid_argument("motif family region too small for its quota; "
                                  "loosen the pattern or lower the target count");
    }
  }

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(config.target_count * 2);
  std::vector<Sequence> members;
  members.reserve(config.target_count);
  for (const auto& fam : families) {
    std::size_t added = 0;
    Sequence s;
    s.symbols.resize(L);
    while (added < fam.quota) {
      for (std::size_t p = 0; p < L; ++p) {
        s[p] = fam.allowed[p][rng.uniform_index(fam.allowed[p].size())];
      }
      if (seen.insert(encode(s, K)).second) {
        members.push_back(s);
        ++added;
      }
    }
  }

  ReplicatorSet set(Alphabet::lowercase(K), L, std::move(members));
  return MotifLandscape{config, std::move(families), std::move(set)};
}

std::string describe(const MotifFamily& family, const Alphabet& alphabet) {
  std::string out;
  for (const auto& a : family.allowed) {
    if (a.size() == alphabet.size()) {
      out.push_back('.');
      continue;
    }
    out.push_back('[');
    for (auto sym : a) out.push_back(alphabet.render(sym));
    out.push_back(']');
  }
  return out;
}

}  // namespace spoofbench
