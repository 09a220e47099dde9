#include "spoofbench/landscape.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "spoofbench/errors.hpp"
#include "spoofbench/hashing.hpp"

namespace spoofbench {

ReplicatorSet::ReplicatorSet(Alphabet alphabet, std::size_t length, std::vector<Sequence> members)
    : alphabet_(std::move(alphabet)), length_(length) {
  if (length_ == 0) throw std::invalid_argument("replicator length must be positive");
  if (!fits_code(alphabet_.size(), length_)) {
    throw std::invalid_argument("K^L does not fit a 64-bit code");
  }
  codes_.reserve(members.size());
  for (const auto& m : members) {
    check_compatible(m);
    codes_.push_back(encode(m, alphabet_.size()));
  }
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
  index_.reserve(codes_.size() * 2);
  index_.insert(codes_.begin(), codes_.end());
  flat_.reserve(codes_.size() * length_);
  for (auto code : codes_) {
    auto s = decode(code, alphabet_.size(), length_);
    flat_.insert(flat_.end(), s.symbols.begin(), s.symbols.end());
  }
}

std::vector<Sequence> ReplicatorSet::members() const {
  std::vector<Sequence> out;
  out.reserve(codes_.size());
  for (auto code : codes_) out.push_back(decode(code, alphabet_.size(), length_));
  return out;
}

double ReplicatorSet::density() const {
  return static_cast<double>(codes_.size()) /
         static_cast<double>(space_size(alphabet_.size(), length_));
}

void ReplicatorSet::check_compatible(const Sequence& s) const {
  if (s.length() != length_) {
    throw std::invalid_argument("sequence length " + std::to_string(s.length()) +
                                " does not match landscape length " + std::to_string(length_));
  }
  for (Symbol sym : s.symbols) {
    if (sym >= alphabet_.size()) throw std::invalid_argument("symbol outside landscape alphabet");
  }
}

bool ReplicatorSet::contains(const Sequence& s) const {
  check_compatible(s);
  return index_.contains(encode(s, alphabet_.size()));
}

std::size_t ReplicatorSet::nearest_distance(const Sequence& s) const {
  if (codes_.empty()) throw std::invalid_argument("nearest distance on an empty landscape");
  if (contains(s)) return 0;
  std::size_t best = length_;
  const Symbol* row = flat_.data();
  for (std::size_t m = 0; m < codes_.size(); ++m, row += length_) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < length_ && d < best; ++i) d += row[i] != s[i];
    if (d < best) {
      best = d;
      if (best == 1) break;
    }
  }
  return best;
}

std::string ReplicatorSet::identity_hash() const { return sha256_hex(serialize_replicators(*this)); }

std::size_t nearest_hamming_distance(const ReplicatorSet& set, const Sequence& s) {
  return set.nearest_distance(s);
}

ReplicatorSet load_replicators(const std::filesystem::path& path, const Alphabet& alphabet,
                               std::size_t length) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open replicator list " + path.string());
  std::vector<Sequence> members;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (length == 0) length = line.size();
    if (line.size() != length || line.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(length) + " symbols, got " + std::to_string(line.size()));
    }
    try {
      members.push_back(parse_sequence(line, alphabet));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (members.empty()) throw DataError("replicator list " + path.string() + " is empty");
  return ReplicatorSet(alphabet, length, std::move(members));
}

std::string serialize_replicators(const ReplicatorSet& set) {
  std::string out;
  out.reserve(set.size() * (set.length() + 1));
  for (auto code : set.codes()) {
    out += to_string(decode(code, set.alphabet().size(), set.length()), set.alphabet());
    out.push_back('\n');
  }
  return out;
}

void save_replicators(const ReplicatorSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_replicators(set);
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace spoofbench
