#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

#include "spoofbench/seqcore.hpp"

namespace spoofbench {

/// Ground-truth set of viable sequences over one alphabet and length.
///
/// Members are kept as sorted base-K codes (deterministic iteration and
/// serialization order) plus a hash index for O(1) expected membership.
/// A flat symbol matrix backs the nearest-member scan. Immutable once built,
/// so concurrent readers need no locking.
class ReplicatorSet {
 public:
  ReplicatorSet(Alphabet alphabet, std::size_t length, std::vector<Sequence> members);

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t length() const { return length_; }
  std::size_t size() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }

  /// Members in lexicographic order.
  std::vector<Sequence> members() const;
  Sequence member(std::size_t i) const { return decode(codes_[i], alphabet_.size(), length_); }
  const std::vector<std::uint64_t>& codes() const { return codes_; }

  /// Fraction of the K^L space occupied by members.
  double density() const;

  /// Exact membership. Throws std::invalid_argument when `s` has the wrong
  /// length or an out-of-range symbol.
  bool contains(const Sequence& s) const;

  /// Minimum Hamming distance from `s` to any member.
  std::size_t nearest_distance(const Sequence& s) const;

  /// Hex SHA-256 of the serialized list; identifies a landscape in manifests.
  std::string identity_hash() const;

  bool operator==(const ReplicatorSet& other) const {
    return alphabet_ == other.alphabet_ && length_ == other.length_ && codes_ == other.codes_;
  }

 private:
  void check_compatible(const Sequence& s) const;

  Alphabet alphabet_;
  std::size_t length_;
  std::vector<std::uint64_t> codes_;
  std::unordered_set<std::uint64_t> index_;
  std::vector<Symbol> flat_;
};

inline bool is_replicator(const ReplicatorSet& set, const Sequence& s) { return set.contains(s); }

/// Throws std::invalid_argument on an empty set.
std::size_t nearest_hamming_distance(const ReplicatorSet& set, const Sequence& s);

/// Reads a list file: one sequence per line, LF newlines, no header.
/// `length` == 0 infers the length from the first line. Duplicates are
/// dropped. Malformed lines raise DataError naming the line number; an empty
/// file is also a DataError.
ReplicatorSet load_replicators(const std::filesystem::path& path, const Alphabet& alphabet,
                               std::size_t length = 0);

/// Writes members in sorted order, one per line.
void save_replicators(const ReplicatorSet& set, const std::filesystem::path& path);

/// Serialized list contents, exactly as save_replicators writes them.
std::string serialize_replicators(const ReplicatorSet& set);

}  // namespace spoofbench
