#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "spoofbench/landscape.hpp"
#include "spoofbench/seqcore.hpp"

namespace spoofbench {

// MiniRep: a tiny self-copying machine used to produce a genuine, sparse
// replicator landscape by brute force. Full semantics are in docs/minirep.md.
//
// Tape of 2L+2 cells: the program in cells [0, L), a blank sentinel
// everywhere else. Instructions are fetched from the tape, so a program
// that writes into its own region modifies itself. The read head starts at
// 0, the write head at L+1; both wrap modulo the tape length. The
// instruction pointer wraps modulo L.
//
// A program is viable iff it executes `halt` while an exact contiguous copy
// of the original program sits in cells [L, 2L+2).

inline constexpr std::string_view kMiniRepVersion = "minirep-1";

enum class MiniRepOp : Symbol {
  kCopy = 0,          // tape[write] = tape[read]; advance both heads
  kJumpIfNotDone = 1, // ip = 0 while read < L, else fall through
  kHalt = 2,
  kNopA = 3,
  kAdvanceRead = 4,
  kAdvanceWrite = 5,
  kNopB = 6,
  kSwapHeadsNop = 7,  // reserved slot, executes as a no-op
};

inline constexpr std::size_t kMiniRepMaxOps = 8;

struct MiniRepConfig {
  /// Instruction alphabet size; opcodes [0, k) are available.
  std::size_t k = 8;
  std::size_t length = 8;
  /// Defaults to 2L+1, the running time of the tightest copier
  /// (copy, jump-if-not-done, halt).
  std::uint64_t step_budget = 17;
  /// Refuse to enumerate more programs than this.
  std::uint64_t enumeration_limit = 1'000'000'000ULL;
  std::string version = std::string(kMiniRepVersion);

  static std::uint64_t default_budget(std::size_t length) { return 2 * length + 1; }

  Alphabet alphabet() const { return Alphabet::lowercase(k); }
  std::uint64_t program_count() const { return space_size(k, length); }
  /// Throws std::invalid_argument on an unusable config.
  void validate() const;
};

enum class ViabilityReason { kCopiedSelf, kBudgetExhausted, kHaltedWithoutCopy };

std::string_view to_string(ViabilityReason r);

struct ViabilityVerdict {
  bool viable = false;
  std::uint64_t steps = 0;
  ViabilityReason reason = ViabilityReason::kBudgetExhausted;
};

ViabilityVerdict vm_check_viability(const Sequence& program, const MiniRepConfig& config);

/// Every viable program of the config. Shards the code range over `jobs`
/// threads; the result does not depend on `jobs`. Throws UsageError when the
/// program count exceeds the enumeration limit.
ReplicatorSet enumerate_landscape(const MiniRepConfig& config, unsigned jobs = 1);

}  // namespace spoofbench
