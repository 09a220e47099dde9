#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spoofbench/landscape.hpp"

namespace spoofbench {

inline constexpr std::string_view kMotifLandscapeVersion = "motif-1";

/// Seeded motif-family sampler: a stand-in ground truth at full K=26, L=9
/// scale when no external replicator list is available.
///
/// Each family pins `constrained_positions` distinct positions to an allowed
/// symbol subset (size drawn in [allowed_min, allowed_max]) and leaves the
/// remaining positions free. Members are drawn uniformly from each family's
/// region until the family's quota is met, so the set is a sparse sample of
/// a structured region rather than the whole region. Details in
/// docs/synthetic_landscape.md.
struct MotifLandscapeConfig {
  std::size_t alphabet_size = 26;
  std::size_t length = 9;
  std::size_t target_count = 36171;
  std::size_t families = 6;
  std::size_t constrained_positions = 6;
  std::size_t allowed_min = 2;
  std::size_t allowed_max = 4;
  std::uint64_t seed = 20250101;
  std::string version = std::string(kMotifLandscapeVersion);

  void validate() const;
};

struct MotifFamily {
  /// allowed[p] lists the permitted symbols at position p, ascending; a free
  /// position allows the whole alphabet.
  std::vector<std::vector<Symbol>> allowed;
  std::size_t quota = 0;

  /// Number of sequences matching the family pattern.
  double region_size() const;
  bool matches(const Sequence& s) const;
};

struct MotifLandscape {
  MotifLandscapeConfig config;
  std::vector<MotifFamily> families;
  ReplicatorSet set;
};

/// Deterministic in the config. Throws std::invalid_argument if a family
/// region is too small to hold its quota.
MotifLandscape generate_motif_landscape(const MotifLandscapeConfig& config);

/// Human-readable pattern, e.g. "[abc].[xy]......" with '.' for free slots.
std::string describe(const MotifFamily& family, const Alphabet& alphabet);

}  // namespace spoofbench
