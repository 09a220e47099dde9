#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spoofbench/landscape.hpp"
#include "spoofbench/neural.hpp"

namespace spoofbench {

inline constexpr std::string_view kTrajectoryLogVersion = "spoofbench-trajectory-1";

enum class StartKind { kUniform, kRandom };

std::string_view to_string(StartKind kind);
std::optional<StartKind> parse_start_kind(std::string_view text);

struct SpoofConfig {
  /// Total confidence evaluations per run, the start included.
  std::size_t budget = 300;
  std::size_t replicates = 30;
  bool uniform_starts = true;
  bool random_starts = true;

  void validate() const;
};

struct SpoofStep {
  std::size_t query = 0;
  Sequence sequence;
  double confidence = 0.0;
  /// False for query 0, which scores the start.
  bool accepted = false;
};

struct SpoofTrajectory {
  std::size_t run_id = 0;
  std::size_t replicate = 0;
  StartKind start_kind = StartKind::kUniform;
  std::size_t start_index = 0;
  Sequence start;
  /// One entry per query, in query order.
  std::vector<SpoofStep> steps;
  Sequence final_sequence;
  double final_confidence = 0.0;

  std::size_t query_count() const { return steps.size(); }
  std::size_t accepted_count() const;
};

using ConfidenceFn = std::function<double(const Sequence&)>;

/// Greedy single-site hill climb on `confidence`: the start costs one query,
/// then each proposal costs one; a proposal replaces the current sequence
/// only when its confidence is strictly greater.
SpoofTrajectory spoof_run(const ConfidenceFn& confidence, const Sequence& start,
                          std::size_t alphabet_size, std::size_t budget, Rng& rng);
SpoofTrajectory spoof_run(const Mlp& model, const Sequence& start, const SpoofConfig& config, Rng& rng);

/// Per replicate: one run from each uniform sequence, then one from a fresh
/// random non-member start per alphabet symbol. run_id enumerates
/// (replicate, kind, index) in that order and every run's Rng is derived from
/// (master_seed, replicate, kind, index), so results do not depend on `jobs`.
std::vector<SpoofTrajectory> run_campaign(const ConfidenceFn& confidence, const ReplicatorSet& set,
                                          const SpoofConfig& config, std::uint64_t master_seed,
                                          unsigned jobs = 1);
std::vector<SpoofTrajectory> run_campaign(const Mlp& model, const ReplicatorSet& set,
                                          const SpoofConfig& config, std::uint64_t master_seed,
                                          unsigned jobs = 1);

struct EndpointCheck {
  std::size_t run_id = 0;
  StartKind start_kind = StartKind::kUniform;
  double final_confidence = 0.0;
  bool is_replicator = false;
};

struct VerificationReport {
  double high_confidence_threshold = 0.999;
  std::vector<EndpointCheck> endpoints;
  std::size_t runs = 0;
  std::size_t replicator_endpoints = 0;
  std::size_t high_confidence_runs = 0;
  std::size_t high_confidence_non_replicators = 0;

  /// Share of high-confidence endpoints that are not replicators (0 when
  /// no run reached the threshold).
  double false_attractor_rate() const;
};

VerificationReport verify_endpoints(const ReplicatorSet& set,
                                    std::span<const SpoofTrajectory> trajectories,
                                    double high_confidence_threshold = 0.999);

/// JSON-lines log, one record per query:
/// {"run_id","replicate","start_kind","query","sequence","confidence","accepted"}.
void write_trajectory_log(std::span<const SpoofTrajectory> trajectories, const Alphabet& alphabet,
                          const std::filesystem::path& path);
std::vector<SpoofTrajectory> read_trajectory_log(const std::filesystem::path& path,
                                                 const Alphabet& alphabet);

}  // namespace spoofbench
