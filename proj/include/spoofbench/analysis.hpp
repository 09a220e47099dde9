#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spoofbench/landscape.hpp"
#include "spoofbench/spoof.hpp"
#include "spoofbench/training.hpp"

namespace spoofbench {

inline constexpr std::size_t kind_slot(StartKind k) { return k == StartKind::kUniform ? 0 : 1; }
inline constexpr std::array<StartKind, 2> kStartKinds = {StartKind::kUniform, StartKind::kRandom};

/// Mean confidence of the evolving sequence at each checkpoint, per start
/// kind. A kind with no runs has NaN means.
struct ConfidenceByQuery {
  std::vector<std::size_t> checkpoints;
  std::array<std::vector<double>, 2> means;  // indexed by kind_slot
  std::array<std::size_t, 2> runs{0, 0};

  const std::vector<double>& mean(StartKind k) const { return means[kind_slot(k)]; }
};

/// 0, stride, 2*stride, ... and finally `budget` itself.
std::vector<std::size_t> default_checkpoints(std::size_t budget, std::size_t stride = 25);

/// Confidence at checkpoint q is that of the last sequence accepted at or
/// before query q (the start's confidence if none). Checkpoints must be
/// strictly increasing and not exceed `budget`; violations throw
/// std::invalid_argument, as does an empty trajectory list.
ConfidenceByQuery confidence_by_query(std::span<const SpoofTrajectory> trajectories,
                                      std::span<const std::size_t> checkpoints, std::size_t budget);

struct EndpointStats {
  /// (final sequence, count), descending count, ties in lexicographic order.
  std::array<std::vector<std::pair<Sequence, std::size_t>>, 2> counts;

  const std::vector<std::pair<Sequence, std::size_t>>& of(StartKind k) const {
    return counts[kind_slot(k)];
  }
};

EndpointStats endpoint_frequency(std::span<const SpoofTrajectory> trajectories);

struct HammingHistogram {
  /// buckets[kind][d] = runs whose endpoint is at distance d from the set.
  std::array<std::vector<std::size_t>, 2> buckets;

  const std::vector<std::size_t>& of(StartKind k) const { return buckets[kind_slot(k)]; }
  /// Smallest distance with the largest pooled count.
  std::size_t pooled_mode() const;
};

HammingHistogram hamming_histogram(std::span<const SpoofTrajectory> trajectories,
                                   const ReplicatorSet& set);

struct PositionalFrequency {
  std::string source;  // "true-replicators" or "spoof-endpoints"
  Eigen::MatrixXd frequency;  // L x K, rows sum to 1
};

/// Throws std::invalid_argument on empty input or unequal lengths.
PositionalFrequency positional_frequency(std::span<const Sequence> sequences,
                                         const Alphabet& alphabet, std::string source);

/// Per-position L1 distance between two frequency matrices.
Eigen::VectorXd positional_l1_distance(const PositionalFrequency& a, const PositionalFrequency& b);

struct LandscapeInfo {
  std::string source;  // "synthetic-motif", "minirep", or "file"
  bool synthetic = false;
  std::size_t count = 0;
  double density = 0.0;
  std::string sha256;
};

struct ReportInputs {
  Alphabet alphabet = Alphabet::lowercase();
  std::size_t length = 9;
  LandscapeInfo landscape;
  ConfidenceByQuery confidence;
  EndpointStats endpoints;
  HammingHistogram hamming;
  PositionalFrequency positional_true;
  PositionalFrequency positional_spoof;
  VerificationReport verification;
  std::vector<EpochRecord> curves;
};

/// Builds every statistic for a finished campaign.
ReportInputs analyze_campaign(std::span<const SpoofTrajectory> trajectories, const ReplicatorSet& set,
                              std::size_t budget, LandscapeInfo landscape,
                              std::vector<EpochRecord> curves = {});

/// Writes table2.csv, endpoints.csv, hamming.csv, positional_true.csv,
/// positional_spoof.csv, curves.csv, summary.json and the SVG figures into
/// `dir` (created if needed). Output is a pure function of the inputs.
/// Returns the file names written.
std::vector<std::string> emit_report(const ReportInputs& inputs, const std::filesystem::path& dir);

}  // namespace spoofbench
