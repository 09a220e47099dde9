#include "spoofbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "spoofbench/errors.hpp"
#include "svg.hpp"

namespace spoofbench {

std::vector<std::size_t> default_checkpoints(std::size_t budget, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("checkpoint stride must be positive");
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q <= budget; q += stride) out.push_back(q);
  if (out.back() != budget) out.push_back(budget);
  return out;
}

ConfidenceByQuery confidence_by_query(std::span<const SpoofTrajectory> trajectories,
                                      std::span<const std::size_t> checkpoints, std::size_t budget) {
  if (trajectories.empty()) throw std::invalid_argument("confidence_by_query needs trajectories");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > budget) {
      throw std::invalid_argument("checkpoint " + std::to_string(checkpoints[i]) +
                                  " exceeds the query budget " + std::to_string(budget));
    }
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw std::invalid_argument("checkpoints must be strictly increasing");
    }
  }

  ConfidenceByQuery out;
  out.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  std::array<std::vector<double>, 2> sums;
  for (auto& s : sums) s.assign(checkpoints.size(), 0.0);

  for (const auto& t : trajectories) {
    if (t.steps.empty()) throw std::invalid_argument("trajectory without queries");
    const auto slot = kind_slot(t.start_kind);
    ++out.runs[slot];
    double current = t.steps.front().confidence;
    std::size_t step = 0;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      while (step < t.steps.size() && t.steps[step].query <= checkpoints[c]) {
        if (t.steps[step].accepted) current = t.steps[step].confidence;
        ++step;
      }
      sums[slot][c] += current;
    }
  }
  for (std::size_t k = 0; k < 2; ++k) {
    out.means[k].resize(checkpoints.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      out.means[k][c] = out.runs[k] ? sums[k][c] / static_cast<double>(out.runs[k])
                                    : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

EndpointStats endpoint_frequency(std::span<const SpoofTrajectory> trajectories) {
  std::array<std::map<Sequence, std::size_t>, 2> tallies;
  for (const auto& t : trajectories) ++tallies[kind_slot(t.start_kind)][t.final_sequence];
  EndpointStats out;
  for (std::size_t k = 0; k < 2; ++k) {
    // map iteration is lexicographic; a stable sort on count keeps that as the tie order
    out.counts[k].assign(tallies[k].begin(), tallies[k].end());
    std::stable_sort(out.counts[k].begin(), out.counts[k].end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
  }
  return out;
}

std::size_t HammingHistogram::pooled_mode() const {
  std::size_t best = 0;
  std::size_t best_count = 0;
  const std::size_t n = std::max(buckets[0].size(), buckets[1].size());
  for (std::size_t d = 0; d < n; ++d) {
    std::size_t c = 0;
    for (const auto& b : buckets) c += d < b.size() ? b[d] : 0;
    if (c > best_count) {
      best = d;
      best_count = c;
    }
  }
  return best;
}

HammingHistogram hamming_histogram(std::span<const SpoofTrajectory> trajectories,
                                   const ReplicatorSet& set) {
  if (set.empty()) throw std::invalid_argument("hamming histogram needs a nonempty landscape");
  HammingHistogram h;
  for (auto& b : h.buckets) b.assign(set.length() + 1, 0);
  for (const auto& t : trajectories) {
    ++h.buckets[kind_slot(t.start_kind)][set.nearest_distance(t.final_sequence)];
  }
  return h;
}

PositionalFrequency positional_frequency(std::span<const Sequence> sequences,
                                         const Alphabet& alphabet, std::string source) {
  if (sequences.empty()) throw std::invalid_argument("positional frequency of no sequences");
  const std::size_t L = sequences.front().length();
  PositionalFrequency out{std::move(source), Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L),
                                                                   static_cast<Eigen::Index>(alphabet.size()))};
  for (const auto& s : sequences) {
    if (s.length() != L) throw std::invalid_argument("positional frequency: unequal lengths");
    for (std::size_t p = 0; p < L; ++p) {
      if (s[p] >= alphabet.size()) throw std::invalid_argument("symbol outside alphabet");
      out.frequency(static_cast<Eigen::Index>(p), s[p]) += 1.0;
    }
  }
  out.frequency /= static_cast<double>(sequences.size());
  return out;
}

Eigen::VectorXd positional_l1_distance(const PositionalFrequency& a, const PositionalFrequency& b) {
  if (a.frequency.rows() != b.frequency.rows() || a.frequency.cols() != b.frequency.cols()) {
    throw std::invalid_argument("positional matrices differ in shape");
  }
  return (a.frequency - b.frequency).cwiseAbs().rowwise().sum();
}

ReportInputs analyze_campaign(std::span<const SpoofTrajectory> trajectories, const ReplicatorSet& set,
                              std::size_t budget, LandscapeInfo landscape,
                              std::vector<EpochRecord> curves) {
  ReportInputs r;
  r.alphabet = set.alphabet();
  r.length = set.length();
  r.landscape = std::move(landscape);
  const auto checkpoints = default_checkpoints(budget);
  r.confidence = confidence_by_query(trajectories, checkpoints, budget);
  r.endpoints = endpoint_frequency(trajectories);
  r.hamming = hamming_histogram(trajectories, set);
  const auto members = set.members();
  r.positional_true = positional_frequency(members, set.alphabet(), "true-replicators");
  std::vector<Sequence> finals;
  finals.reserve(trajectories.size());
  for (const auto& t : trajectories) finals.push_back(t.final_sequence);
  r.positional_spoof = positional_frequency(finals, set.alphabet(), "spoof-endpoints");
  r.verification = verify_endpoints(set, trajectories);
  r.curves = std::move(curves);
  return r;
}

namespace {

std::string fixed(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("write failed for " + path.string());
}

std::string positional_csv(const PositionalFrequency& pf, const Alphabet& alphabet) {
  std::string s = "position";
  for (char c : alphabet.symbols()) s += std::string(",") + c;
  s += '\n';
  for (Eigen::Index p = 0; p < pf.frequency.rows(); ++p) {
    s += std::to_string(p + 1);
    for (Eigen::Index k = 0; k < pf.frequency.cols(); ++k) s += "," + fixed(pf.frequency(p, k));
    s += '\n';
  }
  return s;
}

std::string positional_svg(const PositionalFrequency& pf, const Alphabet& alphabet,
                           const std::string& title) {
  std::vector<std::string> rows, cols;
  std::vector<std::vector<double>> cells;
  // Normalize shading to the matrix maximum so sparse rows stay visible.
  const double peak = std::max(pf.frequency.maxCoeff(), 1e-12);
  for (Eigen::Index p = 0; p < pf.frequency.rows(); ++p) {
    rows.push_back("pos " + std::to_string(p + 1));
    std::vector<double> row;
    for (Eigen::Index k = 0; k < pf.frequency.cols(); ++k) row.push_back(pf.frequency(p, k) / peak);
    cells.push_back(std::move(row));
  }
  for (char c : alphabet.symbols()) cols.emplace_back(1, c);
  return svg::heatmap(title, rows, cols, cells);
}

}  // namespace

std::vector<std::string> emit_report(const ReportInputs& in, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create report directory " + dir.string() + ": " + ec.message());
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& contents) {
    write_file(dir / name, contents);
    written.push_back(name);
  };
  const auto& alphabet = in.alphabet;
  const auto& cbq = in.confidence;
  constexpr auto kRandom = StartKind::kRandom;
  constexpr auto kUniform = StartKind::kUniform;

  {
    std::string s = "query,random_start_mean,uniform_start_mean\n";
    for (std::size_t i = 0; i < cbq.checkpoints.size(); ++i) {
      s += std::to_string(cbq.checkpoints[i]) + "," + fixed(cbq.mean(kRandom)[i]) + "," +
           fixed(cbq.mean(kUniform)[i]) + "\n";
    }
    emit("table2.csv", s);
  }
  {
    std::string s = "start_kind,sequence,count\n";
    for (auto kind : kStartKinds) {
      for (const auto& [seq, count] : in.endpoints.of(kind)) {
        s += std::string(to_string(kind)) + "," + to_string(seq, alphabet) + "," +
             std::to_string(count) + "\n";
      }
    }
    emit("endpoints.csv", s);
  }
  {
    std::string s = "distance,random_start_count,uniform_start_count\n";
    for (std::size_t d = 0; d <= in.length; ++d) {
      s += std::to_string(d) + "," + std::to_string(in.hamming.of(kRandom)[d]) + "," +
           std::to_string(in.hamming.of(kUniform)[d]) + "\n";
    }
    emit("hamming.csv", s);
  }
  emit("positional_true.csv", positional_csv(in.positional_true, alphabet));
  emit("positional_spoof.csv", positional_csv(in.positional_spoof, alphabet));
  {
    std::string s = "epoch,train_loss,train_accuracy,validation_loss,validation_accuracy\n";
    for (const auto& e : in.curves) {
      s += std::to_string(e.epoch) + "," + fixed(e.train_loss, 8) + "," + fixed(e.train_accuracy, 8) +
           "," + fixed(e.validation_loss, 8) + "," + fixed(e.validation_accuracy, 8) + "\n";
    }
    emit("curves.csv", s);
  }

  // summary.json
  {
    nlohmann::ordered_json j;
    j["landscape"] = {{"source", in.landscape.source},
                      {"synthetic", in.landscape.synthetic},
                      {"count", in.landscape.count},
                      {"density", in.landscape.density},
                      {"sha256", in.landscape.sha256}};
    j["runs"] = {{"total", cbq.runs[0] + cbq.runs[1]},
                 {"uniform", cbq.runs[kind_slot(kUniform)]},
                 {"random", cbq.runs[kind_slot(kRandom)]}};
    auto& rows = j["confidence_by_query"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < cbq.checkpoints.size(); ++i) {
      nlohmann::ordered_json row;
      row["query"] = cbq.checkpoints[i];
      for (auto kind : kStartKinds) {
        const double v = cbq.mean(kind)[i];
        row[std::string(to_string(kind)) + "_start_mean"] =
            std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v);
      }
      rows.push_back(row);
    }
    const auto& v = in.verification;
    j["verification"] = {{"high_confidence_threshold", v.high_confidence_threshold},
                         {"runs", v.runs},
                         {"replicator_endpoints", v.replicator_endpoints},
                         {"high_confidence_runs", v.high_confidence_runs},
                         {"high_confidence_non_replicators", v.high_confidence_non_replicators},
                         {"false_attractor_rate", v.false_attractor_rate()}};
    for (auto kind : kStartKinds) {
      const std::string name(to_string(kind));
      j["hamming"][name] = in.hamming.of(kind);
      auto& top = j["top_endpoints"][name] = nlohmann::ordered_json::array();
      const auto& counts = in.endpoints.of(kind);
      for (std::size_t i = 0; i < std::min<std::size_t>(10, counts.size()); ++i) {
        top.push_back({{"sequence", to_string(counts[i].first, alphabet)}, {"count", counts[i].second}});
      }
      j["distinct_endpoints"][name] = counts.size();
    }
    j["hamming"]["pooled_mode"] = in.hamming.pooled_mode();
    const auto l1 = positional_l1_distance(in.positional_true, in.positional_spoof);
    j["positional_l1_distance"] = std::vector<double>(l1.data(), l1.data() + l1.size());
    if (!in.curves.empty()) {
      j["training"]["final_train_loss"] = in.curves.back().train_loss;
      j["training"]["final_validation_accuracy"] = in.curves.back().validation_accuracy;
    }
    emit("summary.json", j.dump(2) + "\n");
  }

  // figures
  {
    std::vector<svg::Series> series;
    for (auto [kind, color] : {std::pair{kUniform, "#1f77b4"}, std::pair{kRandom, "#ff7f0e"}}) {
      svg::Series s{std::string(to_string(kind)) + " start", color, {}};
      for (std::size_t i = 0; i < cbq.checkpoints.size(); ++i) {
        s.points.emplace_back(static_cast<double>(cbq.checkpoints[i]), cbq.mean(kind)[i]);
      }
      series.push_back(std::move(s));
    }
    emit("confidence.svg", svg::line_chart("Mean spoofing confidence", "model queries",
                                           "mean confidence", series, 0.0, 1.0));
  }
  {
    std::vector<svg::BarGroup> groups;
    for (std::size_t d = 0; d <= in.length; ++d) {
      groups.push_back({std::to_string(d),
                        {static_cast<double>(in.hamming.of(kUniform)[d]),
                         static_cast<double>(in.hamming.of(kRandom)[d])}});
    }
    emit("hamming.svg", svg::bar_chart("Endpoint distance to nearest replicator", "Hamming distance",
                                       "runs", {"uniform start", "random start"},
                                       {"#1f77b4", "#ff7f0e"}, groups));
  }
  emit("positional_true.svg",
       positional_svg(in.positional_true, alphabet, "Symbol frequency: true replicators"));
  emit("positional_spoof.svg",
       positional_svg(in.positional_spoof, alphabet, "Symbol frequency: spoof endpoints"));
  if (!in.curves.empty()) {
    svg::Series tl{"train loss", "#1f77b4", {}}, vl{"validation loss", "#ff7f0e", {}};
    svg::Series ta{"train accuracy", "#1f77b4", {}}, va{"validation accuracy", "#ff7f0e", {}};
    double loss_max = 0.0;
    for (const auto& e : in.curves) {
      const auto x = static_cast<double>(e.epoch);
      tl.points.emplace_back(x, e.train_loss);
      vl.points.emplace_back(x, e.validation_loss);
      ta.points.emplace_back(x, e.train_accuracy);
      va.points.emplace_back(x, e.validation_accuracy);
      loss_max = std::max({loss_max, e.train_loss, e.validation_loss});
    }
    emit("curves_loss.svg", svg::line_chart("Cross-entropy loss", "epoch", "BCE", {tl, vl}, 0.0,
                                            loss_max > 0 ? loss_max * 1.05 : 1.0));
    emit("curves_accuracy.svg",
         svg::line_chart("Classification accuracy", "epoch", "accuracy", {ta, va}, 0.5, 1.0));
  }
  return written;
}

}  // namespace spoofbench
