#include "spoofbench/spoof.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "spoofbench/errors.hpp"

namespace spoofbench {

std::string_view to_string(StartKind kind) {
  return kind == StartKind::kUniform ? "uniform" : "random";
}

std::optional<StartKind> parse_start_kind(std::string_view text) {
  if (text == "uniform") return StartKind::kUniform;
  if (text == "random") return StartKind::kRandom;
  return std::nullopt;
}

void SpoofConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("query budget must be at least 1");
  if (replicates < 1) throw std::invalid_argument("replicate count must be at least 1");
  if (!uniform_starts && !random_starts) throw std::invalid_argument("no start kinds selected");
}

std::size_t SpoofTrajectory::accepted_count() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const SpoofStep& s) { return s.accepted; }));
}

SpoofTrajectory spoof_run(const ConfidenceFn& confidence, const Sequence& start,
                          std::size_t alphabet_size, std::size_t budget, Rng& rng) {
  if (budget < 1) throw std::invalid_argument("query budget must be at least 1");
  SpoofTrajectory t;
  t.start = start;
  t.steps.reserve(budget);

  Sequence current = start;
  double current_confidence = confidence(current);
  t.steps.push_back({0, current, current_confidence, false});
  for (std::size_t query = 1; query < budget; ++query) {
    Sequence proposal = propose_point_mutation(current, alphabet_size, rng);
    const double p = confidence(proposal);
    const bool accept = p > current_confidence;
    t.steps.push_back({query, proposal, p, accept});
    if (accept) {
      current = std::move(proposal);
      current_confidence = p;
    }
  }
  t.final_sequence = std::move(current);
  t.final_confidence = current_confidence;
  return t;
}

SpoofTrajectory spoof_run(const Mlp& model, const Sequence& start, const SpoofConfig& config, Rng& rng) {
  config.validate();
  return spoof_run([&model](const Sequence& s) { return predict_confidence(model, s); }, start,
                   model.shape().alphabet_size, config.budget, rng);
}

std::vector<SpoofTrajectory> run_campaign(const ConfidenceFn& confidence, const ReplicatorSet& set,
                                          const SpoofConfig& config, std::uint64_t master_seed,
                                          unsigned jobs) {
  config.validate();
  const auto& alphabet = set.alphabet();
  const std::size_t K = alphabet.size();
  const auto uniforms = uniform_sequences(alphabet, set.length());

  struct Plan {
    std::size_t replicate;
    StartKind kind;
    std::size_t index;
  };
  std::vector<Plan> plans;
  for (std::size_t r = 0; r < config.replicates; ++r) {
    if (config.uniform_starts) {
      for (std::size_t i = 0; i < K; ++i) plans.push_back({r, StartKind::kUniform, i});
    }
    if (config.random_starts) {
      for (std::size_t i = 0; i < K; ++i) plans.push_back({r, StartKind::kRandom, i});
    }
  }

  std::vector<SpoofTrajectory> out(plans.size());
  auto execute = [&](std::size_t run_id) {
    const auto& plan = plans[run_id];
    Rng rng(derive_seed(master_seed, {plan.replicate, static_cast<std::uint64_t>(plan.kind), plan.index}));
    Sequence start;
    if (plan.kind == StartKind::kUniform) {
      start = uniforms[plan.index];
    } else {
      do {
        start = random_sequence(alphabet, set.length(), rng);
      } while (set.contains(start));
    }
    auto t = spoof_run(confidence, start, K, config.budget, rng);
    t.run_id = run_id;
    t.replicate = plan.replicate;
    t.start_kind = plan.kind;
    t.start_index = plan.index;
    out[run_id] = std::move(t);
  };

  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < plans.size(); ++i) execute(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < plans.size(); i = next++) execute(i);
      });
    }
  }
  return out;
}

std::vector<SpoofTrajectory> run_campaign(const Mlp& model, const ReplicatorSet& set,
                                          const SpoofConfig& config, std::uint64_t master_seed,
                                          unsigned jobs) {
  if (model.shape().alphabet_size != set.alphabet().size() || model.shape().length != set.length()) {
    throw std::invalid_argument("model and landscape disagree on alphabet size or length");
  }
  return run_campaign([&model](const Sequence& s) { return predict_confidence(model, s); }, set,
                      config, master_seed, jobs);
}

double VerificationReport::false_attractor_rate() const {
  if (high_confidence_runs == 0) return 0.0;
  return static_cast<double>(high_confidence_non_replicators) /
         static_cast<double>(high_confidence_runs);
}

VerificationReport verify_endpoints(const ReplicatorSet& set,
                                    std::span<const SpoofTrajectory> trajectories,
                                    double high_confidence_threshold) {
  VerificationReport report;
  report.high_confidence_threshold = high_confidence_threshold;
  report.runs = trajectories.size();
  for (const auto& t : trajectories) {
    EndpointCheck check{t.run_id, t.start_kind, t.final_confidence, set.contains(t.final_sequence)};
    report.replicator_endpoints += check.is_replicator;
    if (t.final_confidence >= high_confidence_threshold) {
      ++report.high_confidence_runs;
      report.high_confidence_non_replicators += !check.is_replicator;
    }
    report.endpoints.push_back(check);
  }
  return report;
}

void write_trajectory_log(std::span<const SpoofTrajectory> trajectories, const Alphabet& alphabet,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& t : trajectories) {
    for (const auto& step : t.steps) {
      nlohmann::ordered_json rec;
      rec["run_id"] = t.run_id;
      rec["replicate"] = t.replicate;
      rec["start_kind"] = to_string(t.start_kind);
      rec["query"] = step.query;
      rec["sequence"] = to_string(step.sequence, alphabet);
      rec["confidence"] = step.confidence;
      rec["accepted"] = step.accepted;
      out << rec.dump() << '\n';
    }
  }
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<SpoofTrajectory> read_trajectory_log(const std::filesystem::path& path,
                                                 const Alphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trajectory log " + path.string());
  std::map<std::size_t, SpoofTrajectory> runs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + e.what());
    }
    try {
      const auto run_id = rec.at("run_id").get<std::size_t>();
      auto kind = parse_start_kind(rec.at("start_kind").get<std::string>());
      if (!kind) throw DataError(where + "unknown start_kind");
      SpoofStep step{rec.at("query").get<std::size_t>(),
                     parse_sequence(rec.at("sequence").get<std::string>(), alphabet),
                     rec.at("confidence").get<double>(), rec.at("accepted").get<bool>()};
      auto& t = runs[run_id];
      if (t.steps.empty()) {
        if (step.query != 0) throw DataError(where + "run does not start at query 0");
        t.run_id = run_id;
        t.replicate = rec.at("replicate").get<std::size_t>();
        t.start_kind = *kind;
        t.start = step.sequence;
        t.final_sequence = step.sequence;
        t.final_confidence = step.confidence;
      } else if (step.query != t.steps.back().query + 1) {
        throw DataError(where + "query indices are not consecutive");
      }
      if (step.accepted) {
        t.final_sequence = step.sequence;
        t.final_confidence = step.confidence;
      }
      t.steps.push_back(std::move(step));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + e.what());
    }
  }
  std::vector<SpoofTrajectory> out;
  out.reserve(runs.size());
  for (auto& [id, t] : runs) out.push_back(std::move(t));
  // start_index is not logged: it is the run's rank within its (replicate, kind) group.
  std::map<std::pair<std::size_t, StartKind>, std::size_t> counters;
  for (auto& t : out) t.start_index = counters[{t.replicate, t.start_kind}]++;
  return out;
}

}  // namespace spoofbench
