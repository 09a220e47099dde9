#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spoofbench/analysis.hpp"
#include "xml_check.hpp"

using namespace spoofbench;
namespace fs = std::filesystem;

namespace {

const Alphabet kAb = Alphabet::lowercase(2);

// Trajectory over K=2, L=3 from explicit (sequence, confidence, accepted) steps.
SpoofTrajectory make(StartKind kind, std::size_t id,
                     std::vector<std::tuple<std::string, double, bool>> steps) {
  SpoofTrajectory t;
  t.run_id = id;
  t.start_kind = kind;
  for (std::size_t q = 0; q < steps.size(); ++q) {
    const auto& [text, p, acc] = steps[q];
    t.steps.push_back({q, parse_sequence(text, kAb), p, acc});
  }
  t.start = t.steps.front().sequence;
  t.final_sequence = t.start;
  t.final_confidence = t.steps.front().confidence;
  for (const auto& s : t.steps) {
    if (s.accepted) {
      t.final_sequence = s.sequence;
      t.final_confidence = s.confidence;
    }
  }
  return t;
}

std::vector<SpoofTrajectory> fixture() {
  return {
      make(StartKind::kUniform, 0, {{"aaa", 0.1, false}, {"aab", 0.4, true}, {"abb", 0.3, false}, {"bab", 0.9, true}}),
      make(StartKind::kUniform, 1, {{"bbb", 0.2, false}, {"abb", 0.1, false}, {"bab", 0.3, true}, {"aab", 0.2, false}}),
      make(StartKind::kRandom, 2, {{"aba", 0.5, false}, {"abb", 0.6, true}, {"aab", 0.7, true}, {"aaa", 0.6, false}}),
  };
}

ReplicatorSet fixture_set() {
  return ReplicatorSet(kAb, 3, {parse_sequence("aab", kAb), parse_sequence("bbb", kAb)});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("default checkpoints") {
  CHECK(default_checkpoints(300) ==
        std::vector<std::size_t>{0, 25, 50, 75, 100, 125, 150, 175, 200, 225, 250, 275, 300});
  CHECK(default_checkpoints(60) == std::vector<std::size_t>{0, 25, 50, 60});
  CHECK_THROWS_AS(default_checkpoints(10, 0), std::invalid_argument);
}

TEST_CASE("confidence by query follows the last accepted sequence") {
  const auto runs = fixture();
  const std::vector<std::size_t> cps = {0, 1, 2, 3};
  const auto c = confidence_by_query(runs, cps, 4);
  CHECK(c.runs[0] == 2);
  CHECK(c.runs[1] == 1);
  // uniform: run 0 -> 0.1 0.4 0.4 0.9, run 1 -> 0.2 0.2 0.3 0.3
  const auto& u = c.mean(StartKind::kUniform);
  CHECK(u[0] == doctest::Approx(0.15));
  CHECK(u[1] == doctest::Approx(0.3));
  CHECK(u[2] == doctest::Approx(0.35));
  CHECK(u[3] == doctest::Approx(0.6));
  const auto& r = c.mean(StartKind::kRandom);
  CHECK(r[0] == doctest::Approx(0.5));
  CHECK(r[3] == doctest::Approx(0.7));
  for (std::size_t i = 1; i < cps.size(); ++i) CHECK(u[i] >= u[i - 1]);

  const std::vector<std::size_t> bad_order = {0, 2, 2};
  CHECK_THROWS_AS(confidence_by_query(runs, bad_order, 4), std::invalid_argument);
  const std::vector<std::size_t> too_far = {0, 5};
  CHECK_THROWS_AS(confidence_by_query(runs, too_far, 4), std::invalid_argument);
  CHECK_THROWS_AS(confidence_by_query({}, cps, 4), std::invalid_argument);

  // no accepted steps: a constant row
  const std::vector<SpoofTrajectory> flat = {
      make(StartKind::kRandom, 0, {{"aaa", 0.25, false}, {"aab", 0.1, false}})};
  const auto f = confidence_by_query(flat, std::vector<std::size_t>{0, 1, 2}, 2);
  for (double v : f.mean(StartKind::kRandom)) CHECK(v == 0.25);
  CHECK(std::isnan(f.mean(StartKind::kUniform)[0]));
}

TEST_CASE("endpoint frequency sorts by count then sequence") {
  auto runs = fixture();
  runs.push_back(make(StartKind::kUniform, 3, {{"aaa", 0.1, false}, {"aab", 0.9, true}}));
  runs.push_back(make(StartKind::kUniform, 4, {{"aaa", 0.1, false}, {"aab", 0.9, true}}));
  const auto e = endpoint_frequency(runs);
  const auto& u = e.of(StartKind::kUniform);
  REQUIRE(u.size() == 2);
  CHECK(to_string(u[0].first, kAb) == "aab");
  CHECK(u[0].second == 2);
  CHECK(to_string(u[1].first, kAb) == "bab");
  CHECK(u[1].second == 2);
  std::size_t total = 0;
  for (const auto& [s, n] : u) total += n;
  CHECK(total == 4);
  CHECK(endpoint_frequency({}).of(StartKind::kRandom).empty());
}

TEST_CASE("hamming histogram") {
  const auto h = hamming_histogram(fixture(), fixture_set());
  // endpoints: bab (d=1 to aab), bab (1), aab (0)
  CHECK(h.of(StartKind::kUniform) == std::vector<std::size_t>{0, 2, 0, 0});
  CHECK(h.of(StartKind::kRandom) == std::vector<std::size_t>{1, 0, 0, 0});
  CHECK(h.pooled_mode() == 1);
  CHECK_THROWS_AS(hamming_histogram(fixture(), ReplicatorSet(kAb, 3, {})), std::invalid_argument);
}

TEST_CASE("positional frequency") {
  const std::vector<Sequence> seqs = {parse_sequence("aaa", kAb), parse_sequence("aab", kAb)};
  const auto pf = positional_frequency(seqs, kAb, "true-replicators");
  Eigen::MatrixXd expected(3, 2);
  expected << 1, 0, 1, 0, 0.5, 0.5;
  CHECK(pf.frequency.isApprox(expected));
  CHECK(pf.source == "true-replicators");

  Rng rng(4);
  const auto az = Alphabet::lowercase();
  std::vector<Sequence> many;
  for (int i = 0; i < 777; ++i) many.push_back(random_sequence(az, 9, rng));
  const auto big = positional_frequency(many, az, "spoof-endpoints");
  for (Eigen::Index r = 0; r < big.frequency.rows(); ++r) {
    CHECK(std::abs(big.frequency.row(r).sum() - 1.0) < 1e-9);
  }
  const auto l1 = positional_l1_distance(pf, pf);
  CHECK(l1.isZero());
  const std::vector<Sequence> other = {parse_sequence("bbb", kAb)};
  const auto d = positional_l1_distance(pf, positional_frequency(other, kAb, "x"));
  CHECK(d(0) == doctest::Approx(2.0));
  CHECK(d(2) == doctest::Approx(1.0));

  CHECK_THROWS_AS(positional_frequency({}, kAb, "x"), std::invalid_argument);
  const std::vector<Sequence> ragged = {parse_sequence("aa", kAb), parse_sequence("aab", kAb)};
  CHECK_THROWS_AS(positional_frequency(ragged, kAb, "x"), std::invalid_argument);
}

TEST_CASE("report files are complete, deterministic and well formed") {
  const auto runs = fixture();
  const auto set = fixture_set();
  std::vector<EpochRecord> curves = {{1, 0.6, 0.7, 0.65, 0.68}, {2, 0.4, 0.8, 0.45, 0.79}};
  const auto inputs =
      analyze_campaign(runs, set, 3, LandscapeInfo{"file", false, 2, 0.25, set.identity_hash()}, curves);
  const auto dir1 = fs::temp_directory_path() / "spoofbench_report_a";
  const auto dir2 = fs::temp_directory_path() / "spoofbench_report_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  const auto files = emit_report(inputs, dir1);
  CHECK(emit_report(inputs, dir2) == files);
  for (const char* f : {"table2.csv", "endpoints.csv", "hamming.csv", "positional_true.csv",
                        "positional_spoof.csv", "curves.csv", "summary.json", "confidence.svg",
                        "hamming.svg", "positional_true.svg", "positional_spoof.svg"}) {
    CHECK(std::find(files.begin(), files.end(), f) != files.end());
  }
  for (const auto& f : files) {
    const auto a = slurp(dir1 / f);
    CHECK(a == slurp(dir2 / f));
    CHECK_FALSE(a.empty());
    if (f.size() > 4 && f.substr(f.size() - 4) == ".svg") {
      std::string why;
      INFO(f << ": " << why);
      CHECK(xmlcheck::well_formed(a, &why));
    }
  }
  const auto table = slurp(dir1 / "table2.csv");
  CHECK(table.rfind("query,random_start_mean,uniform_start_mean\n", 0) == 0);
  CHECK(table.find("\n3,0.700000,0.600000\n") != std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(dir1 / "summary.json"));
  CHECK(summary["runs"]["total"] == 3);
  CHECK(summary["hamming"]["pooled_mode"] == 1);
  CHECK(summary["verification"]["replicator_endpoints"] == 1);
}

TEST_CASE("xml checker rejects broken documents") {
  CHECK(xmlcheck::well_formed("<a><b x=\"1\"/>t &amp; u</a>"));
  CHECK_FALSE(xmlcheck::well_formed("<a><b></a>"));
  CHECK_FALSE(xmlcheck::well_formed("<a x=1></a>"));
  CHECK_FALSE(xmlcheck::well_formed("<a>&nbsp;</a>"));
  CHECK_FALSE(xmlcheck::well_formed("<a></a><b></b>"));
}
