#include <doctest.h>

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <set>
#include <string>

#include "oracles.hpp"
#include "spoofbench/errors.hpp"
#include "spoofbench/landscape.hpp"
#include "spoofbench/synthetic.hpp"

using namespace spoofbench;
namespace fs = std::filesystem;

namespace {

const Alphabet kAz = Alphabet::lowercase();

fs::path temp_file(const std::string& name, const std::string& contents) {
  const auto dir = fs::temp_directory_path() / "spoofbench_landscape_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << contents;
  return p;
}

ReplicatorSet small_set(const std::vector<std::string>& members) {
  std::vector<Sequence> seqs;
  for (const auto& m : members) seqs.push_back(parse_sequence(m, kAz));
  return ReplicatorSet(kAz, members.front().size(), seqs);
}

}  // namespace

TEST_CASE("membership and nearest distance against a linear-scan oracle") {
  const std::vector<std::string> members = {"abcdefghi", "zzzzzzzzz", "aaaaaaaaa", "abcabcabc"};
  const auto set = small_set(members);
  CHECK(set.size() == 4);
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    auto s = random_sequence(kAz, 9, rng);
    const auto text = to_string(s, kAz);
    CHECK(set.nearest_distance(s) == oracle::nearest(members, text));
    CHECK(nearest_hamming_distance(set, s) == set.nearest_distance(s));
    CHECK(set.contains(s) == (std::find(members.begin(), members.end(), text) != members.end()));
  }
  for (const auto& m : members) {
    CHECK(is_replicator(set, parse_sequence(m, kAz)));
    CHECK(set.nearest_distance(parse_sequence(m, kAz)) == 0);
  }
  CHECK(set.nearest_distance(parse_sequence("abcdefghj", kAz)) == 1);
  CHECK_THROWS_AS(set.contains(parse_sequence("abc", kAz)), std::invalid_argument);
  CHECK_THROWS_AS(nearest_hamming_distance(ReplicatorSet(kAz, 3, {}), parse_sequence("abc", kAz)),
                  std::invalid_argument);
}

TEST_CASE("members are sorted and deduplicated") {
  const auto set = small_set({"bbb", "aab", "bbb", "aaa"});
  REQUIRE(set.size() == 3);
  CHECK(to_string(set.member(0), kAz) == "aaa");
  CHECK(to_string(set.member(1), kAz) == "aab");
  CHECK(to_string(set.member(2), kAz) == "bbb");
  CHECK(serialize_replicators(set) == "aaa\naab\nbbb\n");
  CHECK(set.density() == doctest::Approx(3.0 / 17576.0));
}

TEST_CASE("list files load, round trip, and report bad lines") {
  const auto p = temp_file("list.txt", "abc\nxyz\nabc\nbcd\n");
  const auto set = load_replicators(p, kAz);
  CHECK(set.size() == 3);
  CHECK(set.length() == 3);

  const auto out = p.parent_path() / "roundtrip.txt";
  save_replicators(set, out);
  const auto again = load_replicators(out, kAz);
  CHECK(again == set);
  CHECK(again.identity_hash() == set.identity_hash());
  CHECK(set.identity_hash().size() == 64);

  const auto bad = temp_file("bad.txt", "abc\nab1\n");
  CHECK_THROWS_AS(load_replicators(bad, kAz), DataError);
  try {
    load_replicators(bad, kAz);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_replicators(temp_file("ragged.txt", "abc\nabcd\n"), kAz), DataError);
  CHECK_THROWS_AS(load_replicators(temp_file("empty.txt", ""), kAz), DataError);
  CHECK_THROWS_AS(load_replicators(temp_file("gap.txt", "abc\n\nbcd\n"), kAz), DataError);
  CHECK_THROWS_AS(load_replicators(p.parent_path() / "missing.txt", kAz), DataError);
}

TEST_CASE("synthetic motif landscape") {
  const MotifLandscapeConfig config;
  CHECK(config.target_count == 36171);
  const auto land = generate_motif_landscape(config);
  CHECK(land.set.size() == 36171);
  CHECK(land.set.length() == 9);
  CHECK(land.set.alphabet().size() == 26);
  CHECK(land.set.density() < 0.01);
  REQUIRE(land.families.size() == config.families);

  std::size_t quota = 0;
  for (const auto& f : land.families) {
    quota += f.quota;
    std::size_t pinned = 0;
    for (const auto& allowed : f.allowed) {
      if (allowed.size() < 26) {
        ++pinned;
        CHECK(allowed.size() >= config.allowed_min);
        CHECK(allowed.size() <= config.allowed_max);
      }
    }
    CHECK(pinned == config.constrained_positions);
    CHECK(describe(f, land.set.alphabet()).size() >= 9);
  }
  CHECK(quota == config.target_count);
  // every member matches at least one family
  for (std::size_t i = 0; i < land.set.size(); i += 97) {
    const auto m = land.set.member(i);
    bool any = false;
    for (const auto& f : land.families) any |= f.matches(m);
    CHECK(any);
  }
  // deterministic in the seed, different across seeds
  CHECK(generate_motif_landscape(config).set == land.set);
  auto other = config;
  other.seed += 1;
  CHECK_FALSE(generate_motif_landscape(other).set == land.set);
}

TEST_CASE("synthetic config validation") {
  MotifLandscapeConfig c;
  c.allowed_max = 26;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.constrained_positions = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.alphabet_size = 4;
  c.allowed_min = 1;
  c.allowed_max = 1;
  c.constrained_positions = 9;
  c.families = 1;
  c.target_count = 10;
  // a fully pinned single-choice family holds one sequence
  CHECK_THROWS_AS(generate_motif_landscape(c), std::invalid_argument);
}
