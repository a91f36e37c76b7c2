#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "specfuzz/asserteval.hpp"
#include "specfuzz/fuzzer.hpp"
#include "specfuzz/grammar.hpp"

using namespace specfuzz;
using grammar::Grammar;

// Frozen by the hidden "[.search]" scan at the bottom of this file.
#ifndef SPECFUZZ_EXISTS_SEED
#define SPECFUZZ_EXISTS_SEED 2454192ull
#endif

namespace {

minilang::Program load(const std::string& name) {
  std::ifstream in(std::string(SPECFUZZ_FIXDIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return minilang::parse_program(ss.str());
}

std::string normalize(const std::string& s) { return asserteval::normalize_text(s); }

}  // namespace

TEST_CASE("derive_one: single-production grammar derives in one step") {
  Grammar g;
  g.start = "<FuzzedSpec>";
  g.productions["<FuzzedSpec>"] = {{"true"}};
  for (std::uint64_t seed : {0ull, 1ull, 99ull, 123456789ull}) {
    fuzzer::DerivationStats stats;
    auto out = fuzzer::derive_one(g, seed, &stats);
    REQUIRE(out.has_value());
    CHECK(*out == "true");
    CHECK(stats.steps == 1);
  }
}

TEST_CASE("fuzz_candidates: two-string language exhausts with a warning") {
  Grammar g;
  g.start = "<FuzzedSpec>";
  g.productions["<FuzzedSpec>"] = {{"true"}, {"false"}};
  auto res = fuzzer::fuzz_candidates(g, 2000, 7, fuzzer::default_max_attempts(2000),
                                     normalize);
  CHECK(res.candidates.size() == 2);
  CHECK(res.exhausted);
  std::set<std::string> got(res.candidates.begin(), res.candidates.end());
  CHECK(got == std::set<std::string>{"true", "false"});
}

TEST_CASE("fuzz_candidates: deterministic under a fixed seed") {
  minilang::Program p = load("slist.mo");
  Grammar g = grammar::extract_grammar(p, "SList", 2);
  auto a = fuzzer::fuzz_candidates(g, 300, 42, 3000, normalize);
  auto b = fuzzer::fuzz_candidates(g, 300, 42, 3000, normalize);
  CHECK(a.candidates == b.candidates);
  auto c = fuzzer::fuzz_candidates(g, 300, 43, 3000, normalize);
  CHECK(a.candidates != c.candidates);
}

TEST_CASE("fuzz_candidates: output is unique after normalization") {
  minilang::Program p = load("min.mo");
  Grammar g = grammar::extract_grammar(p, "MinOps", 2);
  auto res = fuzzer::fuzz_candidates(g, 1500, 5, 15000, normalize);
  std::set<std::string> seen;
  for (const auto& cand : res.candidates) {
    CHECK(seen.insert(cand).second);
    CHECK(cand == normalize(cand));
  }
}

TEST_CASE("derivations respect the non-terminal and step bounds") {
  minilang::Program p = load("slist.mo");
  Grammar g = grammar::extract_grammar(p, "SList", 2);
  int completed = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    fuzzer::DerivationStats stats;
    auto out = fuzzer::derive_one(g, seed, &stats);
    CHECK(stats.max_nonterminals <= fuzzer::kMaxNonTerminals);
    CHECK(stats.steps <= fuzzer::kMaxExpansionSteps);
    if (out) completed++;
  }
  CHECK(completed > 1000);  // aborts exist but are the minority
}

TEST_CASE("membership: emitted candidates are in the grammar's language") {
  minilang::Program p = load("slist.mo");
  Grammar g = grammar::extract_grammar(p, "SList", 2);
  auto res = fuzzer::fuzz_candidates(g, 150, 11, 3000, normalize);
  REQUIRE(res.candidates.size() == 150);
  for (const auto& cand : res.candidates) {
    CAPTURE(cand);
    CHECK(grammar::recognize(g, cand));
  }
}

TEST_CASE("derive_one: a known seed reproduces the worked existential example") {
  minilang::Program p = load("slist.mo");
  Grammar g = grammar::extract_grammar(p, "SList", 2);
  const std::string want =
      "exists SList l: reach(this, next).has(l) && l.elem == SENTINEL";
  // frozen by the search below
  const std::uint64_t kSeed = SPECFUZZ_EXISTS_SEED;
  auto out = fuzzer::derive_one(g, kSeed);
  REQUIRE(out.has_value());
  CHECK(normalize(*out) == want);
}

// Hidden helper: scans seeds for one deriving the worked example, used to
// refresh the frozen constant when the grammar changes.
TEST_CASE("search for the existential example seed", "[.search]") {
  minilang::Program p = load("slist.mo");
  Grammar g = grammar::extract_grammar(p, "SList", 2);
  const std::string want =
      "exists SList l: reach(this, next).has(l) && l.elem == SENTINEL";
  for (std::uint64_t seed = 0; seed < 80'000'000ull; ++seed) {
    auto out = fuzzer::derive_one(g, seed);
    if (out && normalize(*out) == want) {
      WARN("seed found: " << seed);
      return;
    }
  }
  FAIL("no seed found in range");
}
