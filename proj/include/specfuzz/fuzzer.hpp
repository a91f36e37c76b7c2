#pragma once

// Generative grammar-based fuzzer. Derivations expand the leftmost
// non-terminal with an alternative chosen uniformly among those keeping the
// string at or below the non-terminal limit; a derivation that reaches a
// state with no such alternative aborts and the caller retries with a fresh
// seed. Bounds: at most 5 non-terminals after any accepted expansion, at
// most 100 expansion steps.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "specfuzz/grammar.hpp"
#include "specfuzz/random.hpp"

namespace specfuzz::fuzzer {

using grammar::Grammar;

constexpr int kMaxNonTerminals = 5;
constexpr int kMaxExpansionSteps = 100;

struct DerivationStats {
  int steps = 0;
  int max_nonterminals = 0;  // highest count observed after an expansion
};

struct DerivationAbort {
  int steps = 0;
};

namespace detail {

inline int count_nts(const std::vector<std::string>& alt) {
  int n = 0;
  for (const auto& s : alt)
    if (grammar::is_nonterminal(s)) n++;
  return n;
}

}  // namespace detail

// One derivation from the grammar's start symbol. Returns the derived
// terminal sequence joined with single spaces, or an abort.
inline std::optional<std::string> derive_one(const Grammar& g, std::uint64_t seed,
                                             DerivationStats* stats = nullptr) {
  rng::Rng r(seed);
  std::vector<std::string> symbols{g.start};
  int nt_count = 1;
  int steps = 0;
  if (stats) *stats = DerivationStats{};
  while (nt_count > 0) {
    if (steps >= kMaxExpansionSteps) {
      if (stats) stats->steps = steps;
      return std::nullopt;
    }
    size_t left = 0;
    while (!grammar::is_nonterminal(symbols[left])) left++;
    const auto& alts = g.productions.at(symbols[left]);
    // Alternatives whose application keeps the non-terminal count bounded.
    std::vector<size_t> legal;
    for (size_t i = 0; i < alts.size(); ++i)
      if (nt_count - 1 + detail::count_nts(alts[i]) <= kMaxNonTerminals)
        legal.push_back(i);
    if (legal.empty()) {
      // The count cannot be kept within the limit from here; give up and
      // let the caller retry rather than breach the bound.
      if (stats) stats->steps = steps;
      return std::nullopt;
    }
    const auto& alt = alts[legal[r.below(legal.size())]];
    steps++;
    nt_count = nt_count - 1 + detail::count_nts(alt);
    symbols.erase(symbols.begin() + static_cast<std::ptrdiff_t>(left));
    symbols.insert(symbols.begin() + static_cast<std::ptrdiff_t>(left), alt.begin(),
                   alt.end());
    if (stats) {
      stats->steps = steps;
      if (nt_count > stats->max_nonterminals) stats->max_nonterminals = nt_count;
    }
  }
  std::string out;
  for (size_t i = 0; i < symbols.size(); ++i) {
    if (i) out += " ";
    out += symbols[i];
  }
  return out;
}

struct FuzzResult {
  std::vector<std::string> candidates;  // generation order, unique
  bool exhausted = false;               // fewer than n before attempts ran out
  std::int64_t attempts = 0;
  std::int64_t aborts = 0;
};

// Normalization hook: candidates are deduplicated after the supplied
// whitespace normalizer (the assertion lexer's canonical token join).
template <typename Normalize>
FuzzResult fuzz_candidates(const Grammar& g, std::int64_t n, std::uint64_t seed,
                           std::int64_t max_attempts, Normalize&& normalize) {
  FuzzResult res;
  std::set<std::string> seen;
  for (std::int64_t attempt = 0; attempt < max_attempts; ++attempt) {
    if (static_cast<std::int64_t>(res.candidates.size()) >= n) break;
    res.attempts++;
    auto derived = derive_one(g, rng::derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (!derived) {
      res.aborts++;
      continue;
    }
    std::string norm = normalize(*derived);
    if (seen.insert(norm).second) res.candidates.push_back(norm);
  }
  res.exhausted = static_cast<std::int64_t>(res.candidates.size()) < n;
  return res;
}

inline std::int64_t default_max_attempts(std::int64_t n) { return 10 * n; }

}  // namespace specfuzz::fuzzer
