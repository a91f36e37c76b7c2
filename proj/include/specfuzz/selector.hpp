#pragma once

// Mutation-based invariant selection: build the assertion x mutant kill
// matrix by replaying the suite on every mutant, discard assertions no
// mutant can falsify, cluster the rest by kill vector, and rank members by
// failure count.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "specfuzz/asserteval.hpp"
#include "specfuzz/detector.hpp"
#include "specfuzz/mutation.hpp"
#include "specfuzz/parallel.hpp"
#include "specfuzz/testgen.hpp"

namespace specfuzz::selector {

using asserteval::Assertion;
using detector::LikelyInvariantSet;
using mutation::Mutant;
using testgen::TestSuite;

struct KillMatrix {
  std::vector<std::string> assertions;        // normalized texts (rows)
  std::vector<std::string> mutants;           // mutant ids (columns); mutants
                                              // with zero records are excluded
  // cells[row][col] = ordinals of this mutant's records falsifying the row
  std::vector<std::vector<std::vector<std::int64_t>>> cells;

  std::vector<size_t> kill_vector(size_t row) const {
    std::vector<size_t> v;
    for (size_t c = 0; c < mutants.size(); ++c)
      if (!cells[row][c].empty()) v.push_back(c);
    return v;
  }
  std::int64_t failure_count(size_t row) const {
    std::int64_t f = 0;
    for (const auto& cell : cells[row]) f += static_cast<std::int64_t>(cell.size());
    return f;
  }
};

inline KillMatrix compute_kill_matrix(const minilang::Program& program,
                                      const std::vector<Mutant>& mutants,
                                      const TestSuite& suite,
                                      const LikelyInvariantSet& survivors,
                                      const std::string& method,
                                      std::int64_t step_budget = minilang::kDefaultStepBudget) {
  KillMatrix mat;
  for (const auto& s : survivors.survivors) mat.assertions.push_back(s.assertion.text);

  struct Column {
    std::string mutant_id;
    bool any_records = false;
    std::vector<std::vector<std::int64_t>> per_row;
  };
  std::vector<Column> columns(mutants.size());
  parallel::parallel_for(mutants.size(), [&](size_t mi) {
    const Mutant& m = mutants[mi];
    Column col;
    col.mutant_id = m.id;
    col.per_row.resize(survivors.survivors.size());
    auto records = detector::collect_suite_records(m.program, suite, method,
                                                   step_budget, m.id);
    col.any_records = !records.empty();
    for (size_t r = 0; r < records.size(); ++r) {
      for (size_t a = 0; a < survivors.survivors.size(); ++a) {
        auto outcome =
            asserteval::evaluate(survivors.survivors[a].assertion, records[r]);
        if (!outcome.is_true()) col.per_row[a].push_back(static_cast<std::int64_t>(r));
      }
    }
    columns[mi] = std::move(col);
  });

  mat.cells.assign(mat.assertions.size(), {});
  for (auto& col : columns) {
    if (!col.any_records) continue;  // always-crashing mutant: no kill signal
    mat.mutants.push_back(col.mutant_id);
    for (size_t a = 0; a < mat.assertions.size(); ++a)
      mat.cells[a].push_back(std::move(col.per_row[a]));
  }
  return mat;
}

struct WeakFilter {
  std::vector<size_t> kept;       // row indices with non-empty kill vectors
  std::vector<size_t> discarded;  // weak rows
};

inline WeakFilter filter_weak(const KillMatrix& mat) {
  WeakFilter f;
  for (size_t r = 0; r < mat.assertions.size(); ++r) {
    if (mat.kill_vector(r).empty()) f.discarded.push_back(r);
    else f.kept.push_back(r);
  }
  return f;
}

struct Cluster {
  std::vector<size_t> kill_vector;  // column indices
  std::vector<size_t> members;      // row indices, rank order
  size_t representative = 0;        // == members.front()
};

struct RankedReport {
  std::vector<Cluster> clusters;
  std::vector<size_t> discarded;  // weak rows
  std::int64_t survivors_total = 0;
  double irrelevant_pct = 0.0;
  double equivalent_pct = 0.0;
  double reported_pct = 0.0;
};

// Rank key within a cluster: failure count descending, then shorter text,
// then lexicographic.
inline bool rank_less(const KillMatrix& mat, size_t a, size_t b) {
  std::int64_t fa = mat.failure_count(a), fb = mat.failure_count(b);
  if (fa != fb) return fa > fb;
  const std::string& ta = mat.assertions[a];
  const std::string& tb = mat.assertions[b];
  if (ta.size() != tb.size()) return ta.size() < tb.size();
  return ta < tb;
}

inline RankedReport cluster_and_rank(const KillMatrix& mat, const WeakFilter& filter) {
  RankedReport rep;
  rep.discarded = filter.discarded;
  rep.survivors_total = static_cast<std::int64_t>(mat.assertions.size());

  std::map<std::vector<size_t>, std::vector<size_t>> groups;
  for (size_t r : filter.kept) groups[mat.kill_vector(r)].push_back(r);
  for (auto& [kv, members] : groups) {
    Cluster c;
    c.kill_vector = kv;
    c.members = members;
    std::sort(c.members.begin(), c.members.end(),
              [&](size_t a, size_t b) { return rank_less(mat, a, b); });
    c.representative = c.members.front();
    rep.clusters.push_back(std::move(c));
  }
  std::sort(rep.clusters.begin(), rep.clusters.end(),
            [&](const Cluster& a, const Cluster& b) {
              if (a.representative != b.representative)
                return rank_less(mat, a.representative, b.representative);
              return a.kill_vector < b.kill_vector;
            });

  double n = static_cast<double>(rep.survivors_total);
  if (n > 0) {
    rep.irrelevant_pct = 100.0 * static_cast<double>(rep.discarded.size()) / n;
    rep.reported_pct = 100.0 * static_cast<double>(rep.clusters.size()) / n;
    rep.equivalent_pct =
        100.0 *
        static_cast<double>(filter.kept.size() - rep.clusters.size()) / n;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// report.json

using json = nlohmann::ordered_json;

inline json report_to_json(const KillMatrix& mat, const RankedReport& rep) {
  json clusters = json::array();
  for (const auto& c : rep.clusters) {
    json members = json::array();
    for (size_t r : c.members)
      members.push_back(json{{"text", mat.assertions[r]},
                             {"failure_count", mat.failure_count(r)}});
    json kv = json::array();
    for (size_t col : c.kill_vector) kv.push_back(mat.mutants[col]);
    clusters.push_back(json{{"representative", mat.assertions[c.representative]},
                            {"kill_vector", kv},
                            {"members", members}});
  }
  json discarded = json::array();
  for (size_t r : rep.discarded) discarded.push_back(mat.assertions[r]);
  // percentages as fixed-point integers to keep report bytes stable
  auto pct = [](double v) { return json(static_cast<std::int64_t>(v * 10.0 + 0.5)); };
  return json{{"survivors", rep.survivors_total},
              {"kept", rep.survivors_total - static_cast<std::int64_t>(rep.discarded.size())},
              {"representatives", static_cast<std::int64_t>(rep.clusters.size())},
              {"summary_permille",
               json{{"irrelevant", pct(rep.irrelevant_pct)},
                    {"equivalent", pct(rep.equivalent_pct)},
                    {"reported", pct(rep.reported_pct)}}},
              {"clusters", clusters},
              {"discarded_weak", discarded}};
}

}  // namespace specfuzz::selector
