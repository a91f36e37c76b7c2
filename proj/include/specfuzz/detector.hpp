#pragma once

// Dynamic invariant detection: run the suite on the original program,
// evaluate every parsed candidate on every record of the target method, and
// keep the candidates that hold everywhere. An Error outcome falsifies.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "specfuzz/asserteval.hpp"
#include "specfuzz/parallel.hpp"
#include "specfuzz/statecap.hpp"
#include "specfuzz/testgen.hpp"

namespace specfuzz::detector {

using asserteval::Assertion;
using minilang::Program;
using statecap::ExecutionRecord;
using testgen::TestSuite;

class DetectError : public std::runtime_error {
 public:
  explicit DetectError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Survivor {
  Assertion assertion;
  std::int64_t true_count = 0;
};

struct Rejected {
  std::string text;
  size_t witness_record = 0;  // first record it failed on
  bool was_error = false;
};

struct LikelyInvariantSet {
  std::string class_name;
  std::string method;
  std::vector<ExecutionRecord> records;  // original-program records
  std::vector<Survivor> survivors;
  std::vector<Rejected> rejected;        // parsed candidates that fell
  std::int64_t candidates_total = 0;
  std::int64_t dropped_syntax = 0;
  std::int64_t dropped_type = 0;
};

// Replays the whole suite against `program`, collecting records of the
// target method. A case whose replay fails contributes the records captured
// before the failure.
inline std::vector<ExecutionRecord> collect_suite_records(
    const Program& program, const TestSuite& suite, const std::string& method,
    std::int64_t step_budget, const std::string& mutant_id) {
  std::vector<ExecutionRecord> records;
  std::int64_t test_id = 0;
  for (const auto& cs : suite.cases) {
    statecap::collect_records(program, cs, method, step_budget, test_id, mutant_id,
                              records);
    test_id++;
  }
  return records;
}

inline LikelyInvariantSet detect(const Program& program, const TestSuite& suite,
                                 const std::vector<std::string>& candidates,
                                 const std::string& method,
                                 std::int64_t step_budget = minilang::kDefaultStepBudget) {
  LikelyInvariantSet out;
  out.class_name = suite.class_name;
  out.method = method;
  out.candidates_total = static_cast<std::int64_t>(candidates.size());
  out.records = collect_suite_records(program, suite, method, step_budget, "original");
  if (out.records.empty())
    throw DetectError("no records for method '" + method + "'");

  const auto* cls = program.cls(suite.class_name);
  asserteval::TypeContext ctx{&program, cls, cls ? cls->method(method) : nullptr};

  struct Parsed {
    Assertion assertion;
  };
  std::vector<std::optional<Parsed>> parsed(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    try {
      Assertion a = asserteval::parse_assertion(candidates[i]);
      if (asserteval::type_check(*a.root, ctx)) {
        out.dropped_type++;
        continue;
      }
      parsed[i] = Parsed{std::move(a)};
    } catch (const asserteval::AssertError&) {
      out.dropped_syntax++;
    }
  }

  struct Verdict {
    bool survived = false;
    std::int64_t true_count = 0;
    size_t witness = 0;
    bool was_error = false;
  };
  std::vector<Verdict> verdicts(candidates.size());
  parallel::parallel_for(candidates.size(), [&](size_t i) {
    if (!parsed[i]) return;
    Verdict v;
    v.survived = true;
    for (size_t r = 0; r < out.records.size(); ++r) {
      auto outcome = asserteval::evaluate(parsed[i]->assertion, out.records[r]);
      if (!outcome.is_true()) {
        v.survived = false;
        v.witness = r;
        v.was_error = outcome.is_error();
        break;
      }
      v.true_count++;
    }
    verdicts[i] = v;
  });

  for (size_t i = 0; i < candidates.size(); ++i) {
    if (!parsed[i]) continue;
    if (verdicts[i].survived) {
      out.survivors.push_back({std::move(parsed[i]->assertion), verdicts[i].true_count});
    } else {
      out.rejected.push_back({parsed[i]->assertion.text, verdicts[i].witness,
                              verdicts[i].was_error});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// survivors.json

using json = nlohmann::ordered_json;

inline json to_json(const LikelyInvariantSet& s, const std::string& subject_path) {
  json survivors = json::array();
  for (const auto& sv : s.survivors)
    survivors.push_back(json{{"text", sv.assertion.text}, {"true_count", sv.true_count}});
  return json{{"subject", subject_path},
              {"class", s.class_name},
              {"method", s.method},
              {"candidates_total", s.candidates_total},
              {"dropped_syntax", s.dropped_syntax},
              {"dropped_type", s.dropped_type},
              {"records", static_cast<std::int64_t>(s.records.size())},
              {"survivors", survivors}};
}

}  // namespace specfuzz::detector
