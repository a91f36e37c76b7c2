#pragma once

// Feedback-directed random test suite generation: random constructor plus a
// random method-call sequence per case; cases that fail on the original
// program are discarded and regenerated. Suites serialize to JSON and are
// interchangeable with user-supplied suites in the same format.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "specfuzz/minilang.hpp"
#include "specfuzz/random.hpp"
#include "specfuzz/statecap.hpp"

namespace specfuzz::testgen {

using minilang::Program;
using minilang::Type;
using minilang::Value;
using statecap::ArgSpec;
using statecap::CaseSpec;

struct GenParams {
  std::int64_t max_sequences = 500;
  int seq_len_min = 1;
  int seq_len_max = 8;
  std::int64_t int_lo = -100;
  std::int64_t int_hi = 100;
  std::int64_t step_budget = minilang::kDefaultStepBudget;
  std::int64_t attempt_cap_factor = 20;  // attempts <= factor * max_sequences
};

struct TestSuite {
  std::string class_name;
  std::uint64_t seed = 0;
  GenParams params;
  std::vector<CaseSpec> cases;
};

class TestGenError : public std::runtime_error {
 public:
  enum class Kind { NoConstructor, GenerationExhausted };
  TestGenError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind(kind) {}
  Kind kind;
};

namespace detail {

inline ArgSpec random_arg(const Program& program, const Type& t, rng::Rng& r,
                          const GenParams& gp, int depth) {
  if (t.is_int()) return ArgSpec::lit(Value::Int(r.int_in(gp.int_lo, gp.int_hi)));
  if (t.is_bool()) return ArgSpec::lit(Value::Bool(r.coin()));
  // Reference parameter: construct a fresh object through a public
  // constructor; nested references bottom out at null.
  if (depth <= 0) return ArgSpec::lit(Value::Null());
  const auto* cd = program.cls(t.class_name);
  std::vector<size_t> public_ctors;
  if (cd)
    for (size_t i = 0; i < cd->ctors.size(); ++i)
      if (!cd->ctors[i].is_private) public_ctors.push_back(i);
  if (public_ctors.empty()) return ArgSpec::lit(Value::Null());
  size_t ci = public_ctors[r.below(public_ctors.size())];
  std::vector<ArgSpec> args;
  for (const auto& p : cd->ctors[ci].params)
    args.push_back(random_arg(program, p.type, r, gp, depth - 1));
  return ArgSpec::make_new(t.class_name, ci, std::move(args));
}

inline CaseSpec random_case(const Program& program, const minilang::ClassDecl& cls,
                            const std::vector<size_t>& public_ctors,
                            std::optional<std::string> forced_first_method,
                            rng::Rng& r, const GenParams& gp) {
  CaseSpec cs;
  cs.class_name = cls.name;
  cs.ctor_index = public_ctors[r.below(public_ctors.size())];
  for (const auto& p : cls.ctors[cs.ctor_index].params)
    cs.ctor_args.push_back(random_arg(program, p.type, r, gp, 1));
  int len = static_cast<int>(r.int_in(gp.seq_len_min, gp.seq_len_max));
  for (int i = 0; i < len; ++i) {
    const auto& m = cls.methods[r.below(cls.methods.size())];
    statecap::CallSpec call;
    call.method = (i == 0 && forced_first_method) ? *forced_first_method : m.name;
    const auto* md = cls.method(call.method);
    for (const auto& p : md->params)
      call.args.push_back(random_arg(program, p.type, r, gp, 1));
    cs.calls.push_back(std::move(call));
  }
  return cs;
}

inline bool executes_cleanly(const Program& program, const CaseSpec& cs,
                             std::int64_t budget) {
  std::vector<statecap::ExecutionRecord> ignored;
  // Observing a method no case calls keeps record capture out of the way.
  auto failed = statecap::collect_records(program, cs, "\x01none", budget, 0,
                                          "original", ignored);
  return !failed.has_value();
}

}  // namespace detail

inline TestSuite generate_suite(const Program& program, const std::string& target,
                                const GenParams& gp, std::uint64_t seed) {
  const auto* cls = program.cls(target);
  if (!cls) throw TestGenError(TestGenError::Kind::NoConstructor, "unknown class " + target);
  std::vector<size_t> public_ctors;
  for (size_t i = 0; i < cls->ctors.size(); ++i)
    if (!cls->ctors[i].is_private) public_ctors.push_back(i);
  if (public_ctors.empty())
    throw TestGenError(TestGenError::Kind::NoConstructor,
                       "class " + target + " has no public constructor");

  TestSuite suite;
  suite.class_name = target;
  suite.seed = seed;
  suite.params = gp;
  if (gp.max_sequences == 0 || cls->methods.empty()) return suite;

  rng::Rng r(rng::derive_seed(seed, 0));
  std::int64_t attempts = 0;
  const std::int64_t cap = gp.attempt_cap_factor * gp.max_sequences;
  while (static_cast<std::int64_t>(suite.cases.size()) < gp.max_sequences) {
    if (attempts++ >= cap)
      throw TestGenError(TestGenError::Kind::GenerationExhausted,
                         "attempt cap reached after " +
                             std::to_string(suite.cases.size()) + " valid cases");
    CaseSpec cs = detail::random_case(program, *cls, public_ctors, std::nullopt, r, gp);
    if (detail::executes_cleanly(program, cs, gp.step_budget))
      suite.cases.push_back(std::move(cs));
  }

  // Coverage floor: every method of the target appears in at least one case.
  std::set<std::string> covered;
  for (const auto& cs : suite.cases)
    for (const auto& call : cs.calls) covered.insert(call.method);
  size_t replace_from_end = 1;
  for (const auto& m : cls->methods) {
    if (covered.count(m.name)) continue;
    while (attempts++ < cap) {
      CaseSpec cs = detail::random_case(program, *cls, public_ctors, m.name, r, gp);
      if (detail::executes_cleanly(program, cs, gp.step_budget)) {
        if (suite.cases.size() >= replace_from_end)
          suite.cases[suite.cases.size() - replace_from_end++] = std::move(cs);
        else
          suite.cases.push_back(std::move(cs));
        break;
      }
    }
  }
  return suite;
}

// ---------------------------------------------------------------------------
// JSON

using json = nlohmann::ordered_json;

inline json suite_to_json(const TestSuite& s) {
  json cases = json::array();
  for (const auto& cs : s.cases) {
    json calls = json::array();
    for (const auto& call : cs.calls) {
      json args = json::array();
      for (const auto& a : call.args) args.push_back(statecap::arg_to_json(a));
      calls.push_back(json{{"method", call.method}, {"args", args}});
    }
    json ctor_args = json::array();
    for (const auto& a : cs.ctor_args) ctor_args.push_back(statecap::arg_to_json(a));
    cases.push_back(json{{"class", cs.class_name},
                         {"ctor", cs.ctor_index},
                         {"ctor_args", ctor_args},
                         {"calls", calls}});
  }
  return json{{"class", s.class_name},
              {"seed", s.seed},
              {"params",
               json{{"max_sequences", s.params.max_sequences},
                    {"seq_len_min", s.params.seq_len_min},
                    {"seq_len_max", s.params.seq_len_max},
                    {"int_lo", s.params.int_lo},
                    {"int_hi", s.params.int_hi},
                    {"step_budget", s.params.step_budget}}},
              {"cases", cases}};
}

inline TestSuite suite_from_json(const json& j) {
  TestSuite s;
  s.class_name = j.at("class").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  const auto& p = j.at("params");
  s.params.max_sequences = p.at("max_sequences").get<std::int64_t>();
  s.params.seq_len_min = p.at("seq_len_min").get<int>();
  s.params.seq_len_max = p.at("seq_len_max").get<int>();
  s.params.int_lo = p.at("int_lo").get<std::int64_t>();
  s.params.int_hi = p.at("int_hi").get<std::int64_t>();
  s.params.step_budget = p.at("step_budget").get<std::int64_t>();
  for (const auto& jc : j.at("cases")) {
    CaseSpec cs;
    cs.class_name = jc.at("class").get<std::string>();
    cs.ctor_index = jc.at("ctor").get<size_t>();
    for (const auto& a : jc.at("ctor_args")) cs.ctor_args.push_back(statecap::arg_from_json(a));
    for (const auto& call : jc.at("calls")) {
      statecap::CallSpec c;
      c.method = call.at("method").get<std::string>();
      for (const auto& a : call.at("args")) c.args.push_back(statecap::arg_from_json(a));
      cs.calls.push_back(std::move(c));
    }
    s.cases.push_back(std::move(cs));
  }
  return s;
}

}  // namespace specfuzz::testgen
