#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "specfuzz/asserteval.hpp"
#include "specfuzz/fuzzer.hpp"
#include "specfuzz/grammar.hpp"
#include "specfuzz/testgen.hpp"

using namespace specfuzz;
using asserteval::AKind;
using asserteval::AOp;
using asserteval::Assertion;
using asserteval::EvalOutcome;
using minilang::Program;
using minilang::Value;
using statecap::ArgSpec;
using statecap::CaseSpec;
using statecap::ExecutionRecord;

namespace {

Program load(const std::string& name) {
  std::ifstream in(std::string(SPECFUZZ_FIXDIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return minilang::parse_program(ss.str());
}

ExecutionRecord min_record(const Program& p, std::int64_t x, std::int64_t y) {
  CaseSpec cs;
  cs.class_name = "MinOps";
  cs.calls.push_back({"min", {ArgSpec::lit(Value::Int(x)), ArgSpec::lit(Value::Int(y))}});
  auto r = statecap::record_execution(p, cs, 10000);
  REQUIRE(std::holds_alternative<ExecutionRecord>(r));
  return std::get<ExecutionRecord>(std::move(r));
}

ExecutionRecord insert_record(const Program& p, std::vector<std::int64_t> prefix,
                              std::int64_t final_arg) {
  CaseSpec cs;
  cs.class_name = "SList";
  for (auto v : prefix) cs.calls.push_back({"insert", {ArgSpec::lit(Value::Int(v))}});
  cs.calls.push_back({"insert", {ArgSpec::lit(Value::Int(final_arg))}});
  auto r = statecap::record_execution(p, cs, 10000);
  REQUIRE(std::holds_alternative<ExecutionRecord>(r));
  return std::get<ExecutionRecord>(std::move(r));
}

}  // namespace

TEST_CASE("parse: quantified frame assertion") {
  auto a = asserteval::parse_assertion(
      "all SList l: reach(this, next).has(l) ==> l.elem == old(l.elem)");
  REQUIRE(a.root->kind == AKind::Quantified);
  CHECK(a.root->is_all);
  CHECK(a.root->class_name == "SList");
  CHECK(a.root->name == "l");
  REQUIRE(a.root->a->kind == AKind::Binary);
  CHECK(a.root->a->op == AOp::Imp);
  CHECK(a.root->a->a->kind == AKind::Has);
  CHECK(a.root->a->b->op == AOp::Eq);
  CHECK(a.root->a->b->b->kind == AKind::Old);
}

TEST_CASE("parse: boolean literal and the min ground truth") {
  CHECK(asserteval::parse_assertion("true").root->kind == AKind::BoolLit);
  auto a = asserteval::parse_assertion(
      "(result == x || result == y) && (result <= x) && (result <= y)");
  REQUIRE(a.root->kind == AKind::Binary);
  CHECK(a.root->op == AOp::And);
  CHECK(a.root->a->op == AOp::And);
  CHECK(a.root->a->a->op == AOp::Or);
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(asserteval::parse_assertion("x =="), asserteval::AssertError);
  CHECK_THROWS_AS(asserteval::parse_assertion("reach(this)"), asserteval::AssertError);
  CHECK_THROWS_AS(asserteval::parse_assertion(")("), asserteval::AssertError);
}

TEST_CASE("print . parse . print is a fixpoint on fixture assertions") {
  for (const char* text : {
           "true",
           "x >= result",
           "x < result ==> result <= 1",
           "x >= y <==> y == result",
           "(result == x || result == y) && (result <= x) && (result <= y)",
           "!x == y",
           "!(x == y || x < y)",
           "all SList l: reach(this, next).has(l) ==> l.elem == old(l.elem)",
           "exists SList l: reach(this, next).has(l) && l.elem == SENTINEL",
           "all SList l: !(reach(this, next).has(l) && l.elem > l.next.elem)",
           "this.elem != old(this.elem) + 1",
           "data >= this.next.elem || this.next.elem == old(this.elem)",
           "this.elem == data xor data > old(this.elem)",
           "x <= -1",
           "x - 1 <= y * -2",
           "this.next != null",
       }) {
    CAPTURE(text);
    auto once = asserteval::parse_assertion(text);
    auto twice = asserteval::parse_assertion(once.text);
    CHECK(once.text == twice.text);
  }
}

TEST_CASE("type_check: symbols resolve against class and method context") {
  Program p = load("min.mo");
  const auto* cls = p.cls("MinOps");
  asserteval::TypeContext ctx{&p, cls, cls->method("min")};
  auto ok = [&](const std::string& t) {
    try {
      auto a = asserteval::parse_assertion(t);
      return !asserteval::type_check(*a.root, ctx).has_value();
    } catch (const asserteval::AssertError&) {
      return false;  // rejected at parse time
    }
  };
  CHECK(ok("x >= result"));
  CHECK(ok("x + y * 2 == result ==> true"));
  CHECK_FALSE(ok("data > 0"));           // unknown symbol
  CHECK_FALSE(ok("x && y"));             // ints are not booleans
  CHECK_FALSE(ok("old(result) == 0"));   // result is post-state only
  CHECK_FALSE(ok("x == null"));          // int vs reference
  CHECK_FALSE(ok("old(old(x)) == 0"));   // nested old is rejected at parse or type
}

TEST_CASE("evaluate: numeric comparison on a min record") {
  Program p = load("min.mo");
  auto rec = min_record(p, 3, 7);
  auto a = asserteval::parse_assertion("x >= result");
  CHECK(asserteval::evaluate(a, rec).is_true());
  CHECK(asserteval::evaluate(asserteval::parse_assertion("y == result"), rec).is_false());
}

TEST_CASE("evaluate: existential sentinel membership on insert records") {
  Program p = load("slist.mo");
  auto rec = insert_record(p, {10, 3}, 5);
  auto a = asserteval::parse_assertion(
      "exists SList l: reach(this, next).has(l) && l.elem == SENTINEL");
  CHECK(asserteval::evaluate(a, rec).is_true());

  // independent check: walk the post list and confirm a sentinel node exists
  bool found = false;
  Value cur = *rec.post.root("this");
  while (cur.is_ref()) {
    const auto* obj = rec.post.object(cur.ref);
    if (*obj->get("elem") == Value::Int(INT64_MAX)) found = true;
    cur = *obj->get("next");
  }
  CHECK(found);
}

TEST_CASE("evaluate: null dereference inside a navigation is an Error") {
  Program p = load("slist.mo");
  auto rec = insert_record(p, {}, 5);  // [5, SENTINEL]
  auto a = asserteval::parse_assertion("this.next.next.elem == 0");
  auto out = asserteval::evaluate(a, rec);
  REQUIRE(out.is_error());
  CHECK(out.err == EvalOutcome::Err::NullDeref);
}

TEST_CASE("evaluate: division by zero and unknown symbols are Errors") {
  Program p = load("min.mo");
  auto rec = min_record(p, 1, 2);
  auto div = asserteval::evaluate(asserteval::parse_assertion("x / 0 == 1"), rec);
  REQUIRE(div.is_error());
  CHECK(div.err == EvalOutcome::Err::DivByZero);
  auto unk = asserteval::evaluate(asserteval::parse_assertion("nope == 1"), rec);
  REQUIRE(unk.is_error());
  CHECK(unk.err == EvalOutcome::Err::UnknownSymbol);
}

TEST_CASE("evaluate: short-circuit hides faults in discarded branches") {
  Program p = load("min.mo");
  auto rec = min_record(p, 1, 2);
  CHECK(asserteval::evaluate(asserteval::parse_assertion("false && x / 0 == 1"), rec)
            .is_false());
  CHECK(asserteval::evaluate(asserteval::parse_assertion("true || x / 0 == 1"), rec)
            .is_true());
  CHECK(asserteval::evaluate(asserteval::parse_assertion("x == 9 ==> x / 0 == 1"), rec)
            .is_true());
  // strict operators do evaluate both sides
  CHECK(asserteval::evaluate(asserteval::parse_assertion("false xor x / 0 == 1"), rec)
            .is_error());
}

TEST_CASE("evaluate: old() reads the pre-state by object identity") {
  Program p = load("slist.mo");
  auto rec = insert_record(p, {10}, 5);  // [10,S] -> [5,10,S]; head keeps its id
  CHECK(asserteval::evaluate(asserteval::parse_assertion("old(this.elem) == 10"), rec)
            .is_true());
  CHECK(asserteval::evaluate(asserteval::parse_assertion("this.elem == 5"), rec)
            .is_true());
  // the paper's frame formula is falsified on insert (head value changed)
  auto frame = asserteval::parse_assertion(
      "all SList l: reach(this, next).has(l) ==> l.elem == old(l.elem)");
  CHECK_FALSE(asserteval::evaluate(frame, rec).is_true());
}

TEST_CASE("bounded_equiv: tautology equals true on a small integer domain") {
  Program p = load("min.mo");
  auto domain = asserteval::int_args_domain(p, "MinOps", "min", -5, 5);
  auto a = asserteval::parse_assertion("x >= y || x <= y");
  auto b = asserteval::parse_assertion("true");
  CHECK(asserteval::bounded_equiv(a, b, domain).equivalent);
}

TEST_CASE("bounded_equiv: result<=x vs result<x splits on x==y") {
  Program p = load("min.mo");
  auto domain = asserteval::int_args_domain(p, "MinOps", "min", -3, 3);
  auto a = asserteval::parse_assertion("result <= x");
  auto b = asserteval::parse_assertion("result < x");
  auto res = asserteval::bounded_equiv(a, b, domain);
  REQUIRE_FALSE(res.equivalent);
  REQUIRE(res.counterexample.has_value());
  auto x = *res.counterexample->pre.root("x");
  auto y = *res.counterexample->pre.root("y");
  CHECK(x == y);  // disagreement happens exactly at x == y
}

TEST_CASE("bounded_equiv: the two sortedness formulations agree on small lists") {
  Program p = load("slist.mo");
  auto domain = asserteval::chain_domain(p, "SList", "next", "elem", 4,
                                         {0, 1, 2, 3}, "insert", {0, 1, 2, 3});
  // the worked pair (both error on the sentinel tail, agreeing everywhere)
  auto a = asserteval::parse_assertion(
      "all SList l: reach(this, next).has(l) ==> l.elem <= l.next.elem");
  auto b = asserteval::parse_assertion(
      "all SList l: !(reach(this, next).has(l) && l.elem > l.next.elem)");
  CHECK(asserteval::bounded_equiv(a, b, domain).equivalent);
  // and the null-guarded versions, which actually evaluate
  auto ga = asserteval::parse_assertion(
      "all SList l: reach(this, next).has(l) && l.next != null ==> l.elem <= l.next.elem");
  auto gb = asserteval::parse_assertion(
      "all SList l: !(reach(this, next).has(l) && l.next != null && l.elem > l.next.elem)");
  CHECK(asserteval::bounded_equiv(ga, gb, domain).equivalent);
  // the guarded form is not equivalent to `true` (unsorted pre-states exist)
  auto truth = asserteval::parse_assertion("true");
  CHECK_FALSE(asserteval::bounded_equiv(ga, truth, domain).equivalent);
}

TEST_CASE("bounded_entails: conjunction entailment via bounded_equiv") {
  Program p = load("min.mo");
  auto domain = asserteval::int_args_domain(p, "MinOps", "min", -4, 4);
  auto a1 = asserteval::parse_assertion("x >= result");
  auto a2 = asserteval::parse_assertion("x <= y ==> x == result");
  auto a3 = asserteval::parse_assertion("x > y ==> y == result");
  std::vector<const asserteval::AExpr*> premises{a1.root.get(), a2.root.get(),
                                                 a3.root.get()};
  auto goal = asserteval::parse_assertion("result <= y");
  CHECK(asserteval::bounded_entails(premises, *goal.root, domain).equivalent);
  auto absurd = asserteval::parse_assertion("result == x");
  CHECK_FALSE(asserteval::bounded_entails(premises, *absurd.root, domain).equivalent);
}

TEST_CASE("property: quantifier duality on fuzzed assertions") {
  Program p = load("slist.mo");
  auto g = grammar::extract_grammar(p, "SList", 2);
  auto fz = fuzzer::fuzz_candidates(
      g, 400, 17, 8000, [](const std::string& s) { return asserteval::normalize_text(s); });
  std::vector<ExecutionRecord> records;
  records.push_back(insert_record(p, {}, 3));
  records.push_back(insert_record(p, {7, 2}, 4));
  records.push_back(insert_record(p, {1, 1, 9}, 0));

  int quantified = 0;
  for (const auto& text : fz.candidates) {
    auto a = asserteval::parse_assertion(text);
    if (a.root->kind != AKind::Quantified) continue;
    quantified++;
    // build the dual: all T v: B  ==  !(exists T v: !B)
    auto dual = std::make_unique<asserteval::AExpr>();
    dual->kind = AKind::Not;
    dual->a = a.root->clone();
    dual->a->is_all = !a.root->is_all;
    auto body_neg = std::make_unique<asserteval::AExpr>();
    body_neg->kind = AKind::Not;
    body_neg->a = std::move(dual->a->a);
    dual->a->a = std::move(body_neg);
    for (const auto& rec : records) {
      auto lhs = asserteval::evaluate(*a.root, rec);
      auto rhs = asserteval::evaluate(*dual, rec);
      if (lhs.is_error() || rhs.is_error()) continue;
      CHECK(lhs.kind == rhs.kind);
    }
  }
  CHECK(quantified > 20);
}

TEST_CASE("property: short-circuit soundness on fuzzed bodies") {
  Program p = load("min.mo");
  auto g = grammar::extract_grammar(p, "MinOps", 2);
  auto fz = fuzzer::fuzz_candidates(
      g, 300, 23, 6000, [](const std::string& s) { return asserteval::normalize_text(s); });
  auto rec = min_record(p, 2, 2);
  for (const auto& text : fz.candidates) {
    auto guarded_false = asserteval::parse_assertion("false && (" + text + ")");
    auto guarded_true = asserteval::parse_assertion("true || (" + text + ")");
    CHECK(asserteval::evaluate(guarded_false, rec).is_false());
    CHECK(asserteval::evaluate(guarded_true, rec).is_true());
  }
}
