#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "specfuzz/minilang.hpp"
#include "specfuzz/statecap.hpp"

using namespace specfuzz;
using minilang::Program;
using minilang::Value;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(SPECFUZZ_FIXDIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load(const std::string& name) {
  return minilang::parse_program(read_fixture(name));
}

}  // namespace

TEST_CASE("parse_program: min fixture") {
  Program p = load("min.mo");
  REQUIRE(p.classes.size() == 1);
  const auto* cls = p.cls("MinOps");
  REQUIRE(cls != nullptr);
  const auto* m = cls->method("min");
  REQUIRE(m != nullptr);
  CHECK(m->params.size() == 2);
  CHECK(m->params[0].name == "x");
  CHECK(m->params[0].type.is_int());
  CHECK(m->return_type.is_int());
}

TEST_CASE("parse_program: empty source yields zero classes") {
  Program p = minilang::parse_program("");
  CHECK(p.classes.empty());
}

TEST_CASE("parse_program: SList has a recursive next field") {
  Program p = load("slist.mo");
  const auto* cls = p.cls("SList");
  REQUIRE(cls != nullptr);
  const auto* next = cls->field("next");
  REQUIRE(next != nullptr);
  CHECK(next->type.is_class());
  CHECK(next->type.class_name == "SList");
  const auto* sentinel = cls->constant("SENTINEL");
  REQUIRE(sentinel != nullptr);
  CHECK(sentinel->value == INT64_MAX);
  REQUIRE(cls->ctors.size() == 2);
  CHECK_FALSE(cls->ctors[0].is_private);
  CHECK(cls->ctors[1].is_private);
}

TEST_CASE("parse_program: errors carry positions and kinds") {
  using minilang::ErrorKind;
  auto kind_of = [](const std::string& src) {
    try {
      minilang::parse_program(src);
    } catch (const minilang::ParseError& e) {
      return e.kind;
    }
    FAIL("expected a parse error");
    return ErrorKind::Syntax;
  };
  CHECK(kind_of("class A {") == ErrorKind::Syntax);
  CHECK(kind_of("class A { field f: Int; field f: Bool; new() {} }") ==
        ErrorKind::DuplicateName);
  CHECK(kind_of("class A { new() { var x: Int = true; } }") == ErrorKind::Type);
  CHECK(kind_of("class A { method m(): Int { skip; } new() {} }") == ErrorKind::Type);
  CHECK(kind_of("class A { field f: Nope; new() {} }") == ErrorKind::Type);
}

TEST_CASE("run_method: min returns the smaller argument") {
  Program p = load("min.mo");
  minilang::Heap heap;
  auto ctor = minilang::run_ctor(p, "MinOps", {}, heap, 10000);
  REQUIRE(ctor.ok());
  auto res = minilang::run_method(p, *ctor.value, "min",
                                  {Value::Int(3), Value::Int(7)}, heap, 10000);
  REQUIRE(res.ok());
  REQUIRE(res.value.has_value());
  CHECK(*res.value == Value::Int(3));
}

TEST_CASE("run_method: receiver-less static-style dispatch") {
  Program p = load("min.mo");
  minilang::Heap heap;
  auto res = minilang::run_method(p, std::nullopt, "min",
                                  {Value::Int(-4), Value::Int(-9)}, heap, 10000);
  REQUIRE(res.ok());
  CHECK(*res.value == Value::Int(-9));
}

// Hand-simulated oracle for SList.insert on a fresh list: inserting 5 into
// [SENTINEL] gives [5, SENTINEL].
TEST_CASE("run_method: SList.insert places the element before the sentinel") {
  Program p = load("slist.mo");
  minilang::Heap heap;
  auto ctor = minilang::run_ctor(p, "SList", {}, heap, 10000);
  REQUIRE(ctor.ok());
  Value list = *ctor.value;
  auto res = minilang::run_method(p, list, "insert", {Value::Int(5)}, heap, 10000);
  REQUIRE(res.ok());
  CHECK_FALSE(res.value.has_value());  // Void

  const auto& head = heap.at(list.ref);
  CHECK(head.get("elem") == Value::Int(5));
  Value next = head.get("next");
  REQUIRE(next.is_ref());
  const auto& second = heap.at(next.ref);
  CHECK(second.get("elem") == Value::Int(INT64_MAX));
  CHECK(second.get("next") == Value::Null());
}

TEST_CASE("run_method: budget exhaustion on a looping body") {
  Program p = minilang::parse_program(
      "class Loop { new() {} method spin(): Void { while (true) { skip; } } }");
  minilang::Heap heap;
  auto ctor = minilang::run_ctor(p, "Loop", {}, heap, 10000);
  REQUIRE(ctor.ok());
  auto res = minilang::run_method(p, *ctor.value, "spin", {}, heap, 10000);
  REQUIRE_FALSE(res.ok());
  CHECK(res.failure->kind == minilang::FailureKind::BudgetExceeded);
}

TEST_CASE("run_method: null dereference and division by zero fail") {
  Program p = minilang::parse_program(
      "class A { field a: A; field v: Int; new() {}"
      " method deref(): Int { return this.a.v; }"
      " method div(x: Int): Int { return x / 0; } }");
  minilang::Heap heap;
  auto ctor = minilang::run_ctor(p, "A", {}, heap, 10000);
  auto r1 = minilang::run_method(p, *ctor.value, "deref", {}, heap, 10000);
  REQUIRE_FALSE(r1.ok());
  CHECK(r1.failure->kind == minilang::FailureKind::NullDeref);
  auto r2 = minilang::run_method(p, *ctor.value, "div", {Value::Int(5)}, heap, 10000);
  REQUIRE_FALSE(r2.ok());
  CHECK(r2.failure->kind == minilang::FailureKind::DivByZero);
}

TEST_CASE("run_method: 64-bit arithmetic wraps") {
  Program p = minilang::parse_program(
      "class W { new() {} method bump(x: Int): Int { return x + 1; } }");
  minilang::Heap heap;
  auto ctor = minilang::run_ctor(p, "W", {}, heap, 10000);
  auto res = minilang::run_method(p, *ctor.value, "bump", {Value::Int(INT64_MAX)},
                                  heap, 10000);
  REQUIRE(res.ok());
  CHECK(*res.value == Value::Int(INT64_MIN));
}

TEST_CASE("determinism: identical runs produce identical serialized post-heaps") {
  Program p = load("slist.mo");
  auto run_once = [&]() {
    minilang::Heap heap;
    auto ctor = minilang::run_ctor(p, "SList", {}, heap, 10000);
    Value list = *ctor.value;
    for (std::int64_t v : {9, 2, 5, 2, -3})
      REQUIRE(minilang::run_method(p, list, "insert", {Value::Int(v)}, heap, 10000).ok());
    auto snap = statecap::capture(heap, p, "SList", {{"this", list}});
    return statecap::snapshot_to_json(snap).dump();
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("budget monotonicity: success at budget b is stable for larger budgets") {
  Program p = load("slist.mo");
  auto run_with = [&](std::int64_t budget, std::string& out) {
    minilang::Heap heap;
    auto ctor = minilang::run_ctor(p, "SList", {}, heap, budget);
    if (!ctor.ok()) return false;
    Value list = *ctor.value;
    auto res = minilang::run_method(p, list, "insert", {Value::Int(4)}, heap, budget);
    if (!res.ok()) return false;
    out = statecap::snapshot_to_json(statecap::capture(heap, p, "SList", {{"this", list}}))
              .dump();
    return true;
  };
  // find the smallest budget that succeeds
  std::int64_t b = 1;
  std::string base;
  while (!run_with(b, base)) {
    b++;
    REQUIRE(b < 10000);
  }
  for (std::int64_t extra : {1, 7, 100, 10000}) {
    std::string again;
    REQUIRE(run_with(b + extra, again));
    CHECK(again == base);
  }
}

TEST_CASE("pretty-print round-trip is a fixpoint on all fixtures") {
  for (const char* name : {"min.mo", "slist.mo", "composite.mo", "stack.mo", "queue.mo"}) {
    CAPTURE(name);
    Program p = load(name);
    std::string once = minilang::pretty_print(p);
    Program p2 = minilang::parse_program(once);
    std::string twice = minilang::pretty_print(p2);
    CHECK(once == twice);
  }
}

TEST_CASE("node ids are assigned pre-order and survive reprinting") {
  Program p = load("min.mo");
  // first statement of min's body is the if; its id precedes its condition's
  const auto* m = p.cls("MinOps")->method("min");
  REQUIRE_FALSE(m->body.empty());
  const auto& if_stmt = *m->body.front();
  REQUIRE(if_stmt.expr != nullptr);
  CHECK(if_stmt.id < if_stmt.expr->id);
  // ids are stable across print/parse cycles
  Program p2 = minilang::parse_program(minilang::pretty_print(p));
  const auto* m2 = p2.cls("MinOps")->method("min");
  CHECK(m2->body.front()->id == if_stmt.id);
  CHECK(m2->body.front()->expr->id == if_stmt.expr->id);
}
