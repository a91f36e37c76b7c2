#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "specfuzz/mutation.hpp"

using namespace specfuzz;
using minilang::Expr;
using minilang::Program;
using minilang::Stmt;
using mutation::Mutant;

namespace {

Program load(const std::string& name) {
  std::ifstream in(std::string(SPECFUZZ_FIXDIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return minilang::parse_program(ss.str());
}

// Counts top-most differing subtrees between two statement bodies; the
// single-edit invariant demands exactly one.
int diff_subtrees(const Stmt& a, const Stmt& b);

int diff_subtrees(const Expr& a, const Expr& b) {
  if (minilang::print_expr(a) == minilang::print_expr(b)) return 0;
  if (a.kind != b.kind) return 1;
  std::vector<const Expr*> ca, cb;
  if (a.lhs) ca.push_back(a.lhs.get());
  if (a.rhs) ca.push_back(a.rhs.get());
  for (const auto& x : a.args) ca.push_back(x.get());
  if (b.lhs) cb.push_back(b.lhs.get());
  if (b.rhs) cb.push_back(b.rhs.get());
  for (const auto& x : b.args) cb.push_back(x.get());
  if (ca.size() != cb.size()) return 1;
  int n = 0;
  for (size_t i = 0; i < ca.size(); ++i) n += diff_subtrees(*ca[i], *cb[i]);
  return n == 0 ? 1 : n;  // children equal but prints differ: this node changed
}

int diff_bodies(const std::vector<std::unique_ptr<Stmt>>& a,
                const std::vector<std::unique_ptr<Stmt>>& b) {
  if (a.size() != b.size()) return 1;
  int n = 0;
  for (size_t i = 0; i < a.size(); ++i) n += diff_subtrees(*a[i], *b[i]);
  return n;
}

int diff_subtrees(const Stmt& a, const Stmt& b) {
  if (minilang::print_stmt(a) == minilang::print_stmt(b)) return 0;
  if (a.kind != b.kind) return 1;
  int n = 0;
  if (!!a.expr != !!b.expr) return 1;
  if (a.expr) n += diff_subtrees(*a.expr, *b.expr);
  n += diff_bodies(a.body, b.body);
  n += diff_bodies(a.else_body, b.else_body);
  return n == 0 ? 1 : n;
}

int program_diff(const Program& a, const Program& b) {
  int n = 0;
  for (size_t c = 0; c < a.classes.size(); ++c) {
    for (size_t i = 0; i < a.classes[c].ctors.size(); ++i)
      n += diff_bodies(a.classes[c].ctors[i].body, b.classes[c].ctors[i].body);
    for (size_t i = 0; i < a.classes[c].methods.size(); ++i)
      n += diff_bodies(a.classes[c].methods[i].body, b.classes[c].methods[i].body);
  }
  return n;
}

}  // namespace

// Hand-enumerated ROR table for the min guard `x <= y`: the five other
// relational operators plus the whole-expression true/false replacements.
TEST_CASE("ROR on the min guard produces the full replacement table") {
  Program p = load("min.mo");
  auto mutants = mutation::generate_mutants(p, "MinOps", {"ROR"});
  std::set<std::string> replacements;
  for (const auto& m : mutants) replacements.insert(m.replacement);
  for (const char* want :
       {"x == y", "x != y", "x < y", "x > y", "x >= y", "true", "false"})
    CHECK(replacements.count(want) == 1);
  CHECK(mutants.size() == 7);
  for (const auto& m : mutants) CHECK(m.original == "x <= y");
}

TEST_CASE("empty bodies produce no mutants") {
  Program p = minilang::parse_program("class E { new() {} method m(): Void {} }");
  CHECK(mutation::generate_mutants(p, "E").empty());
}

TEST_CASE("every mutant re-parses and type-checks from printed source") {
  for (const char* fixture : {"slist.mo", "queue.mo", "composite.mo"}) {
    CAPTURE(fixture);
    Program p = load(fixture);
    std::string target = std::string(fixture) == "slist.mo"     ? "SList"
                         : std::string(fixture) == "queue.mo"   ? "IntQueue"
                                                                : "Composite";
    auto mutants = mutation::generate_mutants(p, target);
    CHECK_FALSE(mutants.empty());
    for (const auto& m : mutants) {
      CAPTURE(m.id, m.op, m.original, m.replacement);
      CHECK_NOTHROW(minilang::parse_program(minilang::pretty_print(m.program)));
    }
  }
}

TEST_CASE("single-edit: exactly one subtree differs from the original") {
  Program p = load("slist.mo");
  auto mutants = mutation::generate_mutants(p, "SList");
  for (const auto& m : mutants) {
    CAPTURE(m.id, m.op, m.original, m.replacement);
    CHECK(program_diff(p, m.program) == 1);
  }
}

TEST_CASE("deterministic ids and ordering across runs") {
  Program p = load("slist.mo");
  auto a = mutation::generate_mutants(p, "SList");
  auto b = mutation::generate_mutants(p, "SList");
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].op == b[i].op);
    CHECK(a[i].node == b[i].node);
    CHECK(a[i].replacement == b[i].replacement);
  }
  // ordering follows (node, operator, replacement index)
  for (size_t i = 1; i < a.size(); ++i)
    CHECK(a[i - 1].node <= a[i].node);
}

TEST_CASE("operator families show up where applicable") {
  Program p = load("composite.mo");
  auto mutants = mutation::generate_mutants(p, "Composite");
  std::set<std::string> ops;
  for (const auto& m : mutants) ops.insert(m.op);
  CHECK(ops.count("ROR") == 1);  // c != null
  CHECK(ops.count("AOR") == 1);  // childCount + 1
  CHECK(ops.count("LVR") == 1);  // literal 1
  CHECK(ops.count("UOI") == 1);  // boolean guard
  CHECK(ops.count("STD") == 1);  // statements
  Program q = load("queue.mo");
  auto qmut = mutation::generate_mutants(q, "IntQueue", {"COR"});
  CHECK(qmut.empty());  // no && or || in the fixture
}

TEST_CASE("no mutation writes a method argument's fields") {
  // The operator set edits existing expressions/statements; addChild never
  // assigns c.value, so no mutant can either (the missed-property gap).
  Program p = load("composite.mo");
  auto mutants = mutation::generate_mutants(p, "Composite");
  for (const auto& m : mutants) {
    const auto* cls = m.program.cls("Composite");
    const auto* addChild = cls->method("addChild");
    std::function<void(const Stmt&)> walk = [&](const Stmt& s) {
      if (s.kind == minilang::StmtKind::Assign && s.target_root == "c")
        CHECK(s.target_path != std::vector<std::string>{"value"});
      for (const auto& b : s.body) walk(*b);
      for (const auto& b : s.else_body) walk(*b);
    };
    for (const auto& s : addChild->body) walk(*s);
  }
}
