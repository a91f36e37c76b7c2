#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "specfuzz/minilang.hpp"
#include "specfuzz/random.hpp"
#include "specfuzz/statecap.hpp"

using namespace specfuzz;
using minilang::Program;
using minilang::Value;
using statecap::ArgSpec;
using statecap::CaseSpec;
using statecap::Snapshot;

namespace {

Program load(const std::string& name) {
  std::ifstream in(std::string(SPECFUZZ_FIXDIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return minilang::parse_program(ss.str());
}

// Independent breadth-first closure over the snapshot used as the oracle for
// statecap::reach.
std::set<minilang::ObjId> bfs_oracle(const Snapshot& s, Value start,
                                     const std::vector<std::string>& fields) {
  std::set<minilang::ObjId> seen;
  if (!start.is_ref()) return seen;
  std::vector<minilang::ObjId> queue{start.ref};
  seen.insert(start.ref);
  while (!queue.empty()) {
    auto id = queue.front();
    queue.erase(queue.begin());
    const auto* obj = s.object(id);
    if (!obj) continue;
    for (const auto& f : fields) {
      auto v = obj->get(f);
      if (v && v->is_ref() && seen.insert(v->ref).second) queue.push_back(v->ref);
    }
  }
  return seen;
}

Snapshot snap_list(const Program& p, minilang::Heap& heap, Value list) {
  return statecap::capture(heap, p, "SList", {{"this", list}});
}

}  // namespace

TEST_CASE("record_execution: min call captures pre/post roots") {
  Program p = load("min.mo");
  CaseSpec cs;
  cs.class_name = "MinOps";
  cs.calls.push_back({"min", {ArgSpec::lit(Value::Int(3)), ArgSpec::lit(Value::Int(7))}});
  auto r = statecap::record_execution(p, cs, 10000);
  REQUIRE(std::holds_alternative<statecap::ExecutionRecord>(r));
  const auto& rec = std::get<statecap::ExecutionRecord>(r);
  CHECK(rec.pre.root("x") == Value::Int(3));
  CHECK(rec.pre.root("y") == Value::Int(7));
  CHECK_FALSE(rec.pre.root("result").has_value());
  CHECK(rec.post.root("x") == Value::Int(3));
  CHECK(rec.post.root("result") == Value::Int(3));
  REQUIRE(rec.result.has_value());
  CHECK(*rec.result == Value::Int(3));
}

// Hand-simulated heap oracle: after new SList(); insert(10), the list is
// [10, SENTINEL] (2 nodes); the final insert(5) grows it to 3 nodes.
TEST_CASE("record_execution: insert prefix produces growing snapshots") {
  Program p = load("slist.mo");
  CaseSpec cs;
  cs.class_name = "SList";
  cs.calls.push_back({"insert", {ArgSpec::lit(Value::Int(10))}});
  cs.calls.push_back({"insert", {ArgSpec::lit(Value::Int(5))}});
  auto r = statecap::record_execution(p, cs, 10000);
  REQUIRE(std::holds_alternative<statecap::ExecutionRecord>(r));
  const auto& rec = std::get<statecap::ExecutionRecord>(r);
  CHECK(rec.pre.objects.size() == 2);
  CHECK(rec.post.objects.size() == 3);
  // surviving objects keep their identity across the call
  for (const auto& obj : rec.pre.objects) CHECK(rec.post.object(obj.id) != nullptr);
}

TEST_CASE("record_execution: failing final call yields no record") {
  Program p = load("slist.mo");
  CaseSpec cs;
  cs.class_name = "SList";
  cs.ctor_index = 1;  // private SList(e, next) -> no sentinel
  cs.ctor_args = {ArgSpec::lit(Value::Int(5)), ArgSpec::lit(Value::Null())};
  cs.calls.push_back({"insert", {ArgSpec::lit(Value::Int(7))}});
  auto r = statecap::record_execution(p, cs, 10000);
  REQUIRE(std::holds_alternative<minilang::RunFailure>(r));
  CHECK(std::get<minilang::RunFailure>(r).kind == minilang::FailureKind::NullDeref);
}

TEST_CASE("reach: acyclic three-node list matches the BFS oracle") {
  Program p = load("slist.mo");
  minilang::Heap heap;
  auto ctor = minilang::run_ctor(p, "SList", {}, heap, 10000);
  Value list = *ctor.value;
  REQUIRE(minilang::run_method(p, list, "insert", {Value::Int(4)}, heap, 10000).ok());
  REQUIRE(minilang::run_method(p, list, "insert", {Value::Int(2)}, heap, 10000).ok());
  Snapshot s = snap_list(p, heap, list);
  REQUIRE(s.objects.size() == 3);

  auto got = statecap::reach(s, list, {"next"});
  auto expect = bfs_oracle(s, list, {"next"});
  CHECK(std::set<minilang::ObjId>(got.begin(), got.end()) == expect);
  CHECK(got.size() == 3);
}

TEST_CASE("reach: null start yields the empty set") {
  Program p = load("slist.mo");
  minilang::Heap heap;
  auto ctor = minilang::run_ctor(p, "SList", {}, heap, 10000);
  Snapshot s = snap_list(p, heap, *ctor.value);
  CHECK(statecap::reach(s, Value::Null(), {"next"}).empty());
}

TEST_CASE("reach: cyclic structures terminate via the visited set") {
  Program p = load("slist.mo");
  minilang::Heap heap;
  const auto* cd = p.cls("SList");
  auto n0 = heap.alloc(*cd);
  auto n1 = heap.alloc(*cd);
  heap.at(n0).set("next", Value::Ref(n1));
  heap.at(n1).set("next", Value::Ref(n0));
  Snapshot s = statecap::capture(heap, p, "SList", {{"this", Value::Ref(n0)}});
  auto got = statecap::reach(s, Value::Ref(n0), {"next"});
  auto expect = bfs_oracle(s, Value::Ref(n0), {"next"});
  CHECK(std::set<minilang::ObjId>(got.begin(), got.end()) == expect);
  CHECK(got.size() == 2);
}

TEST_CASE("resolve_path: follows fields and reports nulls") {
  Program p = load("slist.mo");
  minilang::Heap heap;
  auto ctor = minilang::run_ctor(p, "SList", {}, heap, 10000);
  Value list = *ctor.value;
  REQUIRE(minilang::run_method(p, list, "insert", {Value::Int(5)}, heap, 10000).ok());
  Snapshot s = snap_list(p, heap, list);  // [5, SENTINEL]

  auto v = statecap::resolve_path(s, "this", {"next", "elem"});
  REQUIRE(std::holds_alternative<Value>(v));
  CHECK(std::get<Value>(v) == Value::Int(INT64_MAX));

  auto self = statecap::resolve_path(s, "this", {});
  REQUIRE(std::holds_alternative<Value>(self));
  CHECK(std::get<Value>(self) == list);

  auto deep = statecap::resolve_path(s, "this", {"next", "next", "elem"});
  REQUIRE(std::holds_alternative<statecap::PathError>(deep));
  CHECK(std::get<statecap::PathError>(deep).kind ==
        statecap::PathError::Kind::NullOnPath);

  auto bad = statecap::resolve_path(s, "this", {"nope"});
  REQUIRE(std::holds_alternative<statecap::PathError>(bad));
  CHECK(std::get<statecap::PathError>(bad).kind ==
        statecap::PathError::Kind::UnknownField);
}

TEST_CASE("property: reach stays within the snapshot and is a monotone closure") {
  Program p = load("slist.mo");
  rng::Rng r(20240601);
  for (int trial = 0; trial < 25; ++trial) {
    minilang::Heap heap;
    auto ctor = minilang::run_ctor(p, "SList", {}, heap, 10000);
    Value list = *ctor.value;
    int n = static_cast<int>(r.int_in(0, 6));
    for (int i = 0; i < n; ++i)
      REQUIRE(minilang::run_method(p, list, "insert", {Value::Int(r.int_in(-9, 9))},
                                   heap, 10000)
                  .ok());
    Snapshot s = snap_list(p, heap, list);
    auto closure = statecap::reach(s, list, {"next"});
    std::set<minilang::ObjId> in_snapshot;
    for (const auto& o : s.objects) in_snapshot.insert(o.id);
    for (auto id : closure) {
      CHECK(in_snapshot.count(id) == 1);
      // monotone: members' closures are contained in the closure
      auto sub = statecap::reach(s, Value::Ref(id), {"next"});
      CHECK(std::binary_search(closure.begin(), closure.end(), id));
      for (auto sid : sub) CHECK(std::binary_search(closure.begin(), closure.end(), sid));
    }
  }
}

TEST_CASE("snapshot JSON round-trip is isomorphic") {
  Program p = load("slist.mo");
  minilang::Heap heap;
  auto ctor = minilang::run_ctor(p, "SList", {}, heap, 10000);
  Value list = *ctor.value;
  for (std::int64_t v : {8, 1, 5})
    REQUIRE(minilang::run_method(p, list, "insert", {Value::Int(v)}, heap, 10000).ok());
  Snapshot s = snap_list(p, heap, list);
  auto j = statecap::snapshot_to_json(s);
  Snapshot back = statecap::snapshot_from_json(j);
  CHECK(statecap::isomorphic(s, back));
  // and the record wrapper round-trips too
  CaseSpec cs;
  cs.class_name = "SList";
  cs.calls.push_back({"insert", {ArgSpec::lit(Value::Int(3))}});
  auto r = statecap::record_execution(p, cs, 10000);
  const auto& rec = std::get<statecap::ExecutionRecord>(r);
  auto rec2 = statecap::record_from_json(statecap::record_to_json(rec));
  CHECK(statecap::isomorphic(rec.pre, rec2.pre));
  CHECK(statecap::isomorphic(rec.post, rec2.post));
  CHECK(rec2.method == "insert");
}

TEST_CASE("snapshots are closed: every reference resolves inside") {
  Program p = load("composite.mo");
  minilang::Heap heap;
  auto root = minilang::run_ctor(p, "Composite", {Value::Int(1)}, heap, 10000);
  auto child = minilang::run_ctor(p, "Composite", {Value::Int(2)}, heap, 10000);
  REQUIRE(minilang::run_method(p, *root.value, "addChild", {*child.value}, heap, 10000)
              .ok());
  Snapshot s = statecap::capture(heap, p, "Composite", {{"this", *root.value}});
  for (const auto& obj : s.objects)
    for (const auto& [name, v] : obj.fields)
      if (v.is_ref()) CHECK(s.object(v.ref) != nullptr);
}
