#pragma once

// State capture: frozen pre/post snapshots of the reachable heap around a
// method call, plus the navigation primitives (reach, field paths) the
// assertion evaluator runs against. Record log format is documented in
// docs/records.md.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "json.hpp"
#include "specfuzz/minilang.hpp"

namespace specfuzz::statecap {

using minilang::Heap;
using minilang::ObjId;
using minilang::Program;
using minilang::RunFailure;
using minilang::Value;

// ---------------------------------------------------------------------------
// Snapshot: closed, immutable copy of the subgraph reachable from the roots.

struct SnapObject {
  ObjId id = 0;
  std::string class_name;
  std::vector<std::pair<std::string, Value>> fields;

  std::optional<Value> get(const std::string& f) const {
    for (const auto& [n, v] : fields)
      if (n == f) return v;
    return std::nullopt;
  }
};

struct Snapshot {
  // Root bindings: "this", parameters, and "result" in post-snapshots.
  std::vector<std::pair<std::string, Value>> roots;
  std::vector<SnapObject> objects;  // sorted by id
  std::vector<std::pair<std::string, std::int64_t>> constants;

  const SnapObject* object(ObjId id) const {
    auto it = std::lower_bound(objects.begin(), objects.end(), id,
                               [](const SnapObject& o, ObjId v) { return o.id < v; });
    if (it != objects.end() && it->id == id) return &*it;
    return nullptr;
  }

  std::optional<Value> root(const std::string& name) const {
    for (const auto& [n, v] : roots)
      if (n == name) return v;
    return std::nullopt;
  }

  std::optional<std::int64_t> constant(const std::string& name) const {
    for (const auto& [n, v] : constants)
      if (n == name) return v;
    return std::nullopt;
  }

  // Object ids of a given class, ascending; quantifier domains iterate this.
  std::vector<ObjId> objects_of_class(const std::string& cls) const {
    std::vector<ObjId> out;
    for (const auto& o : objects)
      if (o.class_name == cls) out.push_back(o.id);
    return out;
  }
};

// Freezes the subgraph reachable from the given roots. Identities are the
// live heap ids, so pre and post snapshots of one call correlate by id.
inline Snapshot capture(const Heap& heap, const Program& program,
                        const std::string& target_class,
                        std::vector<std::pair<std::string, Value>> roots) {
  Snapshot snap;
  snap.roots = std::move(roots);
  if (const auto* cls = program.cls(target_class))
    for (const auto& k : cls->constants) snap.constants.emplace_back(k.name, k.value);

  std::vector<ObjId> work;
  std::unordered_set<ObjId> seen;
  for (const auto& [n, v] : snap.roots)
    if (v.is_ref() && seen.insert(v.ref).second) work.push_back(v.ref);
  while (!work.empty()) {
    ObjId id = work.back();
    work.pop_back();
    const auto& obj = heap.at(id);
    SnapObject copy;
    copy.id = id;
    copy.class_name = obj.class_name;
    copy.fields = obj.fields;
    for (const auto& [n, v] : obj.fields)
      if (v.is_ref() && seen.insert(v.ref).second) work.push_back(v.ref);
    snap.objects.push_back(std::move(copy));
  }
  std::sort(snap.objects.begin(), snap.objects.end(),
            [](const SnapObject& a, const SnapObject& b) { return a.id < b.id; });
  return snap;
}

// ---------------------------------------------------------------------------
// ExecutionRecord

struct ExecutionRecord {
  std::string class_name;
  std::string method;
  Snapshot pre;
  std::vector<std::pair<std::string, Value>> args;
  Snapshot post;
  std::optional<Value> result;  // nullopt for Void methods
  std::int64_t test_id = 0;
  std::string mutant_id = "original";
};

// ---------------------------------------------------------------------------
// Navigation primitives

struct PathError {
  enum class Kind { NullOnPath, UnknownField } kind;
  std::string detail;
};

// Smallest set closed under following the listed fields from start; start
// itself is included when non-null. Cycles terminate via the visited set.
inline std::vector<ObjId> reach(const Snapshot& snap, const Value& start,
                                const std::vector<std::string>& fields) {
  std::vector<ObjId> out;
  if (!start.is_ref()) return out;
  std::unordered_set<ObjId> seen;
  std::vector<ObjId> work{start.ref};
  seen.insert(start.ref);
  while (!work.empty()) {
    ObjId id = work.back();
    work.pop_back();
    out.push_back(id);
    const SnapObject* obj = snap.object(id);
    if (!obj) continue;
    for (const auto& f : fields) {
      auto v = obj->get(f);
      if (v && v->is_ref() && seen.insert(v->ref).second) work.push_back(v->ref);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Follows a field path from a named root binding.
inline std::variant<Value, PathError> resolve_path(const Snapshot& snap,
                                                   const std::string& root,
                                                   const std::vector<std::string>& path) {
  auto r = snap.root(root);
  if (!r) return PathError{PathError::Kind::UnknownField, "unbound root '" + root + "'"};
  Value cur = *r;
  for (const auto& f : path) {
    if (cur.is_null()) return PathError{PathError::Kind::NullOnPath, root};
    if (!cur.is_ref())
      return PathError{PathError::Kind::UnknownField, "field access on non-object"};
    const SnapObject* obj = snap.object(cur.ref);
    auto v = obj->get(f);
    if (!v) return PathError{PathError::Kind::UnknownField, "unknown field '" + f + "'"};
    cur = *v;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Record capture around test case execution

// Argument specification for replayable test cases: either a literal value
// or a freshly constructed object (needed for reference-typed parameters).
struct ArgSpec {
  enum class Kind { Lit, New } kind = Kind::Lit;
  Value value;             // Lit
  std::string class_name;  // New
  size_t ctor_index = 0;   // New
  std::vector<ArgSpec> args;

  static ArgSpec lit(Value v) {
    ArgSpec a;
    a.kind = Kind::Lit;
    a.value = v;
    return a;
  }
  static ArgSpec make_new(std::string cls, size_t ctor, std::vector<ArgSpec> as = {}) {
    ArgSpec a;
    a.kind = Kind::New;
    a.class_name = std::move(cls);
    a.ctor_index = ctor;
    a.args = std::move(as);
    return a;
  }
};

struct CallSpec {
  std::string method;
  std::vector<ArgSpec> args;
};

struct CaseSpec {
  std::string class_name;
  size_t ctor_index = 0;  // index into the class's ctor list
  std::vector<ArgSpec> ctor_args;
  std::vector<CallSpec> calls;
};

namespace detail {

// Evaluates an ArgSpec list, constructing fresh objects in the heap.
// Returns nullopt and sets `failure` when a construction fails.
inline std::optional<std::vector<Value>> eval_args(
    const Program& program, const std::vector<ArgSpec>& specs, Heap& heap,
    std::int64_t step_budget, std::optional<RunFailure>& failure) {
  std::vector<Value> out;
  for (const auto& spec : specs) {
    if (spec.kind == ArgSpec::Kind::Lit) {
      out.push_back(spec.value);
      continue;
    }
    auto nested = eval_args(program, spec.args, heap, step_budget, failure);
    if (!nested) return std::nullopt;
    auto res = minilang::run_ctor(program, spec.class_name, *nested, heap, step_budget);
    if (!res.ok()) {
      failure = res.failure;
      return std::nullopt;
    }
    out.push_back(*res.value);
  }
  return out;
}

inline std::vector<std::pair<std::string, Value>> bind_args(
    const minilang::MethodDecl& md, const std::vector<Value>& args) {
  std::vector<std::pair<std::string, Value>> out;
  for (size_t i = 0; i < md.params.size(); ++i) out.emplace_back(md.params[i].name, args[i]);
  return out;
}

}  // namespace detail

// Replays a case and captures one ExecutionRecord per completed call of
// target_method. A failing call produces no record and aborts the rest of
// the case (the heap after a failure is unspecified). Returns the failure
// that stopped the replay, if any.
inline std::optional<RunFailure> collect_records(
    const Program& program, const CaseSpec& cs, const std::string& target_method,
    std::int64_t step_budget, std::int64_t test_id, const std::string& mutant_id,
    std::vector<ExecutionRecord>& out) {
  Heap heap;
  std::optional<RunFailure> failure;
  auto ctor_args = detail::eval_args(program, cs.ctor_args, heap, step_budget, failure);
  if (!ctor_args) return failure;
  auto ctor_res = minilang::run_ctor(program, cs.class_name, *ctor_args, heap,
                                     step_budget);
  if (!ctor_res.ok()) return ctor_res.failure;
  Value receiver = *ctor_res.value;
  const auto* cls = program.cls(cs.class_name);
  for (const auto& call : cs.calls) {
    const auto* md = cls->method(call.method);
    bool observed = call.method == target_method;
    auto arg_values = detail::eval_args(program, call.args, heap, step_budget, failure);
    if (!arg_values) return failure;
    Snapshot pre;
    std::vector<std::pair<std::string, Value>> named_args =
        detail::bind_args(*md, *arg_values);
    if (observed) {
      auto roots = named_args;
      roots.insert(roots.begin(), {"this", receiver});
      pre = capture(heap, program, cs.class_name, std::move(roots));
    }
    auto res = minilang::run_method(program, receiver, call.method, *arg_values, heap,
                                    step_budget);
    if (!res.ok()) return res.failure;
    if (observed) {
      auto roots = named_args;
      roots.insert(roots.begin(), {"this", receiver});
      if (res.value) roots.emplace_back("result", *res.value);
      ExecutionRecord rec;
      rec.class_name = cs.class_name;
      rec.method = call.method;
      rec.pre = std::move(pre);
      rec.args = std::move(named_args);
      rec.post = capture(heap, program, cs.class_name, std::move(roots));
      rec.result = res.value;
      rec.test_id = test_id;
      rec.mutant_id = mutant_id;
      out.push_back(std::move(rec));
    }
  }
  return std::nullopt;
}

// Executes a constructor-and-call prefix and records the final call.
inline std::variant<ExecutionRecord, RunFailure> record_execution(
    const Program& program, const CaseSpec& prefix_and_final,
    std::int64_t step_budget) {
  if (prefix_and_final.calls.empty())
    return RunFailure{minilang::FailureKind::NullDeref};
  std::vector<ExecutionRecord> recs;
  auto failed = collect_records(program, prefix_and_final,
                                prefix_and_final.calls.back().method, step_budget,
                                0, "original", recs);
  if (failed) return *failed;
  // The final call is the observation point; earlier calls of the same
  // method also produced records, keep only the last.
  return std::move(recs.back());
}

// ---------------------------------------------------------------------------
// JSON serialization (line-delimited record logs; see docs/records.md)

using json = nlohmann::ordered_json;

inline json arg_to_json(const ArgSpec& a);

inline json arg_to_json(const ArgSpec& a) {
  if (a.kind == ArgSpec::Kind::Lit) {
    switch (a.value.kind) {
      case Value::Kind::Int: return json(a.value.i);
      case Value::Kind::Bool: return json(a.value.b);
      default: return json(nullptr);
    }
  }
  json args = json::array();
  for (const auto& sub : a.args) args.push_back(arg_to_json(sub));
  return json{{"new", a.class_name}, {"ctor", a.ctor_index}, {"args", args}};
}

inline ArgSpec arg_from_json(const json& j) {
  if (j.is_null()) return ArgSpec::lit(Value::Null());
  if (j.is_boolean()) return ArgSpec::lit(Value::Bool(j.get<bool>()));
  if (j.is_number_integer()) return ArgSpec::lit(Value::Int(j.get<std::int64_t>()));
  ArgSpec a;
  a.kind = ArgSpec::Kind::New;
  a.class_name = j.at("new").get<std::string>();
  a.ctor_index = j.at("ctor").get<size_t>();
  for (const auto& sub : j.at("args")) a.args.push_back(arg_from_json(sub));
  return a;
}

inline json value_to_json(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int: return json(v.i);
    case Value::Kind::Bool: return json(v.b);
    case Value::Kind::Null: return json(nullptr);
    case Value::Kind::Ref: return json{{"$ref", v.ref}};
  }
  return json(nullptr);
}

inline Value value_from_json(const json& j) {
  if (j.is_null()) return Value::Null();
  if (j.is_boolean()) return Value::Bool(j.get<bool>());
  if (j.is_number_integer()) return Value::Int(j.get<std::int64_t>());
  return Value::Ref(j.at("$ref").get<ObjId>());
}

inline json snapshot_to_json(const Snapshot& s) {
  json roots = json::object();
  for (const auto& [n, v] : s.roots) roots[n] = value_to_json(v);
  json objects = json::object();
  for (const auto& o : s.objects) {
    json fields = json::object();
    for (const auto& [n, v] : o.fields) fields[n] = value_to_json(v);
    objects[std::to_string(o.id)] = json{{"class", o.class_name}, {"fields", fields}};
  }
  json constants = json::object();
  for (const auto& [n, v] : s.constants) constants[n] = v;
  return json{{"roots", roots}, {"objects", objects}, {"constants", constants}};
}

inline Snapshot snapshot_from_json(const json& j) {
  Snapshot s;
  for (const auto& [k, v] : j.at("roots").items()) s.roots.emplace_back(k, value_from_json(v));
  for (const auto& [k, v] : j.at("objects").items()) {
    SnapObject o;
    o.id = std::stoll(k);
    o.class_name = v.at("class").get<std::string>();
    for (const auto& [fn, fv] : v.at("fields").items())
      o.fields.emplace_back(fn, value_from_json(fv));
    s.objects.push_back(std::move(o));
  }
  std::sort(s.objects.begin(), s.objects.end(),
            [](const SnapObject& a, const SnapObject& b) { return a.id < b.id; });
  for (const auto& [k, v] : j.at("constants").items())
    s.constants.emplace_back(k, v.get<std::int64_t>());
  return s;
}

inline json record_to_json(const ExecutionRecord& r) {
  json args = json::object();
  for (const auto& [n, v] : r.args) args[n] = value_to_json(v);
  json j{{"class", r.class_name},
         {"method", r.method},
         {"test", r.test_id},
         {"mutant", r.mutant_id},
         {"pre", snapshot_to_json(r.pre)},
         {"args", args},
         {"post", snapshot_to_json(r.post)}};
  if (r.result) j["result"] = value_to_json(*r.result);
  return j;
}

inline ExecutionRecord record_from_json(const json& j) {
  ExecutionRecord r;
  r.class_name = j.at("class").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.test_id = j.at("test").get<std::int64_t>();
  r.mutant_id = j.at("mutant").get<std::string>();
  r.pre = snapshot_from_json(j.at("pre"));
  for (const auto& [k, v] : j.at("args").items()) r.args.emplace_back(k, value_from_json(v));
  r.post = snapshot_from_json(j.at("post"));
  if (j.contains("result")) r.result = value_from_json(j.at("result"));
  return r;
}

// Graph isomorphism up to an identity-renaming bijection; used by the
// snapshot round-trip property.
inline bool isomorphic(const Snapshot& a, const Snapshot& b) {
  if (a.roots.size() != b.roots.size() || a.objects.size() != b.objects.size())
    return false;
  std::unordered_map<ObjId, ObjId> map_ab;
  std::vector<std::pair<ObjId, ObjId>> work;
  auto match = [&](const Value& va, const Value& vb) {
    if (va.kind != vb.kind) return false;
    if (va.is_ref()) {
      auto it = map_ab.find(va.ref);
      if (it != map_ab.end()) return it->second == vb.ref;
      map_ab[va.ref] = vb.ref;
      work.emplace_back(va.ref, vb.ref);
      return true;
    }
    return va == vb;
  };
  for (size_t i = 0; i < a.roots.size(); ++i) {
    if (a.roots[i].first != b.roots[i].first) return false;
    if (!match(a.roots[i].second, b.roots[i].second)) return false;
  }
  while (!work.empty()) {
    auto [ia, ib] = work.back();
    work.pop_back();
    const SnapObject* oa = a.object(ia);
    const SnapObject* ob = b.object(ib);
    if (!oa || !ob || oa->class_name != ob->class_name ||
        oa->fields.size() != ob->fields.size())
      return false;
    for (size_t i = 0; i < oa->fields.size(); ++i) {
      if (oa->fields[i].first != ob->fields[i].first) return false;
      if (!match(oa->fields[i].second, ob->fields[i].second)) return false;
    }
  }
  return true;
}

}  // namespace specfuzz::statecap
