#pragma once

// AST-level mutant generation for MiniObj subjects. Operators follow the
// Major-style set: ROR, AOR, COR, LVR, UOI (negation insertion), STD
// (statement deletion). Every emitted mutant re-parses and type-checks;
// candidates that would not are dropped during enumeration.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "specfuzz/minilang.hpp"

namespace specfuzz::mutation {

using minilang::BinOp;
using minilang::Expr;
using minilang::ExprKind;
using minilang::NodeId;
using minilang::Program;
using minilang::Stmt;
using minilang::StmtKind;

struct Mutant {
  std::string id;           // "m0001", ...
  std::string op;           // operator name
  NodeId node = -1;         // mutated node in the original numbering
  std::string original;     // printed fragment before the edit
  std::string replacement;  // printed fragment after the edit
  Program program;          // re-parsed mutated program
};

inline const std::set<std::string>& all_operators() {
  static const std::set<std::string> ops{"AOR", "COR", "LVR", "ROR", "STD", "UOI"};
  return ops;
}

namespace detail {

struct NodeIndex {
  std::map<NodeId, Stmt*> stmts;
  std::map<NodeId, Expr*> exprs;

  void add_body(std::vector<std::unique_ptr<Stmt>>& body) {
    for (auto& s : body) add(*s);
  }
  void add(Stmt& s) {
    stmts[s.id] = &s;
    if (s.expr) add(*s.expr);
    for (auto& b : s.body) add(*b);
    for (auto& b : s.else_body) add(*b);
  }
  void add(Expr& e) {
    exprs[e.id] = &e;
    if (e.lhs) add(*e.lhs);
    if (e.rhs) add(*e.rhs);
    for (auto& a : e.args) add(*a);
  }
};

inline NodeIndex index_class(Program& p, const std::string& target) {
  NodeIndex idx;
  for (auto& c : p.classes) {
    if (c.name != target) continue;
    for (auto& ct : c.ctors) idx.add_body(ct.body);
    for (auto& m : c.methods) idx.add_body(m.body);
  }
  return idx;
}

// One planned edit; applied to a cloned program by node id.
struct Plan {
  NodeId node;
  std::string op;
  int repl_index;
  // edit returns false when the node shape does not match (defensive; the
  // plan was derived from the same tree).
  std::function<bool(NodeIndex&)> edit;
};

inline bool is_relational(BinOp op) {
  return op == BinOp::Eq || op == BinOp::Ne || op == BinOp::Lt || op == BinOp::Le ||
         op == BinOp::Gt || op == BinOp::Ge;
}
inline bool is_arithmetic(BinOp op) {
  return op == BinOp::Add || op == BinOp::Sub || op == BinOp::Mul ||
         op == BinOp::Div || op == BinOp::Mod;
}

inline std::unique_ptr<Expr> make_bool_lit(bool v) {
  auto e = std::make_unique<Expr>();
  e->kind = ExprKind::BoolLit;
  e->bool_val = v;
  e->type = minilang::Type::Bool();
  return e;
}

inline void plan_expr(const Expr& e, const std::set<std::string>& ops,
                      std::vector<Plan>& plans) {
  if (e.kind == ExprKind::Binary && is_relational(e.bin_op) && ops.count("ROR")) {
    static const BinOp kRel[] = {BinOp::Eq, BinOp::Ne, BinOp::Lt,
                                 BinOp::Le, BinOp::Gt, BinOp::Ge};
    bool int_operands = e.lhs->type.is_int();
    int idx = 0;
    for (BinOp repl : kRel) {
      if (repl == e.bin_op) continue;
      bool order_cmp = repl != BinOp::Eq && repl != BinOp::Ne;
      if (order_cmp && !int_operands) continue;  // refs admit only ==/!=
      NodeId id = e.id;
      plans.push_back({id, "ROR", idx++, [id, repl](NodeIndex& ix) {
                         auto it = ix.exprs.find(id);
                         if (it == ix.exprs.end()) return false;
                         it->second->bin_op = repl;
                         return true;
                       }});
    }
    for (bool v : {true, false}) {
      NodeId id = e.id;
      plans.push_back({id, "ROR", idx++, [id, v](NodeIndex& ix) {
                         auto it = ix.exprs.find(id);
                         if (it == ix.exprs.end()) return false;
                         Expr* n = it->second;
                         n->kind = ExprKind::BoolLit;
                         n->bool_val = v;
                         n->type = minilang::Type::Bool();
                         n->lhs.reset();
                         n->rhs.reset();
                         n->args.clear();
                         n->name.clear();
                         return true;
                       }});
    }
  }
  if (e.kind == ExprKind::Binary && is_arithmetic(e.bin_op) && ops.count("AOR")) {
    static const BinOp kArith[] = {BinOp::Add, BinOp::Sub, BinOp::Mul,
                                   BinOp::Div, BinOp::Mod};
    int idx = 0;
    for (BinOp repl : kArith) {
      if (repl == e.bin_op) continue;
      NodeId id = e.id;
      plans.push_back({id, "AOR", idx++, [id, repl](NodeIndex& ix) {
                         auto it = ix.exprs.find(id);
                         if (it == ix.exprs.end()) return false;
                         it->second->bin_op = repl;
                         return true;
                       }});
    }
  }
  if (e.kind == ExprKind::Binary &&
      (e.bin_op == BinOp::And || e.bin_op == BinOp::Or) && ops.count("COR")) {
    NodeId id = e.id;
    BinOp swapped = e.bin_op == BinOp::And ? BinOp::Or : BinOp::And;
    int idx = 0;
    plans.push_back({id, "COR", idx++, [id, swapped](NodeIndex& ix) {
                       auto it = ix.exprs.find(id);
                       if (it == ix.exprs.end()) return false;
                       it->second->bin_op = swapped;
                       return true;
                     }});
    for (bool lhs : {true, false}) {
      for (bool v : {true, false}) {
        plans.push_back({id, "COR", idx++, [id, lhs, v](NodeIndex& ix) {
                           auto it = ix.exprs.find(id);
                           if (it == ix.exprs.end()) return false;
                           auto& slot = lhs ? it->second->lhs : it->second->rhs;
                           NodeId keep = slot->id;
                           slot = make_bool_lit(v);
                           slot->id = keep;
                           return true;
                         }});
      }
    }
  }
  if (e.kind == ExprKind::IntLit && ops.count("LVR")) {
    std::vector<std::int64_t> repls;
    for (std::int64_t v : {std::int64_t{0}, std::int64_t{1}, std::int64_t{-1},
                           e.int_val + 1, e.int_val - 1}) {
      if (v == e.int_val) continue;
      if (std::find(repls.begin(), repls.end(), v) != repls.end()) continue;
      repls.push_back(v);
    }
    int idx = 0;
    for (std::int64_t v : repls) {
      NodeId id = e.id;
      plans.push_back({id, "LVR", idx++, [id, v](NodeIndex& ix) {
                         auto it = ix.exprs.find(id);
                         if (it == ix.exprs.end()) return false;
                         it->second->int_val = v;
                         return true;
                       }});
    }
  }
  if (e.type.is_bool() && ops.count("UOI")) {
    NodeId id = e.id;
    plans.push_back({id, "UOI", 0, [id](NodeIndex& ix) {
                       auto it = ix.exprs.find(id);
                       if (it == ix.exprs.end()) return false;
                       Expr* n = it->second;
                       auto inner = std::make_unique<Expr>();
                       *inner = std::move(*n);
                       n->kind = ExprKind::Unary;
                       n->un_op = minilang::UnOp::Not;
                       n->id = id;
                       n->type = minilang::Type::Bool();
                       n->lhs = std::move(inner);
                       n->rhs = nullptr;
                       n->args.clear();
                       n->name.clear();
                       return true;
                     }});
  }
  if (e.lhs) plan_expr(*e.lhs, ops, plans);
  if (e.rhs) plan_expr(*e.rhs, ops, plans);
  for (const auto& a : e.args) plan_expr(*a, ops, plans);
}

inline void plan_stmt(const Stmt& s, const std::set<std::string>& ops,
                      std::vector<Plan>& plans) {
  if (s.kind != StmtKind::Skip && ops.count("STD")) {
    NodeId id = s.id;
    plans.push_back({id, "STD", 0, [id](NodeIndex& ix) {
                       auto it = ix.stmts.find(id);
                       if (it == ix.stmts.end()) return false;
                       Stmt* n = it->second;
                       n->kind = StmtKind::Skip;
                       n->expr.reset();
                       n->body.clear();
                       n->else_body.clear();
                       n->has_else = false;
                       n->name.clear();
                       n->target_root.clear();
                       n->target_path.clear();
                       return true;
                     }});
  }
  if (s.expr) plan_expr(*s.expr, ops, plans);
  for (const auto& b : s.body) plan_stmt(*b, ops, plans);
  for (const auto& b : s.else_body) plan_stmt(*b, ops, plans);
}

}  // namespace detail

class UnknownClassError : public std::runtime_error {
 public:
  explicit UnknownClassError(const std::string& name)
      : std::runtime_error("unknown class '" + name + "'") {}
};

// Enumerates every applicable (node, operator, replacement) over the target
// class, ordered by (node id, operator name, replacement index). Mutants
// that fail to re-parse or type-check are skipped.
inline std::vector<Mutant> generate_mutants(
    const Program& program, const std::string& target,
    const std::set<std::string>& operators = all_operators()) {
  const auto* cls = program.cls(target);
  if (!cls) throw UnknownClassError(target);

  std::vector<detail::Plan> plans;
  for (const auto& ct : cls->ctors)
    for (const auto& s : ct.body) detail::plan_stmt(*s, operators, plans);
  for (const auto& m : cls->methods)
    for (const auto& s : m.body) detail::plan_stmt(*s, operators, plans);
  std::stable_sort(plans.begin(), plans.end(),
                   [](const detail::Plan& a, const detail::Plan& b) {
                     if (a.node != b.node) return a.node < b.node;
                     if (a.op != b.op) return a.op < b.op;
                     return a.repl_index < b.repl_index;
                   });

  std::vector<Mutant> out;
  for (const auto& plan : plans) {
    Program copy = program.clone();
    detail::NodeIndex idx = detail::index_class(copy, target);
    std::string original;
    if (auto it = idx.stmts.find(plan.node); it != idx.stmts.end())
      original = minilang::print_stmt(*it->second);
    else if (auto ie = idx.exprs.find(plan.node); ie != idx.exprs.end())
      original = minilang::print_expr(*ie->second);
    if (!plan.edit(idx)) continue;
    std::string replacement;
    if (auto it = idx.stmts.find(plan.node); it != idx.stmts.end())
      replacement = minilang::print_stmt(*it->second);
    else if (auto ie = idx.exprs.find(plan.node); ie != idx.exprs.end())
      replacement = minilang::print_expr(*ie->second);
    if (replacement == original) continue;

    std::string printed = minilang::pretty_print(copy);
    Program reparsed;
    try {
      reparsed = minilang::parse_program(printed);
    } catch (const minilang::ParseError&) {
      continue;  // not applicable: the edit does not type-check
    }
    Mutant m;
    char buf[16];
    std::snprintf(buf, sizeof buf, "m%04zu", out.size() + 1);
    m.id = buf;
    m.op = plan.op;
    m.node = plan.node;
    m.original = std::move(original);
    m.replacement = std::move(replacement);
    m.program = std::move(reparsed);
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest JSON (printed sources are written by the CLI, one file per mutant)

using json = nlohmann::ordered_json;

inline json manifest_to_json(const std::vector<Mutant>& mutants,
                             const std::string& target) {
  json list = json::array();
  for (const auto& m : mutants)
    list.push_back(json{{"id", m.id},
                        {"operator", m.op},
                        {"node", m.node},
                        {"original", m.original},
                        {"replacement", m.replacement},
                        {"file", m.id + ".mo"}});
  return json{{"class", target}, {"mutants", list}};
}

}  // namespace specfuzz::mutation
