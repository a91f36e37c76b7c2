#pragma once

// Assertion language: parser, type checker, evaluator over execution
// records, canonical printing/normalization, and a bounded-exhaustive
// equivalence oracle. Syntax and precedence are documented in
// docs/assertions.md; the language is exactly the one the fuzzer emits.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specfuzz/minilang.hpp"
#include "specfuzz/statecap.hpp"

namespace specfuzz::asserteval {

using minilang::ClassDecl;
using minilang::MethodDecl;
using minilang::ObjId;
using minilang::Program;
using minilang::Type;
using minilang::Value;
using statecap::ExecutionRecord;
using statecap::Snapshot;

// ---------------------------------------------------------------------------
// Lexing and canonical text

class AssertError : public std::runtime_error {
 public:
  AssertError(size_t pos, const std::string& msg)
      : std::runtime_error("col " + std::to_string(pos + 1) + ": " + msg), pos(pos) {}
  size_t pos;
};

namespace detail {

struct AToken {
  std::string text;
  size_t pos = 0;
  bool is_int = false;
  std::int64_t int_val = 0;
};

inline bool ident_like(const std::string& t) {
  return !t.empty() && (std::isalpha(static_cast<unsigned char>(t[0])) || t[0] == '_');
}

inline std::vector<AToken> lex(const std::string& src) {
  std::vector<AToken> out;
  size_t i = 0;
  auto prev_allows_prefix_minus = [&]() {
    if (out.empty()) return true;
    const std::string& t = out.back().text;
    if (out.back().is_int) return false;
    if (t == ")" || t == "null" || t == "true" || t == "false") return false;
    if (ident_like(t)) return t == "xor" || t == "all" || t == "exists";
    return t != ")";
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') { i++; continue; }
    size_t p = i;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < src.size() &&
         std::isdigit(static_cast<unsigned char>(src[i + 1])) &&
         prev_allows_prefix_minus())) {
      size_t j = i + (c == '-' ? 1 : 0);
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) j++;
      AToken t{src.substr(i, j - i), p, true, 0};
      try {
        t.int_val = std::stoll(t.text);
      } catch (const std::out_of_range&) {
        throw AssertError(p, "integer literal out of range");
      }
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        j++;
      out.push_back({src.substr(i, j - i), p, false, 0});
      i = j;
      continue;
    }
    auto starts = [&](const char* s) {
      return src.compare(i, std::strlen(s), s) == 0;
    };
    static const char* kOps[] = {"<==>", "==>", "==", "!=", "<=", ">=", "&&", "||"};
    bool matched = false;
    for (const char* op : kOps) {
      if (starts(op)) {
        out.push_back({op, p, false, 0});
        i += std::strlen(op);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    switch (c) {
      case '(': case ')': case ',': case '.': case ':': case '!':
      case '+': case '-': case '*': case '/': case '%': case '<': case '>':
        out.push_back({std::string(1, c), p, false, 0});
        i++;
        break;
      default:
        throw AssertError(p, std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

inline std::string join_tokens(const std::vector<AToken>& toks) {
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    const std::string& t = toks[i].text;
    if (i > 0) {
      const std::string& p = toks[i - 1].text;
      bool no_space = (t == ")" || t == "," || t == "." || t == ":") ||
                      (p == "(" || p == "." || p == "!") ||
                      (t == "(" && ident_like(p));
      if (!no_space) out += " ";
    }
    out += t;
  }
  return out;
}

}  // namespace detail

// Canonical whitespace normalization: lex then re-join. The fuzzer
// deduplicates on this form and the printer emits it.
inline std::string normalize_text(const std::string& text) {
  return detail::join_tokens(detail::lex(text));
}

// ---------------------------------------------------------------------------
// AST

enum class AOp {
  Add, Sub, Mul, Div, Mod,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or, Xor, Imp, Iff,
};

inline const char* aop_text(AOp op) {
  switch (op) {
    case AOp::Add: return "+";
    case AOp::Sub: return "-";
    case AOp::Mul: return "*";
    case AOp::Div: return "/";
    case AOp::Mod: return "%";
    case AOp::Eq: return "==";
    case AOp::Ne: return "!=";
    case AOp::Lt: return "<";
    case AOp::Le: return "<=";
    case AOp::Gt: return ">";
    case AOp::Ge: return ">=";
    case AOp::And: return "&&";
    case AOp::Or: return "||";
    case AOp::Xor: return "xor";
    case AOp::Imp: return "==>";
    case AOp::Iff: return "<==>";
  }
  return "?";
}

enum class AKind {
  IntLit, BoolLit, NullLit, Name, Field, Old, Reach, Has, Not, Neg, Binary, Quantified,
};

struct AExpr;
using AExprPtr = std::unique_ptr<AExpr>;

struct AExpr {
  AKind kind;
  std::int64_t int_val = 0;
  bool bool_val = false;
  std::string name;                     // Name; Field (field name); Quantified (var)
  std::string class_name;               // Quantified (variable class)
  bool is_all = false;                  // Quantified
  AOp op = AOp::Add;                    // Binary
  AExprPtr a, b;                        // operands / base / body
  std::vector<std::string> fields;      // Reach field list

  AExprPtr clone() const {
    auto e = std::make_unique<AExpr>();
    e->kind = kind;
    e->int_val = int_val;
    e->bool_val = bool_val;
    e->name = name;
    e->class_name = class_name;
    e->is_all = is_all;
    e->op = op;
    if (a) e->a = a->clone();
    if (b) e->b = b->clone();
    e->fields = fields;
    return e;
  }
};

struct Assertion {
  AExprPtr root;
  std::string text;  // canonical form
};

// ---------------------------------------------------------------------------
// Parser

namespace detail {

class AParser {
 public:
  explicit AParser(std::vector<AToken> toks) : toks_(std::move(toks)) {}

  AExprPtr parse() {
    AExprPtr e = parse_top();
    if (idx_ != toks_.size())
      throw AssertError(toks_[idx_].pos, "trailing input '" + toks_[idx_].text + "'");
    return e;
  }

 private:
  std::vector<AToken> toks_;
  size_t idx_ = 0;

  bool at(const char* t) const {
    return idx_ < toks_.size() && !toks_[idx_].is_int && toks_[idx_].text == t;
  }
  bool at_end() const { return idx_ >= toks_.size(); }
  size_t pos() const { return at_end() ? (toks_.empty() ? 0 : toks_.back().pos + 1) : toks_[idx_].pos; }
  void expect(const char* t) {
    if (!at(t)) throw AssertError(pos(), std::string("expected '") + t + "'");
    idx_++;
  }
  bool accept(const char* t) {
    if (at(t)) { idx_++; return true; }
    return false;
  }
  std::string expect_ident() {
    if (at_end() || toks_[idx_].is_int || !ident_like(toks_[idx_].text))
      throw AssertError(pos(), "expected identifier");
    return toks_[idx_++].text;
  }

  static AExprPtr mk(AKind k) {
    auto e = std::make_unique<AExpr>();
    e->kind = k;
    return e;
  }

  AExprPtr parse_top() {
    if (at("all") || at("exists")) {
      bool is_all = at("all");
      idx_++;
      auto q = mk(AKind::Quantified);
      q->is_all = is_all;
      q->class_name = expect_ident();
      q->name = expect_ident();
      expect(":");
      q->a = parse_iff();
      return q;
    }
    return parse_iff();
  }

  AExprPtr parse_iff() {
    auto l = parse_imp();
    while (at("<==>")) {
      idx_++;
      auto e = mk(AKind::Binary);
      e->op = AOp::Iff;
      e->a = std::move(l);
      e->b = parse_imp();
      l = std::move(e);
    }
    return l;
  }

  AExprPtr parse_imp() {
    auto l = parse_or();
    if (at("==>")) {
      idx_++;
      auto e = mk(AKind::Binary);
      e->op = AOp::Imp;
      e->a = std::move(l);
      e->b = parse_imp();  // right associative
      return e;
    }
    return l;
  }

  AExprPtr parse_or() {
    auto l = parse_xor();
    while (at("||")) {
      idx_++;
      auto e = mk(AKind::Binary);
      e->op = AOp::Or;
      e->a = std::move(l);
      e->b = parse_xor();
      l = std::move(e);
    }
    return l;
  }

  AExprPtr parse_xor() {
    auto l = parse_and();
    while (at("xor")) {
      idx_++;
      auto e = mk(AKind::Binary);
      e->op = AOp::Xor;
      e->a = std::move(l);
      e->b = parse_and();
      l = std::move(e);
    }
    return l;
  }

  AExprPtr parse_and() {
    auto l = parse_not();
    while (at("&&")) {
      idx_++;
      auto e = mk(AKind::Binary);
      e->op = AOp::And;
      e->a = std::move(l);
      e->b = parse_not();
      l = std::move(e);
    }
    return l;
  }

  // '!' negates the whole comparison to its right, matching the grammar's
  // '!' <BooleanExpr> production: "!x == y" reads as !(x == y).
  AExprPtr parse_not() {
    if (at("!")) {
      idx_++;
      auto e = mk(AKind::Not);
      e->a = parse_not();
      return e;
    }
    return parse_cmp();
  }

  AExprPtr parse_cmp() {
    auto l = parse_add();
    static const std::pair<const char*, AOp> kCmp[] = {
        {"==", AOp::Eq}, {"!=", AOp::Ne}, {"<=", AOp::Le},
        {">=", AOp::Ge}, {"<", AOp::Lt},  {">", AOp::Gt}};
    for (const auto& [t, op] : kCmp) {
      if (at(t)) {
        idx_++;
        auto e = mk(AKind::Binary);
        e->op = op;
        e->a = std::move(l);
        e->b = parse_add();
        return e;
      }
    }
    return l;
  }

  AExprPtr parse_add() {
    auto l = parse_mul();
    while (at("+") || at("-")) {
      AOp op = at("+") ? AOp::Add : AOp::Sub;
      idx_++;
      auto e = mk(AKind::Binary);
      e->op = op;
      e->a = std::move(l);
      e->b = parse_mul();
      l = std::move(e);
    }
    return l;
  }

  AExprPtr parse_mul() {
    auto l = parse_unary();
    while (at("*") || at("/") || at("%")) {
      AOp op = at("*") ? AOp::Mul : at("/") ? AOp::Div : AOp::Mod;
      idx_++;
      auto e = mk(AKind::Binary);
      e->op = op;
      e->a = std::move(l);
      e->b = parse_unary();
      l = std::move(e);
    }
    return l;
  }

  AExprPtr parse_unary() {
    if (at("-")) {
      idx_++;
      auto e = mk(AKind::Neg);
      e->a = parse_unary();
      return e;
    }
    return parse_postfix();
  }

  AExprPtr parse_postfix() {
    auto e = parse_primary();
    while (at(".")) {
      idx_++;
      std::string member = expect_ident();
      if (member == "has" && at("(")) {
        idx_++;
        auto h = mk(AKind::Has);
        h->a = std::move(e);
        h->b = parse_top();
        expect(")");
        e = std::move(h);
      } else {
        auto f = mk(AKind::Field);
        f->name = member;
        f->a = std::move(e);
        e = std::move(f);
      }
    }
    return e;
  }


  AExprPtr parse_primary() {
    if (at_end()) throw AssertError(pos(), "unexpected end of input");
    const AToken& t = toks_[idx_];
    if (t.is_int) {
      idx_++;
      auto e = mk(AKind::IntLit);
      e->int_val = t.int_val;
      return e;
    }
    if (accept("true")) { auto e = mk(AKind::BoolLit); e->bool_val = true; return e; }
    if (accept("false")) { auto e = mk(AKind::BoolLit); e->bool_val = false; return e; }
    if (accept("null")) return mk(AKind::NullLit);
    if (at("old")) {
      idx_++;
      expect("(");
      auto e = mk(AKind::Old);
      e->a = parse_path();
      expect(")");
      return e;
    }
    if (at("reach")) {
      idx_++;
      expect("(");
      auto e = mk(AKind::Reach);
      e->a = parse_path();
      expect(",");
      do {
        e->fields.push_back(expect_ident());
      } while (accept(","));
      expect(")");
      return e;
    }
    if (at("(")) {
      idx_++;
      auto e = parse_top();
      expect(")");
      return e;
    }
    if (ident_like(t.text)) {
      idx_++;
      auto e = mk(AKind::Name);
      e->name = t.text;
      return e;
    }
    throw AssertError(t.pos, "expected expression, found '" + t.text + "'");
  }

  // old() and reach() take plain navigation paths.
  AExprPtr parse_path() {
    auto e = mk(AKind::Name);
    e->name = expect_ident();
    AExprPtr cur = std::move(e);
    while (at(".")) {
      idx_++;
      auto f = mk(AKind::Field);
      f->name = expect_ident();
      f->a = std::move(cur);
      cur = std::move(f);
    }
    return cur;
  }
};

// ---------------------------------------------------------------------------
// Printer

inline int aprec(const AExpr& e) {
  switch (e.kind) {
    case AKind::Quantified: return 0;
    case AKind::Binary:
      switch (e.op) {
        case AOp::Iff: return 1;
        case AOp::Imp: return 2;
        case AOp::Or: return 3;
        case AOp::Xor: return 4;
        case AOp::And: return 5;
        case AOp::Eq: case AOp::Ne: case AOp::Lt:
        case AOp::Le: case AOp::Gt: case AOp::Ge: return 7;
        case AOp::Add: case AOp::Sub: return 8;
        case AOp::Mul: case AOp::Div: case AOp::Mod: return 9;
      }
      return 12;
    case AKind::Not: return 6;
    case AKind::Neg: return 10;
    default: return 12;
  }
}

inline void print_expr(const AExpr& e, int parent, std::string& out) {
  int p = aprec(e);
  bool parens = p < parent;
  if (parens) out += "(";
  switch (e.kind) {
    case AKind::IntLit: out += std::to_string(e.int_val); break;
    case AKind::BoolLit: out += e.bool_val ? "true" : "false"; break;
    case AKind::NullLit: out += "null"; break;
    case AKind::Name: out += e.name; break;
    case AKind::Field:
      print_expr(*e.a, 11, out);
      out += "." + e.name;
      break;
    case AKind::Old:
      out += "old(";
      print_expr(*e.a, 0, out);
      out += ")";
      break;
    case AKind::Reach:
      out += "reach(";
      print_expr(*e.a, 0, out);
      for (const auto& f : e.fields) out += ", " + f;
      out += ")";
      break;
    case AKind::Has:
      print_expr(*e.a, 11, out);
      out += ".has(";
      print_expr(*e.b, 0, out);
      out += ")";
      break;
    case AKind::Not:
      out += "!";
      print_expr(*e.a, p, out);
      break;
    case AKind::Neg:
      out += "-";
      print_expr(*e.a, p, out);
      break;
    case AKind::Binary: {
      bool right_assoc = e.op == AOp::Imp;
      print_expr(*e.a, right_assoc ? p + 1 : p, out);
      out += std::string(" ") + aop_text(e.op) + " ";
      print_expr(*e.b, right_assoc ? p : p + 1, out);
      break;
    }
    case AKind::Quantified:
      out += (e.is_all ? "all " : "exists ") + e.class_name + " " + e.name + ": ";
      print_expr(*e.a, 0, out);
      break;
  }
  if (parens) out += ")";
}

}  // namespace detail

inline std::string print_assertion(const AExpr& e) {
  std::string out;
  detail::print_expr(e, 0, out);
  return normalize_text(out);
}

inline Assertion parse_assertion(const std::string& text) {
  detail::AParser parser(detail::lex(text));
  Assertion a;
  a.root = parser.parse();
  a.text = print_assertion(*a.root);
  return a;
}

// ---------------------------------------------------------------------------
// Type checking against a class/method context

struct TypeContext {
  const Program* program = nullptr;
  const ClassDecl* cls = nullptr;
  const MethodDecl* method = nullptr;  // may be null (class-level context)
};

namespace detail {

struct AType {
  Type type;
  bool is_set = false;  // element type in `type`
};

class ATypeChecker {
 public:
  ATypeChecker(const TypeContext& ctx) : ctx_(ctx) {}

  std::optional<std::string> check(const AExpr& root) {
    try {
      AType t = infer(root, false);
      if (t.is_set || !t.type.is_bool()) return "assertion is not boolean";
      return std::nullopt;
    } catch (const std::runtime_error& e) {
      return std::string(e.what());
    }
  }

 private:
  const TypeContext& ctx_;
  std::vector<std::pair<std::string, std::string>> bound_;  // var -> class

  [[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

  AType infer(const AExpr& e, bool in_old) {
    switch (e.kind) {
      case AKind::IntLit: return {Type::Int()};
      case AKind::BoolLit: return {Type::Bool()};
      case AKind::NullLit: return {Type::Class("")};
      case AKind::Name: {
        for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
          if (it->first == e.name) return {Type::Class(it->second)};
        if (e.name == "this") return {Type::Class(ctx_.cls->name)};
        if (e.name == "result") {
          if (in_old) fail("'result' is not readable in the pre-state");
          if (!ctx_.method || ctx_.method->return_type.is_void())
            fail("unknown symbol 'result'");
          return {ctx_.method->return_type};
        }
        if (ctx_.method)
          for (const auto& p : ctx_.method->params)
            if (p.name == e.name) return {p.type};
        if (ctx_.cls->constant(e.name)) return {Type::Int()};
        fail("unknown symbol '" + e.name + "'");
      }
      case AKind::Field: {
        AType base = infer(*e.a, in_old);
        if (base.is_set || !base.type.is_class() || base.type.class_name.empty())
          fail("field navigation on non-object");
        const ClassDecl* cd = ctx_.program->cls(base.type.class_name);
        const auto* fd = cd ? cd->field(e.name) : nullptr;
        if (!fd) fail("unknown field '" + e.name + "'");
        return {fd->type};
      }
      case AKind::Old: {
        if (in_old) fail("nested old()");
        return infer(*e.a, true);
      }
      case AKind::Reach: {
        AType base = infer(*e.a, in_old);
        if (base.is_set || !base.type.is_class() || base.type.class_name.empty())
          fail("reach() needs an object expression");
        const ClassDecl* cd = ctx_.program->cls(base.type.class_name);
        for (const auto& f : e.fields) {
          const auto* fd = cd->field(f);
          if (!fd || !fd->type.is_class())
            fail("reach() field '" + f + "' is not a reference field of " + cd->name);
        }
        return {base.type, true};
      }
      case AKind::Has: {
        AType set = infer(*e.a, in_old);
        if (!set.is_set) fail(".has() needs a set expression");
        AType arg = infer(*e.b, in_old);
        if (arg.is_set || !arg.type.is_class())
          fail(".has() argument must be an object");
        if (!arg.type.class_name.empty() &&
            arg.type.class_name != set.type.class_name)
          fail(".has() argument class mismatch");
        return {Type::Bool()};
      }
      case AKind::Not: {
        AType t = infer(*e.a, in_old);
        if (t.is_set || !t.type.is_bool()) fail("'!' needs a boolean operand");
        return {Type::Bool()};
      }
      case AKind::Neg: {
        AType t = infer(*e.a, in_old);
        if (t.is_set || !t.type.is_int()) fail("unary '-' needs an integer operand");
        return {Type::Int()};
      }
      case AKind::Binary: {
        AType l = infer(*e.a, in_old);
        AType r = infer(*e.b, in_old);
        if (l.is_set || r.is_set) fail("set expressions only appear in .has()");
        switch (e.op) {
          case AOp::Add: case AOp::Sub: case AOp::Mul: case AOp::Div: case AOp::Mod:
            if (!l.type.is_int() || !r.type.is_int()) fail("arithmetic needs integers");
            return {Type::Int()};
          case AOp::Lt: case AOp::Le: case AOp::Gt: case AOp::Ge:
            if (!l.type.is_int() || !r.type.is_int()) fail("comparison needs integers");
            return {Type::Bool()};
          case AOp::Eq: case AOp::Ne: {
            bool ok = (l.type.is_int() && r.type.is_int()) ||
                      (l.type.is_bool() && r.type.is_bool()) ||
                      (l.type.is_class() && r.type.is_class() &&
                       (l.type.class_name.empty() || r.type.class_name.empty() ||
                        l.type.class_name == r.type.class_name));
            if (!ok) fail("cannot compare " + l.type.str() + " with " + r.type.str());
            return {Type::Bool()};
          }
          case AOp::And: case AOp::Or: case AOp::Xor: case AOp::Imp: case AOp::Iff:
            if (!l.type.is_bool() || !r.type.is_bool())
              fail("logical operator needs boolean operands");
            return {Type::Bool()};
        }
        return {Type::Bool()};
      }
      case AKind::Quantified: {
        if (!ctx_.program->cls(e.class_name))
          fail("unknown class '" + e.class_name + "' in quantifier");
        bound_.emplace_back(e.name, e.class_name);
        AType t = infer(*e.a, in_old);
        bound_.pop_back();
        if (t.is_set || !t.type.is_bool()) fail("quantifier body must be boolean");
        return {Type::Bool()};
      }
    }
    fail("unreachable");
  }
};

}  // namespace detail

inline std::optional<std::string> type_check(const AExpr& root, const TypeContext& ctx) {
  return detail::ATypeChecker(ctx).check(root);
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalOutcome {
  enum class Kind { True, False, Error };
  enum class Err { NullDeref, DivByZero, UnknownSymbol };
  Kind kind = Kind::Error;
  Err err = Err::UnknownSymbol;
  std::string detail;

  static EvalOutcome make(bool b) {
    EvalOutcome o;
    o.kind = b ? Kind::True : Kind::False;
    return o;
  }
  static EvalOutcome error(Err e, std::string d) {
    EvalOutcome o;
    o.kind = Kind::Error;
    o.err = e;
    o.detail = std::move(d);
    return o;
  }
  bool is_true() const { return kind == Kind::True; }
  bool is_false() const { return kind == Kind::False; }
  bool is_error() const { return kind == Kind::Error; }
  // Error counts as falsification downstream.
  bool as_bool_lenient() const { return kind == Kind::True; }
};

namespace detail {

struct EvalAbort {
  EvalOutcome::Err err;
  std::string detail;
};

struct EValue {
  enum class Kind { Int, Bool, Null, Ref, Set } kind = Kind::Null;
  std::int64_t i = 0;
  bool b = false;
  ObjId ref = 0;
  std::vector<ObjId> set;  // sorted

  static EValue from(const Value& v) {
    EValue e;
    switch (v.kind) {
      case Value::Kind::Int: e.kind = Kind::Int; e.i = v.i; break;
      case Value::Kind::Bool: e.kind = Kind::Bool; e.b = v.b; break;
      case Value::Kind::Null: e.kind = Kind::Null; break;
      case Value::Kind::Ref: e.kind = Kind::Ref; e.ref = v.ref; break;
    }
    return e;
  }
};

class Evaluator {
 public:
  explicit Evaluator(const ExecutionRecord& rec) : rec_(rec) {}

  EvalOutcome run(const AExpr& root) {
    try {
      EValue v = eval(root, false);
      if (v.kind != EValue::Kind::Bool)
        return EvalOutcome::error(EvalOutcome::Err::UnknownSymbol,
                                  "assertion did not evaluate to a boolean");
      return EvalOutcome::make(v.b);
    } catch (const EvalAbort& a) {
      return EvalOutcome::error(a.err, a.detail);
    }
  }

 private:
  const ExecutionRecord& rec_;
  std::vector<std::pair<std::string, ObjId>> bound_;

  [[noreturn]] void abort(EvalOutcome::Err e, std::string d) {
    throw EvalAbort{e, std::move(d)};
  }

  const Snapshot& snap(bool pre) const { return pre ? rec_.pre : rec_.post; }

  EValue eval(const AExpr& e, bool in_old) {
    switch (e.kind) {
      case AKind::IntLit: { EValue v; v.kind = EValue::Kind::Int; v.i = e.int_val; return v; }
      case AKind::BoolLit: { EValue v; v.kind = EValue::Kind::Bool; v.b = e.bool_val; return v; }
      case AKind::NullLit: return EValue{};
      case AKind::Name: return eval_name(e.name, in_old);
      case AKind::Field: {
        EValue base = eval(*e.a, in_old);
        if (base.kind == EValue::Kind::Null)
          abort(EvalOutcome::Err::NullDeref, "null on path at '." + e.name + "'");
        if (base.kind != EValue::Kind::Ref)
          abort(EvalOutcome::Err::UnknownSymbol, "field read on non-object");
        const auto* obj = snap(in_old).object(base.ref);
        if (!obj)
          abort(EvalOutcome::Err::UnknownSymbol,
                in_old ? "object not present in pre-state" : "dangling reference");
        auto v = obj->get(e.name);
        if (!v) abort(EvalOutcome::Err::UnknownSymbol, "unknown field '" + e.name + "'");
        return EValue::from(*v);
      }
      case AKind::Old:
        return eval(*e.a, true);
      case AKind::Reach: {
        EValue base = eval(*e.a, in_old);
        EValue out;
        out.kind = EValue::Kind::Set;
        if (base.kind == EValue::Kind::Null) return out;  // empty from null
        if (base.kind != EValue::Kind::Ref)
          abort(EvalOutcome::Err::UnknownSymbol, "reach() on non-object");
        Value start = Value::Ref(base.ref);
        out.set = statecap::reach(snap(in_old), start, e.fields);
        return out;
      }
      case AKind::Has: {
        EValue set = eval(*e.a, in_old);
        EValue arg = eval(*e.b, in_old);
        if (set.kind != EValue::Kind::Set)
          abort(EvalOutcome::Err::UnknownSymbol, ".has() on non-set");
        if (arg.kind != EValue::Kind::Ref && arg.kind != EValue::Kind::Null)
          abort(EvalOutcome::Err::UnknownSymbol, ".has() argument is not an object");
        EValue v;
        v.kind = EValue::Kind::Bool;
        v.b = arg.kind == EValue::Kind::Ref &&
              std::binary_search(set.set.begin(), set.set.end(), arg.ref);
        return v;
      }
      case AKind::Not: {
        EValue v = eval(*e.a, in_old);
        if (v.kind != EValue::Kind::Bool)
          abort(EvalOutcome::Err::UnknownSymbol, "'!' on non-boolean");
        v.b = !v.b;
        return v;
      }
      case AKind::Neg: {
        EValue v = eval(*e.a, in_old);
        if (v.kind != EValue::Kind::Int)
          abort(EvalOutcome::Err::UnknownSymbol, "unary '-' on non-integer");
        v.i = minilang::detail::wrap_neg(v.i);
        return v;
      }
      case AKind::Binary: return eval_binary(e, in_old);
      case AKind::Quantified: return eval_quantified(e, in_old);
    }
    abort(EvalOutcome::Err::UnknownSymbol, "unreachable");
  }

  EValue eval_name(const std::string& name, bool in_old) {
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it) {
      if (it->first == name) {
        EValue v;
        v.kind = EValue::Kind::Ref;
        v.ref = it->second;
        return v;
      }
    }
    const Snapshot& s = snap(in_old);
    if (auto r = s.root(name)) return EValue::from(*r);
    if (auto c = s.constant(name)) {
      EValue v;
      v.kind = EValue::Kind::Int;
      v.i = *c;
      return v;
    }
    abort(EvalOutcome::Err::UnknownSymbol, "unknown symbol '" + name + "'");
  }

  bool as_bool(const EValue& v) {
    if (v.kind != EValue::Kind::Bool)
      abort(EvalOutcome::Err::UnknownSymbol, "expected boolean operand");
    return v.b;
  }
  std::int64_t as_int(const EValue& v) {
    if (v.kind != EValue::Kind::Int)
      abort(EvalOutcome::Err::UnknownSymbol, "expected integer operand");
    return v.i;
  }

  EValue eval_binary(const AExpr& e, bool in_old) {
    using K = EValue::Kind;
    // Short-circuit forms first; a fault in the discarded branch must not
    // surface.
    if (e.op == AOp::And || e.op == AOp::Or || e.op == AOp::Imp) {
      bool l = as_bool(eval(*e.a, in_old));
      EValue v;
      v.kind = K::Bool;
      if (e.op == AOp::And && !l) { v.b = false; return v; }
      if (e.op == AOp::Or && l) { v.b = true; return v; }
      if (e.op == AOp::Imp && !l) { v.b = true; return v; }
      v.b = as_bool(eval(*e.b, in_old));
      return v;
    }
    EValue l = eval(*e.a, in_old);
    EValue r = eval(*e.b, in_old);
    EValue v;
    switch (e.op) {
      case AOp::Add: v.kind = K::Int; v.i = minilang::detail::wrap_add(as_int(l), as_int(r)); return v;
      case AOp::Sub: v.kind = K::Int; v.i = minilang::detail::wrap_sub(as_int(l), as_int(r)); return v;
      case AOp::Mul: v.kind = K::Int; v.i = minilang::detail::wrap_mul(as_int(l), as_int(r)); return v;
      case AOp::Div: {
        std::int64_t a = as_int(l), b = as_int(r);
        if (b == 0) abort(EvalOutcome::Err::DivByZero, "division by zero");
        v.kind = K::Int;
        v.i = (a == INT64_MIN && b == -1) ? INT64_MIN : a / b;
        return v;
      }
      case AOp::Mod: {
        std::int64_t a = as_int(l), b = as_int(r);
        if (b == 0) abort(EvalOutcome::Err::DivByZero, "modulo by zero");
        v.kind = K::Int;
        v.i = (a == INT64_MIN && b == -1) ? 0 : a % b;
        return v;
      }
      case AOp::Lt: v.kind = K::Bool; v.b = as_int(l) < as_int(r); return v;
      case AOp::Le: v.kind = K::Bool; v.b = as_int(l) <= as_int(r); return v;
      case AOp::Gt: v.kind = K::Bool; v.b = as_int(l) > as_int(r); return v;
      case AOp::Ge: v.kind = K::Bool; v.b = as_int(l) >= as_int(r); return v;
      case AOp::Eq: case AOp::Ne: {
        bool eq;
        if (l.kind == K::Int && r.kind == K::Int) eq = l.i == r.i;
        else if (l.kind == K::Bool && r.kind == K::Bool) eq = l.b == r.b;
        else if ((l.kind == K::Ref || l.kind == K::Null) &&
                 (r.kind == K::Ref || r.kind == K::Null))
          eq = l.kind == r.kind && (l.kind != K::Ref || l.ref == r.ref);
        else {
          abort(EvalOutcome::Err::UnknownSymbol, "incomparable operands");
        }
        v.kind = K::Bool;
        v.b = e.op == AOp::Eq ? eq : !eq;
        return v;
      }
      case AOp::Xor: v.kind = K::Bool; v.b = as_bool(l) != as_bool(r); return v;
      case AOp::Iff: v.kind = K::Bool; v.b = as_bool(l) == as_bool(r); return v;
      default: break;
    }
    abort(EvalOutcome::Err::UnknownSymbol, "unreachable");
  }

  // Quantifier domain: all objects of the declared class in the post-state
  // object graph, ascending id order.
  EValue eval_quantified(const AExpr& e, bool in_old) {
    auto domain = rec_.post.objects_of_class(e.class_name);
    EValue v;
    v.kind = EValue::Kind::Bool;
    for (ObjId id : domain) {
      bound_.emplace_back(e.name, id);
      bool b;
      try {
        b = as_bool(eval(*e.a, in_old));
      } catch (...) {
        bound_.pop_back();
        throw;
      }
      bound_.pop_back();
      if (e.is_all && !b) { v.b = false; return v; }
      if (!e.is_all && b) { v.b = true; return v; }
    }
    v.b = e.is_all;
    return v;
  }
};

}  // namespace detail

inline EvalOutcome evaluate(const AExpr& assertion, const ExecutionRecord& record) {
  return detail::Evaluator(record).run(assertion);
}

inline EvalOutcome evaluate(const Assertion& assertion, const ExecutionRecord& record) {
  return detail::Evaluator(record).run(*assertion.root);
}

// ---------------------------------------------------------------------------
// Bounded-exhaustive equivalence oracle

class DomainTooLarge : public std::runtime_error {
 public:
  DomainTooLarge() : std::runtime_error("bounded domain exceeds the configured cap") {}
};

// A bounded record generator: invokes the sink for every record in the
// domain. Implementations must be deterministic.
using RecordDomain = std::function<void(const std::function<void(const ExecutionRecord&)>&)>;

struct EquivResult {
  bool equivalent = true;
  std::optional<ExecutionRecord> counterexample;
};

// Outcomes agree on every record in the domain (Error treated as False).
inline EquivResult bounded_equiv(const AExpr& a, const AExpr& b,
                                 const RecordDomain& domain) {
  EquivResult res;
  domain([&](const ExecutionRecord& rec) {
    if (!res.equivalent) return;
    bool va = evaluate(a, rec).as_bool_lenient();
    bool vb = evaluate(b, rec).as_bool_lenient();
    if (va != vb) {
      res.equivalent = false;
      res.counterexample = rec;
    }
  });
  return res;
}

inline EquivResult bounded_equiv(const Assertion& a, const Assertion& b,
                                 const RecordDomain& domain) {
  return bounded_equiv(*a.root, *b.root, domain);
}

// Left-fold conjunction; empty input yields `true`.
inline AExprPtr make_conjunction(const std::vector<const AExpr*>& parts) {
  if (parts.empty()) {
    auto e = std::make_unique<AExpr>();
    e->kind = AKind::BoolLit;
    e->bool_val = true;
    return e;
  }
  AExprPtr acc = parts[0]->clone();
  for (size_t i = 1; i < parts.size(); ++i) {
    auto e = std::make_unique<AExpr>();
    e->kind = AKind::Binary;
    e->op = AOp::And;
    e->a = std::move(acc);
    e->b = parts[i]->clone();
    acc = std::move(e);
  }
  return acc;
}

// P entails G over the domain iff (P && G) is bounded-equivalent to P.
inline EquivResult bounded_entails(const std::vector<const AExpr*>& premises,
                                   const AExpr& goal, const RecordDomain& domain) {
  AExprPtr p = make_conjunction(premises);
  auto conj = std::make_unique<AExpr>();
  conj->kind = AKind::Binary;
  conj->op = AOp::And;
  conj->a = p->clone();
  conj->b = goal.clone();
  return bounded_equiv(*conj, *p, domain);
}

// ---------------------------------------------------------------------------
// Domain builders

// All integer argument combinations in [lo, hi] for one method; the receiver
// is built with the class's zero-argument constructor. Executions that fail
// contribute no record.
inline RecordDomain int_args_domain(const Program& program, const std::string& cls,
                                    const std::string& method, std::int64_t lo,
                                    std::int64_t hi,
                                    std::int64_t cap = 5'000'000) {
  return [=, &program](const std::function<void(const ExecutionRecord&)>& sink) {
    const auto* cd = program.cls(cls);
    const auto* md = cd->method(method);
    size_t arity = md->params.size();
    std::vector<std::int64_t> args(arity, lo);
    std::int64_t count = 0;
    while (true) {
      statecap::CaseSpec cs;
      cs.class_name = cls;
      cs.ctor_index = 0;
      statecap::CallSpec call;
      call.method = method;
      for (size_t i = 0; i < arity; ++i)
        call.args.push_back(statecap::ArgSpec::lit(Value::Int(args[i])));
      cs.calls.push_back(std::move(call));
      if (++count > cap) throw DomainTooLarge();
      std::vector<ExecutionRecord> recs;
      auto failed = statecap::collect_records(program, cs, method,
                                              minilang::kDefaultStepBudget, count,
                                              "domain", recs);
      if (!failed && !recs.empty()) sink(recs.back());
      // advance the odometer
      size_t i = 0;
      for (; i < arity; ++i) {
        if (args[i] < hi) { args[i]++; break; }
        args[i] = lo;
      }
      if (i == arity) break;
      if (arity == 0) break;
    }
  };
}

// All singly-linked chains of 1..max_nodes objects of `cls` (field `next_field`
// links them, `elem_field` takes every value in `elems`), with every method
// argument drawn from `arg_pool`. The method runs against each prepared heap.
inline RecordDomain chain_domain(const Program& program, const std::string& cls,
                                 const std::string& next_field,
                                 const std::string& elem_field, int max_nodes,
                                 std::vector<std::int64_t> elems,
                                 const std::string& method,
                                 std::vector<std::int64_t> arg_pool,
                                 std::int64_t cap = 5'000'000) {
  return [=, &program](const std::function<void(const ExecutionRecord&)>& sink) {
    const auto* cd = program.cls(cls);
    const auto* md = cd->method(method);
    size_t arity = md->params.size();
    std::int64_t count = 0;

    std::vector<std::int64_t> chain;
    std::function<void()> emit = [&]() {
      // argument odometer over arg_pool
      std::vector<size_t> ai(arity, 0);
      while (true) {
        minilang::Heap heap;
        std::vector<ObjId> ids;
        for (size_t k = 0; k < chain.size(); ++k) ids.push_back(heap.alloc(*cd));
        for (size_t k = 0; k < chain.size(); ++k) {
          heap.at(ids[k]).set(elem_field, Value::Int(chain[k]));
          heap.at(ids[k]).set(next_field, k + 1 < chain.size()
                                              ? Value::Ref(ids[k + 1])
                                              : Value::Null());
        }
        Value receiver = Value::Ref(ids[0]);
        std::vector<Value> args;
        std::vector<std::pair<std::string, Value>> named;
        for (size_t k = 0; k < arity; ++k) {
          args.push_back(Value::Int(arg_pool[ai[k]]));
          named.emplace_back(md->params[k].name, args.back());
        }
        if (++count > cap) throw DomainTooLarge();
        auto roots = named;
        roots.insert(roots.begin(), {"this", receiver});
        Snapshot pre = statecap::capture(heap, program, cls, roots);
        auto res = minilang::run_method(program, receiver, method, args, heap,
                                        minilang::kDefaultStepBudget);
        if (res.ok()) {
          if (res.value) roots.emplace_back("result", *res.value);
          ExecutionRecord rec;
          rec.class_name = cls;
          rec.method = method;
          rec.pre = std::move(pre);
          rec.args = named;
          rec.post = statecap::capture(heap, program, cls, roots);
          rec.result = res.value;
          rec.test_id = count;
          rec.mutant_id = "domain";
          sink(rec);
        }
        size_t k = 0;
        for (; k < arity; ++k) {
          if (ai[k] + 1 < arg_pool.size()) { ai[k]++; break; }
          ai[k] = 0;
        }
        if (k == arity) break;
        if (arity == 0) break;
      }
    };

    std::function<void(int)> build = [&](int remaining) {
      if (!chain.empty()) emit();
      if (remaining == 0) return;
      for (std::int64_t e : elems) {
        chain.push_back(e);
        build(remaining - 1);
        chain.pop_back();
      }
    };
    build(max_nodes);
  };
}

// Materialized domain for reuse across many equivalence checks.
inline std::vector<ExecutionRecord> materialize(const RecordDomain& domain) {
  std::vector<ExecutionRecord> out;
  domain([&](const ExecutionRecord& r) { out.push_back(r); });
  return out;
}

inline RecordDomain from_records(const std::vector<ExecutionRecord>& records) {
  return [&records](const std::function<void(const ExecutionRecord&)>& sink) {
    for (const auto& r : records) sink(r);
  };
}

}  // namespace specfuzz::asserteval
