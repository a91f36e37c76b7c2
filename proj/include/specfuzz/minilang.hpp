#pragma once

// MiniObj: a small object-oriented subject language (parser, type checker,
// pretty printer, big-step interpreter). Analysis targets are written in
// MiniObj; every later stage (state capture, mutation, detection) operates
// on the structures defined here. The language has 64-bit wrapping integer
// arithmetic, booleans, null, and single-dispatch classes; no inheritance,
// strings, floats, or exceptions. Grammar is documented in docs/minilang.md.

#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace specfuzz::minilang {

// ---------------------------------------------------------------------------
// Source positions and errors

struct SrcPos {
  int line = 0;
  int col = 0;
};

enum class ErrorKind { Syntax, Type, DuplicateName };

class ParseError : public std::runtime_error {
 public:
  ParseError(ErrorKind kind, SrcPos pos, const std::string& msg)
      : std::runtime_error("line " + std::to_string(pos.line) + ":" +
                           std::to_string(pos.col) + ": " + msg),
        kind(kind),
        pos(pos) {}
  ErrorKind kind;
  SrcPos pos;
};

// ---------------------------------------------------------------------------
// Types

enum class TypeKind { Int, Bool, Void, Class };

struct Type {
  TypeKind kind = TypeKind::Void;
  std::string class_name;  // set iff kind == Class

  static Type Int() { return {TypeKind::Int, {}}; }
  static Type Bool() { return {TypeKind::Bool, {}}; }
  static Type Void() { return {TypeKind::Void, {}}; }
  static Type Class(std::string name) { return {TypeKind::Class, std::move(name)}; }

  bool is_int() const { return kind == TypeKind::Int; }
  bool is_bool() const { return kind == TypeKind::Bool; }
  bool is_void() const { return kind == TypeKind::Void; }
  bool is_class() const { return kind == TypeKind::Class; }

  bool operator==(const Type& o) const {
    return kind == o.kind && class_name == o.class_name;
  }
  bool operator!=(const Type& o) const { return !(*this == o); }

  std::string str() const {
    switch (kind) {
      case TypeKind::Int: return "Int";
      case TypeKind::Bool: return "Bool";
      case TypeKind::Void: return "Void";
      case TypeKind::Class: return class_name;
    }
    return "?";
  }
};

// ---------------------------------------------------------------------------
// AST

using NodeId = int;

enum class BinOp {
  Add, Sub, Mul, Div, Mod,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or,
};

inline const char* binop_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

enum class ExprKind {
  IntLit, BoolLit, NullLit, VarRef, FieldRead, New, Call, Unary, Binary,
};

enum class UnOp { Not, Neg };

struct Expr {
  NodeId id = -1;
  ExprKind kind;
  SrcPos pos;
  Type type;  // filled by the type checker

  std::int64_t int_val = 0;       // IntLit
  bool bool_val = false;          // BoolLit
  std::string name;               // VarRef, FieldRead (field), New/Call (callee)
  UnOp un_op = UnOp::Not;         // Unary
  BinOp bin_op = BinOp::Add;      // Binary
  std::unique_ptr<Expr> lhs;      // Unary/Binary operand, FieldRead/Call base
  std::unique_ptr<Expr> rhs;      // Binary
  std::vector<std::unique_ptr<Expr>> args;  // New, Call

  std::unique_ptr<Expr> clone() const {
    auto e = std::make_unique<Expr>();
    e->id = id;
    e->kind = kind;
    e->pos = pos;
    e->type = type;
    e->int_val = int_val;
    e->bool_val = bool_val;
    e->name = name;
    e->un_op = un_op;
    e->bin_op = bin_op;
    if (lhs) e->lhs = lhs->clone();
    if (rhs) e->rhs = rhs->clone();
    for (const auto& a : args) e->args.push_back(a->clone());
    return e;
  }
};

enum class StmtKind { VarDecl, Assign, If, While, Return, ExprStmt, Skip };

struct Stmt {
  NodeId id = -1;
  StmtKind kind;
  SrcPos pos;

  std::string name;                     // VarDecl name
  Type decl_type;                       // VarDecl type
  std::string target_root;              // Assign: local/param name or "this"
  std::vector<std::string> target_path; // Assign: field path from root
  std::unique_ptr<Expr> expr;           // VarDecl init, Assign rhs, If/While cond, Return value, ExprStmt
  std::vector<std::unique_ptr<Stmt>> body;       // If then, While body
  std::vector<std::unique_ptr<Stmt>> else_body;  // If else
  bool has_else = false;

  std::unique_ptr<Stmt> clone() const {
    auto s = std::make_unique<Stmt>();
    s->id = id;
    s->kind = kind;
    s->pos = pos;
    s->name = name;
    s->decl_type = decl_type;
    s->target_root = target_root;
    s->target_path = target_path;
    if (expr) s->expr = expr->clone();
    for (const auto& b : body) s->body.push_back(b->clone());
    for (const auto& b : else_body) s->else_body.push_back(b->clone());
    s->has_else = has_else;
    return s;
  }
};

struct Param {
  std::string name;
  Type type;
};

struct MethodDecl {
  std::string name;
  std::vector<Param> params;
  Type return_type;
  std::vector<std::unique_ptr<Stmt>> body;

  MethodDecl clone() const {
    MethodDecl m;
    m.name = name;
    m.params = params;
    m.return_type = return_type;
    for (const auto& s : body) m.body.push_back(s->clone());
    return m;
  }
};

struct CtorDecl {
  bool is_private = false;
  std::vector<Param> params;
  std::vector<std::unique_ptr<Stmt>> body;

  CtorDecl clone() const {
    CtorDecl c;
    c.is_private = is_private;
    c.params = params;
    for (const auto& s : body) c.body.push_back(s->clone());
    return c;
  }
};

struct FieldDecl {
  std::string name;
  Type type;
};

struct ConstDecl {
  std::string name;
  std::int64_t value = 0;
};

struct ClassDecl {
  std::string name;
  std::vector<FieldDecl> fields;
  std::vector<ConstDecl> constants;
  std::vector<CtorDecl> ctors;
  std::vector<MethodDecl> methods;

  const FieldDecl* field(const std::string& f) const {
    for (const auto& fd : fields)
      if (fd.name == f) return &fd;
    return nullptr;
  }
  const MethodDecl* method(const std::string& m) const {
    for (const auto& md : methods)
      if (md.name == m) return &md;
    return nullptr;
  }
  const ConstDecl* constant(const std::string& c) const {
    for (const auto& cd : constants)
      if (cd.name == c) return &cd;
    return nullptr;
  }

  ClassDecl clone() const {
    ClassDecl c;
    c.name = name;
    c.fields = fields;
    c.constants = constants;
    for (const auto& ct : ctors) c.ctors.push_back(ct.clone());
    for (const auto& m : methods) c.methods.push_back(m.clone());
    return c;
  }
};

struct Program {
  std::vector<ClassDecl> classes;

  const ClassDecl* cls(const std::string& name) const {
    for (const auto& c : classes)
      if (c.name == name) return &c;
    return nullptr;
  }

  Program clone() const {
    Program p;
    for (const auto& c : classes) p.classes.push_back(c.clone());
    return p;
  }
};

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class Tok {
  End, Ident, Int,
  KwClass, KwField, KwConst, KwNew, KwMethod, KwVar, KwIf, KwElse, KwWhile,
  KwReturn, KwTrue, KwFalse, KwNull, KwThis, KwSkip, KwPrivate,
  LBrace, RBrace, LParen, RParen, Comma, Semi, Colon, Dot, Assign,
  Plus, Minus, Star, Slash, Percent,
  EqEq, NotEq, Lt, Le, Gt, Ge, AndAnd, OrOr, Bang,
};

struct Token {
  Tok kind;
  std::string text;
  std::int64_t int_val = 0;
  SrcPos pos;
};

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto pos = [&]() { return SrcPos{line, col}; };
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') { line++; col = 1; } else { col++; }
    }
    i += n;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { advance(1); continue; }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SrcPos p = pos();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) j++;
      std::string text = src.substr(i, j - i);
      Token t{Tok::Int, text, 0, p};
      try {
        t.int_val = std::stoll(text);
      } catch (const std::out_of_range&) {
        throw ParseError(ErrorKind::Syntax, p, "integer literal out of 64-bit range");
      }
      out.push_back(std::move(t));
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        j++;
      std::string text = src.substr(i, j - i);
      Tok k = Tok::Ident;
      if (text == "class") k = Tok::KwClass;
      else if (text == "field") k = Tok::KwField;
      else if (text == "const") k = Tok::KwConst;
      else if (text == "new") k = Tok::KwNew;
      else if (text == "method") k = Tok::KwMethod;
      else if (text == "var") k = Tok::KwVar;
      else if (text == "if") k = Tok::KwIf;
      else if (text == "else") k = Tok::KwElse;
      else if (text == "while") k = Tok::KwWhile;
      else if (text == "return") k = Tok::KwReturn;
      else if (text == "true") k = Tok::KwTrue;
      else if (text == "false") k = Tok::KwFalse;
      else if (text == "null") k = Tok::KwNull;
      else if (text == "this") k = Tok::KwThis;
      else if (text == "skip") k = Tok::KwSkip;
      else if (text == "private") k = Tok::KwPrivate;
      out.push_back({k, text, 0, p});
      advance(j - i);
      continue;
    }
    auto two = [&](char a, char b) {
      return c == a && i + 1 < src.size() && src[i + 1] == b;
    };
    if (two('=', '=')) { out.push_back({Tok::EqEq, "==", 0, p}); advance(2); continue; }
    if (two('!', '=')) { out.push_back({Tok::NotEq, "!=", 0, p}); advance(2); continue; }
    if (two('<', '=')) { out.push_back({Tok::Le, "<=", 0, p}); advance(2); continue; }
    if (two('>', '=')) { out.push_back({Tok::Ge, ">=", 0, p}); advance(2); continue; }
    if (two('&', '&')) { out.push_back({Tok::AndAnd, "&&", 0, p}); advance(2); continue; }
    if (two('|', '|')) { out.push_back({Tok::OrOr, "||", 0, p}); advance(2); continue; }
    Tok k;
    switch (c) {
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ',': k = Tok::Comma; break;
      case ';': k = Tok::Semi; break;
      case ':': k = Tok::Colon; break;
      case '.': k = Tok::Dot; break;
      case '=': k = Tok::Assign; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '%': k = Tok::Percent; break;
      case '<': k = Tok::Lt; break;
      case '>': k = Tok::Gt; break;
      case '!': k = Tok::Bang; break;
      default:
        throw ParseError(ErrorKind::Syntax, p,
                         std::string("unexpected character '") + c + "'");
    }
    out.push_back({k, std::string(1, c), 0, p});
    advance(1);
  }
  out.push_back({Tok::End, "", 0, pos()});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program parse_program() {
    Program p;
    while (!at(Tok::End)) p.classes.push_back(parse_class());
    return p;
  }

 private:
  std::vector<Token> toks_;
  size_t idx_ = 0;

  const Token& cur() const { return toks_[idx_]; }
  bool at(Tok k) const { return cur().kind == k; }
  Token eat(Tok k, const char* what) {
    if (!at(k))
      throw ParseError(ErrorKind::Syntax, cur().pos,
                       std::string("expected ") + what + ", found '" + cur().text + "'");
    return toks_[idx_++];
  }
  bool accept(Tok k) {
    if (at(k)) { idx_++; return true; }
    return false;
  }

  Type parse_type() {
    Token t = eat(Tok::Ident, "type name");
    if (t.text == "Int") return Type::Int();
    if (t.text == "Bool") return Type::Bool();
    if (t.text == "Void") return Type::Void();
    return Type::Class(t.text);
  }

  ClassDecl parse_class() {
    eat(Tok::KwClass, "'class'");
    ClassDecl c;
    c.name = eat(Tok::Ident, "class name").text;
    eat(Tok::LBrace, "'{'");
    while (!accept(Tok::RBrace)) {
      if (at(Tok::KwField)) {
        eat(Tok::KwField, "'field'");
        FieldDecl f;
        f.name = eat(Tok::Ident, "field name").text;
        eat(Tok::Colon, "':'");
        f.type = parse_type();
        eat(Tok::Semi, "';'");
        c.fields.push_back(std::move(f));
      } else if (at(Tok::KwConst)) {
        eat(Tok::KwConst, "'const'");
        ConstDecl k;
        k.name = eat(Tok::Ident, "constant name").text;
        eat(Tok::Assign, "'='");
        bool neg = accept(Tok::Minus);
        Token v = eat(Tok::Int, "integer value");
        k.value = neg ? -v.int_val : v.int_val;
        eat(Tok::Semi, "';'");
        c.constants.push_back(std::move(k));
      } else if (at(Tok::KwNew) || at(Tok::KwPrivate)) {
        CtorDecl ct;
        ct.is_private = accept(Tok::KwPrivate);
        eat(Tok::KwNew, "'new'");
        ct.params = parse_params();
        ct.body = parse_block();
        c.ctors.push_back(std::move(ct));
      } else if (at(Tok::KwMethod)) {
        eat(Tok::KwMethod, "'method'");
        MethodDecl m;
        m.name = eat(Tok::Ident, "method name").text;
        m.params = parse_params();
        eat(Tok::Colon, "':'");
        m.return_type = parse_type();
        m.body = parse_block();
        c.methods.push_back(std::move(m));
      } else {
        throw ParseError(ErrorKind::Syntax, cur().pos,
                         "expected class member, found '" + cur().text + "'");
      }
    }
    return c;
  }

  std::vector<Param> parse_params() {
    eat(Tok::LParen, "'('");
    std::vector<Param> ps;
    if (!at(Tok::RParen)) {
      do {
        Param p;
        p.name = eat(Tok::Ident, "parameter name").text;
        eat(Tok::Colon, "':'");
        p.type = parse_type();
        ps.push_back(std::move(p));
      } while (accept(Tok::Comma));
    }
    eat(Tok::RParen, "')'");
    return ps;
  }

  std::vector<std::unique_ptr<Stmt>> parse_block() {
    eat(Tok::LBrace, "'{'");
    std::vector<std::unique_ptr<Stmt>> body;
    while (!accept(Tok::RBrace)) body.push_back(parse_stmt());
    return body;
  }

  std::unique_ptr<Stmt> parse_stmt() {
    auto s = std::make_unique<Stmt>();
    s->pos = cur().pos;
    if (at(Tok::KwVar)) {
      eat(Tok::KwVar, "'var'");
      s->kind = StmtKind::VarDecl;
      s->name = eat(Tok::Ident, "variable name").text;
      eat(Tok::Colon, "':'");
      s->decl_type = parse_type();
      eat(Tok::Assign, "'='");
      s->expr = parse_expr();
      eat(Tok::Semi, "';'");
      return s;
    }
    if (at(Tok::KwSkip)) {
      eat(Tok::KwSkip, "'skip'");
      eat(Tok::Semi, "';'");
      s->kind = StmtKind::Skip;
      return s;
    }
    if (at(Tok::KwIf)) {
      eat(Tok::KwIf, "'if'");
      eat(Tok::LParen, "'('");
      s->kind = StmtKind::If;
      s->expr = parse_expr();
      eat(Tok::RParen, "')'");
      s->body = parse_block();
      if (accept(Tok::KwElse)) {
        s->has_else = true;
        s->else_body = parse_block();
      }
      return s;
    }
    if (at(Tok::KwWhile)) {
      eat(Tok::KwWhile, "'while'");
      eat(Tok::LParen, "'('");
      s->kind = StmtKind::While;
      s->expr = parse_expr();
      eat(Tok::RParen, "')'");
      s->body = parse_block();
      return s;
    }
    if (at(Tok::KwReturn)) {
      eat(Tok::KwReturn, "'return'");
      s->kind = StmtKind::Return;
      if (!at(Tok::Semi)) s->expr = parse_expr();
      eat(Tok::Semi, "';'");
      return s;
    }
    // Assignment (path = expr) or expression statement. Both start with an
    // expression; an '=' after a pure path makes it an assignment.
    size_t save = idx_;
    if (at(Tok::KwThis) || at(Tok::Ident)) {
      std::string root = cur().text;
      idx_++;
      std::vector<std::string> path;
      bool pure_path = true;
      while (at(Tok::Dot)) {
        if (toks_[idx_ + 1].kind != Tok::Ident) { pure_path = false; break; }
        if (toks_[idx_ + 2].kind == Tok::LParen) break;  // method call
        idx_++;
        path.push_back(eat(Tok::Ident, "field name").text);
      }
      if (pure_path && at(Tok::Assign)) {
        eat(Tok::Assign, "'='");
        s->kind = StmtKind::Assign;
        s->target_root = root;
        s->target_path = std::move(path);
        s->expr = parse_expr();
        eat(Tok::Semi, "';'");
        return s;
      }
      idx_ = save;
    }
    s->kind = StmtKind::ExprStmt;
    s->expr = parse_expr();
    eat(Tok::Semi, "';'");
    return s;
  }

  std::unique_ptr<Expr> mk(ExprKind k, SrcPos p) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->pos = p;
    return e;
  }

  std::unique_ptr<Expr> parse_expr() { return parse_or(); }

  std::unique_ptr<Expr> parse_or() {
    auto l = parse_and();
    while (at(Tok::OrOr)) {
      SrcPos p = cur().pos;
      idx_++;
      auto e = mk(ExprKind::Binary, p);
      e->bin_op = BinOp::Or;
      e->lhs = std::move(l);
      e->rhs = parse_and();
      l = std::move(e);
    }
    return l;
  }

  std::unique_ptr<Expr> parse_and() {
    auto l = parse_not();
    while (at(Tok::AndAnd)) {
      SrcPos p = cur().pos;
      idx_++;
      auto e = mk(ExprKind::Binary, p);
      e->bin_op = BinOp::And;
      e->lhs = std::move(l);
      e->rhs = parse_not();
      l = std::move(e);
    }
    return l;
  }

  std::unique_ptr<Expr> parse_not() {
    if (at(Tok::Bang)) {
      SrcPos p = cur().pos;
      idx_++;
      auto e = mk(ExprKind::Unary, p);
      e->un_op = UnOp::Not;
      e->lhs = parse_not();
      return e;
    }
    return parse_cmp();
  }

  std::unique_ptr<Expr> parse_cmp() {
    auto l = parse_add();
    auto op = [&]() -> std::optional<BinOp> {
      switch (cur().kind) {
        case Tok::EqEq: return BinOp::Eq;
        case Tok::NotEq: return BinOp::Ne;
        case Tok::Lt: return BinOp::Lt;
        case Tok::Le: return BinOp::Le;
        case Tok::Gt: return BinOp::Gt;
        case Tok::Ge: return BinOp::Ge;
        default: return std::nullopt;
      }
    }();
    if (op) {
      SrcPos p = cur().pos;
      idx_++;
      auto e = mk(ExprKind::Binary, p);
      e->bin_op = *op;
      e->lhs = std::move(l);
      e->rhs = parse_add();
      return e;
    }
    return l;
  }

  std::unique_ptr<Expr> parse_add() {
    auto l = parse_mul();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      BinOp op = at(Tok::Plus) ? BinOp::Add : BinOp::Sub;
      SrcPos p = cur().pos;
      idx_++;
      auto e = mk(ExprKind::Binary, p);
      e->bin_op = op;
      e->lhs = std::move(l);
      e->rhs = parse_mul();
      l = std::move(e);
    }
    return l;
  }

  std::unique_ptr<Expr> parse_mul() {
    auto l = parse_unary();
    while (at(Tok::Star) || at(Tok::Slash) || at(Tok::Percent)) {
      BinOp op = at(Tok::Star) ? BinOp::Mul : at(Tok::Slash) ? BinOp::Div : BinOp::Mod;
      SrcPos p = cur().pos;
      idx_++;
      auto e = mk(ExprKind::Binary, p);
      e->bin_op = op;
      e->lhs = std::move(l);
      e->rhs = parse_unary();
      l = std::move(e);
    }
    return l;
  }

  std::unique_ptr<Expr> parse_unary() {
    if (at(Tok::Minus)) {
      SrcPos p = cur().pos;
      idx_++;
      if (at(Tok::Int)) {
        Token t = toks_[idx_++];
        auto e = mk(ExprKind::IntLit, p);
        e->int_val = -t.int_val;
        return e;
      }
      auto e = mk(ExprKind::Unary, p);
      e->un_op = UnOp::Neg;
      e->lhs = parse_unary();
      return e;
    }
    return parse_postfix();
  }

  std::unique_ptr<Expr> parse_postfix() {
    auto e = parse_primary();
    while (at(Tok::Dot)) {
      SrcPos p = cur().pos;
      idx_++;
      std::string member = eat(Tok::Ident, "member name").text;
      if (at(Tok::LParen)) {
        auto call = mk(ExprKind::Call, p);
        call->name = member;
        call->lhs = std::move(e);
        call->args = parse_args();
        e = std::move(call);
      } else {
        auto f = mk(ExprKind::FieldRead, p);
        f->name = member;
        f->lhs = std::move(e);
        e = std::move(f);
      }
    }
    return e;
  }

  std::vector<std::unique_ptr<Expr>> parse_args() {
    eat(Tok::LParen, "'('");
    std::vector<std::unique_ptr<Expr>> args;
    if (!at(Tok::RParen)) {
      do {
        args.push_back(parse_expr());
      } while (accept(Tok::Comma));
    }
    eat(Tok::RParen, "')'");
    return args;
  }

  std::unique_ptr<Expr> parse_primary() {
    SrcPos p = cur().pos;
    if (at(Tok::Int)) {
      Token t = toks_[idx_++];
      auto e = mk(ExprKind::IntLit, p);
      e->int_val = t.int_val;
      return e;
    }
    if (accept(Tok::KwTrue)) {
      auto e = mk(ExprKind::BoolLit, p);
      e->bool_val = true;
      return e;
    }
    if (accept(Tok::KwFalse)) {
      auto e = mk(ExprKind::BoolLit, p);
      e->bool_val = false;
      return e;
    }
    if (accept(Tok::KwNull)) return mk(ExprKind::NullLit, p);
    if (accept(Tok::KwThis)) {
      auto e = mk(ExprKind::VarRef, p);
      e->name = "this";
      return e;
    }
    if (at(Tok::KwNew)) {
      idx_++;
      auto e = mk(ExprKind::New, p);
      e->name = eat(Tok::Ident, "class name").text;
      e->args = parse_args();
      return e;
    }
    if (at(Tok::Ident)) {
      Token t = toks_[idx_++];
      auto e = mk(ExprKind::VarRef, p);
      e->name = t.text;
      return e;
    }
    if (accept(Tok::LParen)) {
      auto e = parse_expr();
      eat(Tok::RParen, "')'");
      return e;
    }
    throw ParseError(ErrorKind::Syntax, p,
                     "expected expression, found '" + cur().text + "'");
  }
};

// Pre-order node id assignment over the whole program; ids are the mutation
// locations, so the numbering must be stable across parse/print cycles.
class IdAssigner {
 public:
  void run(Program& p) {
    for (auto& c : p.classes) {
      for (auto& ct : c.ctors) visit_body(ct.body);
      for (auto& m : c.methods) visit_body(m.body);
    }
  }

 private:
  NodeId next_ = 0;

  void visit_body(std::vector<std::unique_ptr<Stmt>>& body) {
    for (auto& s : body) visit(*s);
  }
  void visit(Stmt& s) {
    s.id = next_++;
    if (s.expr) visit(*s.expr);
    for (auto& b : s.body) visit(*b);
    for (auto& b : s.else_body) visit(*b);
  }
  void visit(Expr& e) {
    e.id = next_++;
    if (e.lhs) visit(*e.lhs);
    if (e.rhs) visit(*e.rhs);
    for (auto& a : e.args) visit(*a);
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Type checker

namespace detail {

class TypeChecker {
 public:
  explicit TypeChecker(Program& p) : prog_(p) {}

  void run() {
    check_decls();
    for (auto& c : prog_.classes) {
      for (auto& ct : c.ctors) check_callable(c, ct.params, Type::Void(), ct.body, true);
      for (auto& m : c.methods) check_callable(c, m.params, m.return_type, m.body, false);
    }
  }

 private:
  Program& prog_;
  std::unordered_map<std::string, Type> locals_;
  const ClassDecl* cur_class_ = nullptr;

  [[noreturn]] void fail(ErrorKind k, SrcPos pos, const std::string& msg) {
    throw ParseError(k, pos, msg);
  }

  void check_type_resolves(const Type& t, SrcPos pos) {
    if (t.is_class() && !prog_.cls(t.class_name))
      fail(ErrorKind::Type, pos, "unknown type '" + t.class_name + "'");
  }

  void check_decls() {
    std::unordered_set<std::string> class_names;
    for (auto& c : prog_.classes) {
      if (!class_names.insert(c.name).second)
        fail(ErrorKind::DuplicateName, {}, "duplicate class '" + c.name + "'");
    }
    for (auto& c : prog_.classes) {
      std::unordered_set<std::string> names;
      for (auto& f : c.fields) {
        if (!names.insert(f.name).second)
          fail(ErrorKind::DuplicateName, {}, "duplicate field '" + f.name + "' in " + c.name);
        if (f.type.is_void())
          fail(ErrorKind::Type, {}, "field '" + f.name + "' cannot be Void");
        check_type_resolves(f.type, {});
      }
      for (auto& k : c.constants) {
        if (!names.insert(k.name).second)
          fail(ErrorKind::DuplicateName, {}, "duplicate constant '" + k.name + "' in " + c.name);
      }
      std::unordered_set<std::string> method_names;
      for (auto& m : c.methods) {
        if (!method_names.insert(m.name).second)
          fail(ErrorKind::DuplicateName, {}, "duplicate method '" + m.name + "' in " + c.name);
        check_type_resolves(m.return_type, {});
      }
      std::unordered_set<size_t> ctor_arities;
      for (auto& ct : c.ctors) {
        if (!ctor_arities.insert(ct.params.size()).second)
          fail(ErrorKind::DuplicateName, {},
               "class " + c.name + " has two constructors of arity " +
                   std::to_string(ct.params.size()));
      }
    }
  }

  void check_callable(ClassDecl& c, const std::vector<Param>& params, Type ret,
                      std::vector<std::unique_ptr<Stmt>>& body, bool is_ctor) {
    cur_class_ = &c;
    locals_.clear();
    std::unordered_set<std::string> pnames;
    for (const auto& p : params) {
      if (!pnames.insert(p.name).second)
        fail(ErrorKind::DuplicateName, {}, "duplicate parameter '" + p.name + "'");
      if (p.type.is_void()) fail(ErrorKind::Type, {}, "parameter cannot be Void");
      check_type_resolves(p.type, {});
      locals_[p.name] = p.type;
    }
    bool returns = check_block(body, ret);
    if (!is_ctor && !ret.is_void() && !returns)
      fail(ErrorKind::Type, body.empty() ? SrcPos{} : body.back()->pos,
           "method may complete without returning a value");
  }

  // Returns true when every control path through the block returns.
  bool check_block(std::vector<std::unique_ptr<Stmt>>& body, const Type& ret) {
    bool returns = false;
    for (auto& s : body) returns = check_stmt(*s, ret) || returns;
    return returns;
  }

  bool assignable(const Type& target, const Type& value) {
    if (target == value) return true;
    // null literal carries Class("") and is assignable to any class type
    if (target.is_class() && value.is_class() && value.class_name.empty()) return true;
    return false;
  }

  bool check_stmt(Stmt& s, const Type& ret) {
    switch (s.kind) {
      case StmtKind::Skip:
        return false;
      case StmtKind::VarDecl: {
        if (locals_.count(s.name))
          fail(ErrorKind::DuplicateName, s.pos, "duplicate local '" + s.name + "'");
        if (s.decl_type.is_void()) fail(ErrorKind::Type, s.pos, "local cannot be Void");
        check_type_resolves(s.decl_type, s.pos);
        Type t = check_expr(*s.expr);
        if (!assignable(s.decl_type, t))
          fail(ErrorKind::Type, s.pos,
               "cannot initialize " + s.decl_type.str() + " local with " + t.str());
        locals_[s.name] = s.decl_type;
        return false;
      }
      case StmtKind::Assign: {
        Type target = target_type(s);
        Type value = check_expr(*s.expr);
        if (!assignable(target, value))
          fail(ErrorKind::Type, s.pos,
               "cannot assign " + value.str() + " to " + target.str());
        return false;
      }
      case StmtKind::If: {
        Type c = check_expr(*s.expr);
        if (!c.is_bool()) fail(ErrorKind::Type, s.pos, "if condition must be Bool");
        bool t = check_block(s.body, ret);
        bool e = s.has_else ? check_block(s.else_body, ret) : false;
        return t && e && s.has_else;
      }
      case StmtKind::While: {
        Type c = check_expr(*s.expr);
        if (!c.is_bool()) fail(ErrorKind::Type, s.pos, "while condition must be Bool");
        check_block(s.body, ret);
        return false;
      }
      case StmtKind::Return: {
        if (ret.is_void()) {
          if (s.expr) fail(ErrorKind::Type, s.pos, "void method cannot return a value");
        } else {
          if (!s.expr) fail(ErrorKind::Type, s.pos, "missing return value");
          Type t = check_expr(*s.expr);
          if (!assignable(ret, t))
            fail(ErrorKind::Type, s.pos,
                 "return type mismatch: expected " + ret.str() + ", got " + t.str());
        }
        return true;
      }
      case StmtKind::ExprStmt: {
        if (s.expr->kind != ExprKind::Call && s.expr->kind != ExprKind::New)
          fail(ErrorKind::Type, s.pos, "expression statement must be a call or new");
        check_expr(*s.expr);
        return false;
      }
    }
    return false;
  }

  Type target_type(Stmt& s) {
    Type t;
    if (s.target_root == "this") {
      t = Type::Class(cur_class_->name);
    } else {
      auto it = locals_.find(s.target_root);
      if (it == locals_.end())
        fail(ErrorKind::Type, s.pos, "unknown variable '" + s.target_root + "'");
      t = it->second;
    }
    if (s.target_path.empty() && s.target_root == "this")
      fail(ErrorKind::Type, s.pos, "cannot assign to 'this'");
    for (const auto& f : s.target_path) {
      if (!t.is_class())
        fail(ErrorKind::Type, s.pos, "field access on non-object type " + t.str());
      const ClassDecl* cd = prog_.cls(t.class_name);
      const FieldDecl* fd = cd ? cd->field(f) : nullptr;
      if (!fd)
        fail(ErrorKind::Type, s.pos, "unknown field '" + f + "' on " + t.str());
      t = fd->type;
    }
    return t;
  }

  Type check_expr(Expr& e) {
    Type t = infer(e);
    e.type = t;
    return t;
  }

  Type infer(Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return Type::Int();
      case ExprKind::BoolLit: return Type::Bool();
      case ExprKind::NullLit: return Type::Class("");  // bottom reference type
      case ExprKind::VarRef: {
        if (e.name == "this") return Type::Class(cur_class_->name);
        auto it = locals_.find(e.name);
        if (it != locals_.end()) return it->second;
        if (cur_class_->constant(e.name)) return Type::Int();
        fail(ErrorKind::Type, e.pos, "unknown variable '" + e.name + "'");
      }
      case ExprKind::FieldRead: {
        Type base = check_expr(*e.lhs);
        if (!base.is_class() || base.class_name.empty())
          fail(ErrorKind::Type, e.pos, "field access on non-object type " + base.str());
        const ClassDecl* cd = prog_.cls(base.class_name);
        const FieldDecl* fd = cd ? cd->field(e.name) : nullptr;
        if (!fd)
          fail(ErrorKind::Type, e.pos,
               "unknown field '" + e.name + "' on " + base.str());
        return fd->type;
      }
      case ExprKind::New: {
        const ClassDecl* cd = prog_.cls(e.name);
        if (!cd) fail(ErrorKind::Type, e.pos, "unknown class '" + e.name + "'");
        const CtorDecl* match = nullptr;
        for (const auto& ct : cd->ctors)
          if (ct.params.size() == e.args.size()) match = &ct;
        if (!match)
          fail(ErrorKind::Type, e.pos,
               "no constructor of " + e.name + " takes " +
                   std::to_string(e.args.size()) + " arguments");
        for (size_t i = 0; i < e.args.size(); ++i) {
          Type at = check_expr(*e.args[i]);
          if (!assignable(match->params[i].type, at))
            fail(ErrorKind::Type, e.pos,
                 "constructor argument " + std::to_string(i + 1) + " type mismatch");
        }
        return Type::Class(e.name);
      }
      case ExprKind::Call: {
        Type base = check_expr(*e.lhs);
        if (!base.is_class() || base.class_name.empty())
          fail(ErrorKind::Type, e.pos, "method call on non-object type " + base.str());
        const ClassDecl* cd = prog_.cls(base.class_name);
        const MethodDecl* md = cd ? cd->method(e.name) : nullptr;
        if (!md)
          fail(ErrorKind::Type, e.pos,
               "unknown method '" + e.name + "' on " + base.str());
        if (md->params.size() != e.args.size())
          fail(ErrorKind::Type, e.pos, "call arity mismatch for '" + e.name + "'");
        for (size_t i = 0; i < e.args.size(); ++i) {
          Type at = check_expr(*e.args[i]);
          if (!assignable(md->params[i].type, at))
            fail(ErrorKind::Type, e.pos,
                 "argument " + std::to_string(i + 1) + " type mismatch in call to '" +
                     e.name + "'");
        }
        return md->return_type;
      }
      case ExprKind::Unary: {
        Type t = check_expr(*e.lhs);
        if (e.un_op == UnOp::Not) {
          if (!t.is_bool()) fail(ErrorKind::Type, e.pos, "'!' needs a Bool operand");
          return Type::Bool();
        }
        if (!t.is_int()) fail(ErrorKind::Type, e.pos, "unary '-' needs an Int operand");
        return Type::Int();
      }
      case ExprKind::Binary: {
        Type l = check_expr(*e.lhs);
        Type r = check_expr(*e.rhs);
        switch (e.bin_op) {
          case BinOp::Add: case BinOp::Sub: case BinOp::Mul:
          case BinOp::Div: case BinOp::Mod:
            if (!l.is_int() || !r.is_int())
              fail(ErrorKind::Type, e.pos, "arithmetic needs Int operands");
            return Type::Int();
          case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
            if (!l.is_int() || !r.is_int())
              fail(ErrorKind::Type, e.pos, "comparison needs Int operands");
            return Type::Bool();
          case BinOp::Eq: case BinOp::Ne: {
            bool ok = (l.is_int() && r.is_int()) || (l.is_bool() && r.is_bool()) ||
                      (l.is_class() && r.is_class() &&
                       (l.class_name.empty() || r.class_name.empty() ||
                        l.class_name == r.class_name));
            if (!ok)
              fail(ErrorKind::Type, e.pos,
                   "cannot compare " + l.str() + " with " + r.str());
            return Type::Bool();
          }
          case BinOp::And: case BinOp::Or:
            if (!l.is_bool() || !r.is_bool())
              fail(ErrorKind::Type, e.pos, "logical operator needs Bool operands");
            return Type::Bool();
        }
        return Type::Void();
      }
    }
    return Type::Void();
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Public parse entry point

inline Program parse_program(const std::string& source) {
  detail::Parser parser(detail::lex(source));
  Program p = parser.parse_program();
  detail::IdAssigner().run(p);
  detail::TypeChecker(p).run();
  return p;
}

// Re-checks a program that was built or edited in memory (mutation).
inline void type_check(Program& p) { detail::TypeChecker(p).run(); }

inline void assign_node_ids(Program& p) { detail::IdAssigner().run(p); }

// ---------------------------------------------------------------------------
// Pretty printer (parse . print is a fixpoint on printed output)

namespace detail {

class Printer {
 public:
  std::string print(const Program& p) {
    for (size_t i = 0; i < p.classes.size(); ++i) {
      if (i) out_ += "\n";
      print(p.classes[i]);
    }
    return out_;
  }

  std::string print_expr_str(const Expr& e) {
    print(e, 0);
    return out_;
  }

  std::string print_stmt_str(const Stmt& s) {
    print(s);
    return out_;
  }

 private:
  std::string out_;
  int indent_ = 0;

  void nl() {
    out_ += "\n";
    out_.append(static_cast<size_t>(indent_) * 2, ' ');
  }

  void print(const ClassDecl& c) {
    out_ += "class " + c.name + " {";
    indent_++;
    for (const auto& f : c.fields) {
      nl();
      out_ += "field " + f.name + ": " + f.type.str() + ";";
    }
    for (const auto& k : c.constants) {
      nl();
      out_ += "const " + k.name + " = " + std::to_string(k.value) + ";";
    }
    for (const auto& ct : c.ctors) {
      nl();
      if (ct.is_private) out_ += "private ";
      out_ += "new(";
      print_params(ct.params);
      out_ += ") ";
      print_block(ct.body);
    }
    for (const auto& m : c.methods) {
      nl();
      out_ += "method " + m.name + "(";
      print_params(m.params);
      out_ += "): " + m.return_type.str() + " ";
      print_block(m.body);
    }
    indent_--;
    nl();
    out_ += "}\n";
  }

  void print_params(const std::vector<Param>& ps) {
    for (size_t i = 0; i < ps.size(); ++i) {
      if (i) out_ += ", ";
      out_ += ps[i].name + ": " + ps[i].type.str();
    }
  }

  void print_block(const std::vector<std::unique_ptr<Stmt>>& body) {
    out_ += "{";
    indent_++;
    for (const auto& s : body) {
      nl();
      print(*s);
    }
    indent_--;
    nl();
    out_ += "}";
  }

  void print(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Skip:
        out_ += "skip;";
        break;
      case StmtKind::VarDecl:
        out_ += "var " + s.name + ": " + s.decl_type.str() + " = ";
        print(*s.expr, 0);
        out_ += ";";
        break;
      case StmtKind::Assign: {
        out_ += s.target_root;
        for (const auto& f : s.target_path) out_ += "." + f;
        out_ += " = ";
        print(*s.expr, 0);
        out_ += ";";
        break;
      }
      case StmtKind::If:
        out_ += "if (";
        print(*s.expr, 0);
        out_ += ") ";
        print_block(s.body);
        if (s.has_else) {
          out_ += " else ";
          print_block(s.else_body);
        }
        break;
      case StmtKind::While:
        out_ += "while (";
        print(*s.expr, 0);
        out_ += ") ";
        print_block(s.body);
        break;
      case StmtKind::Return:
        out_ += "return";
        if (s.expr) {
          out_ += " ";
          print(*s.expr, 0);
        }
        out_ += ";";
        break;
      case StmtKind::ExprStmt:
        print(*s.expr, 0);
        out_ += ";";
        break;
    }
  }

  // Precedence levels, loosest first: || (1), && (2), ! (3), cmp (4),
  // add (5), mul (6), unary- (7), postfix/primary (8).
  static int prec(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Binary:
        switch (e.bin_op) {
          case BinOp::Or: return 1;
          case BinOp::And: return 2;
          case BinOp::Eq: case BinOp::Ne: case BinOp::Lt:
          case BinOp::Le: case BinOp::Gt: case BinOp::Ge: return 4;
          case BinOp::Add: case BinOp::Sub: return 5;
          case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 6;
        }
        return 8;
      case ExprKind::Unary:
        return e.un_op == UnOp::Not ? 3 : 7;
      default:
        return 8;
    }
  }

  void print(const Expr& e, int parent_prec) {
    int p = prec(e);
    bool need_parens = p < parent_prec;
    if (need_parens) out_ += "(";
    switch (e.kind) {
      case ExprKind::IntLit: out_ += std::to_string(e.int_val); break;
      case ExprKind::BoolLit: out_ += e.bool_val ? "true" : "false"; break;
      case ExprKind::NullLit: out_ += "null"; break;
      case ExprKind::VarRef: out_ += e.name; break;
      case ExprKind::FieldRead:
        print(*e.lhs, 8);
        out_ += "." + e.name;
        break;
      case ExprKind::New: {
        out_ += "new " + e.name + "(";
        for (size_t i = 0; i < e.args.size(); ++i) {
          if (i) out_ += ", ";
          print(*e.args[i], 0);
        }
        out_ += ")";
        break;
      }
      case ExprKind::Call: {
        print(*e.lhs, 8);
        out_ += "." + e.name + "(";
        for (size_t i = 0; i < e.args.size(); ++i) {
          if (i) out_ += ", ";
          print(*e.args[i], 0);
        }
        out_ += ")";
        break;
      }
      case ExprKind::Unary:
        out_ += e.un_op == UnOp::Not ? "!" : "-";
        print(*e.lhs, p);
        break;
      case ExprKind::Binary: {
        print(*e.lhs, p);
        out_ += std::string(" ") + binop_text(e.bin_op) + " ";
        // left-associative: right child needs strictly higher precedence
        print(*e.rhs, p + 1);
        break;
      }
    }
    if (need_parens) out_ += ")";
  }
};

}  // namespace detail

inline std::string pretty_print(const Program& p) {
  return detail::Printer().print(p);
}

inline std::string print_expr(const Expr& e) {
  return detail::Printer().print_expr_str(e);
}

inline std::string print_stmt(const Stmt& s) {
  return detail::Printer().print_stmt_str(s);
}

// ---------------------------------------------------------------------------
// Values and heap

using ObjId = std::int64_t;

struct Value {
  enum class Kind { Int, Bool, Null, Ref } kind = Kind::Null;
  std::int64_t i = 0;
  bool b = false;
  ObjId ref = 0;

  static Value Int(std::int64_t v) { Value x; x.kind = Kind::Int; x.i = v; return x; }
  static Value Bool(bool v) { Value x; x.kind = Kind::Bool; x.b = v; return x; }
  static Value Null() { return Value{}; }
  static Value Ref(ObjId id) { Value x; x.kind = Kind::Ref; x.ref = id; return x; }

  bool is_int() const { return kind == Kind::Int; }
  bool is_bool() const { return kind == Kind::Bool; }
  bool is_null() const { return kind == Kind::Null; }
  bool is_ref() const { return kind == Kind::Ref; }

  bool operator==(const Value& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case Kind::Int: return i == o.i;
      case Kind::Bool: return b == o.b;
      case Kind::Null: return true;
      case Kind::Ref: return ref == o.ref;
    }
    return false;
  }
  bool operator!=(const Value& o) const { return !(*this == o); }
};

struct HeapObject {
  std::string class_name;
  std::vector<std::pair<std::string, Value>> fields;  // declaration order

  Value get(const std::string& f) const {
    for (const auto& [n, v] : fields)
      if (n == f) return v;
    return Value::Null();
  }
  void set(const std::string& f, Value v) {
    for (auto& [n, val] : fields)
      if (n == f) { val = v; return; }
  }
  bool has(const std::string& f) const {
    for (const auto& [n, v] : fields)
      if (n == f) return true;
    return false;
  }
};

struct Heap {
  std::map<ObjId, HeapObject> objects;  // ordered for deterministic iteration
  ObjId next_id = 1;

  ObjId alloc(const ClassDecl& cls) {
    ObjId id = next_id++;
    HeapObject obj;
    obj.class_name = cls.name;
    for (const auto& f : cls.fields) {
      Value init = f.type.is_int()    ? Value::Int(0)
                   : f.type.is_bool() ? Value::Bool(false)
                                      : Value::Null();
      obj.fields.emplace_back(f.name, init);
    }
    objects.emplace(id, std::move(obj));
    return id;
  }

  HeapObject& at(ObjId id) { return objects.at(id); }
  const HeapObject& at(ObjId id) const { return objects.at(id); }
  bool live(ObjId id) const { return objects.count(id) != 0; }
};

// ---------------------------------------------------------------------------
// Interpreter

enum class FailureKind { BudgetExceeded, NullDeref, DivByZero };

inline const char* failure_text(FailureKind k) {
  switch (k) {
    case FailureKind::BudgetExceeded: return "BudgetExceeded";
    case FailureKind::NullDeref: return "NullDeref";
    case FailureKind::DivByZero: return "DivByZero";
  }
  return "?";
}

struct RunFailure {
  FailureKind kind;
};

struct RunResult {
  std::optional<Value> value;          // nullopt for Void returns
  std::optional<RunFailure> failure;   // set iff the run failed

  bool ok() const { return !failure.has_value(); }
};

namespace detail {

struct RunAbort {
  FailureKind kind;
};

inline std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
inline std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
inline std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}
inline std::int64_t wrap_neg(std::int64_t a) {
  return static_cast<std::int64_t>(0ULL - static_cast<std::uint64_t>(a));
}

class Interp {
 public:
  Interp(const Program& prog, Heap& heap, std::int64_t budget)
      : prog_(prog), heap_(heap), budget_(budget) {}

  struct Frame {
    const ClassDecl* cls = nullptr;  // class owning the running callable
    Value self;                      // receiver (may be Null)
    std::vector<std::pair<std::string, Value>> vars;  // params then locals

    Value* find(const std::string& n) {
      for (auto& [name, v] : vars)
        if (name == n) return &v;
      return nullptr;
    }
  };

  std::optional<Value> call_method(Value receiver, const std::string& method,
                                   const std::vector<Value>& args) {
    const ClassDecl* cls = class_of(receiver);
    return call_method_in(cls, receiver, method, args);
  }

  // Dispatch with an explicit class; used for receiver-less (static-style)
  // calls where the receiver is Null by construction.
  std::optional<Value> call_method_in(const ClassDecl* cls, Value receiver,
                                      const std::string& method,
                                      const std::vector<Value>& args) {
    const MethodDecl* md = cls ? cls->method(method) : nullptr;
    if (!md) throw RunAbort{FailureKind::NullDeref};
    Frame frame;
    frame.cls = cls;
    frame.self = receiver;
    for (size_t i = 0; i < md->params.size(); ++i)
      frame.vars.emplace_back(md->params[i].name, args[i]);
    std::optional<Value> ret;
    exec_body(md->body, frame, ret);
    if (!md->return_type.is_void() && !ret)
      throw RunAbort{FailureKind::NullDeref};  // unreachable on type-checked code
    return md->return_type.is_void() ? std::nullopt : ret;
  }

  Value construct(const std::string& class_name, size_t arity,
                  const std::vector<Value>& args) {
    const ClassDecl* cls = prog_.cls(class_name);
    const CtorDecl* ct = nullptr;
    for (const auto& c : cls->ctors)
      if (c.params.size() == arity) ct = &c;
    ObjId id = heap_.alloc(*cls);
    Frame frame;
    frame.cls = cls;
    frame.self = Value::Ref(id);
    for (size_t i = 0; i < ct->params.size(); ++i)
      frame.vars.emplace_back(ct->params[i].name, args[i]);
    std::optional<Value> ignored;
    exec_body(ct->body, frame, ignored);
    return Value::Ref(id);
  }

 private:
  const Program& prog_;
  Heap& heap_;
  std::int64_t budget_;
  std::int64_t steps_ = 0;

  void tick() {
    if (++steps_ > budget_) throw RunAbort{FailureKind::BudgetExceeded};
  }

  const ClassDecl* class_of(const Value& v) {
    if (!v.is_ref()) {
      if (v.is_null()) throw RunAbort{FailureKind::NullDeref};
      return nullptr;
    }
    return prog_.cls(heap_.at(v.ref).class_name);
  }

  enum class Flow { Normal, Returned };

  void exec_body(const std::vector<std::unique_ptr<Stmt>>& body, Frame& f,
                 std::optional<Value>& ret) {
    for (const auto& s : body)
      if (exec(*s, f, ret) == Flow::Returned) return;
  }

  Flow exec_block(const std::vector<std::unique_ptr<Stmt>>& body, Frame& f,
                  std::optional<Value>& ret) {
    for (const auto& s : body)
      if (exec(*s, f, ret) == Flow::Returned) return Flow::Returned;
    return Flow::Normal;
  }

  Flow exec(const Stmt& s, Frame& f, std::optional<Value>& ret) {
    tick();
    switch (s.kind) {
      case StmtKind::Skip:
        return Flow::Normal;
      case StmtKind::VarDecl:
        f.vars.emplace_back(s.name, eval(*s.expr, f));
        return Flow::Normal;
      case StmtKind::Assign: {
        Value v = eval(*s.expr, f);
        if (s.target_path.empty()) {
          *f.find(s.target_root) = v;
          return Flow::Normal;
        }
        Value cur = s.target_root == "this" ? f.self : *f.find(s.target_root);
        for (size_t i = 0; i + 1 < s.target_path.size(); ++i) {
          if (!cur.is_ref()) throw RunAbort{FailureKind::NullDeref};
          cur = heap_.at(cur.ref).get(s.target_path[i]);
        }
        if (!cur.is_ref()) throw RunAbort{FailureKind::NullDeref};
        heap_.at(cur.ref).set(s.target_path.back(), v);
        return Flow::Normal;
      }
      case StmtKind::If: {
        Value c = eval(*s.expr, f);
        if (c.b) return exec_block(s.body, f, ret);
        if (s.has_else) return exec_block(s.else_body, f, ret);
        return Flow::Normal;
      }
      case StmtKind::While: {
        while (true) {
          tick();
          Value c = eval(*s.expr, f);
          if (!c.b) return Flow::Normal;
          if (exec_block(s.body, f, ret) == Flow::Returned) return Flow::Returned;
        }
      }
      case StmtKind::Return:
        if (s.expr) ret = eval(*s.expr, f);
        else ret = std::nullopt;
        return Flow::Returned;
      case StmtKind::ExprStmt:
        eval(*s.expr, f);
        return Flow::Normal;
    }
    return Flow::Normal;
  }

  Value eval(const Expr& e, Frame& f) {
    tick();
    switch (e.kind) {
      case ExprKind::IntLit: return Value::Int(e.int_val);
      case ExprKind::BoolLit: return Value::Bool(e.bool_val);
      case ExprKind::NullLit: return Value::Null();
      case ExprKind::VarRef: {
        if (e.name == "this") return f.self;
        if (Value* v = f.find(e.name)) return *v;
        return Value::Int(f.cls->constant(e.name)->value);
      }
      case ExprKind::FieldRead: {
        Value base = eval(*e.lhs, f);
        if (!base.is_ref()) throw RunAbort{FailureKind::NullDeref};
        return heap_.at(base.ref).get(e.name);
      }
      case ExprKind::New: {
        std::vector<Value> args;
        for (const auto& a : e.args) args.push_back(eval(*a, f));
        return construct(e.name, e.args.size(), args);
      }
      case ExprKind::Call: {
        Value recv = eval(*e.lhs, f);
        std::vector<Value> args;
        for (const auto& a : e.args) args.push_back(eval(*a, f));
        auto r = call_method(recv, e.name, args);
        return r ? *r : Value::Null();
      }
      case ExprKind::Unary: {
        Value v = eval(*e.lhs, f);
        if (e.un_op == UnOp::Not) return Value::Bool(!v.b);
        return Value::Int(wrap_neg(v.i));
      }
      case ExprKind::Binary: {
        if (e.bin_op == BinOp::And) {
          Value l = eval(*e.lhs, f);
          if (!l.b) return Value::Bool(false);
          return eval(*e.rhs, f);
        }
        if (e.bin_op == BinOp::Or) {
          Value l = eval(*e.lhs, f);
          if (l.b) return Value::Bool(true);
          return eval(*e.rhs, f);
        }
        Value l = eval(*e.lhs, f);
        Value r = eval(*e.rhs, f);
        switch (e.bin_op) {
          case BinOp::Add: return Value::Int(wrap_add(l.i, r.i));
          case BinOp::Sub: return Value::Int(wrap_sub(l.i, r.i));
          case BinOp::Mul: return Value::Int(wrap_mul(l.i, r.i));
          case BinOp::Div:
            if (r.i == 0) throw RunAbort{FailureKind::DivByZero};
            if (l.i == INT64_MIN && r.i == -1) return Value::Int(INT64_MIN);
            return Value::Int(l.i / r.i);
          case BinOp::Mod:
            if (r.i == 0) throw RunAbort{FailureKind::DivByZero};
            if (l.i == INT64_MIN && r.i == -1) return Value::Int(0);
            return Value::Int(l.i % r.i);
          case BinOp::Eq: return Value::Bool(l == r || (l.is_null() && r.is_null()));
          case BinOp::Ne: return Value::Bool(!(l == r));
          case BinOp::Lt: return Value::Bool(l.i < r.i);
          case BinOp::Le: return Value::Bool(l.i <= r.i);
          case BinOp::Gt: return Value::Bool(l.i > r.i);
          case BinOp::Ge: return Value::Bool(l.i >= r.i);
          default: break;
        }
        return Value::Null();
      }
    }
    return Value::Null();
  }
};

}  // namespace detail

// Big-step execution of one method call against a heap. The heap is mutated
// in place on success; on failure its contents are unspecified (callers
// discard it).
inline RunResult run_method(const Program& program, std::optional<Value> receiver,
                            const std::string& method, const std::vector<Value>& args,
                            Heap& heap, std::int64_t step_budget) {
  detail::Interp interp(program, heap, step_budget);
  RunResult result;
  try {
    if (receiver) {
      auto r = interp.call_method(*receiver, method, args);
      if (r) result.value = *r;
    } else {
      // Receiver-less call: dispatch to the unique class declaring the method.
      const ClassDecl* owner = nullptr;
      for (const auto& c : program.classes)
        if (c.method(method)) owner = &c;
      auto r = interp.call_method_in(owner, Value::Null(), method, args);
      if (r) result.value = *r;
    }
  } catch (const detail::RunAbort& abort) {
    result.failure = RunFailure{abort.kind};
  }
  return result;
}

// Runs a constructor, allocating a fresh object. Same failure contract as
// run_method.
inline RunResult run_ctor(const Program& program, const std::string& class_name,
                          const std::vector<Value>& args, Heap& heap,
                          std::int64_t step_budget) {
  detail::Interp interp(program, heap, step_budget);
  RunResult result;
  try {
    result.value = interp.construct(class_name, args.size(), args);
  } catch (const detail::RunAbort& abort) {
    result.failure = RunFailure{abort.kind};
  }
  return result;
}

constexpr std::int64_t kDefaultStepBudget = 10000;

}  // namespace specfuzz::minilang
