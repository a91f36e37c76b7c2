#pragma once

// Assertion grammars: the fixed base grammar B and the extractor that
// instantiates it into a class-specific grammar G_C. Non-terminals are
// written <LikeThis>; every other symbol is a literal terminal. Grammars
// serialize as {"start": ..., "productions": {NT: [[sym, ...], ...]}}.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "specfuzz/minilang.hpp"

namespace specfuzz::grammar {

using minilang::Program;
using minilang::Type;

using Alternative = std::vector<std::string>;

struct Grammar {
  std::string start = "<FuzzedSpec>";
  std::map<std::string, std::vector<Alternative>> productions;

  bool is_nonterminal(const std::string& sym) const {
    return sym.size() >= 2 && sym.front() == '<' && sym.back() == '>';
  }
};

inline bool is_nonterminal(const std::string& sym) {
  return sym.size() >= 2 && sym.front() == '<' && sym.back() == '>';
}

// ---------------------------------------------------------------------------
// Typed terminals

enum class Provenance {
  FieldPath, Constant, Parameter, Result, ReachExpr, OldWrap, NullTest, QuantVar,
};

struct TypedTerminal {
  std::string text;
  Type type;               // Int, Bool, or Class (element class for sets)
  bool is_set = false;     // reach(...) expressions
  Provenance provenance = Provenance::FieldPath;
};

// ---------------------------------------------------------------------------
// Base grammar B

inline Grammar base_grammar() {
  Grammar g;
  g.start = "<FuzzedSpec>";
  auto& p = g.productions;
  p["<FuzzedSpec>"] = {{"<QuantifiedExpr>"}, {"<BooleanExpr>"}};
  p["<QuantifiedExpr>"] = {{"<Quantifier>", "<Typed_Var>", ":", "<QBooleanExpr>"}};
  p["<Quantifier>"] = {{"all"}, {"exists"}};
  p["<BooleanExpr>"] = {{"<NumCmpExpr>"},
                        {"<LogicCmpExpr>"},
                        {"<MembershipExpr>"},
                        {"!", "<BooleanExpr>"}};
  // Quantified bodies admit '&&' in addition to the top-level logic operators.
  p["<QBooleanExpr>"] = {{"<NumCmpExpr>"},
                         {"<QLogicCmpExpr>"},
                         {"<MembershipExpr>"},
                         {"!", "<QBooleanExpr>"}};
  p["<NumCmpExpr>"] = {
      {"<NumExpr>", "<NumCmpOp>", "<NumExpr>"},
      {"<NumExpr>", "<NumCmpOp>", "<NumExpr>", "<NumBinOp>", "<NumExpr>"}};
  p["<NumExpr>"] = {{"<NumVar>"}, {"<NumConst>"}};
  p["<LogicCmpExpr>"] = {
      {"<BooleanExpr>", "<LogicOp>", "<NumCmpExpr>"},
      {"(", "<BoolVar>", "<LogicOp>", "<BoolVar>", ")", "<LogicOp>", "<NumCmpExpr>"},
      {"(", "<NumCmpExpr>", ")", "<LogicOp>", "(", "<NumCmpExpr>", ")"}};
  p["<QLogicCmpExpr>"] = {
      {"<QBooleanExpr>", "<QLogicOp>", "<NumCmpExpr>"},
      {"(", "<BoolVar>", "<QLogicOp>", "<BoolVar>", ")", "<QLogicOp>", "<NumCmpExpr>"},
      {"(", "<NumCmpExpr>", ")", "<QLogicOp>", "(", "<NumCmpExpr>", ")"}};
  p["<MembershipExpr>"] = {{"<type_SetExpr>", ".has(", "<type_Var>", ")"}};
  p["<NumCmpOp>"] = {{"=="}, {"!="}, {">"}, {"<"}, {"<="}, {">="}};
  p["<NumBinOp>"] = {{"+"}, {"-"}, {"*"}, {"/"}, {"%"}};
  p["<LogicOp>"] = {{"||"}, {"xor"}, {"==>"}, {"<==>"}};
  p["<QLogicOp>"] = {{"||"}, {"xor"}, {"==>"}, {"<==>"}, {"&&"}};
  // Schema symbols (<Typed_Var>, <NumVar>, <NumConst>, <BoolVar>,
  // <type_SetExpr>, <type_Var>) have no productions in B; extraction fills
  // them per class.
  return g;
}

// ---------------------------------------------------------------------------
// Reduction: drop non-productive and unreachable symbols

inline void reduce(Grammar& g) {
  std::set<std::string> productive;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [nt, alts] : g.productions) {
      if (productive.count(nt)) continue;
      for (const auto& alt : alts) {
        bool ok = true;
        for (const auto& sym : alt)
          if (is_nonterminal(sym) && !productive.count(sym)) { ok = false; break; }
        if (ok) { productive.insert(nt); changed = true; break; }
      }
    }
  }
  for (auto it = g.productions.begin(); it != g.productions.end();) {
    if (!productive.count(it->first)) { it = g.productions.erase(it); continue; }
    auto& alts = it->second;
    alts.erase(std::remove_if(alts.begin(), alts.end(),
                              [&](const Alternative& alt) {
                                for (const auto& sym : alt)
                                  if (is_nonterminal(sym) && !productive.count(sym))
                                    return true;
                                return false;
                              }),
               alts.end());
    ++it;
  }
  std::set<std::string> reachable;
  std::vector<std::string> work{g.start};
  reachable.insert(g.start);
  while (!work.empty()) {
    std::string nt = work.back();
    work.pop_back();
    auto it = g.productions.find(nt);
    if (it == g.productions.end()) continue;
    for (const auto& alt : it->second)
      for (const auto& sym : alt)
        if (is_nonterminal(sym) && reachable.insert(sym).second) work.push_back(sym);
  }
  for (auto it = g.productions.begin(); it != g.productions.end();)
    it = reachable.count(it->first) ? std::next(it) : g.productions.erase(it);
}

// Well-formedness required by the fuzzer: start exists, every referenced
// non-terminal has productions, everything is reachable and productive.
inline std::optional<std::string> validate(const Grammar& g) {
  if (!g.productions.count(g.start)) return "start symbol has no productions";
  for (const auto& [nt, alts] : g.productions) {
    if (alts.empty()) return nt + " has no alternatives";
    for (const auto& alt : alts)
      for (const auto& sym : alt)
        if (is_nonterminal(sym) && !g.productions.count(sym))
          return "undefined non-terminal " + sym + " referenced from " + nt;
  }
  Grammar copy = g;
  reduce(copy);
  if (copy.productions.size() != g.productions.size())
    return "grammar has non-productive or unreachable symbols";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Extraction

struct ExtractionResult {
  Grammar grammar;
  std::vector<TypedTerminal> terminals;
};

namespace detail {

struct Nav {
  std::string text;    // e.g. "this.next.elem"
  Type type;
  int length = 0;
  bool pre_readable = false;  // rooted at this or a parameter
};

// Enumerates field navigations of length <= depth from one typed root.
inline void enumerate_navs_at(const Program& prog, const std::string& root_text,
                              const Type& root_type, int remaining, int length,
                              bool pre_readable, std::vector<Nav>& out) {
  out.push_back({root_text, root_type, length, pre_readable});
  if (!root_type.is_class() || remaining == 0) return;
  const auto* cls = prog.cls(root_type.class_name);
  if (!cls) return;
  for (const auto& f : cls->fields) {
    enumerate_navs_at(prog, root_text + "." + f.name, f.type, remaining - 1,
                      length + 1, pre_readable, out);
    if (static_cast<int>(out.size()) > 4096) return;  // guard against blowup
  }
}

inline void enumerate_navs(const Program& prog, const std::string& root_text,
                           const Type& root_type, int depth, bool pre_readable,
                           std::vector<Nav>& out) {
  enumerate_navs_at(prog, root_text, root_type, depth, 0, pre_readable, out);
}

inline std::vector<std::string> recursive_fields(const Program& prog,
                                                 const std::string& cls_name) {
  std::vector<std::string> out;
  const auto* cls = prog.cls(cls_name);
  if (!cls) return out;
  for (const auto& f : cls->fields)
    if (f.type.is_class() && f.type.class_name == cls_name) out.push_back(f.name);
  return out;
}

}  // namespace detail

class UnknownClassError : public std::runtime_error {
 public:
  explicit UnknownClassError(const std::string& name)
      : std::runtime_error("unknown class '" + name + "'") {}
};

inline ExtractionResult extract_grammar_full(const Program& program,
                                             const std::string& target,
                                             int nav_depth) {
  const auto* cls = program.cls(target);
  if (!cls) throw UnknownClassError(target);
  if (nav_depth < 1) nav_depth = 1;

  ExtractionResult res;
  Grammar& g = res.grammar;
  g = base_grammar();

  // Navigation roots: this, every method parameter, every non-void result.
  std::vector<detail::Nav> navs;
  detail::enumerate_navs(program, "this", Type::Class(target), nav_depth, true, navs);
  for (const auto& m : cls->methods) {
    for (const auto& p : m.params)
      detail::enumerate_navs(program, p.name, p.type, nav_depth, true, navs);
    if (!m.return_type.is_void())
      detail::enumerate_navs(program, "result", m.return_type, nav_depth, false, navs);
  }

  std::set<std::string> seen_terminal;
  std::vector<std::string> num_vars, bool_vars;
  auto add_terminal = [&](std::vector<std::string>& bucket, const std::string& text,
                          Type type, bool is_set, Provenance prov) {
    if (!seen_terminal.insert(text).second) return;
    bucket.push_back(text);
    res.terminals.push_back({text, type, is_set, prov});
  };

  for (const auto& nav : navs) {
    Provenance prov = nav.length == 0
                          ? (nav.text == "this"     ? Provenance::FieldPath
                             : nav.text == "result" ? Provenance::Result
                                                    : Provenance::Parameter)
                          : Provenance::FieldPath;
    if (nav.type.is_int()) {
      add_terminal(num_vars, nav.text, Type::Int(), false, prov);
      if (nav.pre_readable && nav.length >= 1)
        add_terminal(num_vars, "old(" + nav.text + ")", Type::Int(), false,
                     Provenance::OldWrap);
    } else if (nav.type.is_bool()) {
      add_terminal(bool_vars, nav.text, Type::Bool(), false, prov);
      if (nav.pre_readable && nav.length >= 1)
        add_terminal(bool_vars, "old(" + nav.text + ")", Type::Bool(), false,
                     Provenance::OldWrap);
    } else if (nav.type.is_class() && nav.text != "this") {
      add_terminal(bool_vars, nav.text + " != null", Type::Bool(), false,
                   Provenance::NullTest);
      add_terminal(bool_vars, nav.text + " == null", Type::Bool(), false,
                   Provenance::NullTest);
    }
  }

  // Class constants join the literal pool.
  std::vector<std::string> num_consts{"-1", "0", "1"};
  for (const auto& k : cls->constants) {
    num_consts.push_back(k.name);
    res.terminals.push_back({k.name, Type::Int(), false, Provenance::Constant});
  }

  // reach(e, f) set expressions: e is a reference navigation of length
  // <= nav_depth - 1 whose class declares the recursive field f.
  std::map<std::string, std::vector<std::string>> set_exprs;  // class -> texts
  auto add_reach_sources = [&](const std::vector<detail::Nav>& sources) {
    for (const auto& nav : sources) {
      if (!nav.type.is_class() || nav.length > nav_depth - 1) continue;
      for (const auto& f : detail::recursive_fields(program, nav.type.class_name)) {
        std::string text = "reach(" + nav.text + ", " + f + ")";
        if (!seen_terminal.insert(text).second) continue;
        set_exprs[nav.type.class_name].push_back(text);
        res.terminals.push_back({text, Type::Class(nav.type.class_name), true,
                                 Provenance::ReachExpr});
      }
    }
  };
  add_reach_sources(navs);

  // One quantified variable per class with set expressions, named from a
  // fixed pool in alphabetical class order.
  static const char* kVarPool[] = {"l", "m", "n", "o", "p", "q"};
  std::vector<std::string> quant_classes;
  for (const auto& [c, v] : set_exprs) quant_classes.push_back(c);

  auto& prods = g.productions;
  // Instantiate the schema symbols.
  if (!num_vars.empty())
    for (const auto& t : num_vars) prods["<NumVar>"].push_back({t});
  for (const auto& t : num_consts) prods["<NumConst>"].push_back({t});
  if (!bool_vars.empty()) {
    for (const auto& t : bool_vars) prods["<BoolVar>"].push_back({t});
    prods["<BooleanExpr>"].push_back({"<BoolVar>"});
  }
  // Membership lives inside quantified bodies only; the schema rule and the
  // top-level alternative are dropped.
  prods.erase("<MembershipExpr>");
  auto& bool_alts = prods["<BooleanExpr>"];
  bool_alts.erase(std::remove_if(bool_alts.begin(), bool_alts.end(),
                                 [](const Alternative& a) {
                                   return a.size() == 1 && a[0] == "<MembershipExpr>";
                                 }),
                  bool_alts.end());
  prods["<QuantifiedExpr>"].clear();
  prods.erase("<QBooleanExpr>");
  prods.erase("<QLogicCmpExpr>");

  size_t var_idx = 0;
  for (const auto& qc : quant_classes) {
    std::string v = var_idx < 6 ? kVarPool[var_idx] : "v" + std::to_string(var_idx);
    var_idx++;
    std::string P = "<" + qc + "_";
    res.terminals.push_back({v, Type::Class(qc), false, Provenance::QuantVar});

    // Variable-rooted navigations extend the numeric/boolean pools inside
    // the body, and contribute reach sources of their own.
    std::vector<detail::Nav> vnavs;
    detail::enumerate_navs(program, v, Type::Class(qc), nav_depth, true, vnavs);
    std::vector<std::string> q_num, q_bool;
    for (const auto& nav : vnavs) {
      if (nav.type.is_int()) {
        add_terminal(q_num, nav.text, Type::Int(), false, Provenance::FieldPath);
        if (nav.length >= 1)
          add_terminal(q_num, "old(" + nav.text + ")", Type::Int(), false,
                       Provenance::OldWrap);
      } else if (nav.type.is_bool()) {
        add_terminal(q_bool, nav.text, Type::Bool(), false, Provenance::FieldPath);
      } else if (nav.type.is_class() && nav.length >= 1) {
        add_terminal(q_bool, nav.text + " != null", Type::Bool(), false,
                     Provenance::NullTest);
        add_terminal(q_bool, nav.text + " == null", Type::Bool(), false,
                     Provenance::NullTest);
      }
    }
    add_reach_sources(vnavs);

    prods["<QuantifiedExpr>"].push_back(
        {"<Quantifier>", P + "TypedVar>", ":", P + "QBody>"});
    prods[P + "TypedVar>"] = {{qc + " " + v}};
    prods[P + "Var>"] = {{v}};
    prods[P + "QMembershipExpr>"] = {{P + "SetExpr>", ".has(", P + "Var>", ")"}};
    for (const auto& t : set_exprs[qc]) prods[P + "SetExpr>"].push_back({t});
    prods[P + "QBody>"] = {{P + "QNumCmpExpr>"},
                           {P + "QLogicCmpExpr>"},
                           {P + "QMembershipExpr>"},
                           {"!", P + "QBody>"},
                           {P + "QBoolVar>"}};
    prods[P + "QNumCmpExpr>"] = {
        {P + "QNumExpr>", "<NumCmpOp>", P + "QNumExpr>"},
        {P + "QNumExpr>", "<NumCmpOp>", P + "QNumExpr>", "<NumBinOp>", P + "QNumExpr>"}};
    prods[P + "QNumExpr>"] = {{P + "QNumVar>"}, {"<NumConst>"}};
    prods[P + "QNumVar>"] = {{"<NumVar>"}};
    for (const auto& t : q_num) prods[P + "QNumVar>"].push_back({t});
    prods[P + "QBoolVar>"] = {};
    if (!bool_vars.empty()) prods[P + "QBoolVar>"].push_back({"<BoolVar>"});
    for (const auto& t : q_bool) prods[P + "QBoolVar>"].push_back({t});
    prods[P + "QLogicCmpExpr>"] = {
        {P + "QBody>", "<QLogicOp>", P + "QNumCmpExpr>"},
        {"(", P + "QBoolVar>", "<QLogicOp>", P + "QBoolVar>", ")", "<QLogicOp>",
         P + "QNumCmpExpr>"},
        {"(", P + "QNumCmpExpr>", ")", "<QLogicOp>", "(", P + "QNumCmpExpr>", ")"}};
  }
  if (quant_classes.empty()) {
    prods.erase("<QuantifiedExpr>");
    auto& top = prods["<FuzzedSpec>"];
    top.erase(std::remove_if(top.begin(), top.end(),
                             [](const Alternative& a) {
                               return a.size() == 1 && a[0] == "<QuantifiedExpr>";
                             }),
              top.end());
  }

  reduce(g);
  return res;
}

inline Grammar extract_grammar(const Program& program, const std::string& target,
                               int nav_depth) {
  return extract_grammar_full(program, target, nav_depth).grammar;
}

// ---------------------------------------------------------------------------
// JSON

using json = nlohmann::ordered_json;

inline json to_json(const Grammar& g) {
  json prods = json::object();
  for (const auto& [nt, alts] : g.productions) {
    json jalts = json::array();
    for (const auto& alt : alts) jalts.push_back(alt);
    prods[nt] = jalts;
  }
  return json{{"start", g.start}, {"productions", prods}};
}

inline Grammar from_json(const json& j) {
  Grammar g;
  g.start = j.at("start").get<std::string>();
  for (const auto& [nt, alts] : j.at("productions").items()) {
    std::vector<Alternative> v;
    for (const auto& alt : alts) v.push_back(alt.get<Alternative>());
    g.productions[nt] = v;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Recognizer (Earley over the character string; terminals are matched as
// literal substrings with an optional single space before each symbol).

namespace detail {

struct EarleyItem {
  int nt;      // index into nts
  int alt;     // alternative index
  int dot;     // position within the alternative
  int origin;  // chart index where this item started
  bool operator==(const EarleyItem& o) const {
    return nt == o.nt && alt == o.alt && dot == o.dot && origin == o.origin;
  }
};

}  // namespace detail

inline bool recognize(const Grammar& g, const std::string& text) {
  std::vector<std::string> nts;
  std::map<std::string, int> nt_index;
  for (const auto& [nt, alts] : g.productions) {
    nt_index[nt] = static_cast<int>(nts.size());
    nts.push_back(nt);
  }
  if (!nt_index.count(g.start)) return false;
  const int n = static_cast<int>(text.size());

  // Chart positions are character offsets 0..n.
  std::vector<std::vector<detail::EarleyItem>> chart(n + 1);
  auto add = [&](int pos, detail::EarleyItem it) {
    for (const auto& e : chart[pos])
      if (e == it) return;
    chart[pos].push_back(it);
  };
  auto alts_of = [&](int nt) -> const std::vector<Alternative>& {
    return g.productions.at(nts[nt]);
  };

  int start_nt = nt_index[g.start];
  for (int a = 0; a < static_cast<int>(alts_of(start_nt).size()); ++a)
    add(0, {start_nt, a, 0, 0});

  auto try_terminal = [&](int pos, const std::string& t) -> int {
    int p = pos;
    if (p < n && text[p] == ' ') p++;
    if (p + static_cast<int>(t.size()) > n) return -1;
    if (text.compare(p, t.size(), t) != 0) return -1;
    return p + static_cast<int>(t.size());
  };

  for (int pos = 0; pos <= n; ++pos) {
    for (size_t idx = 0; idx < chart[pos].size(); ++idx) {
      detail::EarleyItem it = chart[pos][idx];
      const auto& alt = alts_of(it.nt)[it.alt];
      if (it.dot < static_cast<int>(alt.size())) {
        const std::string& sym = alt[it.dot];
        if (is_nonterminal(sym)) {
          auto f = nt_index.find(sym);
          if (f == nt_index.end()) continue;
          for (int a = 0; a < static_cast<int>(alts_of(f->second).size()); ++a)
            add(pos, {f->second, a, 0, pos});
        } else {
          int end = try_terminal(pos, sym);
          if (end >= 0) add(end, {it.nt, it.alt, it.dot + 1, it.origin});
        }
      } else {
        // Completion: advance items in the origin set waiting on this NT.
        for (size_t j = 0; j < chart[it.origin].size(); ++j) {
          detail::EarleyItem w = chart[it.origin][j];
          const auto& walt = alts_of(w.nt)[w.alt];
          if (w.dot < static_cast<int>(walt.size()) && walt[w.dot] == nts[it.nt])
            add(pos, {w.nt, w.alt, w.dot + 1, w.origin});
        }
      }
    }
  }
  for (const auto& it : chart[n]) {
    const auto& alt = alts_of(it.nt)[it.alt];
    if (it.nt == start_nt && it.origin == 0 && it.dot == static_cast<int>(alt.size()))
      return true;
  }
  return false;
}

}  // namespace specfuzz::grammar
