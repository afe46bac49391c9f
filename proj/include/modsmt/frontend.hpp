#pragma once

/// Input languages and output formats.
///
///  * an SMT-LIB2 subset for QF_BV over ring operations only
///  * a line-oriented s-expression loop format for invariant generation
///  * a small s-expression format for Groebner basis inputs
///
/// Every rejection is a FrontendError carrying one spanned Diagnostic.

#include "modsmt/formula.hpp"
#include "modsmt/invgen.hpp"
#include "modsmt/poly.hpp"
#include "modsmt/satcheck.hpp"

#include "json.hpp"

#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace modsmt {

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based
  std::string code;
  std::string message;

  [[nodiscard]] std::string str() const {
    return std::to_string(line) + ":" + std::to_string(column) + ": " +
           (severity == Severity::error ? "error" : "warning") + " [" + code + "] " + message;
  }
};

class FrontendError : public std::runtime_error {
 public:
  explicit FrontendError(Diagnostic d) : std::runtime_error(d.str()), diag_(std::move(d)) {}
  [[nodiscard]] const Diagnostic& diagnostic() const noexcept { return diag_; }

 private:
  Diagnostic diag_;
};

// ---------------------------------------------------------------------------
// S-expressions

struct Span {
  std::size_t line = 1, column = 1;
};

struct SExpr {
  enum class Kind { atom, string, list };
  Kind kind = Kind::atom;
  std::string text;  // atom / string contents
  std::vector<SExpr> items;
  Span span;

  [[nodiscard]] bool is_atom() const { return kind == Kind::atom; }
  [[nodiscard]] bool is_list() const { return kind == Kind::list; }
  [[nodiscard]] bool is_atom(std::string_view s) const { return kind == Kind::atom && text == s; }
  /// Head symbol of a nonempty list whose first item is an atom.
  [[nodiscard]] std::string_view head() const {
    if (kind != Kind::list || items.empty() || !items[0].is_atom()) return {};
    return items[0].text;
  }
};

[[noreturn]] inline void fail(const Span& at, std::string code, std::string message) {
  throw FrontendError(Diagnostic{Severity::error, at.line, at.column, std::move(code), std::move(message)});
}

/// Reads all top-level s-expressions. Comments run from ';' to end of line;
/// |quoted| symbols lose their bars; "strings" use "" as an escaped quote.
class SExprReader {
 public:
  explicit SExprReader(std::string_view text) : s_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    while (true) {
      skip();
      if (pos_ >= s_.size()) return out;
      out.push_back(read());
    }
  }

 private:
  Span here() const { return {line_, col_}; }

  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  SExpr read() {
    Span start = here();
    char c = s_[pos_];
    if (c == ')') fail(start, "E_SYNTAX", "unexpected ')'");
    if (c == '(') {
      advance();
      SExpr list{SExpr::Kind::list, {}, {}, start};
      while (true) {
        skip();
        if (pos_ >= s_.size()) fail(start, "E_SYNTAX", "unclosed '('");
        if (s_[pos_] == ')') {
          advance();
          return list;
        }
        if (list.items.size() > 100000) fail(here(), "E_SYNTAX", "list too long");
        if (++depth_ > 2000) fail(here(), "E_SYNTAX", "nesting too deep");
        list.items.push_back(read());
        --depth_;
      }
    }
    if (c == '"') {
      advance();
      std::string text;
      while (true) {
        if (pos_ >= s_.size()) fail(start, "E_SYNTAX", "unterminated string");
        if (s_[pos_] == '"') {
          advance();
          if (pos_ < s_.size() && s_[pos_] == '"') {
            text += '"';
            advance();
            continue;
          }
          return {SExpr::Kind::string, std::move(text), {}, start};
        }
        text += s_[pos_];
        advance();
      }
    }
    if (c == '|') {
      advance();
      std::string text;
      while (true) {
        if (pos_ >= s_.size()) fail(start, "E_SYNTAX", "unterminated quoted symbol");
        if (s_[pos_] == '|') {
          advance();
          if (text.empty()) fail(start, "E_SYNTAX", "empty quoted symbol");
          return {SExpr::Kind::atom, std::move(text), {}, start};
        }
        text += s_[pos_];
        advance();
      }
    }
    std::string text;
    while (pos_ < s_.size()) {
      char d = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' || d == '"' || d == '|') break;
      text += d;
      advance();
    }
    return {SExpr::Kind::atom, std::move(text), {}, start};
  }

  std::string_view s_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1, depth_ = 0;
};

inline std::vector<SExpr> read_sexprs(std::string_view text) { return SExprReader(text).read_all(); }

namespace detail {

inline bool is_numeral(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline bool simple_symbol(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && std::string_view("~!@$%^&*_-+=<>.?/").find(c) == std::string_view::npos)
      return false;
  return true;
}

inline unsigned parse_width(const SExpr& e) {
  if (!e.is_atom() || !is_numeral(e.text) || e.text.size() > 6) fail(e.span, "E_SORT", "expected a bit width");
  unsigned w = static_cast<unsigned>(std::stoul(e.text));
  if (w == 0 || w > 65536) fail(e.span, "E_SORT", "bit width out of range");
  return w;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SMT-LIB2 subset

struct Smt2Script {
  Problem problem;
  bool check_sat = false;
  bool get_model = false;
};

namespace detail {

class Smt2Parser {
 public:
  Smt2Script parse(std::string_view text) {
    for (const auto& cmd : read_sexprs(text)) command(cmd);
    if (script_.problem.width == 0) script_.problem.width = 1;
    return std::move(script_);
  }

 private:
  struct Node {
    bool is_bool = false;
    TermPtr term;
    FormulaPtr formula;
  };

  void command(const SExpr& c) {
    if (!c.is_list() || c.head().empty()) fail(c.span, "E_SYNTAX", "expected a command");
    const std::string_view h = c.head();
    if (h == "set-logic") {
      expect_args(c, 1);
      if (!c.items[1].is_atom("QF_BV")) fail(c.items[1].span, "E_UNSUPPORTED", "only QF_BV is supported");
    } else if (h == "set-info" || h == "set-option") {
      if (c.items.size() < 2) fail(c.span, "E_ARITY", std::string(h) + " needs an attribute");
    } else if (h == "declare-const") {
      expect_args(c, 2);
      declare(c.items[1], c.items[2]);
    } else if (h == "declare-fun") {
      expect_args(c, 3);
      if (!c.items[2].is_list() || !c.items[2].items.empty())
        fail(c.items[2].span, "E_UNSUPPORTED", "only nullary functions are supported");
      declare(c.items[1], c.items[3]);
    } else if (h == "assert") {
      expect_args(c, 1);
      script_.problem.assertions.push_back(formula(c.items[1]));
    } else if (h == "check-sat") {
      expect_args(c, 0);
      script_.check_sat = true;
    } else if (h == "get-model") {
      expect_args(c, 0);
      script_.get_model = true;
    } else if (h == "exit") {
      expect_args(c, 0);
    } else {
      fail(c.items[0].span, "E_UNSUPPORTED", "unsupported command '" + std::string(h) + "'");
    }
  }

  static void expect_args(const SExpr& c, std::size_t n) {
    if (c.items.size() != n + 1)
      fail(c.span, "E_ARITY", "'" + c.items[0].text + "' expects " + std::to_string(n) + " argument(s)");
  }

  void use_width(unsigned w, const Span& at) {
    auto& pw = script_.problem.width;
    if (pw == 0) pw = w;
    if (pw != w)
      fail(at, "E_WIDTH_MIX", "width " + std::to_string(w) + " differs from the problem width " + std::to_string(pw));
  }

  void declare(const SExpr& name, const SExpr& sort) {
    if (!name.is_atom() || name.text.empty() || detail::is_numeral(name.text))
      fail(name.span, "E_SYNTAX", "expected a symbol");
    if (reserved(name.text)) fail(name.span, "E_SYNTAX", "'" + name.text + "' is reserved");
    if (sorts_.count(name.text)) fail(name.span, "E_DUPLICATE", "'" + name.text + "' is already declared");
    if (sort.is_atom("Bool")) fail(sort.span, "E_UNSUPPORTED", "boolean constants are not supported");
    if (!sort.is_list() || sort.items.size() != 3 || !sort.items[0].is_atom("_") || !sort.items[1].is_atom("BitVec"))
      fail(sort.span, "E_SORT", "expected (_ BitVec d)");
    unsigned w = detail::parse_width(sort.items[2]);
    use_width(w, sort.span);
    sorts_[name.text] = w;
    script_.problem.vars.push_back(name.text);
  }

  static bool reserved(std::string_view s) {
    static const char* words[] = {"true", "false", "and", "or", "not", "ite", "=", "distinct", "_", "let", "!"};
    for (const char* w : words)
      if (s == w) return true;
    return s.rfind("bv", 0) == 0 && s.size() > 2 && detail::is_numeral(s.substr(2));
  }

  FormulaPtr formula(const SExpr& e) {
    Node n = node(e);
    if (!n.is_bool) fail(e.span, "E_SORT", "expected a boolean term");
    return n.formula;
  }

  TermPtr term(const SExpr& e) {
    Node n = node(e);
    if (n.is_bool) fail(e.span, "E_SORT", "expected a bit-vector term");
    return n.term;
  }

  static Node bv(TermPtr t) { return {false, std::move(t), nullptr}; }
  static Node boolean(FormulaPtr f) { return {true, nullptr, std::move(f)}; }

  Node literal(const SExpr& e) {
    const std::string& s = e.text;
    BigInt v = 0;
    unsigned w = 0;
    if (s.size() > 2 && s[0] == '#' && s[1] == 'b') {
      for (std::size_t i = 2; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') fail(e.span, "E_SYNTAX", "bad binary literal");
        v = v * 2 + (s[i] - '0');
      }
      w = static_cast<unsigned>(s.size() - 2);
    } else if (s.size() > 2 && s[0] == '#' && s[1] == 'x') {
      for (std::size_t i = 2; i < s.size(); ++i) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
        int dgt = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : (c >= 'a' && c <= 'f') ? c - 'a' + 10 : -1;
        if (dgt < 0) fail(e.span, "E_SYNTAX", "bad hexadecimal literal");
        v = v * 16 + dgt;
      }
      w = static_cast<unsigned>(4 * (s.size() - 2));
    } else {
      fail(e.span, "E_SYNTAX", "bad literal '" + s + "'");
    }
    if (w > 65536) fail(e.span, "E_SORT", "literal too wide");
    use_width(w, e.span);
    return bv(bv::constant(v));
  }

  Node node(const SExpr& e) {
    if (e.kind == SExpr::Kind::string) fail(e.span, "E_SORT", "string literals are not terms");
    if (e.is_atom()) {
      if (e.text == "true") return boolean(bv::truth());
      if (e.text == "false") return boolean(bv::falsity());
      if (!e.text.empty() && e.text[0] == '#') return literal(e);
      if (detail::is_numeral(e.text)) fail(e.span, "E_SORT", "numerals need an explicit width, use (_ bvN d)");
      auto it = sorts_.find(e.text);
      if (it == sorts_.end()) fail(e.span, "E_UNKNOWN_SYMBOL", "unknown symbol '" + e.text + "'");
      return bv(bv::var(e.text));
    }
    if (e.items.empty()) fail(e.span, "E_SYNTAX", "empty application");
    const SExpr& f = e.items[0];
    if (f.is_list()) fail(f.span, "E_UNSUPPORTED", "indexed or higher-order operator");
    if (f.kind == SExpr::Kind::string) fail(f.span, "E_SYNTAX", "expected an operator");
    const std::string& op = f.text;
    const std::size_t argc = e.items.size() - 1;
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (argc < lo || argc > hi) fail(e.span, "E_ARITY", "wrong number of arguments to '" + op + "'");
    };

    if (op == "_") {
      arity(2, 2);
      const SExpr& a = e.items[1];
      if (!a.is_atom() || a.text.size() < 3 || a.text.rfind("bv", 0) != 0 || !detail::is_numeral(a.text.substr(2)))
        fail(a.span, "E_SYNTAX", "expected (_ bvN d)");
      unsigned w = detail::parse_width(e.items[2]);
      use_width(w, e.items[2].span);
      BigInt v = decimal(a.text.substr(2));
      return bv(bv::constant(ResidueInt(v, w).value()));
    }
    if (op == "bvadd" || op == "bvmul" || op == "bvsub") {
      arity(2, SIZE_MAX);
      TermKind k = op == "bvadd" ? TermKind::add : op == "bvmul" ? TermKind::mul : TermKind::sub;
      TermPtr acc = term(e.items[1]);
      for (std::size_t i = 2; i <= argc; ++i) acc = bv::node(k, {acc, term(e.items[i])});
      return bv(acc);
    }
    if (op == "bvneg") {
      arity(1, 1);
      return bv(bv::neg(term(e.items[1])));
    }
    if (op == "not") {
      arity(1, 1);
      return boolean(bv::negate(formula(e.items[1])));
    }
    if (op == "and" || op == "or") {
      arity(1, SIZE_MAX);
      std::vector<FormulaPtr> fs;
      for (std::size_t i = 1; i <= argc; ++i) fs.push_back(formula(e.items[i]));
      return boolean(op == "and" ? bv::conj(std::move(fs)) : bv::disj(std::move(fs)));
    }
    if (op == "ite") {
      arity(3, 3);
      FormulaPtr c = formula(e.items[1]);
      Node a = node(e.items[2]), b = node(e.items[3]);
      if (a.is_bool != b.is_bool) fail(e.span, "E_SORT", "ite branches have different sorts");
      if (a.is_bool) return boolean(bv::ite(c, a.formula, b.formula));
      return bv(bv::ite(c, a.term, b.term));
    }
    if (op == "=" || op == "distinct") {
      arity(2, SIZE_MAX);
      std::vector<Node> args;
      for (std::size_t i = 1; i <= argc; ++i) {
        args.push_back(node(e.items[i]));
        if (args.back().is_bool != args.front().is_bool)
          fail(e.items[i].span, "E_SORT", "arguments of '" + op + "' have different sorts");
      }
      auto pair = [&](const Node& a, const Node& b) -> FormulaPtr {
        if (a.is_bool) {
          FormulaPtr f = bv::iff(a.formula, b.formula);
          return op == "=" ? f : bv::negate(f);
        }
        return op == "=" ? bv::eq(a.term, b.term) : bv::distinct(a.term, b.term);
      };
      std::vector<FormulaPtr> parts;
      if (op == "=") {
        for (std::size_t i = 0; i + 1 < args.size(); ++i) parts.push_back(pair(args[i], args[i + 1]));
      } else {
        for (std::size_t i = 0; i < args.size(); ++i)
          for (std::size_t j = i + 1; j < args.size(); ++j) parts.push_back(pair(args[i], args[j]));
      }
      if (parts.size() == 1) return boolean(parts[0]);
      return boolean(bv::conj(std::move(parts)));
    }
    if (sorts_.count(op)) fail(f.span, "E_SORT", "'" + op + "' is a constant, not a function");
    static const char* known_unsupported[] = {"bvand", "bvor", "bvxor", "bvnot", "bvshl", "bvlshr", "bvashr", "bvudiv",
                                              "bvurem", "bvsdiv", "bvsrem", "bvsmod", "bvult", "bvule", "bvugt",
                                              "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge", "concat", "extract",
                                              "let", "=>", "xor", "bvnand", "bvnor", "bvxnor", "bvcomp", "!",
                                              "forall", "exists", "zero_extend", "sign_extend", "rotate_left",
                                              "rotate_right", "repeat"};
    for (const char* k : known_unsupported)
      if (op == k) fail(f.span, "E_UNSUPPORTED", "operator '" + op + "' is outside the supported fragment");
    fail(f.span, "E_UNKNOWN_SYMBOL", "unknown function '" + op + "'");
  }

  Smt2Script script_;
  std::map<std::string, unsigned, std::less<>> sorts_;
};

}  // namespace detail

inline Smt2Script parse_smt2_script(std::string_view text) { return detail::Smt2Parser().parse(text); }
inline Problem parse_smt2(std::string_view text) { return parse_smt2_script(text).problem; }

// ---------------------------------------------------------------------------
// Printing

inline std::string smt2_symbol(const std::string& s) { return detail::simple_symbol(s) ? s : "|" + s + "|"; }

inline std::string to_smt2(const Formula& f, unsigned width);

inline std::string to_smt2(const BvTerm& t, unsigned width) {
  auto bin = [&](const char* op) {
    return std::string("(") + op + " " + to_smt2(*t.args[0], width) + " " + to_smt2(*t.args[1], width) + ")";
  };
  switch (t.kind) {
    case TermKind::var: return smt2_symbol(t.name);
    case TermKind::constant: return smt2_const(t.value, width);
    case TermKind::add: return bin("bvadd");
    case TermKind::sub: return bin("bvsub");
    case TermKind::mul: return bin("bvmul");
    case TermKind::neg: return "(bvneg " + to_smt2(*t.args[0], width) + ")";
    case TermKind::ite:
      return "(ite " + to_smt2(*t.cond, width) + " " + to_smt2(*t.args[0], width) + " " + to_smt2(*t.args[1], width) + ")";
  }
  return "";
}

inline std::string to_smt2(const Formula& f, unsigned width) {
  auto list = [&](const char* op) {
    std::string s = std::string("(") + op;
    for (const auto& a : f.args) s += " " + to_smt2(*a, width);
    return s + ")";
  };
  switch (f.kind) {
    case FormulaKind::truth: return "true";
    case FormulaKind::falsity: return "false";
    case FormulaKind::eq: return "(= " + to_smt2(*f.terms[0], width) + " " + to_smt2(*f.terms[1], width) + ")";
    case FormulaKind::distinct:
      return "(distinct " + to_smt2(*f.terms[0], width) + " " + to_smt2(*f.terms[1], width) + ")";
    case FormulaKind::and_: return f.args.empty() ? "true" : list("and");
    case FormulaKind::or_: return f.args.empty() ? "false" : list("or");
    case FormulaKind::not_: return list("not");
    case FormulaKind::ite: return list("ite");
    case FormulaKind::iff: return list("=");
  }
  return "";
}

inline std::string print_problem(const Problem& p) {
  std::ostringstream os;
  os << "(set-logic QF_BV)\n";
  for (const auto& v : p.vars) os << "(declare-const " << smt2_symbol(v) << " (_ BitVec " << p.width << "))\n";
  for (const auto& a : p.assertions) os << "(assert " << to_smt2(*a, p.width) << ")\n";
  os << "(check-sat)\n";
  return os.str();
}

inline bool same_term(const BvTerm& a, const BvTerm& b);

inline bool same_formula(const Formula& a, const Formula& b) {
  if (a.kind != b.kind || a.terms.size() != b.terms.size() || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i)
    if (!same_term(*a.terms[i], *b.terms[i])) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same_formula(*a.args[i], *b.args[i])) return false;
  return true;
}

inline bool same_term(const BvTerm& a, const BvTerm& b) {
  if (a.kind != b.kind || a.name != b.name || a.value != b.value || a.args.size() != b.args.size()) return false;
  if (bool(a.cond) != bool(b.cond) || (a.cond && !same_formula(*a.cond, *b.cond))) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same_term(*a.args[i], *b.args[i])) return false;
  return true;
}

inline bool same_problem(const Problem& a, const Problem& b) {
  if (a.width != b.width || a.vars != b.vars || a.assertions.size() != b.assertions.size()) return false;
  for (std::size_t i = 0; i < a.assertions.size(); ++i)
    if (!same_formula(*a.assertions[i], *b.assertions[i])) return false;
  return true;
}

/// (model (define-fun x () (_ BitVec d) (_ bvN d)) ...) on one line, in
/// declaration order.
inline std::string print_model(const Assignment& m, const Problem& p) {
  std::string s = "(model";
  for (const auto& v : p.vars) {
    auto it = m.find(v);
    if (it == m.end()) continue;
    s += " (define-fun " + smt2_symbol(v) + " () (_ BitVec " + std::to_string(p.width) + ") " +
         smt2_const(it->second.value(), p.width) + ")";
  }
  return s + ")";
}

inline std::string print_verdict(const Verdict& v, const Problem& p) {
  if (v.status == Status::sat) return "sat\n" + print_model(v.model, p);
  return to_string(v.status);
}

/// Exit codes: sat and unsat 0, unknown 1 (input errors are 2).
inline int exit_code(Status s) { return s == Status::unknown ? 1 : 0; }

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Diagnostic& d) {
  return {{"severity", d.severity == Severity::error ? "error" : "warning"},
          {"line", d.line},
          {"column", d.column},
          {"code", d.code},
          {"message", d.message}};
}

inline nlohmann::json verdict_json(const Verdict& v, const Problem& p) {
  nlohmann::json j;
  j["status"] = to_string(v.status);
  nlohmann::json model = nlohmann::json::object();
  if (v.status == Status::sat)
    for (const auto& x : p.vars)
      if (auto it = v.model.find(x); it != v.model.end()) model[x] = it->second.value().str();
  j["model"] = model;
  j["width"] = p.width;
  j["conjuncts"] = v.conjuncts;
  j["nodes"] = v.nodes;
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : v.certificates) {
    const char* kind = c.kind == Certificate::Kind::folded ? "folded"
                       : c.kind == Certificate::Kind::gb_constant ? "gb_constant" : "exhausted";
    nlohmann::json cj{{"kind", kind}, {"conjunct", c.conjunct}};
    if (c.constant) cj["constant"] = c.constant->value().str();
    certs.push_back(cj);
  }
  j["certificates"] = certs;
  if (!v.reason.empty()) j["reason"] = v.reason;
  return j;
}

inline nlohmann::json error_json(const Diagnostic& d) { return {{"status", "error"}, {"diagnostic", to_json(d)}}; }

// ---------------------------------------------------------------------------
// Polynomials in s-expression form (loop and gb inputs):
//   numeral | symbol | "infix text" | (+ p ...) | (- p) | (- p q ...) | (* p ...) | (^ p n)

namespace detail {

inline Poly sexpr_poly(const SExpr& e, const RingPtr& ring, const std::function<void(const SExpr&, std::size_t)>& on_var) {
  if (e.kind == SExpr::Kind::string) {
    try {
      Poly p = parse_poly(e.text, ring);
      for (std::size_t v : p.variables()) on_var(e, v);
      return p;
    } catch (const PolyParseError& err) {
      Span at = e.span;
      at.column += 1 + err.offset();
      std::string msg = err.what();
      fail(at, msg.find("unknown variable") != std::string::npos ? "E_UNKNOWN_SYMBOL" : "E_SYNTAX", msg);
    }
  }
  if (e.is_atom()) {
    if (is_numeral(e.text)) return Poly::constant(ring, decimal(e.text));
    auto idx = ring->index_of(e.text);
    if (!idx) fail(e.span, "E_UNKNOWN_SYMBOL", "unknown variable '" + e.text + "'");
    on_var(e, *idx);
    return Poly::variable(ring, *idx);
  }
  if (e.items.empty() || !e.items[0].is_atom()) fail(e.span, "E_SYNTAX", "expected a polynomial");
  const std::string& op = e.items[0].text;
  const std::size_t argc = e.items.size() - 1;
  if (op == "+" || op == "*" || op == "bvadd" || op == "bvmul") {
    if (argc == 0) fail(e.span, "E_ARITY", "'" + op + "' needs arguments");
    Poly acc = sexpr_poly(e.items[1], ring, on_var);
    for (std::size_t i = 2; i <= argc; ++i) {
      Poly x = sexpr_poly(e.items[i], ring, on_var);
      if (op == "*" || op == "bvmul") {
        if (acc.degree() + x.degree() > kMaxDegree || acc.size() * x.size() > kMaxProductTerms)
          fail(e.span, "E_UNSUPPORTED", "product too large");
        acc = acc * x;
      } else {
        acc = acc + x;
      }
    }
    return acc;
  }
  if (op == "-" || op == "bvsub" || op == "bvneg") {
    if (argc == 0 || (op == "bvneg" && argc != 1) || (op == "bvsub" && argc < 2))
      fail(e.span, "E_ARITY", "wrong number of arguments to '" + op + "'");
    Poly acc = sexpr_poly(e.items[1], ring, on_var);
    if (argc == 1) return -acc;
    for (std::size_t i = 2; i <= argc; ++i) acc = acc - sexpr_poly(e.items[i], ring, on_var);
    return acc;
  }
  if (op == "^") {
    if (argc != 2) fail(e.span, "E_ARITY", "'^' takes a base and an exponent");
    const SExpr& n = e.items[2];
    if (!n.is_atom() || !is_numeral(n.text) || n.text.size() > 3) fail(n.span, "E_SYNTAX", "exponent must be a small numeral");
    unsigned k = static_cast<unsigned>(std::stoul(n.text));
    Poly base = sexpr_poly(e.items[1], ring, on_var);
    if (k > kMaxExponent || base.degree() * k > kMaxDegree || (k > 1 && base.size() > 64)) fail(n.span, "E_UNSUPPORTED", "exponent too large");
    Poly acc = Poly::constant(ring, 1);
    for (unsigned i = 0; i < k; ++i) acc = acc * base;
    return acc;
  }
  fail(e.items[0].span, "E_UNSUPPORTED", "unsupported polynomial operator '" + op + "'");
}

inline std::optional<RelOp> rel_op(std::string_view s) {
  if (s == "=") return RelOp::eq;
  if (s == "!=" || s == "distinct") return RelOp::ne;
  if (s == "<=") return RelOp::le;
  if (s == ">=") return RelOp::ge;
  if (s == "<") return RelOp::lt;
  if (s == ">") return RelOp::gt;
  return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loop format

/// Loop file with the span of each section, kept for diagnostics.
inline LoopProblem parse_loop(std::string_view text) {
  auto items = read_sexprs(text);
  std::optional<unsigned> width;
  std::optional<std::vector<std::string>> vars;
  std::optional<LoopMode> mode;
  std::vector<const SExpr*> sections;
  Span width_at, vars_at;

  for (const auto& s : items) {
    const std::string_view h = s.head();
    if (h.empty()) fail(s.span, "E_SYNTAX", "expected a (section ...) form");
    auto once = [&](bool seen) {
      if (seen) fail(s.span, "E_DUPLICATE", "section '" + std::string(h) + "' given twice");
    };
    if (h == "width") {
      once(width.has_value());
      if (s.items.size() != 2) fail(s.span, "E_ARITY", "(width d) takes one numeral");
      width = detail::parse_width(s.items[1]);
      width_at = s.span;
    } else if (h == "vars") {
      once(vars.has_value());
      std::vector<std::string> vs;
      for (std::size_t i = 1; i < s.items.size(); ++i) {
        const SExpr& v = s.items[i];
        if (!v.is_atom() || v.text.empty() || detail::is_numeral(v.text) ||
            v.text.find_first_of("'") != std::string::npos || !std::isalpha(static_cast<unsigned char>(v.text[0])))
          fail(v.span, "E_SYNTAX", "bad variable name");
        for (const auto& w : vs)
          if (w == v.text) fail(v.span, "E_DUPLICATE", "variable '" + v.text + "' listed twice");
        vs.push_back(v.text);
      }
      vars = std::move(vs);
      vars_at = s.span;
    } else if (h == "mode") {
      once(mode.has_value());
      if (s.items.size() != 2) fail(s.span, "E_ARITY", "(mode verify|refute)");
      if (s.items[1].is_atom("verify"))
        mode = LoopMode::verify;
      else if (s.items[1].is_atom("refute"))
        mode = LoopMode::refute;
      else
        fail(s.items[1].span, "E_SYNTAX", "mode must be verify or refute");
    } else if (h == "pre" || h == "guard" || h == "trans" || h == "post") {
      sections.push_back(&s);
    } else {
      fail(s.items[0].span, "E_SYNTAX", "unknown section '" + std::string(h) + "'");
    }
  }
  if (!width) fail({1, 1}, "E_MISSING", "missing (width d)");
  if (!vars) fail(width_at, "E_MISSING", "missing (vars ...)");
  if (vars->empty()) fail(vars_at, "E_MISSING", "no loop variables");

  LoopProblem L;
  L.width = *width;
  L.vars = *vars;
  try {
    L.ring = make_loop_ring(L.width, L.vars);
  } catch (const std::invalid_argument& e) {
    fail(vars_at, "E_DUPLICATE", e.what());
  }
  if (mode) L.mode = *mode;

  const std::size_t n = L.vars.size();
  for (const SExpr* sp : sections) {
    const SExpr& s = *sp;
    const std::string_view h = s.head();
    const bool in_trans = h == "trans";
    auto on_var = [&](const SExpr& at, std::size_t v) {
      if (v >= 2 * n) fail(at.span, "E_UNKNOWN_SYMBOL", "unknown variable '" + L.ring->var_name(v) + "'");
      if (v < n && !in_trans)
        fail(at.span, "E_PRIMED_OUTSIDE_TRANS", "primed variable '" + L.ring->var_name(v) + "' outside trans");
    };
    auto& dest = h == "pre" ? L.pre : h == "guard" ? L.guard : in_trans ? L.trans : L.post;
    for (std::size_t i = 1; i < s.items.size(); ++i) {
      const SExpr& a = s.items[i];
      if (!a.is_list() || a.items.size() != 3 || !a.items[0].is_atom())
        fail(a.span, "E_SYNTAX", "expected an atom (op lhs rhs)");
      auto op = detail::rel_op(a.items[0].text);
      if (!op) fail(a.items[0].span, "E_UNSUPPORTED", "unknown relation '" + a.items[0].text + "'");
      if (in_trans && *op != RelOp::eq) fail(a.span, "E_TRANS_NOT_EQUATIONAL", "transition atoms must be equations");
      RelAtom atom{*op, detail::sexpr_poly(a.items[1], L.ring, on_var), detail::sexpr_poly(a.items[2], L.ring, on_var)};
      dest.push_back(std::move(atom));
    }
  }
  return L;
}

namespace detail {

inline std::string poly_sexpr(const Poly& f) { return "\"" + to_string(f) + "\""; }

inline std::string atoms_text(const char* head, const std::vector<RelAtom>& atoms) {
  std::string s = std::string("(") + head;
  for (const auto& a : atoms) s += std::string(" (") + to_string(a.op) + " " + poly_sexpr(a.lhs) + " " + poly_sexpr(a.rhs) + ")";
  return s + ")\n";
}

}  // namespace detail

inline std::string print_loop(const LoopProblem& L) {
  std::string s = "(width " + std::to_string(L.width) + ")\n(vars";
  for (const auto& v : L.vars) s += " " + v;
  s += ")\n";
  s += detail::atoms_text("pre", L.pre);
  s += detail::atoms_text("guard", L.guard);
  s += detail::atoms_text("trans", L.trans);
  s += detail::atoms_text("post", L.post);
  s += std::string("(mode ") + (L.mode == LoopMode::verify ? "verify" : "refute") + ")\n";
  return s;
}

// ---------------------------------------------------------------------------
// Groebner input: (width d) (vars x y ...) (poly p) ...

struct GbInput {
  RingPtr ring;
  std::vector<Poly> polys;
};

inline GbInput parse_gb_input(std::string_view text, OrderKind order = OrderKind::grevlex_graded) {
  auto items = read_sexprs(text);
  std::optional<unsigned> width;
  std::optional<std::vector<std::string>> vars;
  std::vector<const SExpr*> polys;
  for (const auto& s : items) {
    const std::string_view h = s.head();
    if (h == "width") {
      if (width) fail(s.span, "E_DUPLICATE", "width given twice");
      if (s.items.size() != 2) fail(s.span, "E_ARITY", "(width d) takes one numeral");
      width = detail::parse_width(s.items[1]);
    } else if (h == "vars") {
      if (vars) fail(s.span, "E_DUPLICATE", "vars given twice");
      std::vector<std::string> vs;
      for (std::size_t i = 1; i < s.items.size(); ++i) {
        const SExpr& v = s.items[i];
        if (!v.is_atom() || v.text.empty() || !std::isalpha(static_cast<unsigned char>(v.text[0])))
          fail(v.span, "E_SYNTAX", "bad variable name");
        if (std::find(vs.begin(), vs.end(), v.text) != vs.end())
          fail(v.span, "E_DUPLICATE", "variable '" + v.text + "' listed twice");
        vs.push_back(v.text);
      }
      vars = std::move(vs);
    } else if (h == "poly") {
      if (s.items.size() != 2) fail(s.span, "E_ARITY", "(poly p) takes one polynomial");
      polys.push_back(&s.items[1]);
    } else {
      fail(s.span, "E_SYNTAX", "expected (width d), (vars ...) or (poly p)");
    }
  }
  if (!width) fail({1, 1}, "E_MISSING", "missing (width d)");
  if (!vars) fail({1, 1}, "E_MISSING", "missing (vars ...)");
  GbInput in{PolyRing::make(*width, *vars, order), {}};
  for (const SExpr* p : polys) in.polys.push_back(detail::sexpr_poly(*p, in.ring, [](const SExpr&, std::size_t) {}));
  return in;
}

// ---------------------------------------------------------------------------
// invgen reporting

inline std::string print_invgen(const InvariantResult& r, const LoopProblem& L) {
  std::ostringstream os;
  for (const auto& inv : r.invariants) {
    os << "invariant mu=" << inv.mu << ": ";
    if (inv.form == InvariantForm::concrete)
      os << to_string(inv.poly) << " = 0";
    else
      os << to_string(inv.eta) << " = " << to_string(to_initial(inv.eta, L));
    os << (inv.initiation_proved ? "\n" : " (initiation pending)\n");
  }
  os << "verdict: " << to_string(r.verdict) << "\n";
  return os.str();
}

}  // namespace modsmt
