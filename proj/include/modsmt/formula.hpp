#pragma once

/// Bit-vector terms and quantifier-free formulas over one width.
///
/// Nodes are immutable and shared. Terms use only the ring operations plus
/// ite; formulas are equalities, disequalities and boolean structure.

#include "modsmt/ring.hpp"

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace modsmt {

struct BvTerm;
struct Formula;
using TermPtr = std::shared_ptr<const BvTerm>;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class TermKind { var, constant, add, sub, mul, neg, ite };

struct BvTerm {
  TermKind kind;
  std::string name;  // var
  BigInt value;      // constant, already reduced
  std::vector<TermPtr> args;
  FormulaPtr cond;   // ite
};

enum class FormulaKind { truth, falsity, eq, distinct, and_, or_, not_, ite, iff };

struct Formula {
  FormulaKind kind;
  std::vector<TermPtr> terms;     // eq, distinct (two each)
  std::vector<FormulaPtr> args;   // connectives; ite is (cond, then, else)
};

namespace bv {

inline TermPtr var(std::string name) { return std::make_shared<const BvTerm>(BvTerm{TermKind::var, std::move(name), 0, {}, nullptr}); }
inline TermPtr constant(BigInt v) { return std::make_shared<const BvTerm>(BvTerm{TermKind::constant, {}, std::move(v), {}, nullptr}); }
inline TermPtr node(TermKind k, std::vector<TermPtr> args) {
  return std::make_shared<const BvTerm>(BvTerm{k, {}, 0, std::move(args), nullptr});
}
inline TermPtr add(TermPtr a, TermPtr b) { return node(TermKind::add, {std::move(a), std::move(b)}); }
inline TermPtr sub(TermPtr a, TermPtr b) { return node(TermKind::sub, {std::move(a), std::move(b)}); }
inline TermPtr mul(TermPtr a, TermPtr b) { return node(TermKind::mul, {std::move(a), std::move(b)}); }
inline TermPtr neg(TermPtr a) { return node(TermKind::neg, {std::move(a)}); }
inline TermPtr ite(FormulaPtr c, TermPtr a, TermPtr b) {
  return std::make_shared<const BvTerm>(BvTerm{TermKind::ite, {}, 0, {std::move(a), std::move(b)}, std::move(c)});
}

inline FormulaPtr truth() { return std::make_shared<const Formula>(Formula{FormulaKind::truth, {}, {}}); }
inline FormulaPtr falsity() { return std::make_shared<const Formula>(Formula{FormulaKind::falsity, {}, {}}); }
inline FormulaPtr eq(TermPtr a, TermPtr b) {
  return std::make_shared<const Formula>(Formula{FormulaKind::eq, {std::move(a), std::move(b)}, {}});
}
inline FormulaPtr distinct(TermPtr a, TermPtr b) {
  return std::make_shared<const Formula>(Formula{FormulaKind::distinct, {std::move(a), std::move(b)}, {}});
}
inline FormulaPtr conj(std::vector<FormulaPtr> fs) {
  return std::make_shared<const Formula>(Formula{FormulaKind::and_, {}, std::move(fs)});
}
inline FormulaPtr disj(std::vector<FormulaPtr> fs) {
  return std::make_shared<const Formula>(Formula{FormulaKind::or_, {}, std::move(fs)});
}
inline FormulaPtr negate(FormulaPtr f) { return std::make_shared<const Formula>(Formula{FormulaKind::not_, {}, {std::move(f)}}); }
inline FormulaPtr ite(FormulaPtr c, FormulaPtr a, FormulaPtr b) {
  return std::make_shared<const Formula>(Formula{FormulaKind::ite, {}, {std::move(c), std::move(a), std::move(b)}});
}
inline FormulaPtr iff(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<const Formula>(Formula{FormulaKind::iff, {}, {std::move(a), std::move(b)}});
}

}  // namespace bv

/// A solving problem: one width, declared variables, asserted formulas.
struct Problem {
  unsigned width = 0;
  std::vector<std::string> vars;
  std::vector<FormulaPtr> assertions;

  [[nodiscard]] FormulaPtr formula() const {
    if (assertions.size() == 1) return assertions.front();
    return bv::conj(assertions);
  }
};

using Assignment = std::map<std::string, ResidueInt, std::less<>>;

inline bool evaluate(const Formula& f, const Assignment& a, unsigned width);

inline ResidueInt evaluate(const BvTerm& t, const Assignment& a, unsigned width) {
  switch (t.kind) {
    case TermKind::var: {
      auto it = a.find(t.name);
      if (it == a.end()) throw std::invalid_argument("unassigned variable '" + t.name + "'");
      return it->second;
    }
    case TermKind::constant:
      return {t.value, width};
    case TermKind::add:
      return evaluate(*t.args[0], a, width) + evaluate(*t.args[1], a, width);
    case TermKind::sub:
      return evaluate(*t.args[0], a, width) - evaluate(*t.args[1], a, width);
    case TermKind::mul:
      return evaluate(*t.args[0], a, width) * evaluate(*t.args[1], a, width);
    case TermKind::neg:
      return -evaluate(*t.args[0], a, width);
    case TermKind::ite:
      return evaluate(*t.cond, a, width) ? evaluate(*t.args[0], a, width) : evaluate(*t.args[1], a, width);
  }
  throw std::logic_error("bad term kind");
}

inline bool evaluate(const Formula& f, const Assignment& a, unsigned width) {
  switch (f.kind) {
    case FormulaKind::truth:
      return true;
    case FormulaKind::falsity:
      return false;
    case FormulaKind::eq:
      return evaluate(*f.terms[0], a, width) == evaluate(*f.terms[1], a, width);
    case FormulaKind::distinct:
      return !(evaluate(*f.terms[0], a, width) == evaluate(*f.terms[1], a, width));
    case FormulaKind::and_:
      for (const auto& g : f.args)
        if (!evaluate(*g, a, width)) return false;
      return true;
    case FormulaKind::or_:
      for (const auto& g : f.args)
        if (evaluate(*g, a, width)) return true;
      return false;
    case FormulaKind::not_:
      return !evaluate(*f.args[0], a, width);
    case FormulaKind::ite:
      return evaluate(*f.args[0], a, width) ? evaluate(*f.args[1], a, width) : evaluate(*f.args[2], a, width);
    case FormulaKind::iff:
      return evaluate(*f.args[0], a, width) == evaluate(*f.args[1], a, width);
  }
  throw std::logic_error("bad formula kind");
}

}  // namespace modsmt
