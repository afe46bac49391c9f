#pragma once

/// Satisfiability of quantifier-free equational bit-vector formulas.
///
/// A formula is expanded into a disjunction of conjunctions of (dis)equalities.
/// Each conjunction becomes a polynomial system whose roots are exactly its
/// models: f = g contributes f - g, f != g contributes z*(f - g) - 2^{d-1}
/// with a fresh z. A nonzero constant in the strong Groebner basis refutes
/// the system; otherwise a root search (GB recomputation per level,
/// univariate lifting, integer factor splitting, exhaustive branching)
/// decides it.

#include "modsmt/formula.hpp"
#include "modsmt/groebner.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace modsmt {

enum class Polarity { eq, neq };

struct Literal {
  Poly lhs;
  Poly rhs;
  Polarity polarity = Polarity::eq;
};

using Conjunction = std::vector<Literal>;

class DnfBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct TermBranch {
  std::vector<std::pair<FormulaPtr, bool>> path;
  Poly value;
};

class DnfBuilder {
 public:
  DnfBuilder(RingPtr ring, std::size_t budget) : ring_(std::move(ring)), budget_(budget) {}

  std::vector<Conjunction> dnf(const Formula& f, bool positive) {
    switch (f.kind) {
      case FormulaKind::truth:
        return positive ? top() : bottom();
      case FormulaKind::falsity:
        return positive ? bottom() : top();
      case FormulaKind::eq:
      case FormulaKind::distinct: {
        const bool want_eq = (f.kind == FormulaKind::eq) == positive;
        return atom(*f.terms[0], *f.terms[1], want_eq ? Polarity::eq : Polarity::neq);
      }
      case FormulaKind::not_:
        return dnf(*f.args[0], !positive);
      case FormulaKind::and_:
      case FormulaKind::or_: {
        const bool is_and = (f.kind == FormulaKind::and_) == positive;
        std::vector<Conjunction> acc = is_and ? top() : bottom();
        for (const auto& g : f.args) {
          auto part = dnf(*g, positive);
          acc = is_and ? product(acc, part) : sum(std::move(acc), std::move(part));
        }
        return acc;
      }
      case FormulaKind::ite: {
        auto c = dnf(*f.args[0], true), nc = dnf(*f.args[0], false);
        return sum(product(c, dnf(*f.args[1], positive)), product(nc, dnf(*f.args[2], positive)));
      }
      case FormulaKind::iff: {
        auto a = dnf(*f.args[0], true), na = dnf(*f.args[0], false);
        auto b = dnf(*f.args[1], positive), nb = dnf(*f.args[1], !positive);
        return sum(product(a, b), product(na, nb));
      }
    }
    throw std::logic_error("bad formula kind");
  }

  std::vector<TermBranch> lift(const BvTerm& t) {
    switch (t.kind) {
      case TermKind::var: {
        auto idx = ring_->index_of(t.name);
        if (!idx) throw std::invalid_argument("undeclared variable '" + t.name + "'");
        return {{{}, Poly::variable(ring_, *idx)}};
      }
      case TermKind::constant:
        return {{{}, Poly::constant(ring_, t.value)}};
      case TermKind::neg: {
        auto bs = lift(*t.args[0]);
        for (auto& b : bs) b.value = -b.value;
        return bs;
      }
      case TermKind::add:
      case TermKind::sub:
      case TermKind::mul: {
        auto as = lift(*t.args[0]), bs = lift(*t.args[1]);
        std::vector<TermBranch> out;
        for (const auto& a : as)
          for (const auto& b : bs) {
            TermBranch r{a.path, t.kind == TermKind::add   ? a.value + b.value
                                 : t.kind == TermKind::sub ? a.value - b.value
                                                           : a.value * b.value};
            r.path.insert(r.path.end(), b.path.begin(), b.path.end());
            out.push_back(std::move(r));
            guard(out.size());
          }
        return out;
      }
      case TermKind::ite: {
        std::vector<TermBranch> out;
        for (int side = 0; side < 2; ++side)
          for (auto& b : lift(*t.args[side])) {
            b.path.insert(b.path.begin(), {t.cond, side == 0});
            out.push_back(std::move(b));
          }
        guard(out.size());
        return out;
      }
    }
    throw std::logic_error("bad term kind");
  }

 private:
  static std::vector<Conjunction> top() { return {Conjunction{}}; }
  static std::vector<Conjunction> bottom() { return {}; }

  void guard(std::size_t n) const {
    if (n > budget_) throw DnfBudgetExceeded("DNF expansion exceeds " + std::to_string(budget_) + " conjuncts");
  }

  std::vector<Conjunction> sum(std::vector<Conjunction> a, std::vector<Conjunction> b) const {
    for (auto& c : b) a.push_back(std::move(c));
    guard(a.size());
    return a;
  }

  std::vector<Conjunction> product(const std::vector<Conjunction>& a, const std::vector<Conjunction>& b) const {
    guard(a.size() * b.size());
    std::vector<Conjunction> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a)
      for (const auto& y : b) {
        Conjunction c = x;
        c.insert(c.end(), y.begin(), y.end());
        out.push_back(std::move(c));
      }
    return out;
  }

  /// Literal with constant difference folds to top or bottom.
  std::vector<Conjunction> literal(Poly lhs, Poly rhs, Polarity pol) const {
    Poly diff = lhs - rhs;
    if (diff.is_constant()) {
      bool holds = diff.is_zero() == (pol == Polarity::eq);
      return holds ? top() : bottom();
    }
    return {Conjunction{Literal{std::move(lhs), std::move(rhs), pol}}};
  }

  std::vector<Conjunction> atom(const BvTerm& a, const BvTerm& b, Polarity pol) {
    auto as = lift(a), bs = lift(b);
    std::vector<Conjunction> out;
    for (const auto& x : as)
      for (const auto& y : bs) {
        std::vector<Conjunction> acc = literal(x.value, y.value, pol);
        for (const auto* path : {&x.path, &y.path})
          for (const auto& [cond, side] : *path) {
            if (acc.empty()) break;
            acc = product(acc, dnf(*cond, side));
          }
        out = sum(std::move(out), std::move(acc));
      }
    return out;
  }

  RingPtr ring_;
  std::size_t budget_;
};

}  // namespace detail

/// Disjunctive normal form over the ring's variables. Literals whose sides
/// differ by a constant are folded, so an unsatisfiable-by-folding formula
/// yields no conjunctions and a valid one may yield an empty conjunction.
inline std::vector<Conjunction> dnf_expand(const Formula& f, const RingPtr& ring, std::size_t max_conjuncts = 4096) {
  return detail::DnfBuilder(ring, max_conjuncts).dnf(f, true);
}

/// Polynomial system of one conjunction, over the base variables followed by
/// one fresh `__z<i>` per disequation.
struct PolySystem {
  RingPtr ring;
  std::vector<Poly> polys;
  std::size_t num_original = 0;
};

inline RingPtr extend_ring(const RingPtr& base, const std::vector<std::string>& extra) {
  if (extra.empty()) return base;
  std::vector<std::string> vars = base->vars();
  vars.insert(vars.end(), extra.begin(), extra.end());
  const auto& ord = base->ordering();
  std::vector<std::size_t> prio = ord.priority();
  for (std::size_t i = base->num_vars(); i < vars.size(); ++i) prio.push_back(i);
  std::size_t split = ord.kind() == OrderKind::block ? ord.block_split() : 0;
  return PolyRing::make(base->width(), std::move(vars), MonomialOrdering(ord.kind(), std::move(prio), split));
}

inline PolySystem preprocess(const Conjunction& c, const RingPtr& base) {
  std::vector<std::string> fresh;
  for (const auto& lit : c)
    if (lit.polarity == Polarity::neq) fresh.push_back("__z" + std::to_string(fresh.size() + 1));
  PolySystem sys{extend_ring(base, fresh), {}, base->num_vars()};
  const unsigned d = base->width();
  std::size_t z = base->num_vars();
  for (const auto& lit : c) {
    Poly diff = embed(lit.lhs - lit.rhs, sys.ring);
    if (lit.polarity == Polarity::eq) {
      if (!diff.is_zero()) sys.polys.push_back(std::move(diff));
    } else {
      Poly h = Poly::variable(sys.ring, z++) * diff - Poly::constant(sys.ring, detail::pow2(d - 1));
      sys.polys.push_back(std::move(h));
    }
  }
  return sys;
}

/// A nonzero constant of GB(H), if any (certifies that H has no common root).
inline std::optional<ResidueInt> check_unsat_via_gb(const std::vector<Poly>& H, const GroebnerOptions& opt = {}) {
  if (H.empty()) return std::nullopt;
  return has_nonzero_constant(strong_groebner(H, opt));
}

namespace detail {

/// Dense view of a univariate polynomial for fast repeated evaluation.
class UnivariateEval {
 public:
  UnivariateEval(const Poly& p, std::size_t var) : d_(p.width()) {
    for (const auto& t : p.terms()) {
      for (std::size_t i = 0; i < t.mono.size(); ++i)
        if (i != var && t.mono[i] != 0) throw std::invalid_argument("univariate_roots: polynomial is not univariate");
      terms_.emplace_back(t.mono.size() ? t.mono[var] : 0, t.coeff.value());
      if (d_ <= 64) small_.emplace_back(t.mono.size() ? t.mono[var] : 0, t.coeff.low_u64());
    }
  }

  /// Whether p(r) vanishes modulo 2^bits.
  [[nodiscard]] bool vanishes(const BigInt& r, unsigned bits) const {
    if (d_ <= 64) {
      std::uint64_t x = static_cast<std::uint64_t>(r & low_mask(64)), acc = 0;
      for (const auto& [e, c] : small_) {
        std::uint64_t v = c;
        for (Exponent k = 0; k < e; ++k) v *= x;
        acc += v;
      }
      std::uint64_t m = bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
      return (acc & m) == 0;
    }
    BigInt acc = 0;
    for (const auto& [e, c] : terms_) {
      BigInt v = c;
      for (Exponent k = 0; k < e; ++k) {
        v *= r;
        v &= low_mask(bits);
      }
      acc += v;
    }
    acc &= low_mask(bits);
    return acc.is_zero();
  }

 private:
  unsigned d_;
  std::vector<std::pair<Exponent, BigInt>> terms_;
  std::vector<std::pair<Exponent, std::uint64_t>> small_;
};

}  // namespace detail

/// Visits every root of a univariate polynomial in `var`, in increasing
/// bit-reversed order, by lifting roots mod 2^k to roots mod 2^{k+1}.
/// Stops as soon as the visitor returns false.
inline void for_each_root(const Poly& p, std::size_t var, const std::function<bool(const ResidueInt&)>& visit) {
  const unsigned d = p.width();
  detail::UnivariateEval ev(p, var);
  std::vector<std::pair<BigInt, unsigned>> stack{{BigInt(0), 0u}};
  while (!stack.empty()) {
    auto [r, k] = std::move(stack.back());
    stack.pop_back();
    if (k == d) {
      if (!visit(ResidueInt(r, d))) return;
      continue;
    }
    BigInt hi = r + detail::pow2(k);
    if (ev.vanishes(hi, k + 1)) stack.emplace_back(std::move(hi), k + 1);
    if (ev.vanishes(r, k + 1)) stack.emplace_back(std::move(r), k + 1);
  }
}

inline std::vector<ResidueInt> univariate_roots(const Poly& p, std::size_t var) {
  std::vector<ResidueInt> out;
  for_each_root(p, var, [&](const ResidueInt& r) {
    out.push_back(r);
    return true;
  });
  return out;
}

inline std::vector<ResidueInt> univariate_roots(const Poly& p) {
  auto vars = p.variables();
  if (vars.size() > 1) throw std::invalid_argument("univariate_roots: polynomial is not univariate");
  if (vars.empty()) {
    if (p.is_zero()) throw std::invalid_argument("univariate_roots: zero polynomial has no variable");
    return {};
  }
  return univariate_roots(p, vars.front());
}

namespace detail {

inline std::optional<BigInt> exact_sqrt(const BigInt& v) {
  if (v < 0) return std::nullopt;
  BigInt r = boost::multiprecision::sqrt(v);
  if (r * r == v) return r;
  return std::nullopt;
}

}  // namespace detail

/// Heuristic factorization of p as an integer polynomial (signed coefficient
/// representatives): common monomial content, common 2-power content, and
/// a^2 m^2 - b^2 n^2 = (a m - b n)(a m + b n). Absent when none applies.
inline std::optional<std::pair<Poly, Poly>> factor_over_Z(const Poly& p) {
  if (p.is_zero() || p.is_constant()) return std::nullopt;
  const RingPtr& R = p.ring();
  const unsigned d = p.width();
  const std::size_t n = R->num_vars();

  Monomial content = p.terms().front().mono;
  for (const auto& t : p.terms())
    for (std::size_t i = 0; i < n; ++i) content[i] = std::min(content[i], t.mono[i]);
  if (!content.is_one()) {
    std::vector<Term> rest;
    for (const auto& t : p.terms()) rest.push_back({t.coeff, mono_div(t.mono, content)});
    Poly cofactor = Poly::from_terms(R, std::move(rest));
    if (!cofactor.is_constant()) return std::make_pair(Poly::monomial(R, ResidueInt::one(d), content), cofactor);
    // a single term c*m: peel off one variable power
    for (std::size_t i = 0; i < n; ++i) {
      if (content[i] == 0) continue;
      Monomial first = Monomial::variable(n, i, content[i]);
      Monomial second = mono_div(content, first);
      if (second.is_one()) break;
      return std::make_pair(Poly::monomial(R, ResidueInt::one(d), first), Poly::monomial(R, p.lc(), second));
    }
  }

  unsigned k = d;
  for (const auto& t : p.terms()) k = std::min(k, nu2(t.coeff));
  if (k > 0) {
    std::vector<Term> rest;
    for (const auto& t : p.terms()) rest.push_back({ResidueInt(t.coeff.value() >> k, d), t.mono});
    return std::make_pair(Poly::constant(R, detail::pow2(k)), Poly::from_terms(R, std::move(rest)));
  }

  if (p.size() == 2) {
    BigInt a = p.terms()[0].coeff.signed_value(), b = p.terms()[1].coeff.signed_value();
    if (a < 0) {
      a = -a;
      b = -b;
    }
    auto half = [&](const Monomial& m) -> std::optional<Monomial> {
      Monomial h(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (m[i] % 2) return std::nullopt;
        h[i] = m[i] / 2;
      }
      return h;
    };
    auto ra = detail::exact_sqrt(a), rb = detail::exact_sqrt(-b);
    auto m1 = half(p.terms()[0].mono), m2 = half(p.terms()[1].mono);
    if (b < 0 && ra && rb && m1 && m2) {
      Poly u = Poly::monomial(R, ResidueInt(*ra, d), *m1);
      Poly v = Poly::monomial(R, ResidueInt(*rb, d), *m2);
      Poly f = u - v, g = u + v;
      const bool flip = p.terms()[0].coeff.signed_value() < 0;
      if (!f.is_constant() && !g.is_constant()) return std::make_pair(flip ? -f : f, g);
    }
  }
  return std::nullopt;
}

struct SearchOptions {
  std::size_t node_budget = 200000;
  GroebnerOptions gb;
  bool use_factoring = true;
  /// Variables below this index are branched on before the rest (the rest are
  /// disequation auxiliaries, fixed by univariate members once those are set).
  std::size_t branch_prefix = static_cast<std::size_t>(-1);
};

enum class SearchOutcome { found, empty, budget };

struct SearchResult {
  SearchOutcome outcome = SearchOutcome::empty;
  PartialModel model;
  std::size_t nodes = 0;
  std::size_t gb_fallbacks = 0;  ///< levels where completion hit its budget and the raw system was used
};

namespace detail {

class SearchBudget : public std::runtime_error {
 public:
  SearchBudget() : std::runtime_error("search node budget exhausted") {}
};

class ZeroSearch {
 public:
  ZeroSearch(RingPtr ring, const SearchOptions& opt) : ring_(std::move(ring)), opt_(opt) {}

  std::optional<PartialModel> run(const std::vector<Poly>& H, PartialModel M, const GroebnerBasis* root_gb) {
    return rec(H, std::move(M), root_gb);
  }

  std::size_t nodes = 0;
  std::size_t gb_fallbacks = 0;

 private:
  std::optional<PartialModel> rec(const std::vector<Poly>& H, PartialModel M, const GroebnerBasis* pre) {
    if (++nodes > opt_.node_budget) throw SearchBudget();
    const std::size_t n = ring_->num_vars();
    const unsigned d = ring_->width();
    M.resize(n);

    std::vector<Poly> G;
    if (pre) {
      G = pre->gens;
    } else {
      std::vector<Poly> Hs;
      for (const auto& h : H) {
        Poly s = substitute(h, M);
        if (!s.is_zero()) Hs.push_back(std::move(s));
      }
      try {
        G = strong_groebner(Hs, opt_.gb).gens;
      } catch (const BudgetExceeded&) {
        ++gb_fallbacks;
        G = std::move(Hs);
      }
    }
    for (const auto& g : G)
      if (g.is_constant() && !g.is_zero()) return std::nullopt;

    std::vector<std::size_t> occurrences(n, 0);
    for (const auto& g : G)
      for (std::size_t v : g.variables()) ++occurrences[v];
    bool constrained = false;
    for (std::size_t v = 0; v < n; ++v) constrained = constrained || (occurrences[v] > 0 && !M[v]);
    if (!constrained) {
      for (auto& slot : M)
        if (!slot) slot = ResidueInt::zero(d);
      return M;
    }

    // univariate member: branch on its roots
    const Poly* uni = nullptr;
    std::size_t uni_var = 0;
    for (const auto& g : G) {
      auto vs = g.variables();
      if (vs.size() == 1 && (!uni || g.degree() < uni->degree())) {
        uni = &g;
        uni_var = vs.front();
      }
    }
    if (uni) {
      std::optional<PartialModel> found;
      const Poly target = *uni;
      for_each_root(target, uni_var, [&](const ResidueInt& r) {
        PartialModel next = M;
        next[uni_var] = r;
        found = rec(G, std::move(next), nullptr);
        return !found.has_value();
      });
      return found;
    }

    // split only when every member still has more than two free variables
    bool wide = true;
    for (const auto& g : G) wide = wide && (g.is_zero() || g.variables().size() > 2);
    if (opt_.use_factoring && wide) {
      for (std::size_t gi = 0; gi < G.size(); ++gi) {
        auto fac = factor_over_Z(G[gi]);
        if (!fac || fac->first.is_constant() || fac->second.is_constant()) continue;
        std::string key = to_string(G[gi]);
        if (split_path_.count(key)) continue;
        split_path_.insert(key);
        std::optional<PartialModel> found;
        try {
          for (unsigned i = 0; i <= d && !found; ++i) {
            std::vector<Poly> next;
            for (std::size_t j = 0; j < G.size(); ++j)
              if (j != gi) next.push_back(G[j]);
            Poly a = fac->first.scale(ResidueInt::pow2(i, d));
            Poly b = fac->second.scale(ResidueInt::pow2(d - i, d));
            if (!a.is_zero()) next.push_back(std::move(a));
            if (!b.is_zero()) next.push_back(std::move(b));
            found = rec(next, M, nullptr);
          }
        } catch (...) {
          split_path_.erase(key);
          throw;
        }
        split_path_.erase(key);
        return found;
      }
    }

    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (M[v] || occurrences[v] == 0) continue;
      const bool pref = v < opt_.branch_prefix, best_pref = pick < opt_.branch_prefix;
      if (pick == n || (pref && !best_pref) || (pref == best_pref && occurrences[v] > occurrences[pick])) pick = v;
    }
    const BigInt& limit = pow2(d);
    for (BigInt v = 0; v < limit; ++v) {
      PartialModel next = M;
      next[pick] = ResidueInt(v, d);
      if (auto found = rec(G, std::move(next), nullptr)) return found;
    }
    return std::nullopt;
  }

  RingPtr ring_;
  const SearchOptions& opt_;
  std::set<std::string> split_path_;
};

}  // namespace detail

/// Common root of H extending M, or a proof by exhaustion that none exists.
/// `root_gb`, when given, must be GB(H) and is used in place of the first
/// completion.
inline SearchResult find_zeros(const std::vector<Poly>& H, PartialModel M = {}, const SearchOptions& opt = {},
                               RingPtr ring = nullptr, const GroebnerBasis* root_gb = nullptr) {
  if (!ring) ring = detail::common_ring(H);
  SearchResult res;
  if (!ring) {
    res.outcome = SearchOutcome::found;
    res.model = std::move(M);
    return res;
  }
  detail::ZeroSearch search(ring, opt);
  if (!M.empty() && root_gb) root_gb = nullptr;
  try {
    auto found = search.run(H, std::move(M), root_gb);
    res.nodes = search.nodes;
    res.gb_fallbacks = search.gb_fallbacks;
    if (!found) return res;
    for (const auto& h : H)
      if (!evaluate(h, *found).is_zero())
        throw std::logic_error("find_zeros produced a model violating " + to_string(h));
    res.outcome = SearchOutcome::found;
    res.model = std::move(*found);
  } catch (const detail::SearchBudget&) {
    res.outcome = SearchOutcome::budget;
    res.nodes = search.nodes;
    res.gb_fallbacks = search.gb_fallbacks;
  }
  return res;
}

enum class Status { sat, unsat, unknown };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::sat:
      return "sat";
    case Status::unsat:
      return "unsat";
    case Status::unknown:
      return "unknown";
  }
  return "unknown";
}

/// Why one conjunction was refuted.
struct Certificate {
  enum class Kind { folded, gb_constant, exhausted };
  Kind kind = Kind::folded;
  std::size_t conjunct = 0;
  std::optional<ResidueInt> constant;
};

struct Verdict {
  Status status = Status::unknown;
  Assignment model;
  std::vector<Certificate> certificates;
  std::string reason;
  std::size_t conjuncts = 0;
  std::size_t nodes = 0;
};

struct SolveOptions {
  OrderKind order = OrderKind::grevlex_graded;
  std::size_t max_conjuncts = 4096;
  SearchOptions search;
};

inline Verdict solve(const Problem& prob, const SolveOptions& opt = {}) {
  Verdict v;
  if (prob.width == 0) throw std::invalid_argument("problem width must be positive");
  RingPtr base = PolyRing::make(prob.width, prob.vars, opt.order);
  FormulaPtr phi = prob.formula();

  std::vector<Conjunction> dnf;
  try {
    dnf = dnf_expand(*phi, base, opt.max_conjuncts);
  } catch (const DnfBudgetExceeded& e) {
    v.reason = e.what();
    return v;
  }
  v.conjuncts = dnf.size();
  if (dnf.empty()) {
    v.status = Status::unsat;
    v.certificates.push_back({Certificate::Kind::folded, 0, std::nullopt});
    return v;
  }

  bool incomplete = false;
  for (std::size_t ci = 0; ci < dnf.size(); ++ci) {
    PolySystem sys = preprocess(dnf[ci], base);
    std::optional<GroebnerBasis> G;
    try {
      G = strong_groebner(sys.polys, opt.search.gb);
      if (auto c = has_nonzero_constant(*G)) {
        v.certificates.push_back({Certificate::Kind::gb_constant, ci, *c});
        continue;
      }
    } catch (const BudgetExceeded&) {
      G.reset();
    }
    SearchOptions so = opt.search;
    so.node_budget = opt.search.node_budget > v.nodes ? opt.search.node_budget - v.nodes : 0;
    so.branch_prefix = sys.num_original;
    SearchResult r = find_zeros(sys.polys, {}, so, sys.ring, G ? &*G : nullptr);
    v.nodes += r.nodes;
    if (r.outcome == SearchOutcome::budget) {
      incomplete = true;
      v.reason = "search budget exhausted";
      break;
    }
    if (r.outcome == SearchOutcome::empty) {
      v.certificates.push_back({Certificate::Kind::exhausted, ci, std::nullopt});
      continue;
    }
    for (std::size_t i = 0; i < sys.num_original; ++i) v.model.emplace(sys.ring->var_name(i), *r.model[i]);
    if (!evaluate(*phi, v.model, prob.width))
      throw std::logic_error("model of a conjunct does not satisfy the formula");
    v.status = Status::sat;
    v.certificates.clear();
    return v;
  }
  v.status = incomplete ? Status::unknown : Status::unsat;
  return v;
}

}  // namespace modsmt
