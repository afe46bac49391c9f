#pragma once

/// Polynomial equational invariants for loops
///
///   assume theta(V); while (c(V)) { rho(V, V') }; assert kappa(V)
///
/// over Z_{2^d}. A template eta with unknown coefficients is reduced
/// parametrically against GB(rho); the surviving coefficients give linear
/// congruences whose solutions are candidate invariants. Pre- and
/// postconditions are checked through SMT-LIB2 queries, discharged
/// internally when they are purely equational.

#include "modsmt/formula.hpp"
#include "modsmt/groebner.hpp"
#include "modsmt/linalg.hpp"
#include "modsmt/poly.hpp"
#include "modsmt/satcheck.hpp"

#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace modsmt {

enum class RelOp { eq, ne, le, ge, lt, gt };

inline const char* to_string(RelOp op) {
  switch (op) {
    case RelOp::eq: return "=";
    case RelOp::ne: return "!=";
    case RelOp::le: return "<=";
    case RelOp::ge: return ">=";
    case RelOp::lt: return "<";
    case RelOp::gt: return ">";
  }
  return "?";
}

/// lhs op rhs, comparisons unsigned.
struct RelAtom {
  RelOp op = RelOp::eq;
  Poly lhs, rhs;

  [[nodiscard]] bool equational() const { return op == RelOp::eq || op == RelOp::ne; }
};

enum class LoopMode { verify, refute };

/// Variables of a loop ring: primed copies first, then the program
/// variables, then one initial-value variable x_0 per program variable.
inline std::string primed_name(const std::string& x) { return x + "'"; }
inline std::string initial_name(const std::string& x) { return x + "_0"; }

inline RingPtr make_loop_ring(unsigned width, const std::vector<std::string>& vars) {
  const std::size_t n = vars.size();
  std::vector<std::string> all;
  for (const auto& x : vars) all.push_back(primed_name(x));
  for (const auto& x : vars) all.push_back(x);
  for (const auto& x : vars) all.push_back(initial_name(x));
  std::set<std::string> seen(all.begin(), all.end());
  if (seen.size() != all.size()) throw std::invalid_argument("loop variable names clash with primed or initial copies");
  return PolyRing::make(width, std::move(all), MonomialOrdering::block(3 * n, n));
}

struct LoopProblem {
  unsigned width = 0;
  std::vector<std::string> vars;
  RingPtr ring;  // make_loop_ring(width, vars)
  std::vector<RelAtom> pre, guard, trans, post;
  LoopMode mode = LoopMode::verify;

  [[nodiscard]] std::size_t n() const { return vars.size(); }
  [[nodiscard]] std::size_t primed(std::size_t i) const { return i; }
  [[nodiscard]] std::size_t current(std::size_t i) const { return n() + i; }
  [[nodiscard]] std::size_t initial(std::size_t i) const { return 2 * n() + i; }

  /// Throws invalid_argument when the loop invariants are violated.
  void validate() const {
    if (!ring) throw std::invalid_argument("loop has no ring");
    auto uses_block = [&](const RelAtom& a, std::size_t lo, std::size_t hi) {
      for (const Poly* p : {&a.lhs, &a.rhs})
        for (std::size_t v : p->variables())
          if (v >= lo && v < hi) return true;
      return false;
    };
    for (const auto& a : trans) {
      if (a.op != RelOp::eq) throw std::invalid_argument("transition atoms must be equations");
      if (uses_block(a, 2 * n(), 3 * n())) throw std::invalid_argument("initial-value variable in transition");
    }
    for (const auto* part : {&pre, &guard, &post})
      for (const auto& a : *part)
        if (uses_block(a, 0, n()) || uses_block(a, 2 * n(), 3 * n()))
          throw std::invalid_argument("primed or initial-value variable outside the transition");
  }
};

/// Renames variables of f through map (old index -> new index).
inline Poly rename(const Poly& f, const std::vector<std::size_t>& map) {
  std::vector<Term> out;
  out.reserve(f.size());
  for (const auto& t : f.terms()) {
    Monomial m(t.mono.size());
    for (std::size_t i = 0; i < t.mono.size(); ++i) m[map[i]] += t.mono[i];
    out.push_back({t.coeff, std::move(m)});
  }
  return Poly::from_terms(f.ring(), std::move(out));
}

/// x -> x' on the program variables.
inline Poly to_primed(const Poly& f, const LoopProblem& L) {
  std::vector<std::size_t> map(f.ring()->num_vars());
  std::iota(map.begin(), map.end(), std::size_t{0});
  for (std::size_t i = 0; i < L.n(); ++i) map[L.current(i)] = L.primed(i);
  return rename(f, map);
}

/// x -> x_0 on the program variables.
inline Poly to_initial(const Poly& f, const LoopProblem& L) {
  std::vector<std::size_t> map(f.ring()->num_vars());
  std::iota(map.begin(), map.end(), std::size_t{0});
  for (std::size_t i = 0; i < L.n(); ++i) map[L.current(i)] = L.initial(i);
  return rename(f, map);
}

inline RelAtom to_initial(const RelAtom& a, const LoopProblem& L) {
  return {a.op, to_initial(a.lhs, L), to_initial(a.rhs, L)};
}

// ---------------------------------------------------------------------------
// Parametric coefficients

/// Linear form sum a_j * p_j over the template parameters (lambda_1, ...,
/// xi last), coefficients in [0, 2^d).
class ParamCoeff {
 public:
  ParamCoeff() = default;
  ParamCoeff(std::size_t nparams, unsigned width) : a_(nparams, 0), width_(width) {}

  static ParamCoeff unit(std::size_t nparams, unsigned width, std::size_t j) {
    ParamCoeff c(nparams, width);
    c.a_.at(j) = 1;
    return c;
  }

  [[nodiscard]] std::size_t size() const noexcept { return a_.size(); }
  [[nodiscard]] unsigned width() const noexcept { return width_; }
  [[nodiscard]] const BigInt& operator[](std::size_t j) const { return a_[j]; }
  [[nodiscard]] const std::vector<BigInt>& coeffs() const noexcept { return a_; }

  [[nodiscard]] bool is_zero() const {
    for (const auto& x : a_)
      if (!x.is_zero()) return false;
    return true;
  }

  /// Minimum 2-adic valuation over the nonzero coefficients (width if none).
  [[nodiscard]] unsigned nu_bar() const {
    unsigned k = width_;
    for (const auto& x : a_)
      if (!x.is_zero()) k = std::min<unsigned>(k, static_cast<unsigned>(boost::multiprecision::lsb(x)));
    return k;
  }

  /// Divides every coefficient by 2^k; requires nu_bar() >= k.
  [[nodiscard]] ParamCoeff shifted_down(unsigned k) const {
    ParamCoeff r = *this;
    for (auto& x : r.a_) x >>= k;
    return r;
  }

  ParamCoeff& operator+=(const ParamCoeff& o) {
    for (std::size_t j = 0; j < a_.size(); ++j) {
      a_[j] += o.a_[j];
      detail::reduce_into(a_[j], width_);
    }
    return *this;
  }
  ParamCoeff& operator-=(const ParamCoeff& o) {
    for (std::size_t j = 0; j < a_.size(); ++j) {
      a_[j] -= o.a_[j];
      detail::reduce_into(a_[j], width_);
    }
    return *this;
  }
  [[nodiscard]] ParamCoeff scaled(const ResidueInt& c) const {
    ParamCoeff r = *this;
    for (auto& x : r.a_) {
      x *= c.value();
      detail::reduce_into(x, width_);
    }
    return r;
  }

  /// Value under a concrete parameter assignment.
  [[nodiscard]] ResidueInt eval(const std::vector<BigInt>& params) const {
    BigInt s = 0;
    for (std::size_t j = 0; j < a_.size(); ++j) s += a_[j] * params.at(j);
    return {s, width_};
  }

  friend bool operator==(const ParamCoeff&, const ParamCoeff&) = default;

 private:
  std::vector<BigInt> a_;
  unsigned width_ = 0;
};

/// Terms of a ParamPoly, largest monomial first.
struct ParamTerm {
  ParamCoeff coeff;
  Monomial mono;

  friend bool operator==(const ParamTerm&, const ParamTerm&) = default;
};

class ParamPoly {
 public:
  ParamPoly() = default;
  ParamPoly(RingPtr ring, std::vector<std::string> params) : ring_(std::move(ring)), params_(std::move(params)) {}

  [[nodiscard]] const RingPtr& ring() const noexcept { return ring_; }
  [[nodiscard]] unsigned width() const { return ring_->width(); }
  [[nodiscard]] const std::vector<std::string>& params() const noexcept { return params_; }
  [[nodiscard]] std::size_t num_params() const noexcept { return params_.size(); }
  [[nodiscard]] const std::vector<ParamTerm>& terms() const noexcept { return terms_; }
  [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

  /// Sorts, merges and drops zero coefficients.
  static ParamPoly from_terms(RingPtr ring, std::vector<std::string> params, std::vector<ParamTerm> ts) {
    ParamPoly p(std::move(ring), std::move(params));
    const auto& ord = p.ring_->ordering();
    std::sort(ts.begin(), ts.end(), [&](const ParamTerm& a, const ParamTerm& b) { return ord.compare(a.mono, b.mono) > 0; });
    for (auto& t : ts) {
      if (!p.terms_.empty() && p.terms_.back().mono == t.mono) {
        p.terms_.back().coeff += t.coeff;
        if (p.terms_.back().coeff.is_zero()) p.terms_.pop_back();
      } else if (!t.coeff.is_zero()) {
        p.terms_.push_back(std::move(t));
      }
    }
    return p;
  }

  /// mu * f for a concrete constant.
  [[nodiscard]] ParamPoly scaled(const ResidueInt& mu) const {
    std::vector<ParamTerm> ts;
    for (const auto& t : terms_) ts.push_back({t.coeff.scaled(mu), t.mono});
    return from_terms(ring_, params_, std::move(ts));
  }

  friend ParamPoly operator-(const ParamPoly& f, const ParamPoly& g) {
    std::vector<ParamTerm> ts = f.terms_;
    for (const auto& t : g.terms_) {
      ParamCoeff c(t.coeff.size(), t.coeff.width());
      c -= t.coeff;
      ts.push_back({std::move(c), t.mono});
    }
    return from_terms(f.ring_, f.params_, std::move(ts));
  }

  /// Renames ring variables (see rename(Poly)).
  [[nodiscard]] ParamPoly renamed(const std::vector<std::size_t>& map) const {
    std::vector<ParamTerm> ts;
    for (const auto& t : terms_) {
      Monomial m(t.mono.size());
      for (std::size_t i = 0; i < t.mono.size(); ++i) m[map[i]] += t.mono[i];
      ts.push_back({t.coeff, std::move(m)});
    }
    return from_terms(ring_, params_, std::move(ts));
  }

  /// Concrete polynomial for a parameter assignment.
  [[nodiscard]] Poly instantiate(const std::vector<BigInt>& values) const {
    std::vector<Term> ts;
    for (const auto& t : terms_) ts.push_back({t.coeff.eval(values), t.mono});
    return Poly::from_terms(ring_, std::move(ts));
  }

  friend bool operator==(const ParamPoly& f, const ParamPoly& g) { return f.terms_ == g.terms_ && f.params_ == g.params_; }

 private:
  RingPtr ring_;
  std::vector<std::string> params_;
  std::vector<ParamTerm> terms_;
};

inline std::string to_string(const ParamCoeff& c, const std::vector<std::string>& names) {
  std::string out;
  std::size_t count = 0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j].is_zero()) continue;
    BigInt v = ResidueInt(c[j], c.width()).signed_value();
    const bool neg = v < 0;
    if (neg) v = -v;
    if (count == 0)
      out += neg ? "-" : "";
    else
      out += neg ? " - " : " + ";
    if (v != 1) out += v.str() + "*";
    out += names[j];
    ++count;
  }
  if (count == 0) return "0";
  return count == 1 ? out : "(" + out + ")";
}

/// Renders e.g. "(l2 + l3)*x^2 + 2*l3*x*y + (l1 + l4)".
inline std::string to_string(const ParamPoly& f) {
  if (f.is_zero()) return "0";
  std::string out;
  for (const auto& t : f.terms()) {
    if (!out.empty()) out += " + ";
    out += to_string(t.coeff, f.params());
    if (!t.mono.is_one()) out += "*" + to_string(t.mono, *f.ring());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Step B1: template

/// Monomials of degree <= k in the program variables, largest first.
inline std::vector<Monomial> template_monomials(const LoopProblem& L, unsigned k) {
  const std::size_t nv = L.ring->num_vars();
  std::vector<Monomial> out;
  Monomial m(nv);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
    if (i == L.n()) {
      out.push_back(m);
      return;
    }
    for (unsigned e = 0; e <= left; ++e) {
      m[L.current(i)] = e;
      rec(i + 1, left - e);
    }
    m[L.current(i)] = 0;
  };
  rec(0, k);
  const auto& ord = L.ring->ordering();
  std::sort(out.begin(), out.end(), [&](const Monomial& a, const Monomial& b) { return ord.compare(a, b) > 0; });
  return out;
}

/// eta = l1*q1 + ... + xi over all monomials of degree <= k.
inline ParamPoly make_template(const LoopProblem& L, unsigned k) {
  if (k < 1) throw std::invalid_argument("template degree must be at least 1");
  auto monos = template_monomials(L, k);
  const std::size_t m = monos.size();
  std::vector<std::string> names;
  for (std::size_t j = 0; j + 1 < m; ++j) names.push_back("l" + std::to_string(j + 1));
  names.push_back("xi");
  std::vector<ParamTerm> ts;
  for (std::size_t j = 0; j < m; ++j) ts.push_back({ParamCoeff::unit(m, L.width, j), monos[j]});
  return ParamPoly::from_terms(L.ring, std::move(names), std::move(ts));
}

// ---------------------------------------------------------------------------
// Step B2: parametric normal form

inline ParamPoly pnf(const ParamPoly& f, const std::vector<Poly>& G) {
  const auto& ord = f.ring()->ordering();
  auto cmp = [&](const Monomial& a, const Monomial& b) { return ord.compare(a, b) > 0; };
  std::map<Monomial, ParamCoeff, decltype(cmp)> work(cmp);
  for (const auto& t : f.terms()) work.emplace(t.mono, t.coeff);

  struct Red {
    const Poly* g;
    unsigned k;
    ResidueInt odd_inv;
  };
  std::vector<Red> reds;
  for (const auto& g : G) {
    if (g.is_zero()) continue;
    Poly::check_compatible(g, Poly(f.ring()));
    reds.push_back({&g, nu2(g.lc()), inverse(odd_part(g.lc()))});
  }

  std::vector<ParamTerm> rest;
  while (!work.empty()) {
    auto it = work.begin();
    const unsigned nb = it->second.nu_bar();
    const Red* r = nullptr;
    for (const auto& cand : reds)
      if (cand.k <= nb && mono_divides(cand.g->lm(), it->first)) {
        r = &cand;
        break;
      }
    if (!r) {
      rest.push_back({std::move(it->second), it->first});
      work.erase(it);
      continue;
    }
    ParamCoeff q = it->second.shifted_down(r->k).scaled(r->odd_inv);
    Monomial u = mono_div(it->first, r->g->lm());
    for (const auto& t : r->g->terms()) {
      Monomial m = mono_mul(u, t.mono);
      ParamCoeff delta = q.scaled(t.coeff);
      auto [pos, fresh] = work.try_emplace(m, ParamCoeff(q.size(), q.width()));
      pos->second -= delta;
      if (pos->second.is_zero()) work.erase(pos);
    }
  }
  return ParamPoly::from_terms(f.ring(), f.params(), std::move(rest));
}

// ---------------------------------------------------------------------------
// Step B3: congruences and their solutions

inline std::vector<Poly> transition_polys(const LoopProblem& L) {
  std::vector<Poly> out;
  for (const auto& a : L.trans) {
    Poly p = a.lhs - a.rhs;
    if (!p.is_zero()) out.push_back(std::move(p));
  }
  return out;
}

inline GroebnerBasis transition_basis(const LoopProblem& L, const GroebnerOptions& opt = {}) {
  auto H = transition_polys(L);
  if (H.empty()) return GroebnerBasis{L.ring, {}, {}};
  return strong_groebner(H, opt);
}

/// PNF(eta' - mu*eta | G).
inline ParamPoly consecution_residual(const LoopProblem& L, const ParamPoly& eta, const GroebnerBasis& G, int mu) {
  std::vector<std::size_t> map(L.ring->num_vars());
  std::iota(map.begin(), map.end(), std::size_t{0});
  for (std::size_t i = 0; i < L.n(); ++i) map[L.current(i)] = L.primed(i);
  ParamPoly f = eta.renamed(map) - eta.scaled(ResidueInt(mu, L.width));
  return pnf(f, G.gens);
}

/// One row per surviving coefficient, one column per parameter.
inline IntMatrix congruence_matrix(const ParamPoly& residual) {
  IntMatrix A(residual.terms().size(), residual.num_params());
  for (std::size_t i = 0; i < residual.terms().size(); ++i)
    for (std::size_t j = 0; j < residual.num_params(); ++j) A(i, j) = residual.terms()[i].coeff[j];
  return A;
}

inline IntMatrix consecution_system(const LoopProblem& L, unsigned k, int mu, const GroebnerOptions& opt = {}) {
  return congruence_matrix(consecution_residual(L, make_template(L, k), transition_basis(L, opt), mu));
}

/// S^mu: a particular solution shifted along the integral nullspace directions.
inline std::vector<std::vector<BigInt>> solution_family(const IntMatrix& A, unsigned d, std::size_t cap) {
  std::vector<BigInt> zero(A.rows(), 0);
  auto lambda0 = solve_congruence(A, zero, d);
  if (!lambda0) return {};
  return shift_solutions(*lambda0, rational_nullspace(augment_modulus(A, d)), d, cap);
}

// ---------------------------------------------------------------------------
// Step B4 and results

enum class InvVerdict { verified, refuted, unknown };

inline const char* to_string(InvVerdict v) {
  switch (v) {
    case InvVerdict::verified: return "verified";
    case InvVerdict::refuted: return "refuted";
    case InvVerdict::unknown: return "unknown";
  }
  return "unknown";
}

/// concrete: poly(V) = 0. initial_value: eta(V0) + c = 0 and eta(V) + c = 0
/// for a shared fresh c, stored as poly = eta(V) - eta(V0).
enum class InvariantForm { concrete, initial_value };

struct Invariant {
  Poly poly;
  Poly eta;  // without constant slot for initial_value
  int mu = 1;
  InvariantForm form = InvariantForm::concrete;
  bool initiation_proved = false;
};

struct Query {
  std::string name;  // initiation, verification, refutation
  std::string text;
  bool equational = false;
  std::optional<Status> result;  // set when discharged internally
};

struct InvariantResult {
  std::vector<Invariant> invariants;
  std::vector<int> mus;  // mu values that produced candidates
  InvVerdict verdict = InvVerdict::unknown;
  std::vector<Query> queries;
};

struct InvgenOptions {
  std::vector<int> mus{-1, 0, 1};
  std::size_t cap = 32;
  GroebnerOptions gb;
  SolveOptions solve;

  InvgenOptions() { solve.search.node_budget = 20000; }
};

namespace detail {

inline TermPtr poly_term(const Poly& f) {
  TermPtr acc;
  for (const auto& t : f.terms()) {
    TermPtr m = bv::constant(t.coeff.value());
    for (std::size_t i = 0; i < t.mono.size(); ++i)
      for (Exponent e = 0; e < t.mono[i]; ++e) m = bv::mul(m, bv::var(f.ring()->var_name(i)));
    acc = acc ? bv::add(acc, m) : m;
  }
  return acc ? acc : bv::constant(0);
}

inline FormulaPtr atom_formula(const RelAtom& a) {
  if (a.op == RelOp::eq) return bv::eq(poly_term(a.lhs), poly_term(a.rhs));
  if (a.op == RelOp::ne) return bv::distinct(poly_term(a.lhs), poly_term(a.rhs));
  throw std::invalid_argument("order atoms are not handled by the internal solver");
}

/// Decides unsat of the conjunction of `facts` and not(all of `goals`).
inline Status internal_check(const std::vector<RelAtom>& facts, const std::vector<FormulaPtr>& extra,
                             const LoopProblem& L, const SolveOptions& opt) {
  Problem p;
  p.width = L.width;
  for (std::size_t i = L.n(); i < L.ring->num_vars(); ++i) p.vars.push_back(L.ring->var_name(i));
  for (const auto& a : facts) p.assertions.push_back(atom_formula(a));
  for (const auto& f : extra) p.assertions.push_back(f);
  if (p.assertions.empty()) p.assertions.push_back(bv::truth());
  return solve(p, opt).status;
}

inline bool all_equational(const std::vector<RelAtom>& atoms) {
  for (const auto& a : atoms)
    if (!a.equational()) return false;
  return true;
}

inline Poly normalize_unit(const Poly& f) {
  if (f.is_zero()) return f;
  return f.scale(inverse(odd_part(f.lc())));
}

}  // namespace detail

/// Steps B1-B3 for every configured mu, with initiation settled where possible.
inline InvariantResult synthesize(const LoopProblem& L, unsigned k, const InvgenOptions& opt = {}) {
  L.validate();
  InvariantResult res;
  const unsigned d = L.width;
  ParamPoly eta = make_template(L, k);
  GroebnerBasis G = transition_basis(L, opt.gb);

  std::vector<Poly> theta0;
  for (const auto& a : L.pre)
    if (a.op == RelOp::eq) {
      Poly p = to_initial(a.lhs - a.rhs, L);
      if (!p.is_zero()) theta0.push_back(std::move(p));
    }
  std::vector<Poly> theta_gb;
  if (!theta0.empty()) theta_gb = strong_groebner(theta0, opt.gb).gens;
  std::vector<RelAtom> pre0;
  for (const auto& a : L.pre) pre0.push_back(to_initial(a, L));
  const bool pre_equational = detail::all_equational(L.pre);

  const std::size_t xi = eta.num_params() - 1;
  std::set<std::pair<int, std::string>> seen;

  for (int mu : opt.mus) {
    ParamPoly residual = consecution_residual(L, eta, G, mu);
    auto family = solution_family(congruence_matrix(residual), d, opt.cap);
    bool produced = false;
    for (auto lambda : family) {
      if (mu == 1) lambda[xi] = 0;
      Poly body = eta.instantiate(lambda);
      if (body.is_constant()) continue;
      body = detail::normalize_unit(body);
      if (!seen.insert({mu, to_string(body)}).second) continue;

      Invariant inv;
      inv.mu = mu;
      inv.eta = body;
      if (mu == 1) {
        Poly r = normal_form(to_initial(body, L), theta_gb);
        if (r.is_constant()) {
          inv.poly = body - r;
          inv.form = InvariantForm::concrete;
        } else {
          inv.poly = body - to_initial(body, L);
          inv.form = InvariantForm::initial_value;
        }
        inv.initiation_proved = true;
      } else {
        inv.poly = body;
        Poly r = normal_form(to_initial(body, L), theta_gb);
        if (r.is_zero()) {
          inv.initiation_proved = true;
        } else if (r.is_constant()) {
          continue;
        } else if (pre_equational) {
          RelAtom bad{RelOp::ne, to_initial(body, L), Poly(L.ring)};
          std::vector<RelAtom> facts = pre0;
          facts.push_back(bad);
          if (detail::internal_check(facts, {}, L, opt.solve) != Status::unsat) continue;
          inv.initiation_proved = true;
        } else {
          // order atoms are dropped; unsat here means eta(V0) = 0 is impossible
          std::vector<RelAtom> facts;
          for (const auto& a : pre0)
            if (a.op == RelOp::eq || a.op == RelOp::ne) facts.push_back(a);
          facts.push_back({RelOp::eq, to_initial(body, L), Poly(L.ring)});
          if (detail::internal_check(facts, {}, L, opt.solve) == Status::unsat) continue;
        }
      }

      Poly step = to_primed(inv.poly, L) - inv.poly.scale(ResidueInt(mu, d));
      if (!normal_form(step, G.gens).is_zero())
        throw std::logic_error("consecution re-check failed for " + to_string(inv.poly));
      res.invariants.push_back(std::move(inv));
      produced = true;
    }
    if (produced) res.mus.push_back(mu);
  }
  return res;
}

// ---------------------------------------------------------------------------
// SMT-LIB2 rendering

inline std::string smt2_const(const BigInt& v, unsigned d) { return "(_ bv" + v.str() + " " + std::to_string(d) + ")"; }

/// Flat sum of the terms of f, plus optional extra summands.
inline std::string to_smt2(const Poly& f, const std::vector<std::string>& extra = {}) {
  const unsigned d = f.width();
  std::vector<std::string> parts;
  for (const auto& t : f.terms()) {
    std::vector<std::string> factors;
    for (std::size_t i = 0; i < t.mono.size(); ++i)
      for (Exponent e = 0; e < t.mono[i]; ++e) factors.push_back(f.ring()->var_name(i));
    std::string mono;
    if (factors.size() == 1) {
      mono = factors[0];
    } else if (!factors.empty()) {
      mono = "(bvmul";
      for (const auto& x : factors) mono += " " + x;
      mono += ")";
    }
    if (mono.empty())
      parts.push_back(smt2_const(t.coeff.value(), d));
    else if (t.coeff.is_one())
      parts.push_back(mono);
    else if ((-t.coeff).is_one())
      parts.push_back("(bvneg " + mono + ")");
    else
      parts.push_back("(bvmul " + smt2_const(t.coeff.value(), d) + " " + mono + ")");
  }
  parts.insert(parts.end(), extra.begin(), extra.end());
  if (parts.empty()) return smt2_const(0, d);
  if (parts.size() == 1) return parts[0];
  std::string s = "(bvadd";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

inline std::string to_smt2(const RelAtom& a) {
  const char* op = "=";
  switch (a.op) {
    case RelOp::eq: op = "="; break;
    case RelOp::ne: op = "distinct"; break;
    case RelOp::le: op = "bvule"; break;
    case RelOp::ge: op = "bvuge"; break;
    case RelOp::lt: op = "bvult"; break;
    case RelOp::gt: op = "bvugt"; break;
  }
  return std::string("(") + op + " " + to_smt2(a.lhs) + " " + to_smt2(a.rhs) + ")";
}

namespace detail {

inline std::string conj_smt2(const std::vector<std::string>& parts) {
  if (parts.empty()) return "true";
  if (parts.size() == 1) return parts[0];
  std::string s = "(and";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

class QueryWriter {
 public:
  QueryWriter(const LoopProblem& L, std::size_t fresh) : L_(L) {
    os_ << "(set-logic QF_BV)\n";
    for (std::size_t i = L.n(); i < L.ring->num_vars(); ++i) declare(L.ring->var_name(i));
    for (std::size_t s = 1; s <= fresh; ++s) declare("c_" + std::to_string(s));
  }
  void comment(const std::string& c) { os_ << "; " << c << "\n"; }
  void assert_(const std::string& f) { os_ << "(assert " << f << ")\n"; }
  std::string finish() {
    os_ << "(check-sat)\n";
    return os_.str();
  }

 private:
  void declare(const std::string& x) { os_ << "(declare-const " << x << " (_ BitVec " << L_.width << "))\n"; }
  const LoopProblem& L_;
  std::ostringstream os_;
};

inline std::vector<std::string> atoms_smt2(const std::vector<RelAtom>& atoms) {
  std::vector<std::string> out;
  for (const auto& a : atoms) out.push_back(to_smt2(a));
  return out;
}

}  // namespace detail

/// Initiation and verification (or refutation) queries. Each query is
/// satisfiable iff its check fails; unsat answers are what the verdict needs.
inline std::vector<Query> build_queries(const InvariantResult& res, const LoopProblem& L,
                                        const InvgenOptions& opt, InvVerdict* verdict = nullptr) {
  if (verdict) *verdict = InvVerdict::unknown;
  std::vector<Query> out;
  if (res.invariants.empty()) return out;
  const unsigned d = L.width;
  const std::string zero = smt2_const(0, d);

  std::vector<const Invariant*> concrete, initial;
  for (const auto& inv : res.invariants) (inv.form == InvariantForm::concrete ? concrete : initial).push_back(&inv);

  std::vector<RelAtom> pre0;
  for (const auto& a : L.pre) pre0.push_back(to_initial(a, L));
  const bool pre_eq = detail::all_equational(L.pre);

  bool all_ok = true;

  if (!concrete.empty()) {
    Query q{"initiation", {}, pre_eq, std::nullopt};
    detail::QueryWriter w(L, 0);
    w.comment("initial condition on x_0");
    for (const auto& a : pre0) w.assert_(to_smt2(a));
    w.comment("some invariant fails initially");
    std::vector<std::string> goals;
    std::vector<FormulaPtr> goal_f;
    for (const auto* inv : concrete) {
      Poly p0 = to_initial(inv->poly, L);
      goals.push_back("(= " + to_smt2(p0) + " " + zero + ")");
      goal_f.push_back(bv::eq(detail::poly_term(p0), bv::constant(0)));
    }
    w.assert_("(not " + detail::conj_smt2(goals) + ")");
    q.text = w.finish();
    if (q.equational) {
      q.result = detail::internal_check(pre0, {bv::negate(bv::conj(goal_f))}, L, opt.solve);
    }
    all_ok = all_ok && q.result == Status::unsat;
    out.push_back(std::move(q));
  }

  const bool verify = L.mode == LoopMode::verify;
  Query q{verify ? "verification" : "refutation", {}, false, std::nullopt};
  q.equational = pre_eq && detail::all_equational(L.guard) && detail::all_equational(L.post);
  detail::QueryWriter w(L, initial.size());
  w.comment("A1: initial condition on x_0");
  for (const auto& a : pre0) w.assert_(to_smt2(a));
  std::vector<FormulaPtr> facts;
  if (!initial.empty()) {
    w.comment("A2: invariants at the initial values");
    for (std::size_t s = 0; s < initial.size(); ++s)
      w.assert_("(= " + to_smt2(to_initial(initial[s]->eta, L), {"c_" + std::to_string(s + 1)}) + " " + zero + ")");
    w.comment("A3: invariants at the current values");
    for (std::size_t s = 0; s < initial.size(); ++s)
      w.assert_("(= " + to_smt2(initial[s]->eta, {"c_" + std::to_string(s + 1)}) + " " + zero + ")");
  }
  for (const auto* inv : initial) facts.push_back(bv::eq(detail::poly_term(inv->poly), bv::constant(0)));
  if (!concrete.empty()) {
    w.comment("invariants");
    for (const auto* inv : concrete) {
      w.assert_("(= " + to_smt2(inv->poly) + " " + zero + ")");
      facts.push_back(bv::eq(detail::poly_term(inv->poly), bv::constant(0)));
    }
  }
  w.comment("loop exit");
  w.assert_("(not " + detail::conj_smt2(detail::atoms_smt2(L.guard)) + ")");
  w.comment(verify ? "postcondition fails" : "postcondition holds");
  std::string post = detail::conj_smt2(detail::atoms_smt2(L.post));
  w.assert_(verify ? "(not " + post + ")" : post);
  q.text = w.finish();

  if (q.equational) {
    std::vector<FormulaPtr> guard_f, post_f;
    for (const auto& a : L.guard) guard_f.push_back(detail::atom_formula(a));
    for (const auto& a : L.post) post_f.push_back(detail::atom_formula(a));
    facts.push_back(bv::negate(bv::conj(guard_f)));
    facts.push_back(verify ? bv::negate(bv::conj(post_f)) : bv::conj(post_f));
    q.result = detail::internal_check(pre0, facts, L, opt.solve);
  }
  all_ok = all_ok && q.result == Status::unsat;
  out.push_back(std::move(q));

  if (verdict && all_ok) *verdict = verify ? InvVerdict::verified : InvVerdict::refuted;
  return out;
}

/// synthesize followed by build_queries.
inline InvariantResult run_invgen(const LoopProblem& L, unsigned k, const InvgenOptions& opt = {}) {
  InvariantResult res = synthesize(L, k, opt);
  res.queries = build_queries(res, L, opt, &res.verdict);
  return res;
}

}  // namespace modsmt
