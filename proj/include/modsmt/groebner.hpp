#pragma once

/// Strong Groebner bases over Z_{2^d}.
///
/// Reduction follows the strong notion: a term c*m is reducible by g when
/// lm(g) divides m and nu2(lc(g)) <= nu2(c). Completion is the worklist
/// loop over A-polynomials (annihilator multiples) and S-polynomials.

#include "modsmt/poly.hpp"

#include <deque>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace modsmt {

/// Completion or reduction ran past its configured step budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroebnerOptions {
  std::size_t max_critical = 50000;          ///< A- and S-polynomials processed
  std::size_t max_reduction_steps = 5000000; ///< single reduction steps across all normal forms
  bool annihilating_spoly_candidate = true;  ///< also reduce 2^{d-k1}s2 m1 f1 - 2^{d-k2}s1 m2 f2
};

struct GroebnerStats {
  std::size_t pairs = 0;
  std::size_t apolys = 0;
  std::size_t reduction_steps = 0;
  std::size_t added = 0;
};

struct GroebnerBasis {
  RingPtr ring;
  std::vector<Poly> gens;
  GroebnerStats stats;

  [[nodiscard]] bool empty() const noexcept { return gens.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return gens.size(); }
};

namespace detail {

/// Cached data for reducing by one generator.
struct Reducer {
  Poly g;
  unsigned k;           ///< nu2(lc g)
  ResidueInt odd_inv;   ///< inverse of the odd part of lc g
};

inline Reducer make_reducer(const Poly& g) {
  const ResidueInt& lc = g.lc();
  unsigned k = nu2(lc);
  return {g, k, inverse(ResidueInt(lc.value() >> k, lc.width()))};
}

class Reduction {
 public:
  Reduction(const std::vector<Poly>& gens, GroebnerStats* stats, std::size_t budget)
      : stats_(stats), budget_(budget) {
    reducers_.reserve(gens.size());
    for (const auto& g : gens) reducers_.push_back(make_reducer(g));
  }

  void add(const Poly& g) { reducers_.push_back(make_reducer(g)); }

  /// Fully reduced remainder of f.
  Poly normal_form(Poly f) {
    if (f.is_zero()) return f;
    std::vector<Term> rest;
    while (!f.is_zero()) {
      const Term& t = f.lt();
      const Reducer* r = find(t);
      if (r == nullptr) {
        rest.push_back(t);
        f.pop_leading();
        continue;
      }
      if (stats_ && ++stats_->reduction_steps > budget_)
        throw BudgetExceeded("normal form exceeded the reduction budget");
      const unsigned d = t.coeff.width();
      ResidueInt q = ResidueInt(t.coeff.value() >> r->k, d) * r->odd_inv;
      Monomial m = mono_div(t.mono, r->g.lm());
      f = f.sub_scaled(q, m, r->g);
    }
    Poly out(f.ring());
    for (auto& t : rest) out.push_smallest(std::move(t));
    return out;
  }

 private:
  const Reducer* find(const Term& t) const {
    const unsigned v = nu2(t.coeff);
    for (const auto& r : reducers_)
      if (r.k <= v && mono_divides(r.g.lm(), t.mono)) return &r;
    return nullptr;
  }

  std::vector<Reducer> reducers_;
  GroebnerStats* stats_;
  std::size_t budget_;
};

inline RingPtr common_ring(const std::vector<Poly>& fs) {
  RingPtr ring;
  for (const auto& f : fs) {
    if (!f.ring()) continue;
    if (!ring) {
      ring = f.ring();
    } else if (ring != f.ring() && !(*ring == *f.ring())) {
      throw MismatchError("polynomials belong to different rings");
    }
  }
  return ring;
}

}  // namespace detail

/// NF(f | G): repeated strong reduction of every term, top-down.
inline Poly normal_form(const Poly& f, const std::vector<Poly>& gens) {
  for (const auto& g : gens) Poly::check_compatible(f, g);
  GroebnerStats stats;
  return detail::Reduction(gens, &stats, static_cast<std::size_t>(-1)).normal_form(f);
}

inline Poly normal_form(const Poly& f, const GroebnerBasis& G) { return normal_form(f, G.gens); }

/// 2^{d-k} * f with k = nu2(lc f); kills the leading term.
inline Poly apoly(const Poly& f) {
  const unsigned d = f.width();
  return f.scale(ResidueInt::pow2(d - nu2(f.lc()), d));
}

/// S-polynomial with the least common multiple of the leading coefficients:
/// 2^{K-k1} s2 x^{a-a1} f1 - 2^{K-k2} s1 x^{a-a2} f2, K = max(k1, k2).
inline Poly spoly(const Poly& f1, const Poly& f2) {
  Poly::check_compatible(f1, f2);
  if (f1 == f2) throw std::invalid_argument("spoly of identical polynomials");
  const unsigned d = f1.width();
  const unsigned k1 = nu2(f1.lc()), k2 = nu2(f2.lc());
  const unsigned K = std::max(k1, k2);
  const ResidueInt s1(f1.lc().value() >> k1, d), s2(f2.lc().value() >> k2, d);
  const Monomial l = mono_lcm(f1.lm(), f2.lm());
  return f1.mul_term(ResidueInt::pow2(K - k1, d) * s2, mono_div(l, f1.lm())) -
         f2.mul_term(ResidueInt::pow2(K - k2, d) * s1, mono_div(l, f2.lm()));
}

/// The variant with 2^{d-k_i} multipliers; both leading coefficients vanish.
inline Poly spoly_annihilating(const Poly& f1, const Poly& f2) {
  Poly::check_compatible(f1, f2);
  const unsigned d = f1.width();
  const unsigned k1 = nu2(f1.lc()), k2 = nu2(f2.lc());
  const ResidueInt s1(f1.lc().value() >> k1, d), s2(f2.lc().value() >> k2, d);
  const Monomial l = mono_lcm(f1.lm(), f2.lm());
  return f1.mul_term(ResidueInt::pow2(d - k1, d) * s2, mono_div(l, f1.lm())) -
         f2.mul_term(ResidueInt::pow2(d - k2, d) * s1, mono_div(l, f2.lm()));
}

/// Completes H to a strong Groebner basis of <H>.
inline GroebnerBasis strong_groebner(const std::vector<Poly>& H, const GroebnerOptions& opt = {}) {
  GroebnerBasis out;
  out.ring = detail::common_ring(H);
  for (const auto& h : H)
    if (!h.is_zero()) out.gens.push_back(h);
  if (out.gens.empty()) return out;

  detail::Reduction red(out.gens, &out.stats, opt.max_reduction_steps);
  std::deque<std::size_t> apending;
  std::deque<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < out.gens.size(); ++i) {
    apending.push_back(i);
    for (std::size_t j = 0; j < i; ++j) pairs.emplace_back(j, i);
  }

  auto insert = [&](Poly g) {
    if (g.is_zero()) return;
    const std::size_t idx = out.gens.size();
    out.gens.push_back(std::move(g));
    red.add(out.gens.back());
    ++out.stats.added;
    apending.push_back(idx);
    for (std::size_t j = 0; j < idx; ++j) pairs.emplace_back(j, idx);
  };

  while (!apending.empty() || !pairs.empty()) {
    if (out.stats.pairs + out.stats.apolys >= opt.max_critical)
      throw BudgetExceeded("Groebner completion exceeded the critical-pair budget");
    if (!apending.empty()) {
      std::size_t i = apending.front();
      apending.pop_front();
      ++out.stats.apolys;
      Poly h = red.normal_form(apoly(out.gens[i]));
      insert(std::move(h));
      continue;
    }
    auto [i, j] = pairs.front();
    pairs.pop_front();
    ++out.stats.pairs;
    if (out.gens[i] == out.gens[j]) continue;
    Poly h = red.normal_form(spoly(out.gens[i], out.gens[j]));
    insert(std::move(h));
    if (opt.annihilating_spoly_candidate) {
      Poly h2 = red.normal_form(spoly_annihilating(out.gens[i], out.gens[j]));
      insert(std::move(h2));
    }
  }
  return out;
}

/// A nonzero constant member of G, if any; its presence certifies V(H) is empty.
inline std::optional<ResidueInt> has_nonzero_constant(const GroebnerBasis& G) {
  for (const auto& g : G.gens)
    if (!g.is_zero() && g.is_constant()) return g.lc();
  return std::nullopt;
}

}  // namespace modsmt
