#pragma once

/// Sparse multivariate polynomials over Z_{2^d}.
///
/// A Poly belongs to a PolyRing, which fixes the width, the variable names
/// and the monomial ordering. Terms are stored strictly descending in that
/// ordering with nonzero coefficients, so the first term is the leading term.

#include "modsmt/ring.hpp"

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace modsmt {

using Exponent = std::uint32_t;

class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::size_t nvars) : exps_(nvars, 0) {}
  explicit Monomial(std::vector<Exponent> exps) : exps_(std::move(exps)) {}

  static Monomial variable(std::size_t nvars, std::size_t index, Exponent e = 1) {
    Monomial m(nvars);
    m.exps_.at(index) = e;
    return m;
  }

  [[nodiscard]] std::size_t size() const noexcept { return exps_.size(); }
  [[nodiscard]] Exponent operator[](std::size_t i) const { return exps_[i]; }
  Exponent& operator[](std::size_t i) { return exps_[i]; }
  [[nodiscard]] const std::vector<Exponent>& exponents() const noexcept { return exps_; }

  [[nodiscard]] std::uint64_t degree() const {
    return std::accumulate(exps_.begin(), exps_.end(), std::uint64_t{0});
  }
  [[nodiscard]] bool is_one() const {
    return std::all_of(exps_.begin(), exps_.end(), [](Exponent e) { return e == 0; });
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  std::vector<Exponent> exps_;
};

namespace detail {
inline void check_len(const Monomial& p, const Monomial& q) {
  if (p.size() != q.size()) throw MismatchError("monomial length mismatch");
}
}  // namespace detail

inline bool mono_divides(const Monomial& p, const Monomial& q) {
  detail::check_len(p, q);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > q[i]) return false;
  return true;
}

inline Monomial mono_lcm(const Monomial& p, const Monomial& q) {
  detail::check_len(p, q);
  Monomial r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = std::max(p[i], q[i]);
  return r;
}

inline Monomial mono_mul(const Monomial& p, const Monomial& q) {
  detail::check_len(p, q);
  Monomial r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = p[i] + q[i];
  return r;
}

/// q / p; requires p | q.
inline Monomial mono_div(const Monomial& q, const Monomial& p) {
  if (!mono_divides(p, q)) throw DomainError("mono_div: divisor does not divide");
  Monomial r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = q[i] - p[i];
  return r;
}

enum class OrderKind {
  lex,
  grevlex_graded,  ///< lex over (total degree, a_1, ..., a_n)
  block,           ///< grevlex_graded on the first block, ties broken by grevlex_graded on the rest
};

/// A monomial ordering. `priority[k]` is the variable compared k-th, so
/// priority[0] is the most significant variable.
class MonomialOrdering {
 public:
  MonomialOrdering() = default;
  MonomialOrdering(OrderKind kind, std::vector<std::size_t> priority, std::size_t block_split = 0)
      : kind_(kind), priority_(std::move(priority)), split_(block_split) {
    std::vector<std::size_t> sorted = priority_;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != i) throw std::invalid_argument("ordering priority is not a permutation");
    if (split_ > priority_.size()) throw std::invalid_argument("block split out of range");
  }

  static MonomialOrdering lex(std::size_t n) { return {OrderKind::lex, identity(n)}; }
  static MonomialOrdering grevlex(std::size_t n) { return {OrderKind::grevlex_graded, identity(n)}; }
  /// Elimination ordering: the first `split` variables (in declaration order) dominate.
  static MonomialOrdering block(std::size_t n, std::size_t split) { return {OrderKind::block, identity(n), split}; }

  [[nodiscard]] OrderKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::vector<std::size_t>& priority() const noexcept { return priority_; }
  [[nodiscard]] std::size_t block_split() const noexcept { return split_; }
  [[nodiscard]] std::size_t num_vars() const noexcept { return priority_.size(); }

  [[nodiscard]] std::strong_ordering compare(const Monomial& a, const Monomial& b) const {
    switch (kind_) {
      case OrderKind::lex:
        return lex_range(a, b, 0, priority_.size());
      case OrderKind::grevlex_graded:
        return graded_range(a, b, 0, priority_.size());
      case OrderKind::block: {
        auto c = graded_range(a, b, 0, split_);
        if (c != 0) return c;
        return graded_range(a, b, split_, priority_.size());
      }
    }
    return std::strong_ordering::equal;
  }

  [[nodiscard]] bool less(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }

  friend bool operator==(const MonomialOrdering&, const MonomialOrdering&) = default;

 private:
  static std::vector<std::size_t> identity(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    return p;
  }

  std::strong_ordering lex_range(const Monomial& a, const Monomial& b, std::size_t lo, std::size_t hi) const {
    for (std::size_t k = lo; k < hi; ++k) {
      std::size_t v = priority_[k];
      if (a[v] != b[v]) return a[v] <=> b[v];
    }
    return std::strong_ordering::equal;
  }

  std::strong_ordering graded_range(const Monomial& a, const Monomial& b, std::size_t lo, std::size_t hi) const {
    std::uint64_t da = 0, db = 0;
    for (std::size_t k = lo; k < hi; ++k) {
      da += a[priority_[k]];
      db += b[priority_[k]];
    }
    if (da != db) return da <=> db;
    return lex_range(a, b, lo, hi);
  }

  OrderKind kind_ = OrderKind::grevlex_graded;
  std::vector<std::size_t> priority_;
  std::size_t split_ = 0;
};

/// Width, variable names and ordering shared by a family of polynomials.
class PolyRing {
 public:
  PolyRing(unsigned width, std::vector<std::string> vars, MonomialOrdering order)
      : width_(width), vars_(std::move(vars)), order_(std::move(order)) {
    if (width_ == 0) throw std::invalid_argument("ring width must be positive");
    if (order_.num_vars() != vars_.size()) throw std::invalid_argument("ordering/variable count mismatch");
  }

  static std::shared_ptr<const PolyRing> make(unsigned width, std::vector<std::string> vars,
                                              OrderKind kind = OrderKind::grevlex_graded) {
    const std::size_t n = vars.size();
    MonomialOrdering ord = kind == OrderKind::lex ? MonomialOrdering::lex(n) : MonomialOrdering::grevlex(n);
    return std::make_shared<const PolyRing>(width, std::move(vars), std::move(ord));
  }

  static std::shared_ptr<const PolyRing> make(unsigned width, std::vector<std::string> vars, MonomialOrdering ord) {
    return std::make_shared<const PolyRing>(width, std::move(vars), std::move(ord));
  }

  [[nodiscard]] unsigned width() const noexcept { return width_; }
  [[nodiscard]] std::size_t num_vars() const noexcept { return vars_.size(); }
  [[nodiscard]] const std::vector<std::string>& vars() const noexcept { return vars_; }
  [[nodiscard]] const std::string& var_name(std::size_t i) const { return vars_.at(i); }
  [[nodiscard]] const MonomialOrdering& ordering() const noexcept { return order_; }

  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return i;
    return std::nullopt;
  }

  [[nodiscard]] ResidueInt residue(BigInt v) const { return {std::move(v), width_}; }

  friend bool operator==(const PolyRing&, const PolyRing&) = default;

 private:
  unsigned width_;
  std::vector<std::string> vars_;
  MonomialOrdering order_;
};

using RingPtr = std::shared_ptr<const PolyRing>;

struct Term {
  ResidueInt coeff;
  Monomial mono;

  friend bool operator==(const Term&, const Term&) = default;
};

class Poly {
 public:
  Poly() = default;
  explicit Poly(RingPtr ring) : ring_(std::move(ring)) {}

  static Poly constant(RingPtr ring, const BigInt& c) {
    Poly p(ring);
    ResidueInt r(c, ring->width());
    if (!r.is_zero()) p.terms_.push_back({std::move(r), Monomial(ring->num_vars())});
    return p;
  }
  static Poly constant(RingPtr ring, const ResidueInt& c) { return constant(std::move(ring), c.value()); }

  static Poly variable(RingPtr ring, std::size_t index) {
    Poly p(ring);
    p.terms_.push_back({ResidueInt::one(ring->width()), Monomial::variable(ring->num_vars(), index)});
    return p;
  }

  static Poly variable(RingPtr ring, std::string_view name) {
    auto idx = ring->index_of(name);
    if (!idx) throw std::invalid_argument("unknown variable '" + std::string(name) + "'");
    return variable(std::move(ring), *idx);
  }

  static Poly monomial(RingPtr ring, const ResidueInt& c, Monomial m) {
    Poly p(ring);
    if (m.size() != ring->num_vars()) throw MismatchError("monomial length does not match ring");
    if (!c.is_zero()) p.terms_.push_back({c, std::move(m)});
    return p;
  }

  /// Sorts, merges equal monomials and drops zero coefficients.
  static Poly from_terms(RingPtr ring, std::vector<Term> terms) {
    Poly p(ring);
    const auto& ord = ring->ordering();
    std::sort(terms.begin(), terms.end(),
              [&](const Term& a, const Term& b) { return ord.compare(a.mono, b.mono) > 0; });
    for (auto& t : terms) {
      if (!p.terms_.empty() && p.terms_.back().mono == t.mono) {
        p.terms_.back().coeff += t.coeff;
        if (p.terms_.back().coeff.is_zero()) p.terms_.pop_back();
      } else if (!t.coeff.is_zero()) {
        p.terms_.push_back(std::move(t));
      }
    }
    return p;
  }

  [[nodiscard]] const RingPtr& ring() const noexcept { return ring_; }
  [[nodiscard]] unsigned width() const { return ring_->width(); }
  [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }
  [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
  [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }
  [[nodiscard]] bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.is_one()); }

  [[nodiscard]] std::uint64_t degree() const {
    std::uint64_t d = 0;
    for (const auto& t : terms_) d = std::max(d, t.mono.degree());
    return d;
  }

  [[nodiscard]] const Term& lt() const {
    if (terms_.empty()) throw DomainError("leading term of the zero polynomial");
    return terms_.front();
  }
  [[nodiscard]] const Monomial& lm() const { return lt().mono; }
  [[nodiscard]] const ResidueInt& lc() const { return lt().coeff; }

  /// Coefficient of the constant monomial (zero if absent).
  [[nodiscard]] ResidueInt constant_term() const {
    if (!terms_.empty() && terms_.back().mono.is_one()) return terms_.back().coeff;
    return ResidueInt::zero(width());
  }

  /// Indices of variables with a positive exponent somewhere in the polynomial.
  [[nodiscard]] std::vector<std::size_t> variables() const {
    std::vector<bool> seen(ring_ ? ring_->num_vars() : 0, false);
    for (const auto& t : terms_)
      for (std::size_t i = 0; i < t.mono.size(); ++i)
        if (t.mono[i] > 0) seen[i] = true;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (seen[i]) out.push_back(i);
    return out;
  }

  Poly operator-() const {
    Poly r(ring_);
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) r.terms_.push_back({-t.coeff, t.mono});
    return r;
  }

  friend Poly operator+(const Poly& f, const Poly& g) { return merge(f, g, false); }
  friend Poly operator-(const Poly& f, const Poly& g) { return merge(f, g, true); }

  friend Poly operator*(const Poly& f, const Poly& g) {
    check_compatible(f, g);
    std::vector<Term> acc;
    acc.reserve(f.size() * g.size());
    for (const auto& a : f.terms_)
      for (const auto& b : g.terms_) {
        ResidueInt c = a.coeff * b.coeff;
        if (!c.is_zero()) acc.push_back({std::move(c), mono_mul(a.mono, b.mono)});
      }
    return from_terms(f.ring_, std::move(acc));
  }

  /// c * m * f. Ordering is multiplication compatible, so only vanishing
  /// coefficients need to be dropped.
  [[nodiscard]] Poly mul_term(const ResidueInt& c, const Monomial& m) const {
    Poly r(ring_);
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
      ResidueInt k = t.coeff * c;
      if (!k.is_zero()) r.terms_.push_back({std::move(k), mono_mul(t.mono, m)});
    }
    return r;
  }

  [[nodiscard]] Poly scale(const ResidueInt& c) const { return mul_term(c, Monomial(ring_->num_vars())); }

  Poly& operator+=(const Poly& g) { return *this = *this + g; }
  Poly& operator-=(const Poly& g) { return *this = *this - g; }
  Poly& operator*=(const Poly& g) { return *this = *this * g; }

  friend bool operator==(const Poly& f, const Poly& g) {
    if (f.terms_ != g.terms_) return false;
    if (f.ring_ == g.ring_) return true;
    if (!f.ring_ || !g.ring_) return f.terms_.empty() && g.terms_.empty();
    return *f.ring_ == *g.ring_;
  }

  /// Drops the leading term; used by reduction loops.
  void pop_leading() { terms_.erase(terms_.begin()); }
  /// Appends a term known to be smaller than every stored term.
  void push_smallest(Term t) { terms_.push_back(std::move(t)); }

  static void check_compatible(const Poly& f, const Poly& g) {
    if (f.ring_ == g.ring_) return;
    if (!f.ring_ || !g.ring_ || !(*f.ring_ == *g.ring_))
      throw MismatchError("polynomials belong to different rings (width, variables or ordering)");
  }

  /// f - c*m*g, assuming the result is computed by a single merge.
  [[nodiscard]] Poly sub_scaled(const ResidueInt& c, const Monomial& m, const Poly& g) const {
    return merge(*this, g.mul_term(c, m), true);
  }

 private:
  static Poly merge(const Poly& f, const Poly& g, bool subtract) {
    check_compatible(f, g);
    const auto& ord = f.ring_->ordering();
    Poly r(f.ring_);
    r.terms_.reserve(f.size() + g.size());
    std::size_t i = 0, j = 0;
    while (i < f.size() || j < g.size()) {
      if (j == g.size() || (i < f.size() && ord.compare(f.terms_[i].mono, g.terms_[j].mono) > 0)) {
        r.terms_.push_back(f.terms_[i++]);
      } else if (i == f.size() || ord.compare(f.terms_[i].mono, g.terms_[j].mono) < 0) {
        const Term& t = g.terms_[j++];
        r.terms_.push_back({subtract ? -t.coeff : t.coeff, t.mono});
      } else {
        ResidueInt c = subtract ? f.terms_[i].coeff - g.terms_[j].coeff : f.terms_[i].coeff + g.terms_[j].coeff;
        if (!c.is_zero()) r.terms_.push_back({std::move(c), f.terms_[i].mono});
        ++i;
        ++j;
      }
    }
    return r;
  }

  RingPtr ring_;
  std::vector<Term> terms_;
};

/// Partial assignment indexed by ring variable.
using PartialModel = std::vector<std::optional<ResidueInt>>;

namespace detail {
inline ResidueInt pow_residue(ResidueInt base, Exponent e) {
  ResidueInt r = ResidueInt::one(base.width());
  while (e > 0) {
    if (e & 1u) r *= base;
    e >>= 1;
    if (e) base *= base;
  }
  return r;
}
}  // namespace detail

/// Value of f at the assignment; every variable occurring in f must be assigned.
inline ResidueInt evaluate(const Poly& f, const PartialModel& values) {
  ResidueInt acc = ResidueInt::zero(f.width());
  for (const auto& t : f.terms()) {
    ResidueInt v = t.coeff;
    for (std::size_t i = 0; i < t.mono.size() && !v.is_zero(); ++i) {
      if (t.mono[i] == 0) continue;
      if (i >= values.size() || !values[i])
        throw std::invalid_argument("evaluate: variable '" + f.ring()->var_name(i) + "' is unassigned");
      v *= detail::pow_residue(*values[i], t.mono[i]);
    }
    acc += v;
  }
  return acc;
}

inline ResidueInt evaluate(const Poly& f, std::span<const ResidueInt> values) {
  PartialModel m(values.begin(), values.end());
  return evaluate(f, m);
}

/// Replaces every assigned variable by its value.
inline Poly substitute(const Poly& f, const PartialModel& values) {
  std::vector<Term> out;
  out.reserve(f.size());
  for (const auto& t : f.terms()) {
    ResidueInt c = t.coeff;
    Monomial m = t.mono;
    for (std::size_t i = 0; i < m.size() && !c.is_zero(); ++i) {
      if (m[i] == 0 || i >= values.size() || !values[i]) continue;
      c *= detail::pow_residue(*values[i], m[i]);
      m[i] = 0;
    }
    if (!c.is_zero()) out.push_back({std::move(c), std::move(m)});
  }
  return Poly::from_terms(f.ring(), std::move(out));
}

/// Re-expresses f in another ring by matching variable names.
inline Poly embed(const Poly& f, const RingPtr& target) {
  if (f.ring() == target) return f;
  if (f.width() != target->width()) throw MismatchError("embed: width mismatch");
  std::vector<std::size_t> map(f.ring()->num_vars());
  for (std::size_t i = 0; i < map.size(); ++i) {
    auto idx = target->index_of(f.ring()->var_name(i));
    if (!idx) throw MismatchError("embed: variable '" + f.ring()->var_name(i) + "' missing from target ring");
    map[i] = *idx;
  }
  std::vector<Term> out;
  out.reserve(f.size());
  for (const auto& t : f.terms()) {
    Monomial m(target->num_vars());
    for (std::size_t i = 0; i < t.mono.size(); ++i) m[map[i]] += t.mono[i];
    out.push_back({t.coeff, std::move(m)});
  }
  return Poly::from_terms(target, std::move(out));
}

// ---------------------------------------------------------------------------
// Textual form: terms joined by " + " / " - ", each written c*x1^e1*x2.
// Coefficients use the signed representative; unit magnitudes are omitted.

inline std::string to_string(const Monomial& m, const PolyRing& ring) {
  std::string s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (!s.empty()) s += '*';
    s += ring.var_name(i);
    if (m[i] > 1) s += '^' + std::to_string(m[i]);
  }
  return s.empty() ? "1" : s;
}

inline std::string to_string(const Poly& f) {
  if (f.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& t : f.terms()) {
    BigInt c = t.coeff.signed_value();
    const bool neg = c < 0;
    if (neg) c = -c;
    if (first) {
      if (neg) out += '-';
    } else {
      out += neg ? " - " : " + ";
    }
    first = false;
    if (t.mono.is_one()) {
      out += c.str();
    } else {
      if (c != 1) out += c.str() + '*';
      out += to_string(t.mono, *f.ring());
    }
  }
  return out;
}

/// Error raised by parse_poly with the 0-based offset of the problem.
class PolyParseError : public std::invalid_argument {
 public:
  PolyParseError(const std::string& msg, std::size_t offset)
      : std::invalid_argument(msg), offset_(offset) {}
  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

/// Base-10 digits to an integer; the string constructor of cpp_int would read
/// a leading 0 as octal.
inline BigInt decimal(std::string_view digits) {
  std::size_t i = 0;
  while (i + 1 < digits.size() && digits[i] == '0') ++i;
  return BigInt(std::string(digits.substr(i)));
}

inline constexpr unsigned kMaxExponent = 64;
inline constexpr unsigned kMaxDegree = 256;
inline constexpr std::size_t kMaxProductTerms = std::size_t{1} << 20;

class PolyTextParser {
 public:
  PolyTextParser(std::string_view text, RingPtr ring) : s_(text), ring_(std::move(ring)) {}

  Poly parse() {
    Poly p = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw PolyParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Poly expr() {
    Poly acc = term();
    while (true) {
      if (accept('+')) {
        acc += term();
      } else if (accept('-')) {
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  Poly term() {
    Poly acc = factor();
    while (accept('*')) {
      Poly f = factor();
      if (acc.degree() + f.degree() > kMaxDegree || acc.size() * f.size() > kMaxProductTerms) fail("product too large");
      acc *= f;
    }
    return acc;
  }

  Poly factor() {
    if (accept('-')) return -factor();
    Poly base = primary();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected exponent");
      if (pos_ - start > 3) fail("exponent too large");
      unsigned e = static_cast<unsigned>(std::stoul(std::string(s_.substr(start, pos_ - start))));
      if (e > kMaxExponent || base.degree() * e > kMaxDegree || (e > 1 && base.size() > 64)) fail("exponent too large");
      Poly r = Poly::constant(ring_, BigInt(1));
      for (unsigned i = 0; i < e; ++i) r *= base;
      return r;
    }
    return base;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
  }

  Poly primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Poly p = expr();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return Poly::constant(ring_, decimal(s_.substr(start, pos_ - start)));
    }
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      auto idx = ring_->index_of(name);
      if (!idx) {
        pos_ = start;
        fail("unknown variable '" + name + "'");
      }
      return Poly::variable(ring_, *idx);
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  RingPtr ring_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Poly parse_poly(std::string_view text, const RingPtr& ring) {
  return detail::PolyTextParser(text, ring).parse();
}

}  // namespace modsmt
