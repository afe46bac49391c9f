#pragma once

/// Exact arithmetic in Z_{2^d} for arbitrary d.
///
/// Residues are kept fully reduced into [0, 2^d) after every operation.
/// Besides the usual ring operations this header provides the 2-adic
/// valuation, division by non-units and three algorithms for the inverse
/// of an odd residue, each of which can report estimated operation counts
/// through an OpCounter.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace modsmt {

using BigInt = boost::multiprecision::cpp_int;

/// Raised when an operation is applied outside its mathematical domain
/// (valuation of zero, inverse of an even residue, inexact division).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when two operands disagree on width, variables or ordering.
class MismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline const BigInt& pow2(unsigned k) {
  thread_local std::vector<BigInt> cache;
  if (cache.size() <= k) {
    std::size_t old = cache.size();
    cache.resize(k + 1);
    for (std::size_t i = old; i <= k; ++i) cache[i] = BigInt(1) << i;
  }
  return cache[k];
}

inline const BigInt& low_mask(unsigned k) {
  thread_local std::vector<BigInt> cache;
  if (cache.size() <= k) {
    std::size_t old = cache.size();
    cache.resize(k + 1);
    for (std::size_t i = old; i <= k; ++i) cache[i] = pow2(static_cast<unsigned>(i)) - 1;
  }
  return cache[k];
}

inline std::size_t bit_length(const BigInt& v) {
  if (v.is_zero()) return 0;
  return boost::multiprecision::msb(v < 0 ? BigInt(-v) : v) + 1;
}

/// Reduces an arbitrary integer into [0, 2^width).
inline void reduce_into(BigInt& v, unsigned width) {
  if (v.sign() >= 0) {
    if (!v.is_zero() && boost::multiprecision::msb(v) >= width) v &= low_mask(width);
    return;
  }
  BigInt mag = -v;
  mag &= low_mask(width);
  if (mag.is_zero()) {
    v = 0;
  } else {
    v = pow2(width) - mag;
  }
}

}  // namespace detail

/// Operation counts attached by the inverse algorithms.
///
/// bin_ops is an estimate: schoolbook multiplication and division of
/// b-bit operands cost 2*b^2, additions, subtractions and shifts cost 2*b.
struct OpCounter {
  std::uint64_t arith_ops = 0;
  std::uint64_t bin_ops = 0;

  void mul(std::size_t bits) {
    ++arith_ops;
    bin_ops += 2 * bits * bits;
  }
  void div(std::size_t bits) { mul(bits); }
  void add(std::size_t bits) {
    ++arith_ops;
    bin_ops += 2 * bits;
  }
  void shift(std::size_t bits) { bin_ops += 2 * bits; }
  void compare(std::size_t bits) { bin_ops += bits; }
};

/// An element of Z_{2^width}.
class ResidueInt {
 public:
  ResidueInt() = default;

  ResidueInt(BigInt value, unsigned width) : value_(std::move(value)), width_(width) {
    if (width_ == 0) throw std::invalid_argument("residue width must be positive");
    detail::reduce_into(value_, width_);
  }

  ResidueInt(long long value, unsigned width) : ResidueInt(BigInt(value), width) {}
  ResidueInt(int value, unsigned width) : ResidueInt(BigInt(value), width) {}

  static ResidueInt zero(unsigned width) { return {BigInt(0), width}; }
  static ResidueInt one(unsigned width) { return {BigInt(1), width}; }
  static ResidueInt pow2(unsigned k, unsigned width) {
    if (k >= width) return zero(width);
    return {detail::pow2(k), width};
  }

  [[nodiscard]] const BigInt& value() const noexcept { return value_; }
  [[nodiscard]] unsigned width() const noexcept { return width_; }
  [[nodiscard]] bool is_zero() const noexcept { return value_.is_zero(); }
  [[nodiscard]] bool is_odd() const { return boost::multiprecision::bit_test(value_, 0); }
  [[nodiscard]] bool is_one() const { return value_ == 1; }

  /// Representative in (-2^{w-1}, 2^{w-1}].
  [[nodiscard]] BigInt signed_value() const {
    if (width_ > 0 && value_ > detail::pow2(width_ - 1)) return value_ - detail::pow2(width_);
    return value_;
  }

  [[nodiscard]] std::uint64_t low_u64() const { return static_cast<std::uint64_t>(value_ & detail::low_mask(64)); }

  ResidueInt operator-() const {
    if (value_.is_zero()) return *this;
    ResidueInt r;
    r.width_ = width_;
    r.value_ = detail::pow2(width_) - value_;
    return r;
  }

  ResidueInt& operator+=(const ResidueInt& o) {
    check_width(o);
    value_ += o.value_;
    if (value_ >= detail::pow2(width_)) value_ -= detail::pow2(width_);
    return *this;
  }
  ResidueInt& operator-=(const ResidueInt& o) {
    check_width(o);
    if (value_ >= o.value_) {
      value_ -= o.value_;
    } else {
      value_ += detail::pow2(width_);
      value_ -= o.value_;
    }
    return *this;
  }
  ResidueInt& operator*=(const ResidueInt& o) {
    check_width(o);
    value_ *= o.value_;
    detail::reduce_into(value_, width_);
    return *this;
  }

  friend ResidueInt operator+(ResidueInt a, const ResidueInt& b) { return a += b; }
  friend ResidueInt operator-(ResidueInt a, const ResidueInt& b) { return a -= b; }
  friend ResidueInt operator*(ResidueInt a, const ResidueInt& b) { return a *= b; }

  friend bool operator==(const ResidueInt& a, const ResidueInt& b) {
    return a.width_ == b.width_ && a.value_ == b.value_;
  }

  [[nodiscard]] std::string to_string() const { return value_.str(); }

 private:
  void check_width(const ResidueInt& o) const {
    if (o.width_ != width_) {
      throw MismatchError("residue width mismatch: " + std::to_string(width_) + " vs " +
                          std::to_string(o.width_));
    }
  }

  BigInt value_{0};
  unsigned width_ = 1;
};

/// 2-adic valuation: the largest k with 2^k | a.
inline unsigned nu2(const ResidueInt& a) {
  if (a.is_zero()) throw DomainError("nu2 is undefined at zero");
  return static_cast<unsigned>(boost::multiprecision::lsb(a.value()));
}

/// Odd part s of a = 2^nu2(a) * s, as a residue of the same width.
inline ResidueInt odd_part(const ResidueInt& a) {
  return {a.value() >> nu2(a), a.width()};
}

namespace detail {

inline void require_odd(const ResidueInt& a, const char* who) {
  if (!a.is_odd()) throw DomainError(std::string(who) + ": argument must be odd, got " + a.to_string());
}

/// Extended Euclid on nonnegative integers: returns (g, s, t) with s*a + t*b = g.
struct Bezout {
  BigInt g, s, t;
};

inline Bezout ext_gcd(const BigInt& a, const BigInt& b, OpCounter* counter) {
  BigInt old_r = a, r = b;
  BigInt old_s = 1, s = 0;
  BigInt old_t = 0, t = 1;
  while (!r.is_zero()) {
    std::size_t bits = std::max(bit_length(old_r), bit_length(r));
    BigInt q = old_r / r;
    BigInt next_r = old_r - q * r;
    old_r = std::move(r);
    r = std::move(next_r);
    BigInt next_s = old_s - q * s;
    old_s = std::move(s);
    s = std::move(next_s);
    BigInt next_t = old_t - q * t;
    old_t = std::move(t);
    t = std::move(next_t);
    if (counter) {
      // one division, two multiplications, two subtractions per round
      counter->div(bits);
      counter->mul(bits);
      counter->add(bits);
      counter->mul(bits);
      counter->add(bits);
    }
  }
  return {old_r, old_s, old_t};
}

}  // namespace detail

/// Inverse of an odd residue by the extended Euclidean algorithm on (a, 2^d).
inline ResidueInt inv_euclid(const ResidueInt& a, OpCounter* counter = nullptr) {
  detail::require_odd(a, "inv_euclid");
  // Only the coefficient of a is needed; track it alone.
  BigInt old_r = a.value(), r = detail::pow2(a.width());
  BigInt old_s = 1, s = 0;
  while (!r.is_zero()) {
    std::size_t bits = std::max(detail::bit_length(old_r), detail::bit_length(r));
    BigInt q = old_r / r;
    BigInt next_r = old_r - q * r;
    old_r = std::move(r);
    r = std::move(next_r);
    BigInt next_s = old_s - q * s;
    old_s = std::move(s);
    s = std::move(next_s);
    if (counter) {
      counter->div(bits);
      counter->mul(bits);
      counter->add(bits);
      counter->mul(bits);
      counter->add(bits);
    }
  }
  return {old_s, a.width()};
}

/// Inverse of an odd residue by Hensel lifting:
/// a^{-1} = (2 - a) * prod_{i>=1} (1 + (a-1)^{2^i}), truncated once (a-1)^{2^i} vanishes mod 2^d.
inline ResidueInt inv_hensel(const ResidueInt& a, OpCounter* counter = nullptr) {
  detail::require_odd(a, "inv_hensel");
  const unsigned d = a.width();
  if (a.is_one()) return a;
  ResidueInt u = a - ResidueInt::one(d);
  ResidueInt result = ResidueInt(2, d) - a;
  if (counter) counter->add(d);
  // u = 2^s * odd, so u^{2^i} == 0 once s * 2^i >= d
  const unsigned s = nu2(u);
  ResidueInt power = u;
  for (std::uint64_t reach = s; reach < d;) {
    power *= power;
    reach *= 2;
    if (reach >= d) break;
    result *= power + ResidueInt::one(d);
    if (counter) {
      counter->mul(d);
      counter->add(d);
      counter->mul(d);
    }
  }
  if (counter) counter->mul(d);
  return result;
}

/// Intermediate values of the small-a inverse, exposed for tests.
struct SmallInverseTrace {
  BigInt r;       ///< 2^d mod a
  BigInt f;       ///< (2^d - r) / a
  BigInt k1, k2;  ///< k1*r + k2*a = -1
  std::size_t newton_iterations = 0;
  std::size_t repetend_length = 0;  ///< 0 when the repetend was not needed
  ResidueInt result;
};

namespace detail {

/// 2^d mod a by left-to-right square-and-multiply; doubling is a shift.
inline BigInt pow2_mod(unsigned d, const BigInt& a, OpCounter& counter) {
  const std::size_t abits = bit_length(a);
  BigInt r = 1;
  for (int bit = static_cast<int>(bit_length(BigInt(d))) - 1; bit >= 0; --bit) {
    r *= r;
    counter.mul(abits);
    r %= a;
    counter.div(2 * abits);
    if ((d >> bit) & 1u) {
      r <<= 1;
      counter.shift(abits);
      if (r >= a) {
        r -= a;
        counter.shift(abits);
      }
    }
  }
  return r;
}

/// floor(2^prec / a) by the Newton reciprocal iteration x <- x(2 - a x) in
/// fixed point with guard bits, followed by an exact one-step fix-up.
inline BigInt newton_reciprocal_bits(const BigInt& a, std::size_t prec, OpCounter& counter,
                                     std::size_t& iterations) {
  const std::size_t abits = bit_length(a);
  // ceil(log2 a): a is odd and >= 3, so a is not a power of two
  const std::size_t ceil_log_a = abits;
  std::size_t rounds = 1;
  while ((std::size_t{1} << rounds) < prec + abits + 8) ++rounds;
  rounds += 1;
  const std::size_t guard = abits + bit_length(BigInt(rounds)) + 4;
  const std::size_t w = prec + guard;
  const BigInt two_w1 = BigInt(1) << (w + 1);
  BigInt x = BigInt(1) << (w - ceil_log_a);
  for (std::size_t n = 0; n < rounds; ++n) {
    BigInt ax = a * x;
    counter.mul(w);
    BigInt corr = two_w1 - ax;
    counter.add(w);
    x *= corr;
    counter.mul(w);
    x >>= w;
    counter.shift(2 * w);
  }
  iterations = rounds;
  BigInt q = x >> guard;
  counter.shift(w);
  const BigInt& target = pow2(static_cast<unsigned>(prec));
  // x under-approximates 2^w / a up to rounding; settle the last unit
  while ((q + 1) * a <= target) {
    ++q;
    counter.mul(prec);
  }
  while (q * a > target) {
    --q;
    counter.mul(prec);
  }
  return q;
}

}  // namespace detail

/// Inverse for small odd a (a << 2^d): computes r = 2^d mod a, f = (2^d - r)/a
/// from the binary expansion of 1/a, then k1*r + k2*a = -1 over Z_a, and
/// returns k1*f - k2 mod 2^d.
inline SmallInverseTrace inv_small_trace(const ResidueInt& a, OpCounter& counter) {
  detail::require_odd(a, "inv_small");
  const unsigned d = a.width();
  SmallInverseTrace tr;
  if (a.is_one()) {
    tr.r = 0;
    tr.f = detail::pow2(d);
    tr.k1 = 0;
    tr.k2 = -1;
    tr.result = a;
    return tr;
  }
  const BigInt& av = a.value();

  tr.r = detail::pow2_mod(d, av, counter);

  // First min(d, 2a) fraction bits of 1/a. When d exceeds that, the purely
  // periodic expansion is extended from its minimal repetend.
  const bool need_repetend = BigInt(d) > 2 * av;
  const std::size_t prec = need_repetend ? static_cast<std::size_t>(2 * av) : d;
  BigInt bits = detail::newton_reciprocal_bits(av, prec, counter, tr.newton_iterations);

  if (!need_repetend) {
    tr.f = std::move(bits);
  } else {
    // Prefix-shift scan: period i holds iff the top prec-i bits equal the bottom prec-i bits.
    std::size_t period = 0;
    for (std::size_t i = 1; i < prec; ++i) {
      counter.shift(prec);
      counter.compare(prec);
      if ((bits >> i) == (bits & detail::low_mask(static_cast<unsigned>(prec - i)))) {
        period = i;
        break;
      }
    }
    if (period == 0) throw std::logic_error("inv_small: no repetend within 2a bits");
    tr.repetend_length = period;
    BigInt rep = bits >> (prec - period);
    std::size_t len = period;
    while (len < d) {
      rep = (rep << len) | rep;
      counter.shift(2 * len);
      len *= 2;
    }
    tr.f = rep >> (len - d);
    counter.shift(len);
  }

  // k1*r + k2*a = -1 from s*r + t*a = 1
  detail::Bezout bz = detail::ext_gcd(tr.r, av, &counter);
  if (bz.g != 1) throw std::logic_error("inv_small: gcd(2^d mod a, a) != 1");
  tr.k1 = -bz.s;
  tr.k2 = -bz.t;

  BigInt out = tr.k1 * tr.f;
  counter.mul(d);
  out -= tr.k2;
  counter.add(d);
  tr.result = ResidueInt(std::move(out), d);
  return tr;
}

inline ResidueInt inv_small(const ResidueInt& a, OpCounter& counter) { return inv_small_trace(a, counter).result; }

inline ResidueInt inv_small(const ResidueInt& a) {
  OpCounter scratch;
  return inv_small(a, scratch);
}

/// Chooses between the small-a inverse and Hensel lifting.
struct InverseConfig {
  std::size_t small_max_bits = 16;   ///< a < 2^small_max_bits
  std::size_t small_width_ratio = 4; ///< d >= ratio * bit_length(a)
};

inline ResidueInt inverse(const ResidueInt& a, const InverseConfig& cfg = {}) {
  detail::require_odd(a, "inverse");
  if (a.is_one()) return a;
  const std::size_t abits = detail::bit_length(a.value());
  if (abits <= cfg.small_max_bits && a.width() >= cfg.small_width_ratio * abits) return inv_small(a);
  return inv_hensel(a);
}

/// Exact division: the q with q*b == a (mod 2^d), q = 2^{nu2(a)-nu2(b)} * s_a * s_b^{-1}.
inline ResidueInt ring_div(const ResidueInt& a, const ResidueInt& b, const InverseConfig& cfg = {}) {
  if (a.width() != b.width()) throw MismatchError("ring_div: width mismatch");
  if (a.is_zero()) return a;
  if (b.is_zero()) throw DomainError("ring_div: division by zero");
  const unsigned va = nu2(a), vb = nu2(b);
  if (vb > va) throw DomainError("ring_div: nu2(divisor) exceeds nu2(dividend)");
  const unsigned d = a.width();
  ResidueInt sa{a.value() >> va, d};
  ResidueInt sb{b.value() >> vb, d};
  return ResidueInt::pow2(va - vb, d) * sa * inverse(sb, cfg);
}

}  // namespace modsmt
