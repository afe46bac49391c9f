#pragma once

/// Exact integer linear algebra: Smith normal form, linear congruences
/// modulo 2^d, rational nullspaces, and the shifted solution families used
/// by the invariant generator.

#include "modsmt/ring.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace modsmt {

using Rational = boost::multiprecision::cpp_rational;

class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  IntMatrix(std::initializer_list<std::initializer_list<long long>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    for (const auto& row : init) {
      if (row.size() != cols_) throw std::invalid_argument("ragged matrix literal");
      for (long long v : row) data_.emplace_back(v);
    }
  }

  static IntMatrix identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  BigInt& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const BigInt& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix dimension mismatch");
    IntMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a(i, k).is_zero()) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
      }
    return c;
  }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

  void swap_rows(std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }
  void swap_cols(std::size_t a, std::size_t b) {
    for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
  }
  /// (row a, row b) <- (p*a + q*b, r*a + s*b)
  void combine_rows(std::size_t a, std::size_t b, const BigInt& p, const BigInt& q, const BigInt& r, const BigInt& s) {
    for (std::size_t j = 0; j < cols_; ++j) {
      BigInt x = (*this)(a, j), y = (*this)(b, j);
      (*this)(a, j) = p * x + q * y;
      (*this)(b, j) = r * x + s * y;
    }
  }
  void combine_cols(std::size_t a, std::size_t b, const BigInt& p, const BigInt& q, const BigInt& r, const BigInt& s) {
    for (std::size_t i = 0; i < rows_; ++i) {
      BigInt x = (*this)(i, a), y = (*this)(i, b);
      (*this)(i, a) = p * x + q * y;
      (*this)(i, b) = r * x + s * y;
    }
  }

  [[nodiscard]] std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < rows_; ++i) {
      s += i ? "; " : "";
      for (std::size_t j = 0; j < cols_; ++j) s += (j ? " " : "") + (*this)(i, j).str();
    }
    return s + "]";
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<BigInt> data_;
};

struct SnfDecomposition {
  IntMatrix U, S, V;  ///< U * A * V == S
  std::size_t rank = 0;
};

namespace detail {

inline BigInt abs_big(const BigInt& v) { return v < 0 ? BigInt(-v) : v; }

/// g = s*a + t*b with g = gcd(a, b) >= 0.
inline Bezout signed_bezout(const BigInt& a, const BigInt& b) {
  Bezout r = ext_gcd(abs_big(a), abs_big(b), nullptr);
  if (a < 0) r.s = -r.s;
  if (b < 0) r.t = -r.t;
  return r;
}

}  // namespace detail

inline SnfDecomposition smith_normal_form(const IntMatrix& A) {
  const std::size_t m = A.rows(), n = A.cols();
  SnfDecomposition out{IntMatrix::identity(m), A, IntMatrix::identity(n), 0};
  IntMatrix& S = out.S;
  IntMatrix& U = out.U;
  IntMatrix& V = out.V;

  for (std::size_t t = 0; t < std::min(m, n); ++t) {
    // smallest nonzero magnitude in the trailing block
    std::size_t pi = m, pj = n;
    for (std::size_t i = t; i < m; ++i)
      for (std::size_t j = t; j < n; ++j)
        if (!S(i, j).is_zero() && (pi == m || detail::abs_big(S(i, j)) < detail::abs_big(S(pi, pj)))) {
          pi = i;
          pj = j;
        }
    if (pi == m) break;
    S.swap_rows(t, pi);
    U.swap_rows(t, pi);
    S.swap_cols(t, pj);
    V.swap_cols(t, pj);

    while (true) {
      bool clean = true;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (S(i, t).is_zero()) continue;
        const BigInt a = S(t, t), b = S(i, t);
        if (b % a == 0) {
          const BigInt q = b / a;
          S.combine_rows(t, i, 1, 0, -q, 1);
          U.combine_rows(t, i, 1, 0, -q, 1);
        } else {
          auto bz = detail::signed_bezout(a, b);
          const BigInt ag = a / bz.g, bg = b / bz.g;
          S.combine_rows(t, i, bz.s, bz.t, -bg, ag);
          U.combine_rows(t, i, bz.s, bz.t, -bg, ag);
        }
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (S(t, j).is_zero()) continue;
        const BigInt a = S(t, t), b = S(t, j);
        if (b % a == 0) {
          const BigInt q = b / a;
          S.combine_cols(t, j, 1, 0, -q, 1);
          V.combine_cols(t, j, 1, 0, -q, 1);
        } else {
          auto bz = detail::signed_bezout(a, b);
          const BigInt ag = a / bz.g, bg = b / bz.g;
          S.combine_cols(t, j, bz.s, bz.t, -bg, ag);
          V.combine_cols(t, j, bz.s, bz.t, -bg, ag);
          clean = false;  // column work can refill the pivot column
        }
      }
      for (std::size_t i = t + 1; i < m && clean; ++i)
        if (!S(i, t).is_zero()) clean = false;
      if (!clean) continue;
      // divisibility: fold an offending row into the pivot row and redo
      bool divides = true;
      for (std::size_t i = t + 1; i < m && divides; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (S(i, j) % S(t, t) != 0) {
            S.combine_rows(t, i, 1, 1, 0, 1);
            U.combine_rows(t, i, 1, 1, 0, 1);
            divides = false;
            break;
          }
      if (divides) break;
    }
    if (S(t, t) < 0) {
      S.combine_rows(t, t, -1, 0, -1, 0);
      U.combine_rows(t, t, -1, 0, -1, 0);
    }
    out.rank = t + 1;
  }
  return out;
}

/// Some x with A x == b (mod 2^d), entries in [0, 2^d); absent iff none exists.
inline std::optional<std::vector<BigInt>> solve_congruence(const IntMatrix& A, const std::vector<BigInt>& b, unsigned d) {
  if (b.size() != A.rows()) throw std::invalid_argument("solve_congruence: dimension mismatch");
  const BigInt& mod = detail::pow2(d);
  auto snf = smith_normal_form(A);
  std::vector<BigInt> c(A.rows(), 0);
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = 0; k < A.rows(); ++k) c[i] += snf.U(i, k) * b[k];
  std::vector<BigInt> y(A.cols(), 0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    BigInt ci = c[i] % mod;
    if (ci < 0) ci += mod;
    if (i >= snf.rank) {
      if (!ci.is_zero()) return std::nullopt;
      continue;
    }
    const BigInt& s = snf.S(i, i);
    const unsigned k = std::min<unsigned>(d, static_cast<unsigned>(boost::multiprecision::lsb(s)));
    if (ci % detail::pow2(k) != 0) return std::nullopt;
    if (k == d) continue;
    const unsigned rest = d - k;
    ResidueInt odd(s >> k, rest);
    y[i] = (ResidueInt(ci >> k, rest) * inverse(odd)).value();
  }
  std::vector<BigInt> x(A.cols(), 0);
  for (std::size_t i = 0; i < A.cols(); ++i) {
    for (std::size_t k = 0; k < A.cols(); ++k) x[i] += snf.V(i, k) * y[k];
    x[i] %= mod;
    if (x[i] < 0) x[i] += mod;
  }
  return x;
}

using RationalVector = std::vector<Rational>;

/// Basis of { v : A v = 0 } over Q, one vector per non-pivot column.
inline std::vector<RationalVector> rational_nullspace(const IntMatrix& A) {
  const std::size_t m = A.rows(), n = A.cols();
  std::vector<std::vector<Rational>> R(m, std::vector<Rational>(n));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) R[i][j] = Rational(A(i, j));
  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t p = row;
    while (p < m && R[p][col] == 0) ++p;
    if (p == m) continue;
    std::swap(R[p], R[row]);
    const Rational piv = R[row][col];
    for (auto& v : R[row]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row || R[i][col] == 0) continue;
      const Rational f = R[i][col];
      for (std::size_t j = col; j < n; ++j) R[i][j] -= f * R[row][j];
    }
    pivot_cols.push_back(col);
    ++row;
  }
  std::vector<RationalVector> basis;
  std::vector<bool> is_pivot(n, false);
  for (auto c : pivot_cols) is_pivot[c] = true;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    RationalVector v(n, Rational(0));
    v[f] = 1;
    for (std::size_t r = 0; r < pivot_cols.size(); ++r) v[pivot_cols[r]] = -R[r][f];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// [A | -2^d I]: its rational nullspace parametrizes integer solutions of
/// A x == 0 (mod 2^d) together with the quotient vector.
inline IntMatrix augment_modulus(const IntMatrix& A, unsigned d) {
  IntMatrix M(A.rows(), A.cols() + A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < A.cols(); ++j) M(i, j) = A(i, j);
    M(i, A.cols() + i) = -detail::pow2(d);
  }
  return M;
}

/// lcm of the denominators of v.
inline BigInt denominator_lcm(const RationalVector& v) {
  BigInt l = 1;
  for (const auto& q : v) {
    BigInt den = boost::multiprecision::denominator(q);
    l = l / boost::multiprecision::gcd(l, den) * den;
  }
  return l;
}

/// Members lambda0 + lcm(D(s)) * s_lambda of the solution family, where
/// s ranges over the basis vectors (first num_lambda coordinates kept),
/// followed by pairwise sums, reduced mod 2^d, duplicates dropped, at most
/// `cap` members.
inline std::vector<std::vector<BigInt>> shift_solutions(const std::vector<BigInt>& lambda0,
                                                        const std::vector<RationalVector>& basis, unsigned d,
                                                        std::size_t cap = 32) {
  const std::size_t n = lambda0.size();
  const BigInt& mod = detail::pow2(d);
  auto reduce = [&](std::vector<BigInt> v) {
    for (auto& x : v) {
      x %= mod;
      if (x < 0) x += mod;
    }
    return v;
  };
  std::vector<std::vector<BigInt>> dirs;
  for (const auto& s : basis) {
    if (s.size() < n) throw std::invalid_argument("shift_solutions: basis vector too short");
    BigInt L = denominator_lcm(s);
    std::vector<BigInt> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = boost::multiprecision::numerator(Rational(s[i] * L));
    dirs.push_back(reduce(std::move(v)));
  }
  std::vector<std::vector<BigInt>> out;
  std::set<std::vector<BigInt>> seen;
  auto emit = [&](std::vector<BigInt> v) {
    v = reduce(std::move(v));
    if (out.size() < cap && seen.insert(v).second) out.push_back(std::move(v));
  };
  emit(lambda0);
  for (const auto& dv : dirs) {
    std::vector<BigInt> v = lambda0;
    for (std::size_t i = 0; i < n; ++i) v[i] += dv[i];
    emit(std::move(v));
  }
  for (std::size_t a = 0; a < dirs.size(); ++a)
    for (std::size_t b = a + 1; b < dirs.size(); ++b) {
      std::vector<BigInt> v = lambda0;
      for (std::size_t i = 0; i < n; ++i) v[i] += dirs[a][i] + dirs[b][i];
      emit(std::move(v));
    }
  return out;
}

}  // namespace modsmt
