#include "modsmt/linalg.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace modsmt;

namespace {

BigInt det(const IntMatrix& M) {
  std::vector<std::vector<BigInt>> a(M.rows(), std::vector<BigInt>(M.cols()));
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (std::size_t j = 0; j < M.cols(); ++j) a[i][j] = M(i, j);
  return oracle::determinant(a);
}

void check_snf(const IntMatrix& A) {
  auto snf = smith_normal_form(A);
  ASSERT_EQ(snf.U * A * snf.V, snf.S) << A.to_string();
  EXPECT_EQ(abs(det(snf.U)), 1);
  EXPECT_EQ(abs(det(snf.V)), 1);
  const std::size_t k = std::min(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j)
      if (i != j) ASSERT_EQ(snf.S(i, j), 0);
  for (std::size_t i = 0; i < k; ++i) {
    EXPECT_GE(snf.S(i, i), 0);
    if (i + 1 < k && snf.S(i, i) != 0) EXPECT_EQ(snf.S(i + 1, i + 1) % snf.S(i, i), 0);
    if (snf.S(i, i) == 0 && i + 1 < k) EXPECT_EQ(snf.S(i + 1, i + 1), 0);
  }
}

std::vector<BigInt> big(std::initializer_list<long long> v) { return {v.begin(), v.end()}; }

bool satisfies(const IntMatrix& A, const std::vector<BigInt>& x, const std::vector<BigInt>& b, unsigned d) {
  for (std::size_t i = 0; i < A.rows(); ++i) {
    BigInt s = -b[i];
    for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j) * x[j];
    if (s % (BigInt(1) << d) != 0) return false;
  }
  return true;
}

}  // namespace

TEST(Snf, Examples) {
  auto I = smith_normal_form(IntMatrix::identity(3));
  EXPECT_EQ(I.S, IntMatrix::identity(3));
  auto A = smith_normal_form(IntMatrix{{2, 4}, {6, 8}});
  EXPECT_EQ(A.S, (IntMatrix{{2, 0}, {0, 4}}));
  auto Z = smith_normal_form(IntMatrix(2, 3));
  EXPECT_EQ(Z.S, IntMatrix(2, 3));
  EXPECT_EQ(Z.U, IntMatrix::identity(2));
  EXPECT_EQ(Z.V, IntMatrix::identity(3));
  check_snf(IntMatrix{{2, 4}, {6, 8}});
}

TEST(Snf, RandomInvariants) {
  std::mt19937_64 rng(51);
  for (int it = 0; it < 200; ++it) {
    std::size_t m = 1 + rng() % 6, n = 1 + rng() % 6;
    IntMatrix A(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) A(i, j) = static_cast<long long>(rng() % 101) - 50;
    check_snf(A);
  }
}

TEST(Congruence, Examples) {
  auto a = solve_congruence(IntMatrix{{1}}, big({3}), 3);
  ASSERT_TRUE(a);
  EXPECT_EQ((*a)[0], 3);
  EXPECT_FALSE(solve_congruence(IntMatrix{{2}}, big({1}), 3));

  IntMatrix sys{{0, 1, 1, 0, 0}, {0, 0, 2, 0, 0}, {2, 1, 0, 0, 1}, {0, 1, 0, 0, 0}, {1, 0, 0, 1, 0}};
  EXPECT_TRUE(satisfies(sys, big({1, 0, 0, 15, 14}), big({0, 0, 0, 0, 0}), 4));
  EXPECT_FALSE(satisfies(sys, big({1, 0, 8, 15, 14}), big({0, 0, 0, 0, 0}), 4));  // lambda2 + lambda3 = 8
  auto z = solve_congruence(sys, big({0, 0, 0, 0, 0}), 4);
  ASSERT_TRUE(z);
  EXPECT_TRUE(satisfies(sys, *z, big({0, 0, 0, 0, 0}), 4));
}

TEST(Congruence, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(52);
  for (int it = 0; it < 300; ++it) {
    unsigned d = 1 + rng() % 4;
    std::size_t m = 1 + rng() % 3, n = 1 + rng() % 3;
    IntMatrix A(m, n);
    std::vector<std::vector<long long>> raw(m, std::vector<long long>(n));
    std::vector<long long> rb(m);
    std::vector<BigInt> b(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        raw[i][j] = static_cast<long long>(rng() % 17) - 8;
        A(i, j) = raw[i][j];
      }
      rb[i] = static_cast<long long>(rng() % 17) - 8;
      b[i] = rb[i];
    }
    auto x = solve_congruence(A, b, d);
    ASSERT_EQ(x.has_value(), oracle::congruence_solvable(raw, rb, d)) << A.to_string();
    if (x) EXPECT_TRUE(satisfies(A, *x, b, d));
  }
}

TEST(Nullspace, Examples) {
  auto a = rational_nullspace(IntMatrix{{1, 1}});
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0][0], -a[0][1]);
  EXPECT_TRUE(rational_nullspace(IntMatrix{{1, 0}, {0, 1}}).empty());
  auto c = rational_nullspace(IntMatrix{{2, 4}});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(2 * c[0][0] + 4 * c[0][1], 0);
  EXPECT_NE(c[0][1], 0);
}

TEST(Nullspace, RandomProperties) {
  std::mt19937_64 rng(53);
  for (int it = 0; it < 200; ++it) {
    std::size_t m = 1 + rng() % 5, n = 1 + rng() % 6;
    IntMatrix A(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) A(i, j) = static_cast<long long>(rng() % 7) - 3;
    auto basis = rational_nullspace(A);
    auto snf = smith_normal_form(A);
    EXPECT_EQ(basis.size(), n - snf.rank);
    for (const auto& v : basis)
      for (std::size_t i = 0; i < m; ++i) {
        Rational s = 0;
        for (std::size_t j = 0; j < n; ++j) s += Rational(A(i, j)) * v[j];
        EXPECT_EQ(s, 0);
      }
  }
}

TEST(ShiftSolutions, Examples) {
  EXPECT_EQ(shift_solutions(big({1, 2}), {}, 4), (std::vector<std::vector<BigInt>>{big({1, 2})}));
  std::vector<RationalVector> basis{{Rational(1, 2), Rational(-1, 2)}};
  auto s = shift_solutions(big({0, 0}), basis, 4);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1], big({1, 15}));  // (1, -1) mod 16

  IntMatrix sys{{0, 1, 1, 0, 0}, {0, 0, 2, 0, 0}, {2, 1, 0, 0, 1}, {0, 1, 0, 0, 0}, {1, 0, 0, 1, 0}};
  for (unsigned d : {4u, 32u}) {
    auto family = shift_solutions(big({0, 0, 0, 0, 0}), rational_nullspace(augment_modulus(sys, d)), d);
    bool pattern = false;
    for (const auto& v : family) {
      EXPECT_TRUE(satisfies(sys, v, big({0, 0, 0, 0, 0}), d));
      const BigInt mod = BigInt(1) << d;
      // lambda1 = t, lambda4 = -t, lambda5 = -2t with t a unit
      if ((v[0] & 1) && v[1] == 0 && v[2] == 0 && (v[0] + v[3]) % mod == 0 && (2 * v[0] + v[4]) % mod == 0)
        pattern = true;
    }
    EXPECT_TRUE(pattern);
  }
}

TEST(ShiftSolutions, MembersSatisfyRandomSystems) {
  std::mt19937_64 rng(54);
  for (int it = 0; it < 200; ++it) {
    unsigned d = 1 + rng() % 12;
    std::size_t m = 1 + rng() % 4, n = 1 + rng() % 5;
    IntMatrix A(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) A(i, j) = static_cast<long long>(rng() % 9) - 4;
    std::vector<BigInt> zero(m, 0);
    auto l0 = solve_congruence(A, zero, d);
    ASSERT_TRUE(l0);
    for (const auto& v : shift_solutions(*l0, rational_nullspace(augment_modulus(A, d)), d))
      ASSERT_TRUE(satisfies(A, v, zero, d));
  }
}
