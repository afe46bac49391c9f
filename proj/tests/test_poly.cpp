#include "modsmt/poly.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace modsmt;

namespace {

RingPtr ring(unsigned d, std::vector<std::string> vars, OrderKind kind = OrderKind::grevlex_graded) {
  return PolyRing::make(d, std::move(vars), kind);
}

}  // namespace

TEST(Poly, AdditionAnnihilates) {
  auto R = ring(2, {"x"});
  EXPECT_TRUE((parse_poly("2*x + 1", R) + parse_poly("2*x + 3", R)).is_zero());
}

TEST(Poly, MultiplicationReduces) {
  auto R = ring(2, {"x"});
  Poly p = parse_poly("x + 1", R) * parse_poly("x + 3", R);
  EXPECT_EQ(to_string(p), "x^2 - 1");
  EXPECT_EQ(p, parse_poly("x^2 + 3", R));
  Poly f = parse_poly("x^2 + 2*x", R);
  EXPECT_EQ(f * Poly::constant(R, 1), f);
}

TEST(Poly, LeadingTermGradedOrder) {
  auto R = ring(8, {"x1", "x2"});
  Poly f = parse_poly("x1*x2 - 2*x1^2*x2", R);
  EXPECT_EQ(to_string(f), "-2*x1^2*x2 + x1*x2");
  EXPECT_EQ(f.lc().signed_value(), -2);
  EXPECT_EQ(f.lm(), Monomial({2, 1}));
  EXPECT_EQ(f.lt().coeff.signed_value(), -2);

  auto S = ring(8, {"x", "y"});
  EXPECT_EQ(parse_poly("x + y^2", S).lm(), Monomial({0, 2}));
  EXPECT_EQ(Poly::constant(S, 5).lc().value(), 5);
  EXPECT_THROW((void)Poly(S).lt(), DomainError);
}

TEST(Poly, Evaluate) {
  auto R = ring(3, {"x"});
  EXPECT_EQ(evaluate(parse_poly("x^2 - 2", R), PartialModel{ResidueInt(3, 3)}).value(), 7);
  auto Q = ring(2, {"x"});
  EXPECT_TRUE(evaluate(parse_poly("(x - 1)*(x - 3)", Q), PartialModel{ResidueInt(1, 2)}).is_zero());
  auto S = ring(5, {"x", "y"});
  Poly g = parse_poly("3*x*y + 7*y + 11", S);
  EXPECT_EQ(evaluate(g, PartialModel{ResidueInt(0, 5), ResidueInt(0, 5)}).value(), 11);
  EXPECT_THROW(evaluate(g, PartialModel{ResidueInt(1, 5), std::nullopt}), std::invalid_argument);
}

TEST(Monomial, Operations) {
  Monomial a({2, 1}), b({1, 3});
  EXPECT_EQ(mono_lcm(a, b), Monomial({2, 3}));
  EXPECT_TRUE(mono_divides(Monomial({1, 0}), a));
  EXPECT_FALSE(mono_divides(Monomial({2, 0}), Monomial({1, 1})));
  EXPECT_EQ(mono_mul(a, b), Monomial({3, 4}));
  EXPECT_THROW(mono_lcm(a, Monomial({1, 1, 1})), MismatchError);
}

TEST(Poly, MismatchedRingsRejected) {
  auto R = ring(4, {"x"});
  auto S = ring(5, {"x"});
  auto T = ring(4, {"x"}, OrderKind::lex);
  EXPECT_THROW(parse_poly("x", R) + parse_poly("x", S), MismatchError);
  EXPECT_NO_THROW(parse_poly("x", R) + parse_poly("x", ring(4, {"x"})));
  EXPECT_THROW(parse_poly("x", R) + parse_poly("x", T), MismatchError);
}

TEST(Ordering, TotalWellFoundedCompatible) {
  std::mt19937_64 rng(11);
  for (auto ord : {MonomialOrdering::lex(3), MonomialOrdering::grevlex(3), MonomialOrdering::block(3, 1)}) {
    auto rnd = [&] {
      return Monomial({static_cast<Exponent>(rng() % 4), static_cast<Exponent>(rng() % 4), static_cast<Exponent>(rng() % 4)});
    };
    for (int i = 0; i < 1000; ++i) {
      Monomial p = rnd(), q = rnd(), r = rnd();
      EXPECT_TRUE(ord.compare(Monomial(3), p) <= 0);  // one is minimal
      auto c = ord.compare(p, q);
      EXPECT_EQ(c == 0, p == q);
      EXPECT_TRUE(ord.compare(q, p) == (0 <=> c));
      if (c < 0) EXPECT_TRUE(ord.compare(mono_mul(p, r), mono_mul(q, r)) < 0);
    }
  }
}

TEST(Ordering, GradedThenLexInDeclarationOrder) {
  auto ord = MonomialOrdering::grevlex(2);
  EXPECT_TRUE(ord.compare(Monomial({0, 2}), Monomial({1, 0})) > 0);  // degree first
  EXPECT_TRUE(ord.compare(Monomial({1, 1}), Monomial({0, 2})) > 0);  // then x1 before x2
  auto blk = MonomialOrdering::block(4, 2);
  EXPECT_TRUE(blk.compare(Monomial({1, 0, 0, 0}), Monomial({0, 0, 3, 0})) > 0);
}

TEST(Poly, RingAxiomsRandom) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    unsigned d = 1 + rng() % 8;
    auto R = ring(d, {"x", "y", "z"});
    Poly a = oracle::random_poly(rng, R, 4, 3), b = oracle::random_poly(rng, R, 4, 3),
         c = oracle::random_poly(rng, R, 4, 3);
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ(a + b, b + a);
    EXPECT_TRUE((a - a).is_zero());
  }
}

TEST(Poly, EvaluateIsHomomorphism) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    unsigned d = 1 + rng() % 8;
    auto R = ring(d, {"x", "y", "z"});
    Poly f = oracle::random_poly(rng, R, 4, 3), g = oracle::random_poly(rng, R, 4, 3);
    std::vector<std::uint64_t> pt{rng() & oracle::mask(d), rng() & oracle::mask(d), rng() & oracle::mask(d)};
    PartialModel m;
    for (auto v : pt) m.emplace_back(ResidueInt(BigInt(v), d));
    EXPECT_EQ(evaluate(f * g, m), evaluate(f, m) * evaluate(g, m));
    EXPECT_EQ(evaluate(f, m).low_u64(), oracle::eval(f, pt));
  }
}

TEST(Poly, TextRoundTrip) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    unsigned d = 1 + rng() % 40;
    auto R = ring(d, {"x", "y'", "x_0"});
    Poly f = oracle::random_poly(rng, R, 5, 4);
    EXPECT_EQ(parse_poly(to_string(f), R), f) << to_string(f);
  }
  auto R = ring(8, {"x"});
  EXPECT_EQ(to_string(Poly(R)), "0");
  EXPECT_THROW(parse_poly("x + q", R), PolyParseError);
  EXPECT_THROW(parse_poly("x +", R), PolyParseError);
  EXPECT_EQ(to_string(parse_poly("010*x + 09", R)), "10*x + 9");
}

TEST(Poly, SubstituteAndEmbed) {
  auto R = ring(4, {"x", "y"});
  Poly f = parse_poly("x*y + 3*y + 1", R);
  Poly g = substitute(f, PartialModel{ResidueInt(2, 4), std::nullopt});
  EXPECT_EQ(g, parse_poly("5*y + 1", R));
  auto S = ring(4, {"y", "z", "x"});
  Poly e = embed(f, S);
  EXPECT_EQ(to_string(e), "y*x + 3*y + 1");
  EXPECT_THROW(embed(f, ring(4, {"x"})), MismatchError);
}
