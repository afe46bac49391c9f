#include "modsmt/invgen.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <random>

using namespace modsmt;

namespace {

struct LoopBuilder {
  LoopProblem L;

  LoopBuilder(unsigned d, std::vector<std::string> vars) {
    L.width = d;
    L.vars = std::move(vars);
    L.ring = make_loop_ring(d, L.vars);
  }
  RelAtom atom(RelOp op, const std::string& a, const std::string& b) const {
    return {op, parse_poly(a, L.ring), parse_poly(b, L.ring)};
  }
  LoopBuilder& pre(RelOp op, const std::string& a, const std::string& b) {
    L.pre.push_back(atom(op, a, b));
    return *this;
  }
  LoopBuilder& guard(RelOp op, const std::string& a, const std::string& b) {
    L.guard.push_back(atom(op, a, b));
    return *this;
  }
  LoopBuilder& trans(const std::string& a, const std::string& b) {
    L.trans.push_back(atom(RelOp::eq, a, b));
    return *this;
  }
  LoopBuilder& post(RelOp op, const std::string& a, const std::string& b) {
    L.post.push_back(atom(op, a, b));
    return *this;
  }
};

LoopProblem example1(RelOp post_op = RelOp::lt, const std::string& post_l = "y - x", const std::string& post_r = "10") {
  LoopBuilder b(32, {"x", "y"});
  b.pre(RelOp::eq, "x", "1").pre(RelOp::eq, "y", "9").guard(RelOp::ne, "y", "0");
  b.trans("x'", "x + 1").trans("y'", "y + 1").post(post_op, post_l, post_r);
  return b.L;
}

std::vector<std::string> rendered(const InvariantResult& r) {
  std::vector<std::string> out;
  for (const auto& inv : r.invariants) out.push_back(to_string(inv.poly));
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST(Template, Shape) {
  LoopBuilder b(8, {"x", "y"});
  ParamPoly eta = make_template(b.L, 2);
  EXPECT_EQ(to_string(eta), "l1*x^2 + l2*x*y + l3*y^2 + l4*x + l5*y + xi");
  LoopBuilder one(8, {"x"});
  EXPECT_EQ(to_string(make_template(one.L, 1)), "l1*x + xi");
  LoopBuilder three(8, {"x", "y", "z"});
  EXPECT_EQ(make_template(three.L, 3).num_params(), 20u);  // C(6, 3)
  EXPECT_THROW(make_template(one.L, 0), std::invalid_argument);
}

TEST(Pnf, DisplayedExample) {
  LoopBuilder b(32, {"x", "y"});
  b.trans("x'", "x + 1").trans("y'", "y + x");
  GroebnerBasis G = transition_basis(b.L);
  ASSERT_EQ(G.gens.size(), 2u);
  EXPECT_EQ(to_string(G.gens[0]), "x' - x - 1");
  EXPECT_EQ(to_string(G.gens[1]), "y' - x - y");

  ParamPoly eta = make_template(b.L, 2);
  ParamPoly r = consecution_residual(b.L, eta, G, 1);
  EXPECT_EQ(to_string(r), "(l2 + l3)*x^2 + 2*l3*x*y + (2*l1 + l2 + l5)*x + l2*y + (l1 + l4)");

  IntMatrix expect{{0, 1, 1, 0, 0, 0}, {0, 0, 2, 0, 0, 0}, {2, 1, 0, 0, 1, 0}, {0, 1, 0, 0, 0, 0}, {1, 0, 0, 1, 0, 0}};
  EXPECT_EQ(congruence_matrix(r), expect);
  EXPECT_EQ(consecution_system(b.L, 2, 1), expect);
}

TEST(Pnf, TrivialCases) {
  LoopBuilder b(8, {"x"});
  b.trans("x'", "x + 1");
  GroebnerBasis G = transition_basis(b.L);
  ParamPoly zero(b.L.ring, {"l1", "xi"});
  EXPECT_TRUE(pnf(zero, G.gens).is_zero());
  ParamPoly eta = make_template(b.L, 1);
  EXPECT_EQ(pnf(eta, G.gens), eta);  // no term divisible by x'
}

TEST(Pnf, RespectsValuationCondition) {
  // 2*x' - x: a term l1*x' has nu_bar 0 < 1 and must stay.
  LoopBuilder b(4, {"x"});
  b.trans("2*x'", "x");
  GroebnerBasis G = transition_basis(b.L);
  std::vector<ParamTerm> ts;
  ts.push_back({ParamCoeff::unit(2, 4, 0), Monomial::variable(3, 0)});
  ParamCoeff two = ParamCoeff::unit(2, 4, 1).scaled(ResidueInt(2, 4));
  ts.push_back({two, Monomial::variable(3, 0)});
  ParamPoly f = ParamPoly::from_terms(b.L.ring, {"l1", "l2"}, ts);
  ParamPoly r = pnf(f, G.gens);
  EXPECT_EQ(to_string(r), "(l1 + 2*l2)*x'");

  ParamPoly even = ParamPoly::from_terms(b.L.ring, {"l1", "l2"}, {{two, Monomial::variable(3, 0)}});
  EXPECT_EQ(to_string(pnf(even, G.gens)), "l2*x");
}

TEST(Consecution, ExampleOneSystem) {
  LoopProblem L = example1();
  EXPECT_EQ(consecution_system(L, 1, 1), (IntMatrix{{1, 1, 0}}));
  IntMatrix local = consecution_system(L, 1, 0);
  // eta' = l1*(x+1) + l2*(y+1) + xi must vanish identically
  EXPECT_EQ(local, (IntMatrix{{1, 0, 0}, {0, 1, 0}, {1, 1, 1}}));
}

TEST(Synthesize, ExampleOne) {
  LoopProblem L = example1();
  auto t0 = std::chrono::steady_clock::now();
  InvariantResult r = run_invgen(L, 1);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 1.0);
  auto inv = rendered(r);
  EXPECT_TRUE(contains(inv, "x - y + 8")) << ::testing::PrintToString(inv);
  ASSERT_FALSE(r.queries.empty());
  EXPECT_EQ(r.queries[0].name, "initiation");
  ASSERT_TRUE(r.queries[0].result);
  EXPECT_EQ(*r.queries[0].result, Status::unsat);
  EXPECT_EQ(r.queries.back().name, "verification");
  EXPECT_FALSE(r.queries.back().result);  // contains an order atom
  EXPECT_NE(r.queries.back().text.find("(bvult (bvadd (bvneg x) y) (_ bv10 32))"), std::string::npos);
  EXPECT_EQ(r.verdict, InvVerdict::unknown);
}

TEST(Synthesize, EquationalDischarge) {
  InvariantResult v = run_invgen(example1(RelOp::eq, "y - x", "8"), 1);
  EXPECT_EQ(v.verdict, InvVerdict::verified);
  for (const auto& q : v.queries) EXPECT_EQ(q.result, Status::unsat);

  LoopProblem wrong = example1(RelOp::eq, "y - x", "7");
  EXPECT_EQ(run_invgen(wrong, 1).verdict, InvVerdict::unknown);

  LoopProblem refute = example1(RelOp::eq, "x", "0");
  refute.mode = LoopMode::refute;
  EXPECT_EQ(run_invgen(refute, 1).verdict, InvVerdict::refuted);
  LoopProblem no_refute = example1(RelOp::eq, "x", "4294967288");
  no_refute.mode = LoopMode::refute;
  EXPECT_EQ(run_invgen(no_refute, 1).verdict, InvVerdict::unknown);
}

TEST(Synthesize, RelaxedInitialCondition) {
  LoopBuilder b(32, {"x", "y"});
  b.pre(RelOp::lt, "0", "x").pre(RelOp::lt, "x", "10").pre(RelOp::lt, "0", "y").pre(RelOp::lt, "y", "10");
  b.guard(RelOp::ne, "y", "0").trans("x'", "x + 1").trans("y'", "y + 1").post(RelOp::lt, "y - x", "10");
  InvariantResult r = run_invgen(b.L, 1, [] {
    InvgenOptions o;
    o.mus = {1};
    return o;
  }());
  ASSERT_EQ(r.invariants.size(), 1u);
  EXPECT_EQ(r.invariants[0].form, InvariantForm::initial_value);
  EXPECT_EQ(to_string(r.invariants[0].eta), "x - y");
  EXPECT_EQ(to_string(r.invariants[0].poly), "x - y - x_0 + y_0");
  ASSERT_EQ(r.queries.size(), 1u);
  const std::string expect =
      "(set-logic QF_BV)\n"
      "(declare-const x (_ BitVec 32))\n"
      "(declare-const y (_ BitVec 32))\n"
      "(declare-const x_0 (_ BitVec 32))\n"
      "(declare-const y_0 (_ BitVec 32))\n"
      "(declare-const c_1 (_ BitVec 32))\n"
      "; A1: initial condition on x_0\n"
      "(assert (bvult (_ bv0 32) x_0))\n"
      "(assert (bvult x_0 (_ bv10 32)))\n"
      "(assert (bvult (_ bv0 32) y_0))\n"
      "(assert (bvult y_0 (_ bv10 32)))\n"
      "; A2: invariants at the initial values\n"
      "(assert (= (bvadd x_0 (bvneg y_0) c_1) (_ bv0 32)))\n"
      "; A3: invariants at the current values\n"
      "(assert (= (bvadd x (bvneg y) c_1) (_ bv0 32)))\n"
      "; loop exit\n"
      "(assert (not (distinct y (_ bv0 32))))\n"
      "; postcondition fails\n"
      "(assert (not (bvult (bvadd (bvneg x) y) (_ bv10 32))))\n"
      "(check-sat)\n";
  EXPECT_EQ(r.queries[0].text, expect);
  EXPECT_EQ(r.verdict, InvVerdict::unknown);
}

TEST(Synthesize, ConstantLoop) {
  LoopBuilder b(8, {"x"});
  b.pre(RelOp::eq, "x", "5").trans("x'", "x");
  InvariantResult r = synthesize(b.L, 1);
  EXPECT_TRUE(contains(rendered(r), "x - 5"));
}

TEST(Synthesize, NoInvariants) {
  LoopBuilder b(8, {"x"});
  b.trans("x'", "x^2 + 1").post(RelOp::eq, "x", "0");
  InvariantResult r = run_invgen(b.L, 1);
  EXPECT_TRUE(r.invariants.empty());
  EXPECT_TRUE(r.queries.empty());
  EXPECT_EQ(r.verdict, InvVerdict::unknown);
}

TEST(Synthesize, RejectsMalformedLoops) {
  LoopBuilder b(8, {"x"});
  b.trans("x'", "x");
  b.L.trans[0].op = RelOp::lt;
  EXPECT_THROW(synthesize(b.L, 1), std::invalid_argument);
  LoopBuilder c(8, {"x"});
  c.pre(RelOp::eq, "x'", "1");
  EXPECT_THROW(synthesize(c.L, 1), std::invalid_argument);
}

namespace {

LoopProblem random_loop(std::mt19937_64& rng, unsigned d, std::size_t n, bool single_start) {
  std::vector<std::string> names{"x", "y", "z"};
  names.resize(n);
  LoopBuilder b(d, names);
  RingPtr prog = PolyRing::make(d, names);
  for (std::size_t i = 0; i < n; ++i) {
    Poly e = oracle::random_poly(rng, prog, 3, 2);
    b.L.trans.push_back({RelOp::eq, Poly::variable(b.L.ring, b.L.primed(i)), embed(e, b.L.ring)});
    if (single_start || i > 0) b.pre(RelOp::eq, names[i], std::to_string(rng() % (1u << d)));
  }
  return b.L;
}

/// Initial states of an equational pre, all-state simulation, invariant check.
void check_semantics(const LoopProblem& L, const InvariantResult& r, unsigned steps) {
  const std::size_t n = L.n();
  const unsigned d = L.width;
  std::vector<std::vector<std::uint64_t>> starts;
  oracle::for_each_point(n, d, [&](const std::vector<std::uint64_t>& s) {
    std::vector<std::uint64_t> pt(3 * n, 0);
    for (std::size_t i = 0; i < n; ++i) pt[n + i] = s[i];
    for (const auto& a : L.pre)
      if (oracle::eval(a.lhs - a.rhs, pt) != 0) return true;
    starts.push_back(s);
    return true;
  });
  for (const auto& s0 : starts) {
    std::vector<std::uint64_t> pt(3 * n, 0);
    for (std::size_t i = 0; i < n; ++i) pt[n + i] = pt[2 * n + i] = s0[i];
    for (unsigned step = 0; step <= steps; ++step) {
      for (const auto& inv : r.invariants) ASSERT_EQ(oracle::eval(inv.poly, pt), 0u) << to_string(inv.poly);
      std::vector<std::uint64_t> next(n);
      for (std::size_t i = 0; i < n; ++i) next[i] = oracle::eval(L.trans[i].rhs, pt);
      for (std::size_t i = 0; i < n; ++i) pt[n + i] = next[i];
    }
  }
}

}  // namespace

TEST(Synthesize, FamilyMembersReduceToZero) {
  std::mt19937_64 rng(61);
  int checked = 0;
  for (int it = 0; it < 40; ++it) {
    unsigned d = it % 2 ? 8 : 4;
    LoopProblem L = random_loop(rng, d, 1 + rng() % 3, true);
    ParamPoly eta = make_template(L, 1 + rng() % 2);
    GroebnerBasis G = transition_basis(L);
    for (int mu : {-1, 0, 1}) {
      ParamPoly res = consecution_residual(L, eta, G, mu);
      auto family = solution_family(congruence_matrix(res), d, 32);
      ASSERT_FALSE(family.empty());
      for (const auto& lam : family) {
        Poly e = eta.instantiate(lam);
        Poly step = to_primed(e, L) - e.scale(ResidueInt(mu, d));
        ASSERT_TRUE(normal_form(step, G.gens).is_zero()) << to_string(e);
        ++checked;
      }
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(Synthesize, InvariantsHoldOnReachableStates) {
  std::mt19937_64 rng(62);
  int with_invariants = 0;
  for (int it = 0; it < 12; ++it) {
    LoopProblem L = random_loop(rng, 6, 1 + rng() % 2, it % 3 != 0);
    InvariantResult r = synthesize(L, 1 + rng() % 2);
    if (!r.invariants.empty()) ++with_invariants;
    check_semantics(L, r, 64);
  }
  EXPECT_GT(with_invariants, 0);
}
