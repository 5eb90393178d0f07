#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tanflow/errors.hpp"
#include "tanflow/rng.hpp"
#include "tanflow/syntax.hpp"
#include "tanflow/tangent.hpp"

using namespace tanflow;

namespace {

SmoothMap map(const char* name, int n, std::initializer_list<const char*> outs) {
  std::vector<Expr> e;
  for (const char* o : outs) e.push_back(parse_expression(o, n));
  return SmoothMap(name, n, std::move(e));
}

Vec rand_vec(Rng& rng, int n) { return sample_vector(n, rng, 1.5); }

}  // namespace

TEST(Pushforward, ProductExample) {
  const auto f = map("f", 2, {"x1*x2"});
  const TanVec r = pushforward_T(f, TanVec{{2, 3}, {1, 0}});
  EXPECT_DOUBLE_EQ(r.base[0], 6);
  EXPECT_DOUBLE_EQ(r.vel[0], 3);
}

TEST(Pushforward, ConstantAndIdentity) {
  const auto c = map("c", 2, {"4"});
  const TanVec r = pushforward_T(c, TanVec{{2, 3}, {1, 5}});
  EXPECT_EQ(r.base[0], 4);
  EXPECT_EQ(r.vel[0], 0);
  const TanVec xi{{0.5, -1}, {2, 3}};
  const TanVec id = pushforward_T(SmoothMap::identity(2), xi);
  EXPECT_EQ(id.base, xi.base);
  EXPECT_EQ(id.vel, xi.vel);
}

TEST(Pushforward, SecondOrderSquare) {
  const auto f = map("f", 1, {"x1^2"});
  const Tan2 r = pushforward_T2(f, Tan2{{1}, {1}, {1}, {0}});
  EXPECT_EQ(r.base[0], 1);
  EXPECT_EQ(r.v0[0], 2);
  EXPECT_EQ(r.v1[0], 2);
  EXPECT_EQ(r.v01[0], 2);
}

TEST(Pushforward, SecondOrderLinearMapHasNoHessianTerm) {
  const auto f = map("f", 2, {"2*x1-x2", "x1+3*x2"});
  const Tan2 r = pushforward_T2(f, Tan2{{1, 2}, {1, 0}, {0, 1}, {3, 4}});
  EXPECT_EQ(r.v01, (Vec{2, 15}));
  EXPECT_EQ(r.v0, (Vec{2, 1}));
  EXPECT_EQ(r.v1, (Vec{-1, 3}));
}

TEST(Pushforward, FiberProductCube) {
  const auto f = map("f", 1, {"x1^3"});
  const TanK r = pushforward_Tk(f, TanK{{2}, {{1}, {-1}}});
  EXPECT_EQ(r.base[0], 8);
  EXPECT_EQ(r.fibers[0][0], 12);
  EXPECT_EQ(r.fibers[1][0], -12);
  const TanK one = pushforward_Tk(f, TanK{{2}, {{0.5}}});
  const TanVec t = pushforward_T(f, TanVec{{2}, {0.5}});
  EXPECT_EQ(one.fibers[0], t.vel);
}

TEST(Pushforward, AgreesWithFiniteDifferences) {
  const auto f = map("f", 3, {"sin(x1*x2)+x3^2", "exp(x1)*x3 - x2", "x1*x2*x3"});
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const Vec u = rand_vec(rng, 3), a = rand_vec(rng, 3);
    const TanVec r = pushforward_T(f, TanVec{u, a});
    EXPECT_LT(oracle::max_abs_diff(r.vel, oracle::apply(oracle::jacobian(f, u), a)), 1e-8);
  }
}

TEST(Pushforward, SecondOrderJetsAgreeWithExplicitFormula) {
  const auto f = map("f", 2, {"sin(x1)*x2^2", "exp(x1*x2)"});
  Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    const Vec u = rand_vec(rng, 2), a = rand_vec(rng, 2), b = rand_vec(rng, 2), c = rand_vec(rng, 2);
    const Tan2 r = pushforward_T2(f, Tan2{u, a, b, c});
    const auto J = oracle::jacobian(f, u);
    Vec expected = oracle::apply(J, c);
    const Vec hess = oracle::second_directional(f, u, a, b);
    for (std::size_t j = 0; j < expected.size(); ++j) expected[j] += hess[j];
    EXPECT_LT(oracle::max_abs_diff(r.v01, expected), 1e-6);
    EXPECT_LT(oracle::max_abs_diff(r.v0, oracle::apply(J, a)), 1e-8);
  }
}

TEST(Pushforward, SymbolicPathMatchesJetPath) {
  const auto f = map("f", 2, {"x1^2*x2 - x2^3", "x1*x2"});
  Rng rng(23);
  for (int i = 0; i < 30; ++i) {
    const Vec u = rand_vec(rng, 2), a = rand_vec(rng, 2), b = rand_vec(rng, 2), c = rand_vec(rng, 2);
    const Tan2 numeric = pushforward_T2(f, Tan2{u, a, b, c});
    auto consts = [](const Vec& v) { return std::vector<Expr>(v.begin(), v.end()); };
    const BasicTan2<Expr> sym = pushforward_T2(f, BasicTan2<Expr>{consts(u), consts(a), consts(b), consts(c)});
    for (std::size_t j = 0; j < 2; ++j) {
      ASSERT_TRUE(sym.v01[j].is_constant());
      EXPECT_NEAR(sym.v01[j].constant_value(), numeric.v01[j], 1e-12);
    }
  }
}

TEST(Pushforward, FunctorialityUnderComposition) {
  const auto f = map("f", 2, {"x1*x2", "sin(x1)+x2"});
  const auto g = map("g", 2, {"exp(x1)-x2^2", "x1*x2^3"});
  const SmoothMap gf = g.compose(f);
  Rng rng(24);
  for (int i = 0; i < 100; ++i) {
    const Vec u = rand_vec(rng, 2), a = rand_vec(rng, 2), b = rand_vec(rng, 2), c = rand_vec(rng, 2);
    const TanVec lhs = pushforward_T(gf, TanVec{u, a});
    const TanVec rhs = pushforward_T(g, pushforward_T(f, TanVec{u, a}));
    EXPECT_LT(oracle::max_abs_diff(lhs.vel, rhs.vel), 1e-9 * (1 + std::abs(lhs.vel[0]) + std::abs(lhs.vel[1])));
    const Tan2 l2 = pushforward_T2(gf, Tan2{u, a, b, c});
    const Tan2 r2 = pushforward_T2(g, pushforward_T2(f, Tan2{u, a, b, c}));
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(l2.v01[j], r2.v01[j], 1e-9 * (1 + std::abs(l2.v01[j])));
  }
}

TEST(Pushforward, TagSwapEqualsTauConjugation) {
  const auto f = map("f", 2, {"x1^2*sin(x2)", "x1*x2"});
  Rng rng(25);
  for (int i = 0; i < 50; ++i) {
    const Tan2 xi{rand_vec(rng, 2), rand_vec(rng, 2), rand_vec(rng, 2), rand_vec(rng, 2)};
    const Tan2 lhs = nt_tau(pushforward_T2(f, xi));
    const Tan2 rhs = pushforward_T2(f, nt_tau(xi));
    EXPECT_LT(oracle::max_abs_diff(lhs.v01, rhs.v01), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(lhs.v0, rhs.v0), 1e-12);
  }
}

TEST(StructureMaps, DisplayedFormulas) {
  const Tan2 l = nt_lambda(TanVec{{3}, {5}});
  EXPECT_EQ(l.base, Vec{3});
  EXPECT_EQ(l.v0, Vec{0});
  EXPECT_EQ(l.v1, Vec{0});
  EXPECT_EQ(l.v01, Vec{5});
  const TanVec k = nt_kappa(2.0, TanVec{{1}, {3}});
  EXPECT_EQ(k.vel, Vec{6});
  const Tan2 xi{{1}, {2}, {3}, {4}};
  const Tan2 tt = nt_tau(nt_tau(xi));
  EXPECT_EQ(tt.v0, xi.v0);
  EXPECT_EQ(tt.v1, xi.v1);
  EXPECT_EQ(proj_piT(xi).vel, Vec{2});
  EXPECT_EQ(proj_Tpi(xi).vel, Vec{3});
  EXPECT_EQ(proj_piT(nt_tau(xi)).vel, proj_Tpi(xi).vel);
  EXPECT_EQ(proj_piT(l).vel, Vec{0});
  const TanVec z = nt_zero(Vec{1, 2});
  EXPECT_EQ(z.vel, (Vec{0, 0}));
}

TEST(StructureMaps, AddRequiresSharedBase) {
  EXPECT_THROW((void)nt_add(TanVec{{1}, {1}}, TanVec{{1.1}, {1}}), BaseMismatch);
  EXPECT_EQ(nt_add(TanVec{{1}, {1}}, TanVec{{1}, {2}}).vel, Vec{3});
  EXPECT_THROW((void)fiber_product(std::vector<TanVec>{{{0}, {1}}, {{1e-9}, {1}}}), BaseMismatch);
}

TEST(StructureMaps, Lambda2AndInverse) {
  const Tan2 r = nt_lambda2(TanK{{1}, {{2}, {3}}});
  EXPECT_EQ(r.v0, Vec{2});
  EXPECT_EQ(r.v1, Vec{0});
  EXPECT_EQ(r.v01, Vec{3});
  const Tan2 z = nt_lambda2(TanK{{4}, {{0}, {0}}});
  EXPECT_EQ(z.v01, Vec{0});
  const TanK back = nt_lambda2_inverse(r);
  EXPECT_EQ(back.fibers[0], Vec{2});
  EXPECT_EQ(back.fibers[1], Vec{3});
  EXPECT_THROW((void)nt_lambda2_inverse(Tan2{{1}, {2}, {1}, {3}}), KernelViolation);
}

TEST(StructureMaps, NuShuffle) {
  const TanK r = nu_shuffle(TanVec{{1, 2, 3}, {4, 5, 6}}, 1);
  EXPECT_EQ(r.base, (Vec{1, 4}));
  EXPECT_EQ(r.fibers[0], (Vec{2, 5}));
  EXPECT_EQ(r.fibers[1], (Vec{3, 6}));
  const TanK zero = nu_shuffle(TanVec{{1, 0, 0}, {4, 0, 0}}, 1);
  EXPECT_EQ(zero.fibers[0], (Vec{0, 0}));
  Rng rng(26);
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(rng.index(3));
    const int k = 1 + static_cast<int>(rng.index(3));
    const TanVec xi{rand_vec(rng, (k + 1) * n), rand_vec(rng, (k + 1) * n)};
    const TanVec back = nu_unshuffle(nu_shuffle(xi, n));
    EXPECT_EQ(back.base, xi.base);
    EXPECT_EQ(back.vel, xi.vel);
  }
}

TEST(StructureMaps, TangentOfTangentRoundTrip) {
  const Tan2 xi{{1, 2}, {3, 4}, {5, 6}, {7, 8}};
  const TanVec tt = as_tangent_of_tangent(xi);
  EXPECT_EQ(tt.base, (Vec{1, 2, 3, 4}));
  EXPECT_EQ(tt.vel, (Vec{5, 6, 7, 8}));
  const Tan2 back = from_tangent_of_tangent(tt);
  EXPECT_EQ(back.v01, xi.v01);
}

TEST(StructureMaps, JetEncodingOfSecondTangent) {
  const Tan2 xi{{1}, {2}, {3}, {4}};
  const auto j = to_jets(xi);
  EXPECT_EQ(j[0][1], 2);
  EXPECT_EQ(j[0][2], 3);
  const Tan2 back = tan2_from_jets(j);
  EXPECT_EQ(back.v01, Vec{4});
}
