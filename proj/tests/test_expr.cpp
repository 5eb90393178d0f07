#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tanflow/errors.hpp"
#include "tanflow/expr.hpp"
#include "tanflow/rng.hpp"
#include "tanflow/smooth_map.hpp"
#include "tanflow/syntax.hpp"

using namespace tanflow;

TEST(Expr, SimplifiesNeutralElements) {
  const Expr x = Expr::var(0);
  EXPECT_TRUE((x - x).is_constant(0.0));
  EXPECT_TRUE((Expr(0.0) * Expr::var(1)).is_constant(0.0));
  EXPECT_TRUE(structurally_equal(Expr(1.0) * x, x));
  EXPECT_TRUE((Expr(2.0) + Expr(3.0)).is_constant(5.0));
}

TEST(Expr, ParsesAndEvaluates) {
  const Expr e = parse_expression("x1*x2 + sin(x1)^2 - 3/x2", 2);
  const double x[] = {0.4, 1.5};
  EXPECT_NEAR(e.eval(x), 0.4 * 1.5 + std::pow(std::sin(0.4), 2) - 2.0, 1e-15);
}

TEST(Expr, RealEvaluationEqualsOrderZeroJet) {
  const Expr e = parse_expression("exp(x1)*log(x2) + sqrt(x1*x1+x2)", 2);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const double x[] = {rng.uniform(-1, 1), rng.uniform(0.5, 2)};
    const Jet jx[] = {Jet(x[0]), Jet(x[1])};
    EXPECT_EQ(e.eval(x), e.eval(jx).value());
  }
}

TEST(Expr, SymbolicDerivativeMatchesFiniteDifferences) {
  const Expr e = parse_expression("x1^3*x2 - cos(x1*x2) + exp(x2)/x1", 2);
  const SmoothMap f("f", 2, {e});
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const Vec x = {rng.uniform(0.5, 2), rng.uniform(-1, 1)};
    const auto J = oracle::jacobian(f, x);
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(e.derivative(k).eval(x), J[0][static_cast<std::size_t>(k)], 1e-6);
    }
  }
}

TEST(Expr, CallNodesDifferentiateThroughJets) {
  const auto fn = std::make_shared<ExprFunction>(parse_expression("sin(x1)*x2^2", 2), 2, "g");
  const Expr call = Expr::call(fn);
  const Expr d = call.derivative(0);
  const double x[] = {0.3, 1.7};
  EXPECT_NEAR(d.eval(x), std::cos(0.3) * 1.7 * 1.7, 1e-14);
  EXPECT_TRUE(structurally_equal(call.derivative(0), call.derivative(0)));
  const Expr dd = d.derivative(1);
  EXPECT_NEAR(dd.eval(x), std::cos(0.3) * 2 * 1.7, 1e-13);
}

TEST(Expr, PrinterRoundTripsByteIdentically) {
  const char* inputs[] = {"x1*x2",      "-x1+x2*(x1-x2)", "x1^2-(x2-x1)",   "x1/(x2*x1)",
                          "-(x1+x2)^3", "sin(x1)*exp(-x2)", "x1-(-2)",       "flat(x1)*1.5e-7",
                          "x1^-2",      "(x1-x2)-(x1+x2)", "x1*(x2/x1)",     "-x1^2"};
  for (const char* in : inputs) {
    const std::string once = to_string(parse_expression(in, 2));
    const std::string twice = to_string(parse_expression(once, 2));
    EXPECT_EQ(once, twice) << in;
    const double x[] = {0.7, 1.3};
    EXPECT_NEAR(parse_expression(once, 2).eval(x), parse_expression(in, 2).eval(x), 1e-12) << in;
  }
}

TEST(Expr, ParseErrors) {
  EXPECT_THROW((void)parse_expression("x1 + ", 1), ParseError);
  EXPECT_THROW((void)parse_expression("x3", 2), UndefinedVariable);
  EXPECT_THROW((void)parse_expression("y", 2), UndefinedVariable);
  EXPECT_THROW((void)parse_expression("tan(x1)", 1), ParseError);
  try {
    (void)parse_expression("x1 * * x2", 2);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 6);
  }
}

TEST(SmoothMap, CompositionSymbolicEqualsSequentialJets) {
  const SmoothMap f("f", 2, {parse_expression("x1*x2", 2), parse_expression("sin(x1)+x2", 2)});
  const SmoothMap g("g", 2, {parse_expression("exp(x1)-x2^2", 2)});
  const SmoothMap gf = g.compose(f);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double seeds0[] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double seeds1[] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const std::vector<Jet> x = {Jet::seeded(rng.uniform(-1, 1), seeds0), Jet::seeded(rng.uniform(-1, 1), seeds1)};
    const auto direct = gf.eval(x);
    const auto seq = g.eval(f.eval(x));
    EXPECT_LT(oracle::max_abs_diff(direct[0].components(), seq[0].components()), 1e-12);
  }
}

TEST(SmoothMap, DomainIsEnforced) {
  const SmoothMap f("f", 1, {parse_expression("log(x1)", 1)}, Domain({Interval{0.0, HUGE_VAL}}));
  const double bad[] = {-1.0};
  EXPECT_THROW((void)f(bad), DomainError);
  const Jet jb[] = {Jet(-1.0)};
  EXPECT_THROW((void)f.eval(jb), DomainError);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) EXPECT_GT(sample_point(f.domain(), rng)[0], 0.0);
}

TEST(SmoothMap, JetEvalRequiresCommonOrder) {
  const SmoothMap f("f", 2, {parse_expression("x1*x2", 2)});
  const std::vector<Jet> mixed = {Jet::from_components({1, 1}), Jet(2.0)};
  EXPECT_THROW((void)jet_eval(f, mixed, 1), std::invalid_argument);
  const SmoothMap sq("sq", 1, {parse_expression("x1^2", 1)});
  const std::vector<Jet> arg = {Jet::from_components({3, 2})};
  const auto y = jet_eval(sq, arg, 1);
  EXPECT_EQ(y[0][0], 9);
  EXPECT_EQ(y[0][1], 12);
}
