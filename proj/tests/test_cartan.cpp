#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tanflow/cartan.hpp"
#include "tanflow/errors.hpp"
#include "tanflow/syntax.hpp"

using namespace tanflow;

namespace {

VectorField field(const char* name, int n, std::initializer_list<const char*> comps) {
  std::vector<Expr> e;
  for (const char* c : comps) e.push_back(parse_expression(c, n));
  return VectorField(name, std::move(e));
}

DifferentialForm form(int n, int k, std::initializer_list<std::pair<MultiIndex, const char*>> terms) {
  DifferentialForm out(n, k);
  for (const auto& [i, c] : terms) out.add_term(i, parse_expression(c, n));
  return out;
}

// Largest difference of two forms over random points and arguments.
double form_gap(const DifferentialForm& a, const DifferentialForm& b, std::uint64_t seed = 7) {
  EXPECT_EQ(a.degree(), b.degree());
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Vec x = sample_point(a.domain().intersect(b.domain()), rng);
    std::vector<Vec> ws;
    for (int i = 0; i < a.degree(); ++i) ws.push_back(sample_vector(a.dim(), rng));
    worst = std::max(worst, std::abs(a.evaluate(x, ws) - b.evaluate(x, ws)));
  }
  return worst;
}

double field_gap(const VectorField& v, const VectorField& w, std::uint64_t seed = 11) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Vec x = sample_point(v.domain().intersect(w.domain()), rng);
    worst = std::max(worst, oracle::max_abs_diff(v(x), w(x)));
  }
  return worst;
}

std::vector<VectorField> fields() {
  return {
      field("dx", 2, {"1", "0"}),
      field("rot", 2, {"-x2", "x1"}),
      field("shear", 2, {"x2^2", "x1*x2"}),
      field("wave", 2, {"sin(x2)", "exp(x1)*x2"}),
      field("a3", 3, {"x2*x3", "x1", "x3^2-x1"}),
      field("b3", 3, {"cos(x1)", "x3", "x1*x2"}),
      field("c3", 3, {"x1^2", "x2*x3", "1"}),
  };
}

CartanCorpus corpus() {
  CartanCorpus c;
  c.fields = fields();
  c.forms = {
      DifferentialForm::function(2, parse_expression("x1^2*x2", 2)),
      DifferentialForm::function(2, parse_expression("sin(x1*x2)", 2)),
      form(2, 1, {{{0}, "x2"}, {{1}, "x1^3"}}),
      form(2, 2, {{{0, 1}, "x1*x2+1"}}),
      form(3, 1, {{{0}, "x2*x3"}, {{2}, "exp(x1)"}}),
      form(3, 2, {{{0, 1}, "x3"}, {{1, 2}, "x1^2"}, {{0, 2}, "x2"}}),
      form(3, 3, {{{0, 1, 2}, "x1*x2*x3"}}),
  };
  return c;
}

}  // namespace

TEST(Bracket, WorkedExamples) {
  const VectorField dx = field("dx", 2, {"1", "0"});
  const VectorField xdx = field("xdx", 2, {"x1", "0"});
  EXPECT_LE(field_gap(bracket_categorical(dx, xdx), dx), 1e-12);

  const VectorField ydx = field("ydx", 2, {"x2", "0"});
  const VectorField xdy = field("xdy", 2, {"0", "x1"});
  EXPECT_LE(field_gap(bracket_categorical(ydx, xdy), field("e", 2, {"-x1", "x2"})), 1e-12);
}

TEST(Bracket, PolynomialBracketIsExpression) {
  const VectorField v = field("v", 2, {"x1*x2", "x2^2"});
  const VectorField w = field("w", 2, {"x1^3", "x1-x2"});
  const VectorField b = bracket_categorical(v, w);
  for (const Expr& c : b.components()) {
    EXPECT_TRUE(c.is_polynomial());
    EXPECT_FALSE(c.has_calls());
  }
}

TEST(Bracket, AgreesWithFiniteDifferenceOracle) {
  for (const auto& v : fields()) {
    for (const auto& w : fields()) {
      if (v.dim() != w.dim()) continue;
      Rng rng(3);
      for (int t = 0; t < 10; ++t) {
        const Vec x = sample_point(v.domain(), rng);
        const Vec expect = [&] {
          Vec out = oracle::apply(oracle::jacobian(w.velocity(), x), v(x));
          const Vec other = oracle::apply(oracle::jacobian(v.velocity(), x), w(x));
          for (std::size_t i = 0; i < out.size(); ++i) out[i] -= other[i];
          return out;
        }();
        const BracketSample s = bracket_categorical_at(v, w, x);
        EXPECT_LE(oracle::max_abs_diff(s.value, expect), 1e-6) << v.name() << "," << w.name();
        EXPECT_LE(s.kernel_gap, 1e-10);
        EXPECT_LE(oracle::max_abs_diff(bracket_categorical(v, w)(x), expect), 1e-6);
      }
    }
  }
}

TEST(Bracket, AntisymmetricAndLinear) {
  const auto fs = fields();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (std::size_t j = 0; j < fs.size(); ++j) {
      if (fs[i].dim() != fs[j].dim()) continue;
      const VectorField vw = bracket_categorical(fs[i], fs[j]);
      const VectorField wv = bracket_categorical(fs[j], fs[i]);
      EXPECT_LE(field_gap(vf_add(vw, wv), VectorField("0", std::vector<Expr>(vw.dim(), Expr(0.0)))), 1e-9);
    }
  }
  // Leibniz: [v, f w] = v(f) w + f [v, w]
  const VectorField v = field("v", 2, {"x2", "x1^2"});
  const VectorField w = field("w", 2, {"cos(x1)", "x2"});
  const Expr f = parse_expression("x1*x2+1", 2);
  const Expr vf = v.components()[0] * f.derivative(0) + v.components()[1] * f.derivative(1);
  EXPECT_LE(field_gap(bracket_categorical(v, vf_module_action(f, w)),
                      vf_add(vf_module_action(vf, w), vf_module_action(f, bracket_categorical(v, w)))),
            1e-9);
}

TEST(Bracket, SuiteAndJacobi) {
  CheckConfig cfg;
  for (const auto& r : bracket_suite(fields(), cfg, 50)) {
    EXPECT_TRUE(r.pass) << r.axiom << " " << r.max_residual << " " << r.witness;
  }
  const AxiomReport j = jacobi_check(fields(), cfg);
  EXPECT_TRUE(j.pass) << j.max_residual << " " << j.witness;
  EXPECT_EQ(j.samples, cfg.trials);
}

TEST(Forms, WorkedExamples) {
  const DifferentialForm xdy = form(2, 1, {{{1}, "x1"}});
  const DifferentialForm dxdy = form(2, 2, {{{0, 1}, "1"}});
  EXPECT_LE(form_gap(exterior_d(xdy), dxdy), 1e-14);

  const VectorField dx = field("dx", 2, {"1", "0"});
  EXPECT_LE(form_gap(iota(dx, dxdy), form(2, 1, {{{1}, "1"}})), 1e-14);
  EXPECT_LE(form_gap(lie_derivative(dx, form(2, 1, {{{0}, "x1"}})), form(2, 1, {{{0}, "1"}})), 1e-14);

  const SmoothMap circle("circle", 1, {parse_expression("cos(x1)", 1), parse_expression("sin(x1)", 1)});
  const DifferentialForm angular = form(2, 1, {{{0}, "-x2"}, {{1}, "x1"}});
  EXPECT_LE(form_gap(pullback(circle, angular), form(1, 1, {{{0}, "1"}})), 1e-14);
}

TEST(Forms, WedgeSignsAndDegree) {
  const DifferentialForm a = form(3, 1, {{{0}, "x2"}, {{2}, "1"}});
  const DifferentialForm b = form(3, 1, {{{1}, "x3"}, {{2}, "x1"}});
  EXPECT_LE(form_gap(wedge(a, b), Expr(-1.0) * wedge(b, a)), 1e-14);
  EXPECT_TRUE(wedge(a, a).is_exactly_zero());
  const DifferentialForm c = form(3, 2, {{{0, 1}, "1"}});
  const DifferentialForm high = wedge(c, c);
  EXPECT_EQ(high.degree(), 4);
  EXPECT_TRUE(high.coefficients().empty());
  // dx ∧ dz ∧ dy = -dx ∧ dy ∧ dz
  const DifferentialForm dz = form(3, 1, {{{2}, "1"}});
  const DifferentialForm dy = form(3, 1, {{{1}, "1"}});
  const DifferentialForm dx = form(3, 1, {{{0}, "1"}});
  EXPECT_EQ(to_string(wedge(wedge(dx, dz), dy).coefficient({0, 1, 2})), "-1");
}

TEST(Forms, DSquaredIsExactlyZeroAndLeibniz) {
  for (const auto& a : corpus().forms) {
    const DifferentialForm dd = exterior_d(exterior_d(a));
    if (a.is_polynomial()) {
      EXPECT_TRUE(dd.is_exactly_zero());
    }
    if (dd.degree() <= dd.dim()) EXPECT_LE(form_gap(dd, DifferentialForm(dd.dim(), dd.degree())), 1e-9);
  }
  const DifferentialForm a = form(3, 1, {{{0}, "x2*x3"}, {{1}, "sin(x1)"}});
  const DifferentialForm b = form(3, 1, {{{2}, "x1^2"}, {{1}, "x3"}});
  EXPECT_LE(form_gap(exterior_d(wedge(a, b)), wedge(exterior_d(a), b) - wedge(a, exterior_d(b))), 1e-9);
}

TEST(Forms, PullbackCommutesWithD) {
  const SmoothMap f("f", 2, {parse_expression("x1*x2", 2), parse_expression("x1+x2^2", 2), parse_expression("sin(x1)", 2)});
  const DifferentialForm a = form(3, 1, {{{0}, "x3"}, {{1}, "x1*x2"}, {{2}, "x2^2"}});
  EXPECT_LE(form_gap(pullback(f, exterior_d(a)), exterior_d(pullback(f, a))), 1e-9);
}

TEST(Forms, InnerDerivativeOfFunctionUnderflows) {
  EXPECT_THROW((void)iota(field("v", 1, {"1"}), DifferentialForm::function(1, Expr(2.0))), DegreeUnderflow);
}

TEST(Forms, DifferentialFromTangentMapMatchesOracle) {
  const Expr f = parse_expression("exp(x1)*x2^2", 2);
  const SmoothMap map("f", 2, {f});
  const Vec x{0.3, -0.7};
  const Vec w{1.2, 0.4};
  const double expect = oracle::apply(oracle::jacobian(map, x), w)[0];
  EXPECT_NEAR(differential_via_tangent_map(f, 2, x, w), expect, 1e-7);
  EXPECT_NEAR(exterior_d(DifferentialForm::function(2, f)).evaluate(x, {w}), expect, 1e-7);
}

TEST(Cartan, SuitePasses) {
  CheckConfig cfg;
  const auto reports = cartan_suite(corpus(), cfg);
  ASSERT_EQ(reports.size(), 7u);
  for (const auto& r : reports) {
    EXPECT_TRUE(r.pass) << r.axiom << " " << r.max_residual << " " << r.witness;
    EXPECT_LE(r.max_residual, 1e-8) << r.axiom;
    EXPECT_GT(r.samples, 0) << r.axiom;
  }
  const AxiomReport df = differential_two_path_check(corpus(), cfg);
  EXPECT_TRUE(df.pass) << df.max_residual;
  EXPECT_LE(df.max_residual, 1e-9);
}

TEST(Cartan, PointwiseLieDerivativeMatchesOracle) {
  // 𝓛_v α = d/dt φ_t^* α at t = 0, approximated by α(x + t v) on (1 + t Dv) w.
  const VectorField v = field("v", 2, {"x2^2", "sin(x1)"});
  const DifferentialForm a = form(2, 1, {{{0}, "x1*x2"}, {{1}, "cos(x2)"}});
  const Vec x{0.4, 0.9};
  const Vec w{0.3, -1.1};
  const auto J = oracle::jacobian(v.velocity(), x);
  auto at = [&](double t) {
    Vec y = x;
    const Vec vx = v(x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * vx[i];
    Vec wt = w;
    const Vec dw = oracle::apply(J, w);
    for (std::size_t i = 0; i < wt.size(); ++i) wt[i] += t * dw[i];
    return a.evaluate(y, {wt});
  };
  const double h = oracle::kStep;
  const double expect = (at(h) - at(-h)) / (2 * h);
  EXPECT_NEAR(lie_derivative_pointwise(v, a, x, {w}), expect, 1e-6);
  EXPECT_NEAR(lie_derivative(v, a).evaluate(x, {w}), expect, 1e-6);
}
