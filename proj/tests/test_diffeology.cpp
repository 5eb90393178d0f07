#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "tanflow/diffeology.hpp"
#include "tanflow/errors.hpp"
#include "tanflow/syntax.hpp"
#include "tanflow/tangent.hpp"

using namespace tanflow;

namespace {

SmoothMap map(const char* name, int n, std::initializer_list<const char*> outs, Domain dom = {}) {
  std::vector<Expr> e;
  for (const char* o : outs) e.push_back(parse_expression(o, n));
  return SmoothMap(name, n, std::move(e), std::move(dom));
}

SpaceParams pasta_params(int n, int r) {
  SpaceParams p;
  p.n = n;
  p.r = r;
  return p;
}

// Oracle: numerical rank of a finite-difference Jacobian.
int fd_rank(const SmoothMap& p, const Vec& u) {
  const auto J = oracle::jacobian(p, u);
  Eigen::MatrixXd M(J.size(), u.size());
  for (std::size_t i = 0; i < J.size(); ++i) {
    for (std::size_t l = 0; l < u.size(); ++l) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = J[i][l];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()(i) > 1e-6 ? 1 : 0;
  return rank;
}

}  // namespace

TEST(Spaces, BuiltinsValidate) {
  for (const std::string& name : builtin_space_names()) {
    const DiffSpace s = builtin_space(name);
    EXPECT_NO_THROW(s.validate()) << name;
  }
  EXPECT_NO_THROW(builtin_space("pasta", pasta_params(3, 2)).validate());
  EXPECT_NO_THROW(builtin_space("gl", pasta_params(3, 1)).validate());
  EXPECT_THROW((void)builtin_space("klein_bottle"), UnknownSpace);
}

TEST(Spaces, FoldedLineHasQuotientPlotAndSignGenerator) {
  const DiffSpace s = builtin_space("folded_line");
  ASSERT_EQ(s.identifications().size(), 1u);
  const Identification& h = s.identifications()[0];
  EXPECT_EQ(h.from, "quot");
  EXPECT_EQ(h.to, "quot");
  EXPECT_DOUBLE_EQ(h.h(Vec{0.7})[0], -0.7);
  EXPECT_DOUBLE_EQ(s.image("quot", {-2.5})[0], 2.5);
}

TEST(Spaces, PlotPredicates) {
  const DiffSpace half = builtin_space("half_line");
  EXPECT_FALSE(half.check_plot(map("id", 1, {"x1"})).is_plot);
  EXPECT_TRUE(half.check_plot(map("sq", 1, {"x1^2"})).is_plot);

  const DiffSpace p31 = builtin_space("pasta", pasta_params(3, 1));
  const SmoothMap curve = map("curve", 1, {"x1", "x1^2", "x1^3"});
  const SmoothMap sheet = map("sheet", 2, {"x1", "x2", "0"});
  EXPECT_TRUE(p31.check_plot(curve).is_plot);
  EXPECT_FALSE(p31.check_plot(sheet).is_plot);
  EXPECT_EQ(fd_rank(curve, {0.3}), 1);
  EXPECT_EQ(fd_rank(sheet, {0.3, -0.2}), 2);

  const DiffSpace cross = builtin_space("axis_cross");
  EXPECT_TRUE(cross.check_plot(map("x", 1, {"x1", "0"})).is_plot);
  EXPECT_FALSE(cross.check_plot(map("diag", 1, {"x1", "x1"})).is_plot);
}

TEST(Equivalence, FoldedLineSingleClassesAgree) {
  const DiffSpace s = builtin_space("folded_line");
  const TangentRep plus{"quot", {0.0}, {{1.0}}};
  const TangentRep minus{"quot", {0.0}, {{-1.0}}};
  const EquivalenceResult r = equivalent_tangent(s, plus, minus);
  ASSERT_EQ(r.verdict, EquivalenceResult::Verdict::Equivalent);
  ASSERT_EQ(r.chain.size(), 1u);
  EXPECT_EQ(r.chain[0].generator, "h");

  TangentRep replay = plus;
  for (const ChainStep& step : r.chain) replay = apply_step(s, replay, step);
  EXPECT_EQ(replay.plot, minus.plot);
  EXPECT_LE(oracle::max_abs_diff(replay.point, minus.point), 1e-9);
  EXPECT_LE(oracle::max_abs_diff(replay.vectors[0], minus.vectors[0]), 1e-9);

  const EquivalenceResult same = equivalent_tangent(s, plus, plus);
  EXPECT_EQ(same.verdict, EquivalenceResult::Verdict::Equivalent);
  EXPECT_TRUE(same.chain.empty());
}

TEST(Equivalence, FoldedLinePairsAreSeparatedBySum) {
  const DiffSpace s = builtin_space("folded_line");
  const TangentRep zeta{"quot", {0.0}, {{1.0}, {1.0}}};
  const TangentRep eta{"quot", {0.0}, {{1.0}, {-1.0}}};
  const EquivalenceResult r = equivalent_tangent(s, zeta, eta);
  EXPECT_EQ(r.verdict, EquivalenceResult::Verdict::Separated);
  EXPECT_EQ(r.certificate, "fiberwise_sum_norm");
  EXPECT_DOUBLE_EQ(r.value_a, 2.0);
  EXPECT_DOUBLE_EQ(r.value_b, 0.0);
  EXPECT_FALSE(r.budget_exhausted);
}

TEST(Equivalence, CertificatesAreInvariant) {
  const AxiomReport r = certificate_soundness(builtin_space("folded_line"), CheckConfig{});
  EXPECT_TRUE(r.pass) << r.max_residual;
  EXPECT_EQ(r.samples, 100);
}

TEST(Equivalence, DifferentBasePointsSeparate) {
  const DiffSpace s = builtin_space("folded_line");
  const EquivalenceResult r = equivalent_tangent(s, {"quot", {1.0}, {{1.0}}}, {"quot", {2.0}, {{1.0}}});
  EXPECT_EQ(r.verdict, EquivalenceResult::Verdict::Separated);
  EXPECT_EQ(r.certificate, "base_point");
  const EquivalenceResult mirrored = equivalent_tangent(s, {"quot", {1.0}, {{1.0}}}, {"quot", {-1.0}, {{-1.0}}});
  EXPECT_EQ(mirrored.verdict, EquivalenceResult::Verdict::Equivalent);
}

TEST(Equivalence, UnknownWithoutGeneratorsOrCertificates) {
  const DiffSpace s = builtin_space("euclidean", pasta_params(2, 0));
  const EquivalenceResult r = equivalent_tangent(s, {"id", {0.0, 0.0}, {{1.0, 0.0}}}, {"id", {0.0, 0.0}, {{0.0, 1.0}}});
  EXPECT_EQ(r.verdict, EquivalenceResult::Verdict::Unknown);
}

TEST(Surjectivity, EuclideanPlaneHasIdentityWitness) {
  const DiffSpace s = builtin_space("euclidean");
  const SurjectivityResult r = theta_surjectivity_probe(s, {0.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}});
  ASSERT_TRUE(r.found);
  ASSERT_TRUE(r.witness.has_value());
  const Vec u{0.25, -0.5};
  EXPECT_LE(oracle::max_abs_diff((*r.witness)(u), u), 1e-12);
}

TEST(Surjectivity, AxisCrossCannotCarryBothAxes) {
  const DiffSpace s = builtin_space("axis_cross");
  const SurjectivityResult r = theta_surjectivity_probe(s, {0.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}});
  EXPECT_FALSE(r.found);
  EXPECT_EQ(r.family.degree, 6);
  EXPECT_EQ(r.grid_points, 169);
  EXPECT_GT(r.best_residual, 1e-3);
  EXPECT_EQ(static_cast<int>(r.residual_curve.size()), r.family.budget);

  const SurjectivityResult one = theta_surjectivity_probe(s, {0.0, 0.0}, {{1.0, 0.0}});
  EXPECT_TRUE(one.found);
}

TEST(Surjectivity, AxisCrossRankBound) {
  const RankBoundResult r = constrained_rank_bound(builtin_space("axis_cross"), {0.0, 0.0}, 2, 1);
  EXPECT_GT(r.constrained, 0);
  EXPECT_TRUE(r.holds) << r.max_sigma;
  EXPECT_LE(r.max_sigma, 1e-6);
}

TEST(Surjectivity, PastaMonotonicity) {
  const Vec zero{0.0, 0.0, 0.0};
  const std::vector<Vec> basis{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int r = 1; r <= 2; ++r) {
    const DiffSpace s = builtin_space("pasta", pasta_params(3, r));
    for (int k = 1; k <= 3; ++k) {
      const std::vector<Vec> targets(basis.begin(), basis.begin() + k);
      const SurjectivityResult res = theta_surjectivity_probe(s, zero, targets);
      EXPECT_EQ(res.found, k <= r) << "r=" << r << " k=" << k;
      if (res.found) EXPECT_TRUE(s.check_plot(*res.witness).is_plot);
    }
  }
}

TEST(HalfLine, TangentSpaces) {
  const DiffSpace s = builtin_space("half_line");
  const HalfLineResult at0 = half_line_tangent_probe(0.0, s.plots());
  EXPECT_EQ(at0.dimension, 0);
  EXPECT_FALSE(at0.vacuous);
  EXPECT_LE(at0.max_derivative[0], 1e-6);
  // t ↦ t² and t ↦ t⁴ are plots with non-vanishing higher derivatives at 0.
  EXPECT_NEAR(at0.max_derivative[1], 2.0, 1e-12);
  EXPECT_NEAR(at0.max_derivative[3], 24.0, 1e-12);
  EXPECT_FALSE(at0.flat_through_order_4);
  EXPECT_EQ(at0.non_flat_plots, (std::vector<std::string>{"square", "quartic"}));

  const HalfLineResult flat_only = half_line_tangent_probe(0.0, {s.plot("flat")});
  EXPECT_EQ(flat_only.dimension, 0);
  EXPECT_TRUE(flat_only.flat_through_order_4);

  const HalfLineResult at1 = half_line_tangent_probe(1.0, s.plots());
  EXPECT_EQ(at1.dimension, 1);
  ASSERT_TRUE(at1.witness.has_value());
  EXPECT_DOUBLE_EQ((*at1.witness)(Vec{0.5})[0], 1.5);

  const HalfLineResult empty = half_line_tangent_probe(0.0, {});
  EXPECT_EQ(empty.dimension, 0);
  EXPECT_TRUE(empty.vacuous);

  EXPECT_THROW((void)half_line_tangent_probe(0.0, {Plot{"id", map("id", 1, {"x1"})}}), CorpusViolation);
}

TEST(HalfLine, FirstDerivativesVanishAtMinimaOfRandomPlots) {
  // Property: any p = q² vanishes to first order where it vanishes.
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const double a = rng.uniform(-2, 2);
    const double b = rng.uniform(-2, 2);
    const std::string q = "(" + format_number(a) + "*x1+" + format_number(b) + "*x1^2)";
    const SmoothMap p("p", 1, {pow(parse_expression(q, 1), 2)});
    const HalfLineResult r = half_line_tangent_probe(0.0, {Plot{"p", p}});
    EXPECT_EQ(r.dimension, 0);
    EXPECT_LE(r.max_derivative[0], 1e-12);
  }
}

TEST(Retract, SquareRootAndSquare) {
  const DiffSpace half = builtin_space("half_line");
  const DiffSpace line = builtin_space("euclidean", pasta_params(1, 0));
  const RetractResult r = retract_check(half, line, map("sigma", 1, {"sqrt(x1)"}), map("pi", 1, {"x1^2"}));
  EXPECT_TRUE(r.pass) << r.witness;
  EXPECT_GT(r.points, 0);
  EXPECT_LE(r.worst_identity, 1e-9);

  const SmoothMap id = SmoothMap::identity(1);
  EXPECT_TRUE(retract_check(half, half, id, id).pass);

  // The identity of R does not land in the half-line.
  const RetractResult wrong = retract_check(half, line, map("i", 1, {"x1"}), map("r", 1, {"x1"}));
  EXPECT_FALSE(wrong.pass);
  EXPECT_NE(wrong.witness.find("r∘id"), std::string::npos) << wrong.witness;
}

TEST(Retract, CuspSqueeze) {
  const DiffSpace wedge = builtin_space("wedge");
  const DiffSpace cusp = builtin_space("cusp");
  const Domain interior(std::vector<Interval>{{0.0, HUGE_VAL}, {}});
  const SmoothMap phi = map("phi", 2, {"x1", "x1*sqrt(x1)*x2"}, interior);
  const SmoothMap inv = map("phi_inv", 2, {"x1", "x2/(x1*sqrt(x1))"}, interior);
  const RetractResult r = retract_check(wedge, cusp, phi, inv);
  EXPECT_TRUE(r.pass) << r.witness;
  EXPECT_GT(r.points, 10);
  EXPECT_GT(r.skipped, 0);
}

TEST(Group, Trivialization) {
  CheckConfig cfg;
  for (int n = 1; n <= 3; ++n) {
    const AxiomReport r = group_trivialization_check(n, cfg);
    EXPECT_TRUE(r.pass) << n << " " << r.max_residual << " " << r.witness;
    EXPECT_EQ(r.samples, 100);
  }
}

TEST(Group, ScalarCaseAndUnitLaw) {
  const SmoothMap m = matrix_multiplication(1);
  const TanVec phi = pushforward_T(m, TanVec{{3.0, 1.0}, {0.0, 0.5}});
  EXPECT_DOUBLE_EQ(phi.vel[0], 1.5);
  const SmoothMap m2 = matrix_multiplication(2);
  const Vec v{1, 2, 3, 4};
  const TanVec at_e = pushforward_T(m2, TanVec{{1, 0, 0, 1, 1, 0, 0, 1}, {0, 0, 0, 0, 1, 2, 3, 4}});
  EXPECT_EQ(at_e.vel, v);
}
