// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "runner.hpp"
#include "tanflow/axioms.hpp"
#include "tanflow/cartan.hpp"
#include "tanflow/diffeology.hpp"

using namespace tanflow;

namespace {

int failures = 0;

void line(bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

void guarded(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    line(false, name, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  const Corpus corpus = parse_corpus(cli::default_corpus_text());
  const CheckConfig cfg{42, 100, 1e-9, 1e-9};

  guarded("axiom_suite", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const EuclideanTangentOps ops;
    double worst = 0.0;
    bool all = braid_permutations_agree();
    int checks = 0;
    for (const AxiomReport& r : run_axiom_suite(ops, corpus.polynomial_maps(), cfg)) {
      worst = std::max(worst, r.max_residual);
      all = all && r.pass && r.samples >= 100;
      ++checks;
    }
    const double secs = seconds_since(t0);
    line(all && worst <= 1e-9 && secs <= 10.0, "axiom_suite",
         std::to_string(checks) + " diagrams, max residual " + sci(worst) + " (<= 1e-9), " + sci(secs) + " s (<= 10)");
  });

  guarded("negative_control", [&] {
    const CorruptedTauOps ops;
    int failed = 0;
    std::string names;
    for (const AxiomReport& r : run_axiom_suite(ops, corpus.polynomial_maps(), cfg)) {
      if (!r.pass && r.max_residual >= 0.1) {
        ++failed;
        names += (names.empty() ? "" : ",") + r.axiom;
      }
    }
    line(failed >= 2, "negative_control", std::to_string(failed) + " checks fail with residual >= 0.1: " + names);
  });

  guarded("bracket_equivalence", [&] {
    int pairs = 0;
    std::set<int> dims;
    double poly = 0.0;
    double trans = 0.0;
    double kernel = 0.0;
    const auto& fields = corpus.fields;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      for (std::size_t j = i + 1; j < fields.size(); ++j) {
        const VectorField& v = fields[i];
        const VectorField& w = fields[j];
        if (v.dim() != w.dim()) continue;
        ++pairs;
        dims.insert(v.dim());
        const bool polynomial = v.is_polynomial() && w.is_polynomial();
        const VectorField coord = bracket_coordinate(v, w);
        Rng rng(derive_seed(cfg.seed, "acceptance:" + v.name() + "," + w.name()));
        const Domain dom = v.domain().intersect(w.domain());
        for (int p = 0; p < 200; ++p) {
          const Vec x = sample_point(dom, rng);
          const BracketSample s = bracket_categorical_at(v, w, x);
          const Vec c = coord(x);
          double dev = 0.0;
          for (std::size_t k = 0; k < c.size(); ++k) dev = std::max(dev, std::abs(s.value[k] - c[k]));
          (polynomial ? poly : trans) = std::max(polynomial ? poly : trans, dev);
          kernel = std::max(kernel, s.kernel_gap);
        }
      }
    }
    line(pairs >= 10 && dims == std::set<int>{1, 2, 3} && poly <= 1e-9 && trans <= 1e-7 && kernel <= 1e-10,
         "bracket_equivalence",
         std::to_string(pairs) + " pairs on R1-R3 x 200 points, polynomial " + sci(poly) + " (<= 1e-9), transcendental " +
             sci(trans) + " (<= 1e-7), kernel " + sci(kernel) + " (<= 1e-10)");
  });

  guarded("jacobi", [&] {
    const AxiomReport r = jacobi_check(corpus.fields, cfg);
    line(r.pass && r.samples >= 100 && r.max_residual <= 1e-8, "jacobi",
         std::to_string(r.samples) + " triples, residual " + sci(r.max_residual) + " (<= 1e-8)");
  });

  guarded("cartan_suite", [&] {
    CartanCorpus cc = corpus.cartan();
    bool all = true;
    double worst = 0.0;
    double exact = -1.0;
    std::string failed;
    for (const AxiomReport& r : cartan_suite(cc, cfg)) {
      if (r.axiom == "dd_exact_polynomial") exact = r.max_residual;
      worst = std::max(worst, r.max_residual);
      if (!r.pass || r.max_residual > 1e-8) {
        all = false;
        failed += " " + r.axiom;
      }
    }
    std::set<int> dims;
    for (const auto& f : cc.forms) dims.insert(f.dim());
    line(all && exact == 0.0 && dims.contains(2) && dims.contains(3), "cartan_suite",
         "forms on R2 and R3, max residual " + sci(worst) + " (<= 1e-8), polynomial d^2 residual " + sci(exact) +
             " (== 0)" + failed);
  });

  guarded("df_two_path", [&] {
    const AxiomReport r = differential_two_path_check(corpus.cartan(), cfg);
    line(r.pass && r.max_residual <= 1e-9, "df_two_path", "residual " + sci(r.max_residual) + " (<= 1e-9)");
  });

  guarded("axis_cross", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const DiffSpace s = builtin_space("axis_cross");
    const Vec x{0.0, 0.0};
    const SurjectivityResult sr = theta_surjectivity_probe(s, x, {{1.0, 0.0}, {0.0, 1.0}});
    const RankBoundResult rb = constrained_rank_bound(s, x, 2, 1);
    const double secs = seconds_since(t0);
    line(!sr.found && sr.family.degree == 6 && rb.constrained > 0 && rb.holds && secs <= 60.0, "axis_cross",
         std::string(sr.found ? "Found" : "NotFoundWithinBudget") + " (degree " + std::to_string(sr.family.degree) +
             ", " + std::to_string(sr.grid_points) + " grid points, best residual " + sci(sr.best_residual) +
             "), sigma_2 max " + sci(rb.max_sigma) + " over " + std::to_string(rb.constrained) +
             " constrained candidates (<= 1e-6), " + sci(secs) + " s (<= 60)");
  });

  guarded("folded_line", [&] {
    const DiffSpace s = builtin_space("folded_line");
    const std::string p = s.plots().front().name;
    const EquivalenceResult single = equivalent_tangent(s, {p, {0.0}, {{1.0}}}, {p, {0.0}, {{-1.0}}});
    const EquivalenceResult pair = equivalent_tangent(s, {p, {0.0}, {{1.0}, {1.0}}}, {p, {0.0}, {{1.0}, {-1.0}}});
    const bool via_h = single.chain.size() == 1 && single.chain.front().generator == "h";
    line(single.verdict == EquivalenceResult::Verdict::Equivalent && via_h &&
             pair.verdict == EquivalenceResult::Verdict::Separated && pair.certificate == fiberwise_sum_certificate().name,
         "folded_line",
         "(0,+1) ~ (0,-1) " + to_string(single.verdict) + " via h; zeta/eta " + to_string(pair.verdict) + " by " +
             pair.certificate + " (" + sci(pair.value_a) + " vs " + sci(pair.value_b) + ")");
  });

  guarded("half_line", [&] {
    const DiffSpace s = builtin_space("half_line");
    const HalfLineResult at0 = half_line_tangent_probe(0.0, s.plots());
    const HalfLineResult at1 = half_line_tangent_probe(1.0, s.plots());
    const double worst = *std::max_element(at0.max_derivative.begin(), at0.max_derivative.end());
    std::string nonflat;
    for (const auto& n : at0.non_flat_plots) nonflat += " " + n;
    line(at0.dimension == 0 && at0.flat_through_order_4 && worst <= 1e-6 && at1.dimension == 1, "half_line",
         "T0 dimension " + std::to_string(at0.dimension) + ", T1 dimension " + std::to_string(at1.dimension) +
             ", max derivative through order 4 at 0: " + sci(worst) + " (<= 1e-6)" +
             (nonflat.empty() ? "" : ", not flat:" + nonflat));
  });

  guarded("pasta", [&] {
    bool all = true;
    std::string grid;
    for (int r = 1; r <= 2; ++r) {
      SpaceParams params;
      params.n = 3;
      params.r = r;
      const DiffSpace s = builtin_space("pasta", params);
      for (int k = 1; k <= 3; ++k) {
        std::vector<Vec> targets;
        for (int i = 0; i < k; ++i) {
          Vec e(3, 0.0);
          e[static_cast<std::size_t>(i)] = 1.0;
          targets.push_back(e);
        }
        const bool found = theta_surjectivity_probe(s, Vec(3, 0.0), targets).found;
        all = all && found == (k <= r);
        grid += " r" + std::to_string(r) + "k" + std::to_string(k) + "=" + (found ? "found" : "none");
      }
    }
    line(all, "pasta", "found exactly when k <= r:" + grid);
  });

  guarded("gl_trivialization", [&] {
    bool all = true;
    std::string detail;
    for (int n = 1; n <= 3; ++n) {
      const AxiomReport r = group_trivialization_check(n, cfg);
      all = all && r.pass && r.samples >= 100 && r.max_residual <= 1e-9;
      detail += " n=" + std::to_string(n) + ":" + sci(r.max_residual);
    }
    line(all, "gl_trivialization", "round-trip residual (<= 1e-9, 100 trials)" + detail);
  });

  guarded("determinism", [&] {
    cli::RunConfig rc;
    cli::DiffeoRequest cross{"axis_cross", "theta2"};
    cli::DiffeoRequest folded{"folded_line", "theta2-inj"};
    const std::vector<std::function<cli::SuiteReport()>> runs{
        [&] { return cli::cmd_axioms(rc); }, [&] { return cli::cmd_cartan(rc); },
        [&] { return cli::cmd_bracket(rc); }, [&] { return cli::cmd_diffeo(rc, cross); },
        [&] { return cli::cmd_diffeo(rc, folded); }};
    bool same = true;
    for (const auto& f : runs) same = same && cli::render_json(f()) == cli::render_json(f());
    line(same, "determinism", "axioms, cartan, bracket and two diffeo reports byte-identical across repeated runs");
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
