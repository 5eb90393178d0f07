#include <fstream>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "runner.hpp"
#include "tanflow/errors.hpp"

using namespace tanflow;
using namespace tanflow::cli;

namespace {

int emit(const SuiteReport& report, const RunConfig& cfg, bool json) {
  const std::string doc = render_json(report);
  if (!cfg.output_path.empty()) {
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + cfg.output_path + "'");
    out << doc;
  }
  std::cout << (json ? doc : render_text(report));
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tangent-structure checks on euclidean spaces and diffeological diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  RunConfig cfg;
  bool json = false;
  bool corrupt_tau = false;
  DiffeoRequest req;
  std::vector<double> point;

  app.add_option("--seed", cfg.seed, "random seed")->envname("TF_SEED");
  app.add_option("--tol", cfg.tolerance_abs, "absolute tolerance")->envname("TF_TOL");
  app.add_option("--tol-rel", cfg.tolerance_rel, "relative tolerance")->envname("TF_TOL_REL");
  app.add_option("--trials", cfg.trials, "random trials per check")->envname("TF_TRIALS");
  app.add_option("--budget", cfg.probe_budget, "probe budget (0: probe default)")->envname("TF_BUDGET");
  app.add_option("--corpus", cfg.corpus_paths, "corpus files (default: built-in corpus)")
      ->envname("TF_CORPUS")
      ->delimiter(',');
  app.add_option("--out", cfg.output_path, "write the JSON report here")->envname("TF_OUT");
  app.add_flag("--json", json, "print the JSON report instead of the summary")->envname("TF_JSON");

  CLI::App* axioms = app.add_subcommand("axioms", "tangent-structure axiom suite on the euclidean instance");
  axioms->add_flag("--corrupt-tau", corrupt_tau, "replace the symmetry τ by the identity (negative control)");
  app.add_subcommand("cartan", "Cartan calculus relations and the two-path differential");
  app.add_subcommand("bracket", "categorical vs coordinate bracket and the Jacobi identity");
  CLI::App* diffeo = app.add_subcommand("diffeo", "elasticity probes on a diffeological space");
  diffeo->add_option("space", req.space, "space name from the corpus, or a built-in")->required();
  diffeo->add_option("--probe", req.probe, "theta<k> | theta2-inj | tangent | retract | group | rank")->required();
  diffeo->add_option("--point", point, "point (comma separated)")->delimiter(',');
  diffeo->add_option("--plot", req.plot, "plot used by theta2-inj");
  diffeo->add_option("--k", req.k, "domain dimension for the rank probe");
  diffeo->add_option("--rank", req.rank, "rank bound for the rank probe (default k-1)");
  diffeo->add_option("--target", req.target, "retract: receiving space");
  diffeo->add_option("--inclusion", req.inclusion, "retract: inclusion components");
  diffeo->add_option("--retraction", req.retraction, "retract: retraction components");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (!point.empty()) req.point = point;

  try {
    if (axioms->parsed()) return emit(cmd_axioms(cfg, corrupt_tau), cfg, json);
    if (app.got_subcommand("cartan")) return emit(cmd_cartan(cfg), cfg, json);
    if (app.got_subcommand("bracket")) return emit(cmd_bracket(cfg), cfg, json);
    return emit(cmd_diffeo(cfg, req), cfg, json);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownSpace& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "check error: " << e.what() << "\n";
    return 1;
  }
}
