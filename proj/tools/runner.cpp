#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "tanflow/axioms.hpp"
#include "tanflow/cartan.hpp"
#include "tanflow/diffeology.hpp"
#include "tanflow/syntax.hpp"

namespace tanflow::cli {

using nlohmann::ordered_json;

namespace {

ordered_json strings(const std::vector<double>& v) {
  ordered_json out = ordered_json::array();
  for (double d : v) out.push_back(decimal(d));
  return out;
}

ordered_json map_json(const SmoothMap& f) {
  ordered_json out = ordered_json::array();
  for (const Expr& e : f.outputs()) out.push_back(to_string(e));
  return out;
}

ordered_json family_json(const PlotFamily& f) {
  return {{"degree", f.degree},
          {"grid_per_axis", f.grid.per_axis},
          {"grid_radius", decimal(f.grid.radius)},
          {"restarts", f.budget},
          {"max_iterations", f.max_iterations}};
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json corpus = ordered_json::array();
  for (const auto& p : cfg.corpus_paths) corpus.push_back(p);
  return {{"seed", cfg.seed},
          {"tolerance_abs", decimal(cfg.tolerance_abs)},
          {"tolerance_rel", decimal(cfg.tolerance_rel)},
          {"trials", cfg.trials},
          {"probe_budget", cfg.probe_budget},
          {"corpus", corpus.empty() ? ordered_json("default") : corpus}};
}

SuiteReport start(const std::string& command, const RunConfig& cfg) {
  if (cfg.trials < 1) throw UsageError("--trials must be at least 1");
  if (!(cfg.tolerance_abs > 0.0) || !(cfg.tolerance_rel > 0.0)) throw UsageError("tolerances must be positive");
  if (cfg.probe_budget < 0) throw UsageError("--budget must be non-negative");
  SuiteReport r;
  r.command = command;
  r.config = config_json(cfg);
  return r;
}

struct ResolvedSpace {
  SpaceDecl decl;
  DiffSpace space;
};

ResolvedSpace resolve_space(const Corpus& corpus, const std::string& name) {
  for (const SpaceDecl& d : corpus.spaces) {
    if (d.name == name) return {d, d.build()};
  }
  SpaceDecl d;
  d.name = name;
  d.builtin = name;
  return {d, builtin_space(name)};
}

Vec ambient_point(const DiffSpace& s, const DiffeoRequest& req) {
  Vec x = req.point ? *req.point : (s.base_point().empty() ? Vec(static_cast<std::size_t>(s.ambient_dim()), 0.0)
                                                            : s.base_point());
  if (static_cast<int>(x.size()) != s.ambient_dim()) {
    throw UsageError("--point needs " + std::to_string(s.ambient_dim()) + " coordinates");
  }
  return x;
}

PlotFamily family_for(const RunConfig& cfg) {
  PlotFamily f;
  if (cfg.probe_budget > 0) f.budget = cfg.probe_budget;
  return f;
}

void theta_probe(SuiteReport& rep, const RunConfig& cfg, const DiffSpace& s, const DiffeoRequest& req, int k) {
  const Vec x = ambient_point(s, req);
  if (k < 1 || k > s.ambient_dim()) throw UsageError("theta<k> needs 1 <= k <= ambient dimension");
  std::vector<Vec> targets;
  for (int i = 0; i < k; ++i) {
    Vec e(static_cast<std::size_t>(s.ambient_dim()), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    targets.push_back(std::move(e));
  }
  const PlotFamily family = family_for(cfg);
  const SurjectivityResult sr = theta_surjectivity_probe(s, x, targets, family, cfg.seed);
  ordered_json surj{{"name", "theta" + std::to_string(k) + "_surjectivity"},
                    {"space", s.name()},
                    {"point", strings(x)},
                    {"targets", ordered_json::array()},
                    {"status", sr.found ? "Found" : "NotFoundWithinBudget"},
                    {"best_residual", decimal(sr.best_residual)},
                    {"residual_curve", strings(sr.residual_curve)},
                    {"family", family_json(sr.family)},
                    {"grid_points", sr.grid_points}};
  for (const Vec& t : targets) surj["targets"].push_back(strings(t));
  if (sr.witness) surj["witness"] = map_json(*sr.witness);

  // A negative answer is backed by the rank bound: every plot through x that
  // meets the constraints has Jacobian rank below k.
  const RankBoundResult rb = constrained_rank_bound(s, x, k, k - 1, family, 24, cfg.seed);
  const bool consistent = sr.found || rb.holds;
  surj["pass"] = consistent;
  surj["rank_bound"] = ordered_json{{"rank", k - 1},
                                    {"candidates", rb.candidates},
                                    {"constrained", rb.constrained},
                                    {"max_sigma", decimal(rb.max_sigma)},
                                    {"bound", decimal(rb.bound)},
                                    {"holds", rb.holds}};
  if (!sr.found && rb.constrained == 0) surj["note"] = "no rank candidate met the constraints";
  rep.add(std::move(surj));
}

void rank_probe(SuiteReport& rep, const RunConfig& cfg, const DiffSpace& s, const DiffeoRequest& req) {
  const Vec x = ambient_point(s, req);
  const int rank = req.rank.value_or(req.k - 1);
  if (req.k < 1 || rank < 0) throw UsageError("rank probe needs k >= 1 and rank >= 0");
  const RankBoundResult rb = constrained_rank_bound(s, x, req.k, rank, family_for(cfg), 24, cfg.seed);
  rep.add(ordered_json{{"name", "constrained_rank_bound"},
                       {"space", s.name()},
                       {"pass", rb.holds},
                       {"point", strings(x)},
                       {"k", req.k},
                       {"rank", rank},
                       {"candidates", rb.candidates},
                       {"constrained", rb.constrained},
                       {"max_sigma", decimal(rb.max_sigma)},
                       {"bound", decimal(rb.bound)},
                       {"family", family_json(rb.family)}});
}

ordered_json chain_json(const std::vector<ChainStep>& chain) {
  ordered_json out = ordered_json::array();
  for (const ChainStep& c : chain) out.push_back(c.inverse ? c.generator + "^-1" : c.generator);
  return out;
}

ordered_json rep_json(const TangentRep& r) {
  ordered_json vs = ordered_json::array();
  for (const Vec& v : r.vectors) vs.push_back(strings(v));
  return {{"plot", r.plot}, {"point", strings(r.point)}, {"vectors", vs}};
}

ordered_json equivalence_json(const std::string& name, const TangentRep& a, const TangentRep& b,
                              const EquivalenceResult& e) {
  ordered_json out{{"name", name},
                   {"pass", e.verdict != EquivalenceResult::Verdict::Unknown},
                   {"verdict", to_string(e.verdict)},
                   {"a", rep_json(a)},
                   {"b", rep_json(b)},
                   {"explored", e.explored},
                   {"budget_exhausted", e.budget_exhausted}};
  if (e.verdict == EquivalenceResult::Verdict::Equivalent) out["chain"] = chain_json(e.chain);
  if (e.verdict == EquivalenceResult::Verdict::Separated) {
    out["certificate"] = e.certificate;
    out["value_a"] = decimal(e.value_a);
    out["value_b"] = decimal(e.value_b);
  }
  return out;
}

void injectivity_probe(SuiteReport& rep, const RunConfig& cfg, const DiffSpace& s, const DiffeoRequest& req) {
  if (s.plots().empty()) throw UsageError("space '" + s.name() + "' has no plots");
  const Plot& p = req.plot ? s.plot(*req.plot) : s.plots().front();
  const Vec u = req.point ? *req.point : Vec(static_cast<std::size_t>(p.dim()), 0.0);
  if (static_cast<int>(u.size()) != p.dim()) throw UsageError("--point needs " + std::to_string(p.dim()) + " coordinates");
  Vec e(static_cast<std::size_t>(p.dim()), 0.0);
  e[0] = 1.0;
  Vec minus = e;
  minus[0] = -1.0;
  const int budget = cfg.probe_budget > 0 ? cfg.probe_budget : 1000;

  const TangentRep up{p.name, u, {e}};
  const TangentRep down{p.name, u, {minus}};
  rep.add(equivalence_json("theta1_single_classes", up, down, equivalent_tangent(s, up, down, budget)));

  const TangentRep zeta{p.name, u, {e, e}};
  const TangentRep eta{p.name, u, {e, minus}};
  rep.add(equivalence_json("theta2_injectivity", zeta, eta, equivalent_tangent(s, zeta, eta, budget)));

  if (!s.certificates().empty()) {
    CheckConfig cc = cfg.check_config();
    rep.add(certificate_soundness(s, cc, std::min(cfg.trials, 50)));
  }
}

void tangent_probe(SuiteReport& rep, const DiffSpace& s, const DiffeoRequest& req) {
  if (s.ambient_dim() != 1) throw UsageError("tangent probe needs a space in R1");
  for (const Plot& p : s.plots()) {
    if (p.dim() != 1) throw UsageError("tangent probe needs plots from R1");
  }
  if (req.point && req.point->size() != 1) throw UsageError("--point needs 1 coordinate");
  const double x1 = req.point ? req.point->front() : 1.0;
  const HalfLineResult at0 = half_line_tangent_probe(0.0, s.plots());
  const HalfLineResult at1 = half_line_tangent_probe(x1, s.plots());

  ordered_json nonflat = ordered_json::array();
  for (const auto& n : at0.non_flat_plots) nonflat.push_back(n);
  rep.add(ordered_json{{"name", "tangent_fiber_at_0"},
                       {"pass", at0.dimension == 0},
                       {"dimension", at0.dimension},
                       {"vacuous", at0.vacuous},
                       {"preimages", at0.preimages}});
  const double worst =
      at0.max_derivative.empty() ? 0.0 : *std::max_element(at0.max_derivative.begin(), at0.max_derivative.end());
  rep.add(ordered_json{{"name", "flatness_through_order_4"},
                       {"pass", at0.flat_through_order_4},
                       {"residual", decimal(worst)},
                       {"tolerance", decimal(1e-6)},
                       {"max_derivative", strings(at0.max_derivative)},
                       {"non_flat_plots", nonflat}});
  ordered_json fiber{{"name", "tangent_fiber_at_x"},
                     {"pass", at1.dimension == (x1 > 0.0 ? 1 : 0)},
                     {"x", decimal(x1)},
                     {"dimension", at1.dimension}};
  if (at1.witness) fiber["witness"] = map_json(*at1.witness);
  rep.add(std::move(fiber));
}

SmoothMap map_argument(const std::string& name, const std::string& text, int n, int m) {
  const Corpus c = parse_corpus("map " + name + ": R" + std::to_string(n) + " -> R" + std::to_string(m) + " = " + text);
  return c.maps.front();
}

void retract_probe(SuiteReport& rep, const Corpus& corpus, const ResolvedSpace& rs, const DiffeoRequest& req) {
  const DiffSpace& a = rs.space;
  std::optional<DiffSpace> b;
  std::optional<SmoothMap> i;
  std::optional<SmoothMap> r;
  if (req.target) b = resolve_space(corpus, *req.target).space;
  if (!req.target && !req.inclusion && !req.retraction) {
    if (rs.decl.builtin == "half_line") {
      SpaceParams p;
      p.n = 1;
      b = builtin_space("euclidean", p);
      i = map_argument("sigma", "sqrt(x1)", 1, 1);
      r = map_argument("pi", "x1^2", 1, 1);
    } else if (rs.decl.builtin == "wedge") {
      b = builtin_space("cusp");
      i = map_argument("squeeze", "x1, x1*sqrt(x1)*x2 where x1 > 0", 2, 2);
      r = map_argument("stretch", "x1, x2/(x1*sqrt(x1)) where x1 > 0", 2, 2);
    }
  }
  if (!b) throw UsageError("retract probe needs --target, --inclusion and --retraction for '" + a.name() + "'");
  if (!i) {
    if (!req.inclusion || !req.retraction) throw UsageError("retract probe needs --inclusion and --retraction");
    i = map_argument("i", *req.inclusion, a.ambient_dim(), b->ambient_dim());
    r = map_argument("r", *req.retraction, b->ambient_dim(), a.ambient_dim());
  }
  const RetractResult res = retract_check(a, *b, *i, *r);
  ordered_json out{{"name", "smooth_retract"},
                   {"pass", res.pass},
                   {"space", a.name()},
                   {"target", b->name()},
                   {"inclusion", map_json(*i)},
                   {"retraction", map_json(*r)},
                   {"worst_identity", decimal(res.worst_identity)},
                   {"worst_plot", decimal(res.worst_plot)},
                   {"points", res.points},
                   {"skipped", res.skipped},
                   {"non_differentiable", res.non_differentiable}};
  if (!res.witness.empty()) out["witness"] = res.witness;
  rep.add(std::move(out));
}

void group_probe(SuiteReport& rep, const RunConfig& cfg, const ResolvedSpace& rs) {
  if (rs.decl.builtin != "gl") throw UsageError("group probe needs a gl(n) space");
  const int n = static_cast<int>(std::lround(std::sqrt(rs.space.ambient_dim())));
  AxiomReport r = group_trivialization_check(n, cfg.check_config());
  rep.add(r);
}

}  // namespace

CheckConfig RunConfig::check_config() const { return CheckConfig{seed, trials, tolerance_abs, tolerance_rel}; }

void SuiteReport::add(ordered_json check) {
  if (!check.value("pass", false)) pass = false;
  checks.push_back(std::move(check));
}

void SuiteReport::add(const AxiomReport& r) {
  ordered_json j{{"name", r.axiom},
                 {"pass", r.pass},
                 {"residual", decimal(r.max_residual)},
                 {"tolerance", decimal(r.tolerance)},
                 {"samples", r.samples}};
  if (!r.witness.empty()) j["witness"] = r.witness;
  if (!r.note.empty()) j["note"] = r.note;
  add(std::move(j));
}

Corpus load_corpus(const RunConfig& cfg) {
  if (cfg.corpus_paths.empty()) return parse_corpus(default_corpus_text());
  Corpus out = parse_corpus_file(cfg.corpus_paths.front());
  for (std::size_t i = 1; i < cfg.corpus_paths.size(); ++i) out.merge(parse_corpus_file(cfg.corpus_paths[i]));
  return out;
}

SuiteReport cmd_axioms(const RunConfig& cfg, bool corrupt_tau) {
  SuiteReport rep = start("axioms", cfg);
  const Corpus corpus = load_corpus(cfg);
  const std::vector<SmoothMap> maps = corpus.polynomial_maps();
  if (maps.empty()) throw ParseError("corpus declares no polynomial maps", 1, 1);
  std::unique_ptr<TangentOps> ops;
  if (corrupt_tau) {
    ops = std::make_unique<CorruptedTauOps>();
  } else {
    ops = std::make_unique<EuclideanTangentOps>();
  }
  rep.config["instance"] = ops->name();
  for (const AxiomReport& r : run_axiom_suite(*ops, maps, cfg.check_config())) rep.add(r);
  return rep;
}

SuiteReport cmd_cartan(const RunConfig& cfg) {
  SuiteReport rep = start("cartan", cfg);
  const Corpus corpus = load_corpus(cfg);
  if (corpus.forms.empty() || corpus.fields.empty()) throw ParseError("corpus declares no forms or no fields", 1, 1);
  const CartanCorpus cc = corpus.cartan();
  for (const AxiomReport& r : cartan_suite(cc, cfg.check_config())) rep.add(r);
  rep.add(differential_two_path_check(cc, cfg.check_config()));
  return rep;
}

SuiteReport cmd_bracket(const RunConfig& cfg) {
  SuiteReport rep = start("bracket", cfg);
  const Corpus corpus = load_corpus(cfg);
  if (corpus.fields.size() < 2) throw ParseError("corpus declares fewer than two fields", 1, 1);
  for (const AxiomReport& r : bracket_suite(corpus.fields, cfg.check_config())) rep.add(r);
  rep.add(jacobi_check(corpus.fields, cfg.check_config()));
  return rep;
}

SuiteReport cmd_diffeo(const RunConfig& cfg, const DiffeoRequest& req) {
  SuiteReport rep = start("diffeo", cfg);
  const Corpus corpus = load_corpus(cfg);
  const ResolvedSpace rs = resolve_space(corpus, req.space);
  rep.config["space"] = req.space;
  rep.config["probe"] = req.probe;
  const std::string& p = req.probe;
  if (p.size() > 5 && p.starts_with("theta") && std::all_of(p.begin() + 5, p.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    theta_probe(rep, cfg, rs.space, req, std::stoi(p.substr(5)));
  } else if (p == "theta2-inj") {
    injectivity_probe(rep, cfg, rs.space, req);
  } else if (p == "tangent") {
    tangent_probe(rep, rs.space, req);
  } else if (p == "retract") {
    retract_probe(rep, corpus, rs, req);
  } else if (p == "group") {
    group_probe(rep, cfg, rs);
  } else if (p == "rank") {
    rank_probe(rep, cfg, rs.space, req);
  } else {
    throw UsageError("unknown probe '" + p + "'");
  }
  return rep;
}

std::string decimal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_number(v);
}

std::string render_json(const SuiteReport& report) {
  const ordered_json doc{{"tool", "tanflow"},
                         {"version", kVersion},
                         {"command", report.command},
                         {"config", report.config},
                         {"checks", report.checks},
                         {"pass", report.pass}};
  return doc.dump(2) + "\n";
}

std::string render_text(const SuiteReport& report) {
  std::ostringstream out;
  for (const auto& c : report.checks) {
    out << (c.value("pass", false) ? "PASS " : "FAIL ") << c.value("name", std::string{});
    if (c.contains("residual")) out << "  residual " << c["residual"].get<std::string>();
    if (c.contains("status")) out << "  " << c["status"].get<std::string>();
    if (c.contains("verdict")) out << "  " << c["verdict"].get<std::string>();
    if (c.contains("dimension")) out << "  dimension " << c["dimension"].get<int>();
    out << "\n";
  }
  out << (report.pass ? "overall: pass" : "overall: FAIL") << "\n";
  return out.str();
}

}  // namespace tanflow::cli
