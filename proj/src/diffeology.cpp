#include "tanflow/diffeology.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "tanflow/errors.hpp"
#include "tanflow/rng.hpp"
#include "tanflow/tangent.hpp"

namespace tanflow {

namespace {

constexpr double kPlotTolerance = 1e-9;
constexpr double kMatchTolerance = 1e-9;
constexpr std::size_t kGridCap = 4096;

double max_abs_diff(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return HUGE_VAL;
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}

Vec unit(int n, int i) {
  Vec e(static_cast<std::size_t>(n), 0.0);
  e[static_cast<std::size_t>(i)] = 1.0;
  return e;
}

// Jacobian of p at u, one jet pushforward per coordinate direction.
Eigen::MatrixXd jacobian(const SmoothMap& p, const Vec& u) {
  Eigen::MatrixXd J(p.arity_out(), p.arity_in());
  for (int l = 0; l < p.arity_in(); ++l) {
    const Vec col = pushforward_T(p, TanVec{u, unit(p.arity_in(), l)}).vel;
    for (int i = 0; i < p.arity_out(); ++i) J(i, l) = col[static_cast<std::size_t>(i)];
  }
  return J;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& J) {
  if (J.size() == 0) return Eigen::VectorXd();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues();
}

double rank_excess(const Eigen::MatrixXd& J, int r) {
  const Eigen::VectorXd s = singular_values(J);
  return r < s.size() ? s(r) : 0.0;
}

std::vector<Expr> variables(int n) {
  std::vector<Expr> x;
  for (int i = 0; i < n; ++i) x.push_back(Expr::var(i));
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Presentations
// ---------------------------------------------------------------------------

std::vector<Vec> domain_grid(const Domain& domain, GridSpec grid) {
  const int d = domain.dim();
  std::size_t per_axis = static_cast<std::size_t>(std::max(grid.per_axis, 1));
  while (per_axis > 2 && std::pow(static_cast<double>(per_axis), d) > static_cast<double>(kGridCap)) --per_axis;
  std::vector<Vec> axes;
  for (int i = 0; i < d; ++i) {
    const Interval& iv = domain.box()[static_cast<std::size_t>(i)];
    const double lo = std::max(-grid.radius, iv.lo);
    const double hi = std::min(grid.radius, iv.hi);
    Vec axis;
    if (per_axis == 1 || lo >= hi) {
      axis.push_back(lo >= hi ? lo : 0.5 * (lo + hi));
    } else {
      for (std::size_t j = 0; j < per_axis; ++j) {
        axis.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(per_axis - 1));
      }
    }
    axes.push_back(std::move(axis));
  }
  std::vector<Vec> out;
  Vec cur(static_cast<std::size_t>(d));
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    for (int i = 0; i < d; ++i) cur[static_cast<std::size_t>(i)] = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
    if (domain.contains(cur)) out.push_back(cur);
    int i = d - 1;
    while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == axes[static_cast<std::size_t>(i)].size()) {
      idx[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

DiffSpace::DiffSpace(std::string name, int ambient_dim) : name_(std::move(name)), ambient_(ambient_dim) {
  if (ambient_dim < 1) throw std::invalid_argument("ambient dimension must be positive");
  base_point_.assign(static_cast<std::size_t>(ambient_dim), 0.0);
}

DiffSpace& DiffSpace::constrain(Constraint::Kind kind, Expr g) {
  if (g.max_var_index() >= ambient_) throw std::invalid_argument("constraint uses a variable beyond the ambient space");
  constraints_.push_back({kind, std::move(g)});
  return *this;
}

DiffSpace& DiffSpace::restrict_rank(int r) {
  if (r < 0) throw std::invalid_argument("negative rank bound");
  rank_bound_ = r;
  return *this;
}

DiffSpace& DiffSpace::set_normal_form(std::function<Vec(const Vec&)> nf, std::string description) {
  nf_ = std::move(nf);
  nf_description_ = std::move(description);
  return *this;
}

DiffSpace& DiffSpace::add_plot(Plot p) {
  if (p.map.arity_out() != ambient_) throw std::invalid_argument("plot " + p.name + " does not land in the ambient space");
  for (const Plot& q : plots_) {
    if (q.name == p.name) throw std::invalid_argument("duplicate plot " + p.name);
  }
  plots_.push_back(std::move(p));
  return *this;
}

DiffSpace& DiffSpace::add_identification(Identification id) {
  const Plot& p = plot(id.from);
  const Plot& q = plot(id.to);
  if (id.h.arity_in() != p.dim() || id.h.arity_out() != q.dim()) {
    throw std::invalid_argument("identification " + id.name + " does not map dom " + p.name + " to dom " + q.name);
  }
  if (id.inverse && (id.inverse->arity_in() != q.dim() || id.inverse->arity_out() != p.dim())) {
    throw std::invalid_argument("inverse of identification " + id.name + " has the wrong shape");
  }
  idents_.push_back(std::move(id));
  return *this;
}

DiffSpace& DiffSpace::add_certificate(InvariantCertificate c) {
  certificates_.push_back(std::move(c));
  return *this;
}

DiffSpace& DiffSpace::set_base_point(Vec x) {
  if (static_cast<int>(x.size()) != ambient_) throw std::invalid_argument("base point of the wrong dimension");
  base_point_ = std::move(x);
  return *this;
}

const Plot& DiffSpace::plot(const std::string& name) const {
  for (const Plot& p : plots_) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("space " + name_ + " has no plot " + name);
}

Vec DiffSpace::normal_form(const Vec& x) const { return nf_ ? nf_(x) : x; }

Vec DiffSpace::image(const std::string& plot_name, const Vec& u) const { return normal_form(plot(plot_name).map(u)); }

double DiffSpace::violation(const Vec& x) const {
  double worst = 0.0;
  for (const Constraint& c : constraints_) {
    double g = 0.0;
    try {
      g = c.g.eval(x);
    } catch (const Error&) {
      return HUGE_VAL;
    }
    switch (c.kind) {
      case Constraint::Kind::Equal:
        worst = std::max(worst, std::abs(g));
        break;
      case Constraint::Kind::NonNegative:
        worst = std::max(worst, -g);
        break;
      case Constraint::Kind::Positive:
        if (!(g > 0.0)) worst = std::max(worst, 1.0 - g);
        break;
    }
  }
  return std::isnan(worst) ? HUGE_VAL : worst;
}

PlotVerdict DiffSpace::check_plot(const SmoothMap& p, GridSpec grid) const {
  PlotVerdict v;
  if (p.arity_out() != ambient_) {
    v.is_plot = false;
    v.worst = HUGE_VAL;
    v.reason = "lands in R^" + std::to_string(p.arity_out()) + ", not R^" + std::to_string(ambient_);
    return v;
  }
  auto note = [&](double amount, const Vec& u, const std::string& what) {
    if (amount > v.worst) v.worst = amount;
    if (amount > kPlotTolerance && v.is_plot) {
      v.is_plot = false;
      v.reason = what + " at u = " + format_vec(u);
    }
  };
  for (const Vec& u : domain_grid(p.domain(), grid)) {
    try {
      note(violation(p(u)), u, "constraint violated");
      if (rank_bound_) note(rank_excess(jacobian(p, u), *rank_bound_), u, "rank exceeds " + std::to_string(*rank_bound_));
    } catch (const Error& e) {
      note(HUGE_VAL, u, std::string("evaluation failed (") + e.what() + ")");
    }
  }
  return v;
}

void DiffSpace::validate(GridSpec grid) const {
  for (const Plot& p : plots_) {
    const PlotVerdict v = check_plot(p.map, grid);
    if (!v.is_plot) throw CorpusViolation("plot " + p.name + " of " + name_ + " is not a plot: " + v.reason);
  }
  for (const Identification& id : idents_) {
    const Plot& p = plot(id.from);
    const Plot& q = plot(id.to);
    for (const Vec& u : domain_grid(p.map.domain().intersect(id.h.domain()), grid)) {
      const Vec hu = id.h(u);
      if (!q.map.domain().contains(hu) || max_abs_diff(image(q.name, hu), image(p.name, u)) > kPlotTolerance) {
        throw CorpusViolation("identification " + id.name + " does not commute over the carrier at u = " + format_vec(u));
      }
      if (id.inverse && max_abs_diff((*id.inverse)(hu), u) > kPlotTolerance) {
        throw CorpusViolation("inverse of identification " + id.name + " fails at u = " + format_vec(u));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Built-in spaces
// ---------------------------------------------------------------------------

namespace {

Expr x(int i) { return Expr::var(i - 1); }

SmoothMap plot_map(const std::string& name, int n, std::vector<Expr> outs, Domain domain = {}) {
  return SmoothMap(name, n, std::move(outs), std::move(domain));
}

DiffSpace euclidean(int n) {
  DiffSpace s("euclidean(" + std::to_string(n) + ")", n);
  s.add_plot({"id", SmoothMap::identity(n)});
  return s;
}

DiffSpace axis_cross() {
  DiffSpace s("axis_cross", 2);
  s.constrain(Constraint::Kind::Equal, x(1) * x(2));
  s.add_plot({"x_axis", plot_map("x_axis", 1, {x(1), Expr(0.0)})});
  s.add_plot({"y_axis", plot_map("y_axis", 1, {Expr(0.0), x(1)})});
  s.add_plot({"bend", plot_map("bend", 1, {flat(x(1)), flat(-x(1))})});
  return s;
}

DiffSpace folded_line() {
  DiffSpace s("folded_line", 1);
  s.set_normal_form([](const Vec& v) { return Vec{std::abs(v[0])}; }, "x ~ -x");
  s.add_plot({"quot", SmoothMap::identity(1).renamed("quot")});
  const SmoothMap h = plot_map("h", 1, {-x(1)});
  s.add_identification({"h", "quot", "quot", h, h});
  s.add_certificate(fiberwise_sum_certificate());
  return s;
}

DiffSpace half_line() {
  DiffSpace s("half_line", 1);
  s.constrain(Constraint::Kind::NonNegative, x(1));
  s.add_plot({"square", plot_map("square", 1, {pow(x(1), 2)})});
  s.add_plot({"quartic", plot_map("quartic", 1, {pow(x(1), 4)})});
  s.add_plot({"flat", plot_map("flat", 1, {flat(x(1))})});
  return s;
}

DiffSpace corner(int n, int k) {
  if (k < 0 || k > n) throw std::invalid_argument("corner needs 0 <= k <= n");
  DiffSpace s("corner(" + std::to_string(n) + "," + std::to_string(k) + ")", n);
  std::vector<Expr> outs;
  for (int i = 1; i <= n; ++i) {
    if (i <= k) s.constrain(Constraint::Kind::NonNegative, x(i));
    outs.push_back(i <= k ? pow(x(i), 2) : x(i));
  }
  s.add_plot({"fold", plot_map("fold", n, std::move(outs))});
  return s;
}

DiffSpace wedge() {
  DiffSpace s("wedge", 2);
  s.constrain(Constraint::Kind::NonNegative, x(1) - x(2));
  s.constrain(Constraint::Kind::NonNegative, x(1) + x(2));
  s.add_plot({"fold", plot_map("fold", 2, {pow(x(1), 2) + pow(x(2), 2), pow(x(1), 2) - pow(x(2), 2)})});
  return s;
}

DiffSpace cusp(const Expr& f) {
  if (f.max_var_index() > 0) throw std::invalid_argument("cusp squeeze function must depend on x1 only");
  DiffSpace s("cusp", 2);
  const Expr bound = x(1) * f;
  s.constrain(Constraint::Kind::NonNegative, x(1));
  s.constrain(Constraint::Kind::NonNegative, bound - x(2));
  s.constrain(Constraint::Kind::NonNegative, bound + x(2));
  const Expr r = pow(x(1), 2) + pow(x(2), 2);
  const std::vector<Expr> at_r{r};
  s.add_plot({"squeezed_fold", plot_map("squeezed_fold", 2, {r, f.substitute(at_r) * (pow(x(1), 2) - pow(x(2), 2))})});
  return s;
}

DiffSpace pasta(int n, int r) {
  if (n < 1 || r < 0) throw std::invalid_argument("pasta needs n >= 1 and r >= 0");
  DiffSpace s("pasta(" + std::to_string(n) + "," + std::to_string(r) + ")", n);
  s.restrict_rank(r);
  if (r == 0) {
    s.add_plot({"point", plot_map("point", 1, std::vector<Expr>(static_cast<std::size_t>(n), Expr(0.0)))});
    return s;
  }
  std::vector<Expr> moment;
  for (int i = 1; i <= n; ++i) moment.push_back(pow(x(1), i));
  s.add_plot({"moment", plot_map("moment", 1, std::move(moment))});
  if (r >= 2) {
    const int m = std::min(r, n);
    std::vector<Expr> sheet;
    for (int i = 1; i <= n; ++i) sheet.push_back(i <= m ? x(i) : Expr(0.0));
    s.add_plot({"sheet", plot_map("sheet", m, std::move(sheet))});
  }
  return s;
}

Expr matrix_determinant(int n) {
  std::vector<std::vector<Expr>> m(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(i)].push_back(Expr::var(i * n + j));
  }
  return determinant(m);
}

DiffSpace gl(int n) {
  if (n < 1) throw std::invalid_argument("gl needs n >= 1");
  DiffSpace s("gl(" + std::to_string(n) + ")", n * n);
  const Expr det = matrix_determinant(n);
  s.constrain(Constraint::Kind::Positive, pow(det, 2));
  const Domain open(std::vector<Interval>(static_cast<std::size_t>(n * n)), {pow(det, 2)});
  s.add_plot({"id", SmoothMap("id", n * n, variables(n * n), open)});
  Vec e(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i * n + i)] = 1.0;
  s.set_base_point(e);
  return s;
}

}  // namespace

InvariantCertificate fiberwise_sum_certificate() {
  return {"fiberwise_sum_norm",
          "generators act on vectors by Dh = ±1 and the tangent map of a morphism of plots preserves sums",
          [](const DiffSpace&, const TangentRep& rep) {
            if (rep.vectors.empty()) return 0.0;
            Vec sum(rep.vectors.front().size(), 0.0);
            for (const Vec& w : rep.vectors) {
              for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += w[i];
            }
            double sq = 0.0;
            for (double s : sum) sq += s * s;
            return std::sqrt(sq);
          }};
}

DiffSpace builtin_space(const std::string& name, const SpaceParams& params) {
  if (name == "euclidean") return euclidean(params.n);
  if (name == "axis_cross") return axis_cross();
  if (name == "folded_line") return folded_line();
  if (name == "half_line") return half_line();
  if (name == "corner") return corner(params.n, params.k);
  if (name == "wedge") return wedge();
  if (name == "cusp") return cusp(params.f.value_or(x(1) * sqrt(x(1))));
  if (name == "pasta") return pasta(params.n, params.r);
  if (name == "gl") return gl(params.n);
  throw UnknownSpace("unknown space '" + name + "'");
}

std::vector<std::string> builtin_space_names() {
  return {"euclidean", "axis_cross", "folded_line", "half_line", "corner", "wedge", "cusp", "pasta", "gl"};
}

// ---------------------------------------------------------------------------
// Tangent classes
// ---------------------------------------------------------------------------

std::string to_string(EquivalenceResult::Verdict v) {
  switch (v) {
    case EquivalenceResult::Verdict::Equivalent:
      return "Equivalent";
    case EquivalenceResult::Verdict::Separated:
      return "Separated";
    case EquivalenceResult::Verdict::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

namespace {

void require_valid(const DiffSpace& space, const TangentRep& rep) {
  const Plot& p = space.plot(rep.plot);
  if (static_cast<int>(rep.point.size()) != p.dim() || !p.map.domain().contains(rep.point)) {
    throw std::invalid_argument("representative point is not in the domain of plot " + p.name);
  }
  for (const Vec& w : rep.vectors) {
    if (static_cast<int>(w.size()) != p.dim()) throw std::invalid_argument("tangent vector of the wrong dimension");
  }
}

bool same_rep(const TangentRep& a, const TangentRep& b) {
  if (a.plot != b.plot || a.vectors.size() != b.vectors.size()) return false;
  if (max_abs_diff(a.point, b.point) > kMatchTolerance) return false;
  for (std::size_t i = 0; i < a.vectors.size(); ++i) {
    if (max_abs_diff(a.vectors[i], b.vectors[i]) > kMatchTolerance) return false;
  }
  return true;
}

const Identification& generator(const DiffSpace& space, const std::string& name) {
  for (const Identification& id : space.identifications()) {
    if (id.name == name) return id;
  }
  throw std::invalid_argument("space " + space.name() + " has no identification " + name);
}

}  // namespace

TangentRep apply_step(const DiffSpace& space, const TangentRep& rep, const ChainStep& step) {
  const Identification& id = generator(space, step.generator);
  if (step.inverse && !id.inverse) throw std::invalid_argument("identification " + id.name + " has no inverse");
  const SmoothMap& h = step.inverse ? *id.inverse : id.h;
  const std::string& source = step.inverse ? id.to : id.from;
  if (rep.plot != source) throw std::invalid_argument("chain step " + id.name + " does not start at plot " + rep.plot);
  TangentRep out;
  out.plot = step.inverse ? id.from : id.to;
  out.point = h(rep.point);
  for (const Vec& w : rep.vectors) out.vectors.push_back(pushforward_T(h, TanVec{rep.point, w}).vel);
  return out;
}

EquivalenceResult equivalent_tangent(const DiffSpace& space, const TangentRep& a, const TangentRep& b, int budget) {
  require_valid(space, a);
  require_valid(space, b);
  EquivalenceResult res;
  struct Node {
    TangentRep rep;
    std::vector<ChainStep> chain;
  };
  std::deque<Node> queue{{a, {}}};
  std::vector<TangentRep> seen{a};
  while (!queue.empty()) {
    if (res.explored >= budget) {
      res.budget_exhausted = true;
      break;
    }
    Node node = std::move(queue.front());
    queue.pop_front();
    ++res.explored;
    if (same_rep(node.rep, b)) {
      res.verdict = EquivalenceResult::Verdict::Equivalent;
      res.chain = std::move(node.chain);
      return res;
    }
    for (const Identification& id : space.identifications()) {
      for (bool inverse : {false, true}) {
        if (inverse && !id.inverse) continue;
        const SmoothMap& h = inverse ? *id.inverse : id.h;
        if ((inverse ? id.to : id.from) != node.rep.plot || !h.domain().contains(node.rep.point)) continue;
        const ChainStep step{id.name, inverse};
        TangentRep next = apply_step(space, node.rep, step);
        if (std::any_of(seen.begin(), seen.end(), [&](const TangentRep& s) { return same_rep(s, next); })) continue;
        seen.push_back(next);
        std::vector<ChainStep> chain = node.chain;
        chain.push_back(step);
        queue.push_back({std::move(next), std::move(chain)});
      }
    }
  }
  // Not reached: look for an invariant that tells the two apart.
  auto separated = [&](std::string name, double va, double vb) {
    res.verdict = EquivalenceResult::Verdict::Separated;
    res.certificate = std::move(name);
    res.value_a = va;
    res.value_b = vb;
    return res;
  };
  if (a.vectors.size() != b.vectors.size()) {
    return separated("tuple_size", static_cast<double>(a.vectors.size()), static_cast<double>(b.vectors.size()));
  }
  const Vec base_a = space.image(a.plot, a.point);
  const Vec base_b = space.image(b.plot, b.point);
  if (max_abs_diff(base_a, base_b) > kMatchTolerance) {
    return separated("base_point", base_a.empty() ? 0.0 : base_a[0], base_b.empty() ? 0.0 : base_b[0]);
  }
  for (const InvariantCertificate& c : space.certificates()) {
    const double va = c.value(space, a);
    const double vb = c.value(space, b);
    if (std::abs(va - vb) > kMatchTolerance) return separated(c.name, va, vb);
  }
  return res;
}

AxiomReport certificate_soundness(const DiffSpace& space, const CheckConfig& cfg, int samples) {
  ResidualTracker t("certificate_soundness:" + space.name(), kMatchTolerance, 0.0);
  Rng rng(derive_seed(cfg.seed, "certificates:" + space.name()));
  for (const InvariantCertificate& c : space.certificates()) {
    for (const Identification& id : space.identifications()) {
      const Plot& p = space.plot(id.from);
      const Domain dom = p.map.domain().intersect(id.h.domain());
      for (int s = 0; s < samples; ++s) {
        for (std::size_t k = 1; k <= 2; ++k) {
          TangentRep rep{p.name, sample_point(dom, rng, {1.0, 1e-3}), {}};
          for (std::size_t j = 0; j < k; ++j) rep.vectors.push_back(sample_vector(p.dim(), rng));
          const TangentRep moved = apply_step(space, rep, {id.name, false});
          t.sample();
          t.record(std::abs(c.value(space, rep) - c.value(space, moved)),
                   [&] { return c.name + " along " + id.name + " at " + format_vec(rep.point); });
        }
      }
    }
  }
  return t.report(std::to_string(space.certificates().size()) + " certificates, " +
                  std::to_string(space.identifications().size()) + " generators");
}

// ---------------------------------------------------------------------------
// Plot search
// ---------------------------------------------------------------------------

namespace {

using Monomial = std::vector<int>;

std::vector<Monomial> monomials(int k, int lo, int hi) {
  std::vector<Monomial> out;
  for (int deg = lo; deg <= hi; ++deg) {
    Monomial e(static_cast<std::size_t>(k), 0);
    // Compositions of deg into k parts, in reverse lexicographic order.
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == k - 1) {
        e[static_cast<std::size_t>(pos)] = left;
        out.push_back(e);
        return;
      }
      for (int a = left; a >= 0; --a) {
        e[static_cast<std::size_t>(pos)] = a;
        rec(pos + 1, left - a);
      }
    };
    if (k > 0) rec(0, deg);
  }
  return out;
}

double monomial_value(const Monomial& e, const Vec& t) {
  double v = 1.0;
  for (std::size_t l = 0; l < e.size(); ++l) v *= ipow(t[l], e[l]);
  return v;
}

double monomial_partial(const Monomial& e, const Vec& t, std::size_t l) {
  if (e[l] == 0) return 0.0;
  double v = static_cast<double>(e[l]);
  for (std::size_t m = 0; m < e.size(); ++m) v *= ipow(t[m], m == l ? e[m] - 1 : e[m]);
  return v;
}

// p(t) = x + Σ_fixed c t^α + Σ_free θ t^α, θ laid out monomial-major.
class PlotFit : public Eigen::DenseFunctor<double> {
 public:
  PlotFit(const DiffSpace& space, Vec x, int k, std::vector<Monomial> fixed, std::vector<Vec> fixed_coeffs,
          std::vector<Monomial> free, std::vector<Vec> grid, bool normalize)
      : DenseFunctor(static_cast<int>(free.size()) * space.ambient_dim(),
                     rows_needed(space, k, free, grid, normalize)),
        space_(space),
        x_(std::move(x)),
        k_(k),
        n_(space.ambient_dim()),
        fixed_(std::move(fixed)),
        fixed_coeffs_(std::move(fixed_coeffs)),
        free_(std::move(free)),
        grid_(std::move(grid)),
        normalize_(normalize) {
    for (const Constraint& c : space.constraints()) {
      std::vector<Expr> grad;
      for (int i = 0; i < n_; ++i) grad.push_back(c.g.derivative(i));
      grads_.push_back(std::move(grad));
    }
  }

  int operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& fvec) const {
    evaluate(theta, fvec, nullptr);
    return 0;
  }

  int df(const Eigen::VectorXd& theta, Eigen::MatrixXd& fjac) const {
    Eigen::VectorXd f(values());
    evaluate(theta, f, &fjac);
    return 0;
  }

  // Largest constraint or rank residual, ignoring the normalization row.
  [[nodiscard]] double constraint_residual(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd f(values());
    evaluate(theta, f, nullptr);
    const Eigen::Index rows = constraint_rows();
    return rows == 0 ? 0.0 : f.head(rows).cwiseAbs().maxCoeff();
  }

  [[nodiscard]] Eigen::MatrixXd jacobian_at_zero(const Eigen::VectorXd& theta) const {
    return derivative(theta, Vec(static_cast<std::size_t>(k_), 0.0));
  }

  [[nodiscard]] SmoothMap to_map(const Eigen::VectorXd& theta, const std::string& name) const {
    std::vector<Expr> outs;
    for (int i = 0; i < n_; ++i) {
      Expr e(x_[static_cast<std::size_t>(i)]);
      auto add = [&](const Monomial& m, double c) {
        if (c == 0.0) return;
        Expr term(c);
        for (std::size_t l = 0; l < m.size(); ++l) {
          if (m[l] > 0) term = term * pow(Expr::var(static_cast<int>(l)), m[l]);
        }
        e = e + term;
      };
      for (std::size_t m = 0; m < fixed_.size(); ++m) add(fixed_[m], fixed_coeffs_[m][static_cast<std::size_t>(i)]);
      for (std::size_t m = 0; m < free_.size(); ++m) add(free_[m], theta(param(m, i)));
      outs.push_back(e);
    }
    return SmoothMap(name, k_, std::move(outs));
  }

 private:
  static int rows_needed(const DiffSpace& space, int k, const std::vector<Monomial>& free,
                         const std::vector<Vec>& grid, bool normalize) {
    const int per_point = static_cast<int>(space.constraints().size()) + rank_rows(space, k);
    const int rows = per_point * static_cast<int>(grid.size()) + (normalize ? 1 : 0);
    return std::max(rows, static_cast<int>(free.size()) * space.ambient_dim());
  }

  static int rank_rows(const DiffSpace& space, int k) {
    if (!space.rank_bound()) return 0;
    return std::max(0, std::min(space.ambient_dim(), k) - *space.rank_bound());
  }

  [[nodiscard]] Eigen::Index constraint_rows() const {
    return static_cast<Eigen::Index>((space_.constraints().size() + static_cast<std::size_t>(rank_rows(space_, k_))) *
                                     grid_.size());
  }

  [[nodiscard]] Eigen::Index param(std::size_t m, int i) const {
    return static_cast<Eigen::Index>(m) * n_ + i;
  }

  [[nodiscard]] Vec point(const Eigen::VectorXd& theta, const Vec& t) const {
    Vec y = x_;
    for (std::size_t m = 0; m < fixed_.size(); ++m) {
      const double b = monomial_value(fixed_[m], t);
      for (int i = 0; i < n_; ++i) y[static_cast<std::size_t>(i)] += fixed_coeffs_[m][static_cast<std::size_t>(i)] * b;
    }
    for (std::size_t m = 0; m < free_.size(); ++m) {
      const double b = monomial_value(free_[m], t);
      for (int i = 0; i < n_; ++i) y[static_cast<std::size_t>(i)] += theta(param(m, i)) * b;
    }
    return y;
  }

  [[nodiscard]] Eigen::MatrixXd derivative(const Eigen::VectorXd& theta, const Vec& t) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_, k_);
    for (std::size_t l = 0; l < static_cast<std::size_t>(k_); ++l) {
      for (std::size_t m = 0; m < fixed_.size(); ++m) {
        const double b = monomial_partial(fixed_[m], t, l);
        for (int i = 0; i < n_; ++i) J(i, static_cast<Eigen::Index>(l)) += fixed_coeffs_[m][static_cast<std::size_t>(i)] * b;
      }
      for (std::size_t m = 0; m < free_.size(); ++m) {
        const double b = monomial_partial(free_[m], t, l);
        for (int i = 0; i < n_; ++i) J(i, static_cast<Eigen::Index>(l)) += theta(param(m, i)) * b;
      }
    }
    return J;
  }

  void evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd& f, Eigen::MatrixXd* jac) const {
    f.setZero(values());
    if (jac != nullptr) jac->setZero(values(), inputs());
    Eigen::Index row = 0;
    const int rr = rank_rows(space_, k_);
    for (const Vec& t : grid_) {
      const Vec y = point(theta, t);
      for (std::size_t c = 0; c < space_.constraints().size(); ++c, ++row) {
        const Constraint& con = space_.constraints()[c];
        double g = 0.0;
        try {
          g = con.g.eval(y);
        } catch (const Error&) {
          f(row) = 1.0;
          continue;
        }
        const bool active = con.kind == Constraint::Kind::Equal || g < 0.0;
        if (!active) continue;
        f(row) = g;
        if (jac == nullptr) continue;
        for (int i = 0; i < n_; ++i) {
          const double dg = grads_[c][static_cast<std::size_t>(i)].eval(y);
          for (std::size_t m = 0; m < free_.size(); ++m) (*jac)(row, param(m, i)) = dg * monomial_value(free_[m], t);
        }
      }
      if (rr > 0) {
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(derivative(theta, t), Eigen::ComputeFullU | Eigen::ComputeFullV);
        for (int s = *space_.rank_bound(); s < *space_.rank_bound() + rr; ++s, ++row) {
          f(row) = svd.singularValues()(s);
          if (jac == nullptr) continue;
          for (std::size_t m = 0; m < free_.size(); ++m) {
            double dv = 0.0;
            for (int l = 0; l < k_; ++l) dv += monomial_partial(free_[m], t, static_cast<std::size_t>(l)) * svd.matrixV()(l, s);
            for (int i = 0; i < n_; ++i) (*jac)(row, param(m, i)) = svd.matrixU()(i, s) * dv;
          }
        }
      }
    }
    if (normalize_) {
      double sq = 0.0;
      for (std::size_t m = 0; m < free_.size(); ++m) {
        const int deg = std::accumulate(free_[m].begin(), free_[m].end(), 0);
        if (deg != 1) continue;
        for (int i = 0; i < n_; ++i) {
          const double c = theta(param(m, i));
          sq += c * c;
          if (jac != nullptr) (*jac)(row, param(m, i)) = 2.0 * c;
        }
      }
      f(row) = sq - 1.0;
    }
  }

  const DiffSpace& space_;
  Vec x_;
  int k_;
  int n_;
  std::vector<Monomial> fixed_;
  std::vector<Vec> fixed_coeffs_;
  std::vector<Monomial> free_;
  std::vector<Vec> grid_;
  bool normalize_;
  std::vector<std::vector<Expr>> grads_;
};

PlotFamily resolved(PlotFamily family, int k) {
  if (family.grid.per_axis <= 0) family.grid.per_axis = k <= 2 ? 13 : (k == 3 ? 7 : 5);
  if (family.degree == 0) family.degree = k <= 2 ? 6 : 3;
  if (family.degree < 1) throw std::invalid_argument("plot family degree must be at least 1");
  return family;
}

Eigen::VectorXd solve(PlotFit& fit, Eigen::VectorXd theta, int max_iterations) {
  if (theta.size() == 0) return theta;
  Eigen::LevenbergMarquardt<PlotFit> lm(fit);
  lm.setMaxfev(max_iterations);
  lm.setXtol(1e-14);
  lm.setFtol(1e-14);
  lm.setGtol(0.0);
  lm.minimize(theta);
  return theta;
}

}  // namespace

SurjectivityResult theta_surjectivity_probe(const DiffSpace& space, const Vec& x, const std::vector<Vec>& targets,
                                            PlotFamily family, std::uint64_t seed) {
  const int k = static_cast<int>(targets.size());
  if (k < 1) throw std::invalid_argument("surjectivity probe needs at least one target");
  for (const Vec& t : targets) {
    if (static_cast<int>(t.size()) != space.ambient_dim()) throw std::invalid_argument("target of the wrong dimension");
  }
  SurjectivityResult res;
  res.family = resolved(family, k);
  const std::vector<Vec> grid = domain_grid(Domain(k), res.family.grid);
  res.grid_points = static_cast<int>(grid.size());
  std::vector<Monomial> linear;
  for (int l = 0; l < k; ++l) {
    Monomial e(static_cast<std::size_t>(k), 0);
    e[static_cast<std::size_t>(l)] = 1;
    linear.push_back(std::move(e));
  }
  PlotFit fit(space, x, k, linear, targets, monomials(k, 2, res.family.degree), grid, false);
  Rng rng(derive_seed(seed, "theta:" + space.name()));
  res.best_residual = HUGE_VAL;
  for (int attempt = 0; attempt < std::max(res.family.budget, 1); ++attempt) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(fit.inputs());
    if (attempt > 0) {
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.uniform(-0.5, 0.5);
    }
    theta = solve(fit, theta, res.family.max_iterations);
    const double r = fit.constraint_residual(theta);
    res.best_residual = std::min(res.best_residual, r);
    res.residual_curve.push_back(res.best_residual);
    if (r <= kPlotTolerance) {
      SmoothMap witness = fit.to_map(theta, "witness");
      if (space.check_plot(witness, res.family.grid).is_plot) {
        res.found = true;
        res.witness = std::move(witness);
        break;
      }
    }
  }
  return res;
}

RankBoundResult constrained_rank_bound(const DiffSpace& space, const Vec& x, int k, int rank, PlotFamily family,
                                       int candidates, std::uint64_t seed) {
  RankBoundResult res;
  res.family = resolved(family, k);
  const std::vector<Vec> grid = domain_grid(Domain(k), res.family.grid);
  PlotFit fit(space, x, k, {}, {}, monomials(k, 1, res.family.degree), grid, true);
  Rng rng(derive_seed(seed, "rank:" + space.name()));
  for (int c = 0; c < candidates; ++c) {
    Eigen::VectorXd theta(fit.inputs());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.uniform(-1.0, 1.0);
    theta = solve(fit, theta, res.family.max_iterations);
    ++res.candidates;
    if (fit.constraint_residual(theta) > kPlotTolerance) continue;
    ++res.constrained;
    const Eigen::VectorXd s = singular_values(fit.jacobian_at_zero(theta));
    const double sigma = rank < s.size() ? s(rank) : 0.0;
    res.max_sigma = std::max(res.max_sigma, sigma);
  }
  res.holds = res.max_sigma <= res.bound;
  return res;
}

// ---------------------------------------------------------------------------
// Half-line, retracts, groups
// ---------------------------------------------------------------------------

HalfLineResult half_line_tangent_probe(double x, const std::vector<Plot>& corpus, GridSpec grid) {
  if (!(x >= 0.0)) throw std::invalid_argument("half-line probe needs x >= 0");
  const DiffSpace space = builtin_space("half_line");
  HalfLineResult res;
  res.x = x;
  res.max_derivative.assign(4, 0.0);
  for (const Plot& p : corpus) {
    const PlotVerdict v = space.check_plot(p.map, grid);
    if (!v.is_plot) throw CorpusViolation("corpus member " + p.name + " is not a plot of the half-line: " + v.reason);
  }
  if (x > 0.0) {
    Domain near(std::vector<Interval>{{-x, HUGE_VAL}});
    SmoothMap path("witness", 1, {Expr(x) + Expr::var(0)}, near);
    const double speed = pushforward_T(path, TanVec{{0.0}, {1.0}}).vel[0];
    res.dimension = space.check_plot(path, grid).is_plot && speed != 0.0 ? 1 : 0;
    res.witness = std::move(path);
    return res;
  }
  for (const Plot& p : corpus) {
    bool flat = true;
    for (const Vec& u : domain_grid(p.map.domain(), grid)) {
      if (std::abs(p.map(u)[0] - x) > 1e-12) continue;
      ++res.preimages;
      for (int dir = 0; dir < p.dim(); ++dir) {
        // All four tags seeded along one direction: mask 2^m - 1 is the m-th derivative.
        std::vector<Jet> args;
        for (int l = 0; l < p.dim(); ++l) {
          const double s = l == dir ? 1.0 : 0.0;
          const double seeds[4] = {s, s, s, s};
          args.push_back(Jet::seeded(u[static_cast<std::size_t>(l)], seeds));
        }
        const Jet y = p.map.eval(args)[0];
        for (int m = 1; m <= 4; ++m) {
          const double d = std::abs(y[(1u << m) - 1u]);
          res.max_derivative[static_cast<std::size_t>(m - 1)] = std::max(res.max_derivative[static_cast<std::size_t>(m - 1)], d);
          if (d > 1e-6) flat = false;
        }
      }
    }
    if (!flat) res.non_flat_plots.push_back(p.name);
  }
  res.vacuous = res.preimages == 0;
  res.dimension = res.max_derivative[0] > 1e-6 ? 1 : 0;
  res.flat_through_order_4 = res.non_flat_plots.empty();
  return res;
}

RetractResult retract_check(const DiffSpace& a, const DiffSpace& b, const SmoothMap& i, const SmoothMap& r,
                            GridSpec grid) {
  if (i.arity_in() != a.ambient_dim() || i.arity_out() != b.ambient_dim() || r.arity_in() != b.ambient_dim() ||
      r.arity_out() != a.ambient_dim()) {
    throw std::invalid_argument("retract maps do not match the ambient dimensions");
  }
  RetractResult res;
  auto fail = [&](const std::string& what) {
    if (res.pass) res.witness = what;
    res.pass = false;
  };
  for (const Plot& p : a.plots()) {
    for (const Vec& u : domain_grid(p.map.domain(), grid)) {
      const Vec pt = p.map(u);
      if (!i.domain().contains(pt)) {
        ++res.skipped;
        continue;
      }
      const Vec ipt = i(pt);
      if (!r.domain().contains(ipt)) {
        ++res.skipped;
        continue;
      }
      ++res.points;
      const double err = max_abs_diff(a.normal_form(r(ipt)), a.normal_form(pt));
      res.worst_identity = std::max(res.worst_identity, err);
      if (err > kPlotTolerance) fail("r(i(a)) != a at a = " + format_vec(pt));
    }
  }
  auto through = [&](const DiffSpace& src, const DiffSpace& dst, const SmoothMap& f, const char* label) {
    for (const Plot& p : src.plots()) {
      const SmoothMap composite = f.compose(p.map);
      const PlotVerdict v = dst.check_plot(composite, grid);
      res.worst_plot = std::max(res.worst_plot, v.worst);
      if (!v.is_plot) fail(std::string(label) + "∘" + p.name + ": " + v.reason);
      for (const Vec& u : domain_grid(composite.domain(), grid)) {
        try {
          (void)pushforward_T(composite, TanVec{u, unit(composite.arity_in(), 0)});
        } catch (const Error&) {
          ++res.non_differentiable;
        }
      }
    }
  };
  through(a, b, i, "i");
  through(b, a, r, "r");
  return res;
}

SmoothMap matrix_multiplication(int n) {
  std::vector<Expr> out;
  const int nn = n * n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Expr e(0.0);
      for (int k = 0; k < n; ++k) e = e + Expr::var(i * n + k) * Expr::var(nn + k * n + j);
      out.push_back(e);
    }
  }
  return SmoothMap("m", 2 * nn, std::move(out));
}

AxiomReport group_trivialization_check(int n, const CheckConfig& cfg) {
  if (n < 1) throw std::invalid_argument("group trivialization needs n >= 1");
  const int nn = n * n;
  const SmoothMap m = matrix_multiplication(n);
  ResidualTracker t("gl" + std::to_string(n) + "_trivialization", cfg.tol_abs, cfg.tol_rel);
  Rng rng(derive_seed(cfg.seed, "gl" + std::to_string(n)));
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  auto flat_of = [](const Mat& a) { return Vec(a.data(), a.data() + a.size()); };
  auto concat = [](Vec a, const Vec& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const Vec zero(static_cast<std::size_t>(nn), 0.0);
  const Vec e = flat_of(Mat::Identity(n, n));
  // φ(g, v) = Tm(0_g, v_e) and T L_h at g as a pushforward of m.
  auto left = [&](const Vec& h, const Vec& g, const Vec& v) {
    return pushforward_T(m, TanVec{concat(h, g), concat(zero, v)}).vel;
  };
  auto sample_group = [&]() {
    for (int attempt = 0; attempt < 100; ++attempt) {
      Mat g(n, n);
      for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1.0, 1.0);
      const Eigen::FullPivLU<Mat> lu(g);
      const Eigen::JacobiSVD<Mat> svd(g);
      const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
      if (lu.isInvertible() && cond < 1e3) return g;
    }
    throw SingularMatrix("could not sample a well-conditioned matrix");
  };
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const Mat g = sample_group();
    const Vec gv = flat_of(g);
    const Vec ginv = flat_of(g.inverse());
    const Vec v = sample_vector(nn, rng);
    const Vec w = sample_vector(nn, rng);
    const auto at = [&] { return "g = " + format_vec(gv); };
    t.sample();
    const Vec phi = left(gv, e, v);
    t.compare(left(ginv, gv, phi), v, at);
    t.compare(left(gv, e, left(ginv, gv, w)), w, at);
    const Eigen::Map<const Mat> vm(v.data(), n, n);
    t.compare(phi, flat_of(g * vm), at);
    t.compare(left(e, e, v), v, at);
    // λ^⊥: the class of t ↦ t a at 0 is a itself.
    std::vector<Expr> ray;
    for (double a : v) ray.push_back(Expr(a) * Expr::var(0));
    t.compare(pushforward_T(SmoothMap("ray", 1, std::move(ray)), TanVec{{0.0}, {1.0}}).vel, v, at);
  }
  return t.report("round trips φ⁻¹φ and φφ⁻¹, φ(g,v) = g·v, unit law and the ray t ↦ ta");
}

}  // namespace tanflow
