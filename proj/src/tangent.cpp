#include "tanflow/tangent.hpp"

#include <algorithm>
#include <stdexcept>

namespace tanflow {

namespace {

int max_order(std::initializer_list<const std::vector<Jet>*> groups) {
  int m = 0;
  for (const auto* g : groups) {
    for (const Jet& j : *g) m = std::max(m, j.order());
  }
  return m;
}

// Order m+k jet whose slice at high mask h (over tags m+1..m+k) is parts[h].
Jet assemble(std::span<const Jet> parts, int m, int k) {
  const std::size_t low = std::size_t{1} << m;
  std::vector<double> comps(low << k, 0.0);
  for (std::size_t h = 0; h < parts.size(); ++h) {
    const Jet p = parts[h].order() < m ? parts[h].lifted(m) : parts[h];
    for (std::size_t l = 0; l < low; ++l) comps[(h << m) | l] = p[static_cast<std::uint32_t>(l)];
  }
  return Jet::from_components(std::move(comps));
}

// Order m jet formed by the components at high mask h.
Jet slice(const Jet& j, int m, std::uint32_t h) {
  const std::size_t low = std::size_t{1} << m;
  std::vector<double> comps(low);
  for (std::size_t l = 0; l < low; ++l) comps[l] = j[static_cast<std::uint32_t>((h << m) | l)];
  return Jet::from_components(std::move(comps));
}

void check_dims(const SmoothMap& f, std::size_t n) {
  if (static_cast<int>(n) != f.arity_in()) {
    throw std::invalid_argument("tangent point of dimension " + std::to_string(n) + " passed to " + f.name() +
                                " of arity " + std::to_string(f.arity_in()));
  }
}

// Pushes `parts` (coordinate-major: parts[i][h]) through f with k new tags and
// returns the output slices out[j][h].
std::vector<std::vector<Jet>> push(const SmoothMap& f, const std::vector<std::vector<Jet>>& parts, int m, int k) {
  std::vector<Jet> args;
  args.reserve(parts.size());
  for (const auto& p : parts) args.push_back(assemble(p, m, k));
  std::vector<Jet> y = f.eval(args);
  std::vector<std::vector<Jet>> out(y.size());
  const std::uint32_t count = 1u << k;
  for (std::size_t j = 0; j < y.size(); ++j) {
    Jet yj = y[j].order() < m + k ? y[j].lifted(m + k) : y[j];
    for (std::uint32_t h = 0; h < count; ++h) out[j].push_back(slice(yj, m, h));
  }
  return out;
}

std::vector<Jet> to_jet_vec(const std::vector<double>& v) { return {v.begin(), v.end()}; }

std::vector<double> values(const std::vector<Jet>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const Jet& j : v) out.push_back(j.value());
  return out;
}

BasicTanVec<Jet> lift(const TanVec& xi) { return {to_jet_vec(xi.base), to_jet_vec(xi.vel)}; }
TanVec lower(const BasicTanVec<Jet>& xi) { return {values(xi.base), values(xi.vel)}; }

BasicTan2<Jet> lift(const Tan2& xi) {
  return {to_jet_vec(xi.base), to_jet_vec(xi.v0), to_jet_vec(xi.v1), to_jet_vec(xi.v01)};
}
Tan2 lower(const BasicTan2<Jet>& xi) { return {values(xi.base), values(xi.v0), values(xi.v1), values(xi.v01)}; }

// Directional derivative sum_i d_i f(u) * w_i at the symbolic point u.
Expr directional(const std::vector<Expr>& partials_at_u, const std::vector<Expr>& w) {
  Expr out(0.0);
  for (std::size_t i = 0; i < w.size(); ++i) out += partials_at_u[i] * w[i];
  return out;
}

}  // namespace

TanVec pushforward_T(const SmoothMap& f, const TanVec& xi) { return lower(pushforward_T(f, lift(xi))); }

BasicTanVec<Jet> pushforward_T(const SmoothMap& f, const BasicTanVec<Jet>& xi) {
  check_dims(f, xi.base.size());
  if (xi.vel.size() != xi.base.size()) throw std::invalid_argument("tangent vector dimension mismatch");
  const int m = max_order({&xi.base, &xi.vel});
  std::vector<std::vector<Jet>> parts;
  for (std::size_t i = 0; i < xi.base.size(); ++i) parts.push_back({xi.base[i], xi.vel[i]});
  const auto out = push(f, parts, m, 1);
  BasicTanVec<Jet> r;
  for (const auto& o : out) {
    r.base.push_back(o[0]);
    r.vel.push_back(o[1]);
  }
  return r;
}

BasicTanVec<Expr> pushforward_T(const SmoothMap& f, const BasicTanVec<Expr>& xi) {
  check_dims(f, xi.base.size());
  BasicTanVec<Expr> r;
  for (const Expr& fj : f.outputs()) {
    std::vector<Expr> partials;
    for (int i = 0; i < f.arity_in(); ++i) partials.push_back(fj.derivative(i).substitute(xi.base));
    r.base.push_back(fj.substitute(xi.base));
    r.vel.push_back(directional(partials, xi.vel));
  }
  return r;
}

Tan2 pushforward_T2(const SmoothMap& f, const Tan2& xi) { return lower(pushforward_T2(f, lift(xi))); }

BasicTan2<Jet> pushforward_T2(const SmoothMap& f, const BasicTan2<Jet>& xi) {
  check_dims(f, xi.base.size());
  const int m = max_order({&xi.base, &xi.v0, &xi.v1, &xi.v01});
  std::vector<std::vector<Jet>> parts;
  for (std::size_t i = 0; i < xi.base.size(); ++i) parts.push_back({xi.base[i], xi.v0[i], xi.v1[i], xi.v01[i]});
  const auto out = push(f, parts, m, 2);
  BasicTan2<Jet> r;
  for (const auto& o : out) {
    r.base.push_back(o[0]);
    r.v0.push_back(o[1]);
    r.v1.push_back(o[2]);
    r.v01.push_back(o[3]);
  }
  return r;
}

BasicTan2<Expr> pushforward_T2(const SmoothMap& f, const BasicTan2<Expr>& xi) {
  check_dims(f, xi.base.size());
  const int n = f.arity_in();
  BasicTan2<Expr> r;
  for (const Expr& fj : f.outputs()) {
    std::vector<Expr> partials;
    for (int i = 0; i < n; ++i) partials.push_back(fj.derivative(i));
    std::vector<Expr> at_u;
    for (const Expr& p : partials) at_u.push_back(p.substitute(xi.base));
    Expr hessian_term(0.0);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const Expr h = partials[static_cast<std::size_t>(a)].derivative(b);
        if (h.is_constant(0.0)) continue;
        hessian_term += h.substitute(xi.base) * xi.v0[static_cast<std::size_t>(a)] * xi.v1[static_cast<std::size_t>(b)];
      }
    }
    r.base.push_back(fj.substitute(xi.base));
    r.v0.push_back(directional(at_u, xi.v0));
    r.v1.push_back(directional(at_u, xi.v1));
    r.v01.push_back(directional(at_u, xi.v01) + hessian_term);
  }
  return r;
}

TanK pushforward_Tk(const SmoothMap& f, const TanK& xi) {
  BasicTanK<Jet> lifted{to_jet_vec(xi.base), {}};
  for (const auto& fib : xi.fibers) lifted.fibers.push_back(to_jet_vec(fib));
  const auto r = pushforward_Tk(f, lifted);
  TanK out{values(r.base), {}};
  for (const auto& fib : r.fibers) out.fibers.push_back(values(fib));
  return out;
}

BasicTanK<Jet> pushforward_Tk(const SmoothMap& f, const BasicTanK<Jet>& xi) {
  check_dims(f, xi.base.size());
  const int k = xi.k();
  if (k < 1) throw std::invalid_argument("pushforward_Tk needs at least one fiber");
  int m = max_order({&xi.base});
  for (const auto& fib : xi.fibers) {
    if (fib.size() != xi.base.size()) throw std::invalid_argument("fiber dimension mismatch");
    m = std::max(m, max_order({&fib}));
  }
  std::vector<std::vector<Jet>> parts;
  for (std::size_t i = 0; i < xi.base.size(); ++i) {
    std::vector<Jet> p(std::size_t{1} << k, Jet(0.0));
    p[0] = xi.base[i];
    for (int t = 0; t < k; ++t) p[std::size_t{1} << t] = xi.fibers[static_cast<std::size_t>(t)][i];
    parts.push_back(std::move(p));
  }
  const auto out = push(f, parts, m, k);
  BasicTanK<Jet> r;
  r.fibers.resize(static_cast<std::size_t>(k));
  for (const auto& o : out) {
    r.base.push_back(o[0]);
    for (int t = 0; t < k; ++t) r.fibers[static_cast<std::size_t>(t)].push_back(o[std::size_t{1} << t]);
  }
  return r;
}

SmoothMap tangent_map(const SmoothMap& f) {
  const int n = f.arity_in();
  BasicTanVec<Expr> sym;
  for (int i = 0; i < n; ++i) {
    sym.base.push_back(Expr::var(i));
    sym.vel.push_back(Expr::var(n + i));
  }
  const BasicTanVec<Expr> image = pushforward_T(f, sym);
  std::vector<Interval> box = f.domain().box();
  box.resize(static_cast<std::size_t>(2 * n));
  return SmoothMap("T" + f.name(), 2 * n, detail::concat(image.base, image.vel),
                   Domain(std::move(box), f.domain().predicates()));
}

Tan3 pushforward_T3(const SmoothMap& f, const Tan3& xi) { return tan3_from_jets(f.eval(to_jets(xi))); }

double kernel_gap(const Tan2& xi) {
  double gap = 0.0;
  for (double c : xi.v1) gap = std::max(gap, std::abs(c));
  return gap;
}

double kernel_gap(const BasicTan2<Jet>& xi) {
  double gap = 0.0;
  for (const Jet& c : xi.v1) gap = std::max(gap, detail::base_gap(c, Jet(0.0)));
  return gap;
}

double kernel_gap(const BasicTan2<Expr>& xi) {
  for (const Expr& c : xi.v1) {
    if (!c.is_constant(0.0)) return HUGE_VAL;
  }
  return 0.0;
}

std::vector<Jet> to_jets(const TanVec& xi) {
  std::vector<Jet> out;
  for (std::size_t i = 0; i < xi.base.size(); ++i) out.push_back(Jet::from_components({xi.base[i], xi.vel[i]}));
  return out;
}

std::vector<Jet> to_jets(const Tan2& xi) {
  std::vector<Jet> out;
  for (std::size_t i = 0; i < xi.base.size(); ++i) {
    out.push_back(Jet::from_components({xi.base[i], xi.v0[i], xi.v1[i], xi.v01[i]}));
  }
  return out;
}

std::vector<Jet> to_jets(const Tan3& xi) {
  std::vector<Jet> out;
  for (std::size_t i = 0; i < xi.c[0].size(); ++i) {
    std::vector<double> comps(8);
    for (std::size_t m = 0; m < 8; ++m) comps[m] = xi.c[m][i];
    out.push_back(Jet::from_components(std::move(comps)));
  }
  return out;
}

TanVec tanvec_from_jets(std::span<const Jet> x) {
  TanVec out;
  for (const Jet& j : x) {
    const Jet l = j.order() < 1 ? j.lifted(1) : j;
    out.base.push_back(l[0]);
    out.vel.push_back(l[1]);
  }
  return out;
}

Tan2 tan2_from_jets(std::span<const Jet> x) {
  Tan2 out;
  for (const Jet& j : x) {
    const Jet l = j.order() < 2 ? j.lifted(2) : j;
    out.base.push_back(l[0]);
    out.v0.push_back(l[1]);
    out.v1.push_back(l[2]);
    out.v01.push_back(l[3]);
  }
  return out;
}

Tan3 tan3_from_jets(std::span<const Jet> x) {
  Tan3 out;
  for (const Jet& j : x) {
    const Jet l = j.order() < 3 ? j.lifted(3) : j;
    for (std::uint32_t m = 0; m < 8; ++m) out.c[m].push_back(l[m]);
  }
  return out;
}

}  // namespace tanflow
