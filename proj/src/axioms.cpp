#include "tanflow/axioms.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "tanflow/errors.hpp"
#include "tanflow/rng.hpp"

namespace tanflow {

// ---------------------------------------------------------------------------
// Euclidean instance
// ---------------------------------------------------------------------------

TanVec EuclideanTangentOps::pushforward_T(const SmoothMap& f, const TanVec& xi) const {
  return tanflow::pushforward_T(f, xi);
}
Tan2 EuclideanTangentOps::pushforward_T2(const SmoothMap& f, const Tan2& xi) const {
  return tanflow::pushforward_T2(f, xi);
}
TanK EuclideanTangentOps::pushforward_Tk(const SmoothMap& f, const TanK& xi) const {
  return tanflow::pushforward_Tk(f, xi);
}
Vec EuclideanTangentOps::pi(const TanVec& xi) const { return nt_pi(xi); }
TanVec EuclideanTangentOps::zero(const Vec& u) const { return nt_zero(u); }
TanVec EuclideanTangentOps::add(const TanK& xi) const { return nt_add(xi); }
Tan2 EuclideanTangentOps::lambda(const TanVec& xi) const { return nt_lambda(xi); }
Tan2 EuclideanTangentOps::tau(const Tan2& xi) const { return nt_tau(xi); }
TanVec EuclideanTangentOps::kappa(double r, const TanVec& xi) const { return nt_kappa(r, xi); }
Tan2 EuclideanTangentOps::lambda2(const TanK& xi) const { return nt_lambda2(xi); }
TanK EuclideanTangentOps::lambda2_inverse(const Tan2& xi) const { return nt_lambda2_inverse(xi); }
TanK EuclideanTangentOps::nu(const TanVec& xi, int n) const { return nu_shuffle(xi, n); }
TanVec EuclideanTangentOps::nu_inverse(const TanK& xi) const { return nu_unshuffle(xi); }
TanVec EuclideanTangentOps::proj_piT(const Tan2& xi) const { return tanflow::proj_piT(xi); }
TanVec EuclideanTangentOps::proj_Tpi(const Tan2& xi) const { return tanflow::proj_Tpi(xi); }

// ---------------------------------------------------------------------------
// Whiskered maps
// ---------------------------------------------------------------------------

namespace {

using detail::concat;
using detail::segment;

std::pair<Vec, Vec> halves(const Vec& v) {
  const std::size_t n = v.size() / 2;
  return {segment(v, 0, n), segment(v, n, n)};
}

Tan2 lower_half(const Tan3& x) { return {x.c[0], x.c[1], x.c[2], x.c[3]}; }
Tan2 upper_half(const Tan3& x) { return {x.c[4], x.c[5], x.c[6], x.c[7]}; }

Tan3 from_halves(const Tan2& lo, const Tan2& hi) {
  Tan3 out;
  out.c[0] = lo.base;
  out.c[1] = lo.v0;
  out.c[2] = lo.v1;
  out.c[3] = lo.v01;
  out.c[4] = hi.base;
  out.c[5] = hi.v0;
  out.c[6] = hi.v1;
  out.c[7] = hi.v01;
  return out;
}

// T²(TU) view of T³U: coordinates of TU are the pairs (mask, mask | 1).
Tan2 doubled(const Tan3& x) {
  return {concat(x.c[0], x.c[1]), concat(x.c[2], x.c[3]), concat(x.c[4], x.c[5]), concat(x.c[6], x.c[7])};
}

Tan3 undoubled(const Tan2& d) {
  Tan3 out;
  std::tie(out.c[0], out.c[1]) = halves(d.base);
  std::tie(out.c[2], out.c[3]) = halves(d.v0);
  std::tie(out.c[4], out.c[5]) = halves(d.v1);
  std::tie(out.c[6], out.c[7]) = halves(d.v01);
  return out;
}

}  // namespace

Tan3 tau_T(const TangentOps& ops, const Tan3& xi) { return undoubled(ops.tau(doubled(xi))); }

Tan3 T_tau(const TangentOps& ops, const Tan3& xi) {
  return from_halves(ops.tau(lower_half(xi)), ops.tau(upper_half(xi)));
}

Tan3 lambda_T(const TangentOps& ops, const Tan2& xi) {
  return undoubled(ops.lambda(as_tangent_of_tangent(xi)));
}

Tan3 T_lambda(const TangentOps& ops, const Tan2& xi) {
  return from_halves(ops.lambda(TanVec{xi.base, xi.v0}), ops.lambda(TanVec{xi.v1, xi.v01}));
}

Tan2 kappa_T(const TangentOps& ops, double r, const Tan2& xi) {
  return from_tangent_of_tangent(ops.kappa(r, as_tangent_of_tangent(xi)));
}

Tan2 T_kappa(const TangentOps& ops, double r, const Tan2& xi) {
  const TanVec lo = ops.kappa(r, TanVec{xi.base, xi.v0});
  const TanVec hi = ops.kappa(r, TanVec{xi.v1, xi.v01});
  return {lo.base, lo.vel, hi.base, hi.vel};
}

bool braid_permutations_agree() {
  // A tag permutation acts on subset labels; compose them as maps of masks.
  using Perm = std::array<int, 8>;
  auto swap_tags = [](int a, int b) {
    Perm p{};
    for (int m = 0; m < 8; ++m) {
      const int ba = (m >> (a - 1)) & 1;
      const int bb = (m >> (b - 1)) & 1;
      int r = m & ~((1 << (a - 1)) | (1 << (b - 1)));
      r |= ba << (b - 1);
      r |= bb << (a - 1);
      p[static_cast<std::size_t>(m)] = r;
    }
    return p;
  };
  auto compose = [](const Perm& f, const Perm& g) {  // f ∘ g
    Perm out{};
    for (std::size_t m = 0; m < 8; ++m) out[m] = f[static_cast<std::size_t>(g[m])];
    return out;
  };
  const Perm t12 = swap_tags(1, 2);
  const Perm t23 = swap_tags(2, 3);
  return compose(t12, compose(t23, t12)) == compose(t23, compose(t12, t23));
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

namespace {

Vec coords(const Tan2& x) {
  Vec out = concat(x.base, x.v0);
  out = concat(out, x.v1);
  return concat(out, x.v01);
}

Vec coords(const TanVec& x) { return concat(x.base, x.vel); }

Vec coords(const Tan3& x) {
  Vec out;
  for (const auto& c : x.c) out.insert(out.end(), c.begin(), c.end());
  return out;
}

Vec coords(const TanK& x) {
  Vec out = x.base;
  for (const auto& f : x.fibers) out.insert(out.end(), f.begin(), f.end());
  return out;
}

// Random inputs drawn from the corpus: a map, a point of its domain and
// vectors of matching dimension.
class Sampler {
 public:
  Sampler(const std::vector<SmoothMap>& corpus, std::uint64_t seed) : corpus_(corpus), rng_(seed) {
    if (corpus_.empty()) throw std::invalid_argument("axiom checks need a non-empty corpus");
  }

  const SmoothMap& map() { return corpus_[rng_.index(corpus_.size())]; }
  Vec point(const SmoothMap& f) { return sample_point(f.domain(), rng_); }
  Vec vec(std::size_t n) { return sample_vector(static_cast<int>(n), rng_, 1.5); }
  double scalar() { return rng_.uniform(-2.0, 2.0); }
  Rng& rng() { return rng_; }

  // A point of T²U at a point of the domain of f.
  Tan2 tan2(const SmoothMap& f) {
    const Vec u = point(f);
    return {u, vec(u.size()), vec(u.size()), vec(u.size())};
  }

  // Tangent vectors at a common base, obtained by pushing random vectors
  // through a corpus map so they live where the corpus sends them.
  std::vector<TanVec> pushed(const TangentOps& ops, std::size_t count) {
    const SmoothMap& f = map();
    const Vec u = point(f);
    std::vector<TanVec> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(ops.pushforward_T(f, {u, vec(u.size())}));
    return out;
  }

  Tan3 tan3(std::size_t n) {
    Tan3 x;
    for (auto& c : x.c) c = vec(n);
    return x;
  }

 private:
  const std::vector<SmoothMap>& corpus_;
  Rng rng_;
};

std::function<std::string()> describe(const std::string& what, const Vec& input) {
  return [what, input] { return what + " at " + format_vec(input); };
}

TanK pair(const TanVec& a, const TanVec& b) { return fiber_product(std::vector<TanVec>{a, b}); }

}  // namespace

AxiomReport check_bundle_abelian_group(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                       const CheckConfig& cfg) {
  const std::string name = "bundle_abelian_group";
  Sampler s(corpus, derive_seed(cfg.seed, name));
  ResidualTracker t(name, cfg.tol_abs, cfg.tol_rel);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    t.sample();
    const auto v = s.pushed(ops, 3);
    const TanVec &a = v[0], &b = v[1], &c = v[2];
    const auto w = describe("vectors", concat(coords(a), concat(b.vel, c.vel)));
    const TanVec lhs = ops.add(pair(ops.add(pair(a, b)), c));
    const TanVec rhs = ops.add(pair(a, ops.add(pair(b, c))));
    t.compare(coords(lhs), coords(rhs), w);
    t.compare(coords(ops.add(pair(a, b))), coords(ops.add(pair(b, a))), w);
    const TanVec z = ops.zero(ops.pi(a));
    t.compare(coords(ops.add(pair(a, z))), coords(a), w);
    t.compare(coords(ops.add(pair(a, ops.kappa(-1.0, a)))), coords(z), w);
    t.compare(ops.pi(ops.add(pair(a, b))), ops.pi(a), w);
  }
  return t.report();
}

AxiomReport check_symmetric_structure(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                      const CheckConfig& cfg) {
  const std::string name = "symmetric_structure";
  Sampler s(corpus, derive_seed(cfg.seed, name));
  ResidualTracker t(name, cfg.tol_abs, cfg.tol_rel);
  t.record(braid_permutations_agree() ? 0.0 : HUGE_VAL, [] { return std::string("braid permutations differ"); });
  for (int trial = 0; trial < cfg.trials; ++trial) {
    t.sample();
    const SmoothMap& f = s.map();
    const Tan2 xi = ops.pushforward_T2(f, s.tan2(f));
    const auto w = describe("T²f(ξ)", coords(xi));

    // τ is an involution
    t.compare(coords(ops.tau(ops.tau(xi))), coords(xi), w);
    // πT ∘ τ = Tπ
    t.compare(coords(ops.proj_piT(ops.tau(xi))), coords(ops.proj_Tpi(xi)), w);

    // braid relation on T³ with τ12 = Tτ and τ23 = τT
    const Tan3 x3 = s.tan3(xi.base.size());
    const Tan3 lhs = T_tau(ops, tau_T(ops, T_tau(ops, x3)));
    const Tan3 rhs = tau_T(ops, T_tau(ops, tau_T(ops, x3)));
    t.compare(coords(lhs), coords(rhs), describe("T³ element", coords(x3)));

    // τ ∘ T+ = +T ∘ (τ ×_T τ) ∘ ν₂ on T(T₂U)
    const std::size_t n = xi.base.size();
    const Vec u = xi.base, a = s.vec(n), b = s.vec(n), c = s.vec(n), a1 = s.vec(n), b1 = s.vec(n);
    const TanVec ttwo{concat(u, concat(a, b)), concat(c, concat(a1, b1))};
    const auto w2 = describe("T(T₂U) element", coords(ttwo));
    const TanVec base_sum = ops.add(TanK{u, {a, b}});
    const TanVec vel_sum = ops.add(TanK{c, {a1, b1}});
    const Tan2 left = ops.tau(Tan2{base_sum.base, base_sum.vel, vel_sum.base, vel_sum.vel});
    const TanVec p1 = as_tangent_of_tangent(ops.tau(Tan2{u, a, c, a1}));
    const TanVec p2 = as_tangent_of_tangent(ops.tau(Tan2{u, b, c, b1}));
    try {
      const Tan2 right = from_tangent_of_tangent(ops.add(fiber_product(std::vector<TanVec>{p1, p2})));
      t.compare(coords(left), coords(right), w2);
    } catch (const BaseMismatch&) {
      t.compare(p1.base, p2.base, w2);
    }
    // ν₂ lands on the same pair
    const TanK shuffled = ops.nu(ttwo, static_cast<int>(n));
    t.compare(coords(shuffled), concat(p1.base, concat(p1.vel, p2.vel)), w2);
  }
  return t.report();
}

AxiomReport check_vertical_lift(const TangentOps& ops, const std::vector<SmoothMap>& corpus, const CheckConfig& cfg) {
  const std::string name = "vertical_lift";
  Sampler s(corpus, derive_seed(cfg.seed, name));
  ResidualTracker t(name, cfg.tol_abs, cfg.tol_rel);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    t.sample();
    const auto v = s.pushed(ops, 2);
    const TanVec &a = v[0], &b = v[1];
    const auto w = describe("vectors", concat(coords(a), b.vel));
    const Tan2 la = ops.lambda(a);
    // πT ∘ λ = 0 ∘ π
    t.compare(coords(ops.proj_piT(la)), coords(ops.zero(ops.pi(a))), w);
    // λT ∘ λ = Tλ ∘ λ
    t.compare(coords(lambda_T(ops, la)), coords(T_lambda(ops, la)), w);
    // (+T) ∘ (λ ×₀ λ) = λ ∘ +
    const TanVec sum_T = ops.add(fiber_product(
        std::vector<TanVec>{as_tangent_of_tangent(la), as_tangent_of_tangent(ops.lambda(b))}));
    t.compare(coords(from_tangent_of_tangent(sum_T)), coords(ops.lambda(ops.add(pair(a, b)))), w);
  }
  return t.report();
}

AxiomReport check_lift_symmetry(const TangentOps& ops, const std::vector<SmoothMap>& corpus, const CheckConfig& cfg) {
  const std::string name = "lift_symmetry";
  Sampler s(corpus, derive_seed(cfg.seed, name));
  ResidualTracker t(name, cfg.tol_abs, cfg.tol_rel);
  for (int trial = 0; trial <= cfg.trials; ++trial) {
    t.sample();
    const SmoothMap& f = s.map();
    Tan2 xi = s.tan2(f);
    TanVec a{xi.base, xi.v0};
    if (trial == cfg.trials) {
      // zero section: both sides must send it to the zero section
      xi = Tan2{xi.base, Vec(xi.base.size()), Vec(xi.base.size()), Vec(xi.base.size())};
      a = ops.zero(xi.base);
    }
    const auto w = describe("ξ", coords(xi));
    // τ ∘ λ = λ
    t.compare(coords(ops.tau(ops.lambda(a))), coords(ops.lambda(a)), w);
    // Tτ ∘ τT ∘ Tλ = λT ∘ τ
    const Tan3 lhs = T_tau(ops, tau_T(ops, T_lambda(ops, xi)));
    const Tan3 rhs = lambda_T(ops, ops.tau(xi));
    t.compare(coords(lhs), coords(rhs), w);
  }
  return t.report();
}

namespace {

// Rank of a set of column vectors by modified Gram-Schmidt.
int numerical_rank(std::vector<Vec> cols, double eps = 1e-12) {
  int rank = 0;
  std::vector<Vec> basis;
  for (Vec& c : cols) {
    for (const Vec& q : basis) {
      double d = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) d += c[i] * q[i];
      for (std::size_t i = 0; i < c.size(); ++i) c[i] -= d * q[i];
    }
    double norm = 0.0;
    for (double x : c) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > eps) {
      for (double& x : c) x /= norm;
      basis.push_back(c);
      ++rank;
    }
  }
  return rank;
}

}  // namespace

AxiomReport check_kernel_pullback(const TangentOps& ops, const std::vector<SmoothMap>& corpus, const CheckConfig& cfg) {
  const std::string name = "kernel_pullback";
  Sampler s(corpus, derive_seed(cfg.seed, name));
  ResidualTracker t(name, cfg.tol_abs, cfg.tol_rel);
  int rejected = 0;
  double min_distance = HUGE_VAL;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    t.sample();
    const SmoothMap& f = s.map();
    const Tan2 r = s.tan2(f);
    const std::size_t n = r.base.size();
    const Vec zero(n, 0.0);

    // existence and uniqueness of the λ₂ decomposition of (u, a, 0, c)
    const Tan2 in_kernel{r.base, r.v0, zero, r.v01};
    const auto w = describe("kernel element", coords(in_kernel));
    try {
      const TanK k = ops.lambda2_inverse(in_kernel);
      t.compare(coords(ops.lambda2(k)), coords(in_kernel), w);
      t.compare(coords(k), concat(r.base, concat(r.v0, r.v01)), w);
    } catch (const KernelViolation&) {
      t.record(HUGE_VAL, w);
    }

    // λ₂ is injective: its columns on the fibers are independent
    std::vector<Vec> cols;
    for (std::size_t j = 0; j < 2 * n; ++j) {
      Vec e0(n, 0.0), e1(n, 0.0);
      (j < n ? e0 : e1)[j % n] = 1.0;
      const Tan2 img = ops.lambda2(TanK{zero, {e0, e1}});
      cols.push_back(concat(img.v0, concat(img.v1, img.v01)));
    }
    t.record(numerical_rank(cols) == static_cast<int>(2 * n) ? 0.0 : HUGE_VAL,
             [] { return std::string("λ₂ is not injective"); });

    // triple equalizer: λ(ζ) is equalized by πT, Tπ and 0∘π∘πT, and every
    // equalized element is λ of a unique ζ
    const TanVec zeta{r.base, r.v01};
    const Tan2 lz = ops.lambda(zeta);
    const Vec p1 = coords(ops.proj_piT(lz));
    t.compare(p1, coords(ops.proj_Tpi(lz)), w);
    t.compare(p1, coords(ops.zero(ops.pi(ops.proj_piT(lz)))), w);
    const Tan2 equalized{r.base, zero, zero, r.v01};
    t.compare(coords(ops.lambda(TanVec{equalized.base, equalized.v01})), coords(equalized), w);

    // an element with |v1| = 1 has no decomposition
    Vec b = s.vec(n);
    double norm = 0.0;
    for (double x : b) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : b) x /= norm;
    const Tan2 outside{r.base, r.v0, b, r.v01};
    min_distance = std::min(min_distance, kernel_gap(outside));
    try {
      (void)ops.lambda2_inverse(outside);
      t.record(HUGE_VAL, describe("accepted non-kernel element", coords(outside)));
    } catch (const KernelViolation&) {
      ++rejected;
    }
  }
  return t.report("rejected " + std::to_string(rejected) + " non-kernel elements; min |v1| distance " +
                  format_vec(Vec{min_distance}));
}

AxiomReport check_scalar_mult(const TangentOps& ops, const std::vector<SmoothMap>& corpus, const CheckConfig& cfg) {
  const std::string name = "scalar_mult";
  Sampler s(corpus, derive_seed(cfg.seed, name));
  ResidualTracker t(name, cfg.tol_abs, cfg.tol_rel);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    t.sample();
    const auto v = s.pushed(ops, 2);
    const TanVec &a = v[0], &b = v[1];
    const double r = s.scalar(), q = s.scalar();
    const auto w = describe("(r, s, ξ, η)", concat(Vec{r, q}, concat(coords(a), b.vel)));
    // (i) bundle morphism
    t.compare(ops.pi(ops.kappa(r, a)), ops.pi(a), w);
    // (ii) associativity
    t.compare(coords(ops.kappa(r, ops.kappa(q, a))), coords(ops.kappa(r * q, a)), w);
    // (iii) unit
    t.compare(coords(ops.kappa(1.0, a)), coords(a), w);
    // (iv) linearity in R
    t.compare(coords(ops.kappa(r + q, a)), coords(ops.add(pair(ops.kappa(r, a), ops.kappa(q, a)))), w);
    // (v) linearity in TX
    t.compare(coords(ops.kappa(r, ops.add(pair(a, b)))), coords(ops.add(pair(ops.kappa(r, a), ops.kappa(r, b)))), w);
    // scalar 0 lands on the zero section
    t.compare(coords(ops.kappa(0.0, a)), coords(ops.zero(ops.pi(a))), w);
    // (vi) symmetric structure: τ ∘ κ_{TX} = Tκ ∘ (id × τ)
    const SmoothMap& f = s.map();
    const Tan2 x2 = s.tan2(f);
    t.compare(coords(ops.tau(kappa_T(ops, r, x2))), coords(T_kappa(ops, r, ops.tau(x2))),
              describe("(r, X)", concat(Vec{r}, coords(x2))));
    // (vii) vertical lift: κ_{TX} ∘ (id × λ) = λ ∘ κ
    t.compare(coords(kappa_T(ops, r, ops.lambda(a))), coords(ops.lambda(ops.kappa(r, a))), w);
  }
  return t.report();
}

AxiomReport check_naturality(const TangentOps& ops, const std::vector<SmoothMap>& corpus, const CheckConfig& cfg) {
  const std::string name = "naturality";
  Sampler s(corpus, derive_seed(cfg.seed, name));
  ResidualTracker t(name, cfg.tol_abs, cfg.tol_rel);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    t.sample();
    const SmoothMap& f = s.map();
    const Tan2 x = s.tan2(f);
    const TanVec a{x.base, x.v0};
    const TanVec b{x.base, x.v1};
    const double r = s.scalar();
    const auto w = describe(f.name() + " on ξ", coords(x));

    const TanVec fa = ops.pushforward_T(f, a);
    // π
    t.compare(ops.pi(fa), f(ops.pi(a)), w);
    // 0
    t.compare(coords(ops.pushforward_T(f, ops.zero(a.base))), coords(ops.zero(f(a.base))), w);
    // +
    const TanK fab = ops.pushforward_Tk(f, pair(a, b));
    t.compare(coords(ops.pushforward_T(f, ops.add(pair(a, b)))), coords(ops.add(fab)), w);
    // τ
    t.compare(coords(ops.tau(ops.pushforward_T2(f, x))), coords(ops.pushforward_T2(f, ops.tau(x))), w);
    // λ
    t.compare(coords(ops.lambda(fa)), coords(ops.pushforward_T2(f, ops.lambda(a))), w);
    // κ
    t.compare(coords(ops.kappa(r, fa)), coords(ops.pushforward_T(f, ops.kappa(r, a))), w);
    // λ₂
    t.compare(coords(ops.lambda2(fab)), coords(ops.pushforward_T2(f, ops.lambda2(pair(a, b)))), w);
  }
  return t.report();
}

AxiomReport check_fiber_products(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                 const CheckConfig& cfg) {
  const std::string name = "fiber_products";
  Sampler s(corpus, derive_seed(cfg.seed, name));
  ResidualTracker t(name, cfg.tol_abs, cfg.tol_rel);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    t.sample();
    const SmoothMap& f = s.map();
    const Vec u = s.point(f);
    const std::size_t n = u.size();
    const Vec a = s.vec(n), b = s.vec(n), c = s.vec(n), a1 = s.vec(n), b1 = s.vec(n);
    const TanVec ttwo{concat(u, concat(a, b)), concat(c, concat(a1, b1))};
    const auto w = describe(f.name() + " on T(T₂U) element", coords(ttwo));

    // ν₂ is a bijection
    t.compare(coords(ops.nu_inverse(ops.nu(ttwo, static_cast<int>(n)))), coords(ttwo), w);

    // T_k f acts fiberwise as T f
    const TanK fk = ops.pushforward_Tk(f, TanK{u, {a, b, c}});
    for (std::size_t i = 0; i < 3; ++i) {
      const Vec& fiber = i == 0 ? a : (i == 1 ? b : c);
      t.compare(fk.fibers[i], ops.pushforward_T(f, TanVec{u, fiber}).vel, w);
    }

    // T preserves T₂: ν₂ ∘ T(T₂f) = T₂(Tf) ∘ ν₂. T(T₂f) is evaluated with an
    // order-3 jet whose tags 1, 2 carry the two fibers and tag 3 the tangent.
    std::vector<Jet> args;
    for (std::size_t i = 0; i < n; ++i) {
      args.push_back(Jet::from_components({u[i], a[i], b[i], 0.0, c[i], a1[i], b1[i], 0.0}));
    }
    const std::vector<Jet> y = f.eval(args);
    const std::size_t m = y.size();
    TanVec image{Vec(3 * m), Vec(3 * m)};
    for (std::size_t j = 0; j < m; ++j) {
      image.base[j] = y[j][0];
      image.base[m + j] = y[j][1];
      image.base[2 * m + j] = y[j][2];
      image.vel[j] = y[j][4];
      image.vel[m + j] = y[j][5];
      image.vel[2 * m + j] = y[j][6];
    }
    const TanK lhs = ops.nu(image, static_cast<int>(m));
    const TanK rhs = ops.pushforward_Tk(tangent_map(f), ops.nu(ttwo, static_cast<int>(n)));
    t.compare(coords(lhs), coords(rhs), w);
  }
  return t.report();
}

AxiomReport check_functoriality(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                const CheckConfig& cfg) {
  const std::string name = "functoriality";
  Sampler s(corpus, derive_seed(cfg.seed, name));
  std::vector<std::pair<const SmoothMap*, const SmoothMap*>> pairs;
  for (const auto& f : corpus) {
    for (const auto& g : corpus) {
      if (g.arity_in() == f.arity_out()) pairs.emplace_back(&f, &g);
    }
  }
  ResidualTracker t(name, cfg.tol_abs, cfg.tol_rel);
  if (pairs.empty()) return t.report("no composable pairs in the corpus");
  for (int trial = 0; trial < cfg.trials; ++trial) {
    t.sample();
    const auto [f, g] = pairs[s.rng().index(pairs.size())];
    const SmoothMap gf = g->compose(*f);
    Vec u;
    try {
      u = sample_point(gf.domain(), s.rng());
    } catch (const DomainError&) {
      continue;
    }
    const std::size_t n = u.size();
    const Tan2 x{u, s.vec(n), s.vec(n), s.vec(n)};
    const auto w = describe(g->name() + "∘" + f->name() + " on ξ", coords(x));
    const TanVec a{u, x.v0};
    t.compare(coords(ops.pushforward_T(gf, a)), coords(ops.pushforward_T(*g, ops.pushforward_T(*f, a))), w);
    t.compare(coords(ops.pushforward_T2(gf, x)), coords(ops.pushforward_T2(*g, ops.pushforward_T2(*f, x))), w);
    const TanVec id = ops.pushforward_T(SmoothMap::identity(static_cast<int>(n)), a);
    t.compare(coords(id), coords(a), w);
  }
  return t.report();
}

std::vector<AxiomReport> run_axiom_suite(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                         const CheckConfig& cfg) {
  return {
      check_bundle_abelian_group(ops, corpus, cfg), check_symmetric_structure(ops, corpus, cfg),
      check_vertical_lift(ops, corpus, cfg),        check_lift_symmetry(ops, corpus, cfg),
      check_kernel_pullback(ops, corpus, cfg),      check_scalar_mult(ops, corpus, cfg),
      check_naturality(ops, corpus, cfg),           check_fiber_products(ops, corpus, cfg),
      check_functoriality(ops, corpus, cfg),
  };
}

}  // namespace tanflow
