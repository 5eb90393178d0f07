#pragma once

// Points of TU, T²U and T_kU for an open U ⊆ R^n, the images of smooth maps
// under T, T² and T_k, and the structure maps π, 0, +, λ, τ, κ, λ₂, ν.
//
// Coordinates follow the euclidean formulas: a point of T²U is (u, u0, u1, u01)
// where u0 is the inner (πT) direction and u1 the outer (Tπ) direction. In jet
// form these are the components at masks 0, 1, 2, 3.
//
// Every type is a template over the scalar so the same maps act on numbers, on
// jets (nesting one more level of differentiation) and on expressions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tanflow/errors.hpp"
#include "tanflow/expr.hpp"
#include "tanflow/jet.hpp"
#include "tanflow/smooth_map.hpp"

namespace tanflow {

template <class S>
struct BasicTanVec {
  std::vector<S> base;
  std::vector<S> vel;
};

template <class S>
struct BasicTan2 {
  std::vector<S> base;
  std::vector<S> v0;
  std::vector<S> v1;
  std::vector<S> v01;
};

template <class S>
struct BasicTanK {
  std::vector<S> base;
  std::vector<std::vector<S>> fibers;

  [[nodiscard]] int k() const noexcept { return static_cast<int>(fibers.size()); }
};

using TanVec = BasicTanVec<double>;
using Tan2 = BasicTan2<double>;
using TanK = BasicTanK<double>;

/// Point of T³U: eight vectors indexed by subsets of {1,2,3} as bitmasks.
/// Tag 1 is the innermost T, tag 3 the outermost.
struct Tan3 {
  std::vector<double> c[8];
};

inline constexpr double kBaseTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Pushforwards
// ---------------------------------------------------------------------------

/// Tf(u, u0) = (f(u), Df(u) u0).
[[nodiscard]] TanVec pushforward_T(const SmoothMap& f, const TanVec& xi);
[[nodiscard]] BasicTanVec<Jet> pushforward_T(const SmoothMap& f, const BasicTanVec<Jet>& xi);
[[nodiscard]] BasicTanVec<Expr> pushforward_T(const SmoothMap& f, const BasicTanVec<Expr>& xi);

/// T²f(u, u0, u1, u01) = (f, Df u0, Df u1, Df u01 + D²f(u0, u1)).
[[nodiscard]] Tan2 pushforward_T2(const SmoothMap& f, const Tan2& xi);
[[nodiscard]] BasicTan2<Jet> pushforward_T2(const SmoothMap& f, const BasicTan2<Jet>& xi);
[[nodiscard]] BasicTan2<Expr> pushforward_T2(const SmoothMap& f, const BasicTan2<Expr>& xi);

/// T_kf applies Df(u) to every fiber.
[[nodiscard]] TanK pushforward_Tk(const SmoothMap& f, const TanK& xi);
[[nodiscard]] BasicTanK<Jet> pushforward_Tk(const SmoothMap& f, const BasicTanK<Jet>& xi);

[[nodiscard]] Tan3 pushforward_T3(const SmoothMap& f, const Tan3& xi);

/// Tf as a map R^{2n} ⊇ U × R^n → R^{2m}, (u, u0) ↦ (f(u), Df(u) u0), built
/// symbolically.
[[nodiscard]] SmoothMap tangent_map(const SmoothMap& f);

// ---------------------------------------------------------------------------
// Structure maps
// ---------------------------------------------------------------------------

namespace detail {

inline double base_gap(double a, double b) { return std::abs(a - b); }
inline double base_gap(const Jet& a, const Jet& b) {
  double gap = 0.0;
  const Jet d = a - b;
  for (double c : d.components()) gap = std::max(gap, std::abs(c));
  return gap;
}
inline double base_gap(const Expr& a, const Expr& b) { return structurally_equal(a, b) ? 0.0 : HUGE_VAL; }

template <class S>
void require_same_base(const std::vector<S>& a, const std::vector<S>& b, const char* what) {
  if (a.size() != b.size()) throw BaseMismatch(std::string(what) + ": base dimensions differ");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (base_gap(a[i], b[i]) > kBaseTolerance) throw BaseMismatch(std::string(what) + ": base points differ");
  }
}

template <class S>
std::vector<S> zeros(std::size_t n) {
  return std::vector<S>(n, S(0.0));
}

template <class S>
std::vector<S> plus(const std::vector<S>& a, const std::vector<S>& b) {
  std::vector<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <class S>
std::vector<S> minus(const std::vector<S>& a, const std::vector<S>& b) {
  std::vector<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

template <class S>
std::vector<S> scaled(const S& r, const std::vector<S>& a) {
  std::vector<S> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = r * a[i];
  return out;
}

template <class S>
std::vector<S> concat(const std::vector<S>& a, const std::vector<S>& b) {
  std::vector<S> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

template <class S>
std::vector<S> segment(const std::vector<S>& a, std::size_t start, std::size_t len) {
  return std::vector<S>(a.begin() + static_cast<std::ptrdiff_t>(start),
                        a.begin() + static_cast<std::ptrdiff_t>(start + len));
}

}  // namespace detail

/// Fiber product of tangent vectors; all bases must agree.
template <class S>
BasicTanK<S> fiber_product(const std::vector<BasicTanVec<S>>& vs) {
  if (vs.empty()) throw std::invalid_argument("fiber product of no vectors");
  BasicTanK<S> out{vs.front().base, {}};
  for (const auto& v : vs) {
    detail::require_same_base(out.base, v.base, "fiber_product");
    out.fibers.push_back(v.vel);
  }
  return out;
}

template <class S>
std::vector<S> nt_pi(const BasicTanVec<S>& xi) {
  return xi.base;
}

template <class S>
BasicTanVec<S> nt_zero(const std::vector<S>& u) {
  return {u, detail::zeros<S>(u.size())};
}

template <class S>
BasicTanVec<S> nt_add(const BasicTanK<S>& xi) {
  if (xi.k() != 2) throw std::invalid_argument("nt_add expects a pair of fibers");
  return {xi.base, detail::plus(xi.fibers[0], xi.fibers[1])};
}

template <class S>
BasicTanVec<S> nt_add(const BasicTanVec<S>& a, const BasicTanVec<S>& b) {
  detail::require_same_base(a.base, b.base, "nt_add");
  return {a.base, detail::plus(a.vel, b.vel)};
}

template <class S>
BasicTanVec<S> nt_subtract(const BasicTanVec<S>& a, const BasicTanVec<S>& b) {
  detail::require_same_base(a.base, b.base, "nt_subtract");
  return {a.base, detail::minus(a.vel, b.vel)};
}

template <class S>
BasicTan2<S> nt_lambda(const BasicTanVec<S>& xi) {
  const std::size_t n = xi.base.size();
  return {xi.base, detail::zeros<S>(n), detail::zeros<S>(n), xi.vel};
}

template <class S>
BasicTan2<S> nt_tau(const BasicTan2<S>& xi) {
  return {xi.base, xi.v1, xi.v0, xi.v01};
}

template <class S>
BasicTanVec<S> nt_kappa(const S& r, const BasicTanVec<S>& xi) {
  return {xi.base, detail::scaled(r, xi.vel)};
}

template <class S>
BasicTan2<S> nt_lambda2(const BasicTanK<S>& xi) {
  if (xi.k() != 2) throw std::invalid_argument("nt_lambda2 expects a pair of fibers");
  return {xi.base, xi.fibers[0], detail::zeros<S>(xi.base.size()), xi.fibers[1]};
}

template <class S>
BasicTanVec<S> proj_piT(const BasicTan2<S>& xi) {
  return {xi.base, xi.v0};
}

template <class S>
BasicTanVec<S> proj_Tpi(const BasicTan2<S>& xi) {
  return {xi.base, xi.v1};
}

/// Largest |v1| component, the distance from the kernel of Tπ.
[[nodiscard]] double kernel_gap(const Tan2& xi);
[[nodiscard]] double kernel_gap(const BasicTan2<Jet>& xi);
/// Zero when v1 simplified to 0, infinite otherwise.
[[nodiscard]] double kernel_gap(const BasicTan2<Expr>& xi);

/// Inverse of λ₂ on the kernel of Tπ. Throws KernelViolation when
/// kernel_gap(xi) exceeds `tolerance`.
template <class S>
BasicTanK<S> nt_lambda2_inverse(const BasicTan2<S>& xi, double tolerance = 1e-10) {
  const double gap = kernel_gap(xi);
  if (gap > tolerance) {
    throw KernelViolation("element is not in the kernel of Tπ (|v1| = " + std::to_string(gap) + ")");
  }
  return {xi.base, {xi.v0, xi.v01}};
}

/// Difference in T²U viewed as a bundle over TU through πT. Both operands must
/// have the same (u, u0).
template <class S>
BasicTan2<S> subtract_over_piT(const BasicTan2<S>& a, const BasicTan2<S>& b) {
  detail::require_same_base(a.base, b.base, "subtract_over_piT");
  detail::require_same_base(a.v0, b.v0, "subtract_over_piT");
  return {a.base, a.v0, detail::minus(a.v1, b.v1), detail::minus(a.v01, b.v01)};
}

/// T²U as T(TU): base (u, u0), velocity (u1, u01).
template <class S>
BasicTanVec<S> as_tangent_of_tangent(const BasicTan2<S>& xi) {
  return {detail::concat(xi.base, xi.v0), detail::concat(xi.v1, xi.v01)};
}

template <class S>
BasicTan2<S> from_tangent_of_tangent(const BasicTanVec<S>& xi) {
  if (xi.base.size() % 2 != 0 || xi.vel.size() != xi.base.size()) {
    throw std::invalid_argument("T(TU) element must have even dimension");
  }
  const std::size_t n = xi.base.size() / 2;
  return {detail::segment(xi.base, 0, n), detail::segment(xi.base, n, n), detail::segment(xi.vel, 0, n),
          detail::segment(xi.vel, n, n)};
}

/// ν_k : T(T_kU) → T_k(TU). An element of T(T_kU) is a tangent vector on
/// R^{(k+1)n} with base (u, a1..ak) and velocity (b0, b1..bk); its image has
/// base (u, b0) and fibers (a_i, b_i).
template <class S>
BasicTanK<S> nu_shuffle(const BasicTanVec<S>& xi, int n) {
  const auto total = xi.base.size();
  if (n <= 0 || total % static_cast<std::size_t>(n) != 0 || xi.vel.size() != total || total < 2 * std::size_t(n)) {
    throw std::invalid_argument("nu_shuffle: malformed T(T_k) element");
  }
  const std::size_t un = static_cast<std::size_t>(n);
  const std::size_t k = total / un - 1;
  BasicTanK<S> out;
  out.base = detail::concat(detail::segment(xi.base, 0, un), detail::segment(xi.vel, 0, un));
  for (std::size_t i = 1; i <= k; ++i) {
    out.fibers.push_back(detail::concat(detail::segment(xi.base, i * un, un), detail::segment(xi.vel, i * un, un)));
  }
  return out;
}

template <class S>
BasicTanVec<S> nu_unshuffle(const BasicTanK<S>& xi) {
  if (xi.base.size() % 2 != 0) throw std::invalid_argument("nu_unshuffle: base of T_k(TU) must have even dimension");
  const std::size_t n = xi.base.size() / 2;
  BasicTanVec<S> out{detail::segment(xi.base, 0, n), detail::segment(xi.base, n, n)};
  for (const auto& f : xi.fibers) {
    if (f.size() != 2 * n) throw std::invalid_argument("nu_unshuffle: fiber dimension mismatch");
    out.base = detail::concat(out.base, detail::segment(f, 0, n));
    out.vel = detail::concat(out.vel, detail::segment(f, n, n));
  }
  return out;
}

// Conversions between tangent points and jets. Coordinate i of a TanVec with
// scalar Jet of order m becomes an order m+1 jet whose new tag carries vel[i].

[[nodiscard]] std::vector<Jet> to_jets(const TanVec& xi);
[[nodiscard]] std::vector<Jet> to_jets(const Tan2& xi);
[[nodiscard]] std::vector<Jet> to_jets(const Tan3& xi);
[[nodiscard]] TanVec tanvec_from_jets(std::span<const Jet> x);
[[nodiscard]] Tan2 tan2_from_jets(std::span<const Jet> x);
[[nodiscard]] Tan3 tan3_from_jets(std::span<const Jet> x);

}  // namespace tanflow
