#pragma once

// Truncated multi-tag Taylor elements.
//
// A jet of order k carries one real component per subset S of the tag set
// {1..k}. Tags are nilpotent of square zero, so the product of two jets is the
// disjoint-union convolution
//
//   (a*b)_S = sum over S1 ⊔ S2 = S of a_{S1} * b_{S2}.
//
// Subsets are stored as bitmasks: tag t (1-based) is bit t-1. Component 0 is
// the real part. An order-k jet realizes a point of T^k U one coordinate at a
// time: for k = 2 the components {∅, {1}, {2}, {1,2}} are (u, u0, u1, u01).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tanflow {

class Jet {
 public:
  /// Hard cap on the number of tags; storage is dense with 2^order entries.
  static constexpr int kMaxOrder = 10;

  Jet() : Jet(0.0) {}
  Jet(double value);  // NOLINT(google-explicit-constructor): constants promote
  Jet(int order, double value);

  /// Jet from explicit components; `comps.size()` must be a power of two.
  static Jet from_components(std::vector<double> comps);

  /// value + sum_t seeds[t] * eps_{t+1}, an order-`seeds.size()` jet.
  static Jet seeded(double value, std::span<const double> seeds);

  [[nodiscard]] int order() const noexcept { return order_; }
  [[nodiscard]] std::size_t size() const noexcept { return comps_.size(); }
  [[nodiscard]] double value() const noexcept { return comps_[0]; }
  [[nodiscard]] double operator[](std::uint32_t mask) const noexcept { return comps_[mask]; }
  double& operator[](std::uint32_t mask) noexcept { return comps_[mask]; }
  [[nodiscard]] std::span<const double> components() const noexcept { return comps_; }

  /// Same jet viewed at a higher order (new tag components are zero).
  [[nodiscard]] Jet lifted(int new_order) const;

  /// Part of the jet that does not involve `tag` (1-based).
  [[nodiscard]] Jet without_tag(int tag) const;

  /// Coefficient of eps_tag, as a jet in the remaining tags (relabelled down).
  [[nodiscard]] Jet coefficient_of(int tag) const;

  /// Jet with the component masks permuted: tag t becomes perm[t-1] (1-based).
  [[nodiscard]] Jet relabeled(std::span<const int> perm) const;

  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator/=(const Jet& rhs);

  friend Jet operator+(Jet lhs, const Jet& rhs) { return lhs += rhs; }
  friend Jet operator-(Jet lhs, const Jet& rhs) { return lhs -= rhs; }
  friend Jet operator*(const Jet& lhs, const Jet& rhs);
  friend Jet operator/(const Jet& lhs, const Jet& rhs);
  friend Jet operator-(Jet x);

  friend bool operator==(const Jet&, const Jet&) = default;

 private:
  int order_ = 0;
  std::vector<double> comps_;
};

/// Evaluates sum_j coeffs[j] * (x - x.value())^j, the truncated Taylor series
/// of a function with normalized derivatives coeffs[j] = f^(j)(x0)/j!.
/// Exact because the nilpotent part vanishes beyond power x.order().
[[nodiscard]] Jet taylor_compose(const Jet& x, std::span<const double> coeffs);

// Elementary functions. These throw SingularEval at poles and branch points.
[[nodiscard]] Jet sin(const Jet& x);
[[nodiscard]] Jet cos(const Jet& x);
[[nodiscard]] Jet exp(const Jet& x);
[[nodiscard]] Jet log(const Jet& x);
[[nodiscard]] Jet sqrt(const Jet& x);
[[nodiscard]] Jet reciprocal(const Jet& x);
[[nodiscard]] Jet pow(const Jet& x, int exponent);

/// exp(-1/t^2) for t > 0 and 0 otherwise: flat to all orders at t <= 0.
[[nodiscard]] Jet flat(const Jet& x);

// Real counterparts with the same singularity contract.
[[nodiscard]] double checked_log(double x);
[[nodiscard]] double checked_sqrt(double x);
[[nodiscard]] double checked_div(double num, double den);
[[nodiscard]] double flat(double t);
[[nodiscard]] double ipow(double x, int exponent);

}  // namespace tanflow
