#pragma once

// Independent reference computations for the tests. Derivatives come from
// central finite differences on doubles and never touch jet arithmetic.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tanflow/jet.hpp"
#include "tanflow/smooth_map.hpp"

namespace oracle {

inline constexpr double kStep = 1e-5;

using tanflow::Vec;

inline Vec shifted(std::span<const double> x, std::size_t i, double h) {
  Vec y(x.begin(), x.end());
  y[i] += h;
  return y;
}

/// Jacobian J[j][i] = d f_j / d x_i.
inline std::vector<Vec> jacobian(const tanflow::SmoothMap& f, std::span<const double> x, double h = kStep) {
  std::vector<Vec> J(static_cast<std::size_t>(f.arity_out()), Vec(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Vec hi = f(shifted(x, i, h));
    const Vec lo = f(shifted(x, i, -h));
    for (std::size_t j = 0; j < hi.size(); ++j) J[j][i] = (hi[j] - lo[j]) / (2 * h);
  }
  return J;
}

inline Vec apply(const std::vector<Vec>& J, std::span<const double> v) {
  Vec out(J.size(), 0.0);
  for (std::size_t j = 0; j < J.size(); ++j) {
    for (std::size_t i = 0; i < v.size(); ++i) out[j] += J[j][i] * v[i];
  }
  return out;
}

/// D²f_j(x)(a, b) by the four-point mixed difference along a and b.
inline Vec second_directional(const tanflow::SmoothMap& f, std::span<const double> x, std::span<const double> a,
                              std::span<const double> b, double h = 1e-4) {
  auto at = [&](double s, double t) {
    Vec y(x.begin(), x.end());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * a[i] + t * b[i];
    return f(y);
  };
  const Vec pp = at(h, h), pm = at(h, -h), mp = at(-h, h), mm = at(-h, -h);
  Vec out(pp.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (pp[j] - pm[j] - mp[j] + mm[j]) / (4 * h * h);
  return out;
}

/// Brute-force disjoint-subset convolution of two component arrays.
inline std::vector<double> subset_convolution(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size(), 0.0);
  for (std::uint32_t s1 = 0; s1 < a.size(); ++s1) {
    for (std::uint32_t s2 = 0; s2 < b.size(); ++s2) {
      if ((s1 & s2) != 0) continue;
      out[s1 | s2] += a[s1] * b[s2];
    }
  }
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
