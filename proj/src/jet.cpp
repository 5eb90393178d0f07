#include "tanflow/jet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tanflow/errors.hpp"

namespace tanflow {

namespace {

std::size_t width(int order) { return std::size_t{1} << order; }

void check_order(int order) {
  if (order < 0 || order > Jet::kMaxOrder) {
    throw std::invalid_argument("jet order " + std::to_string(order) + " out of range");
  }
}

bool has_nilpotent_part(const Jet& x) {
  const auto c = x.components();
  return std::any_of(c.begin() + 1, c.end(), [](double v) { return v != 0.0; });
}

// Removes bit `bit` from `mask`, shifting higher bits down by one.
std::uint32_t squeeze_bit(std::uint32_t mask, int bit) {
  const std::uint32_t low = mask & ((1u << bit) - 1u);
  const std::uint32_t high = (mask >> (bit + 1)) << bit;
  return low | high;
}

}  // namespace

Jet::Jet(double value) : order_(0), comps_{value} {}

Jet::Jet(int order, double value) : order_(order) {
  check_order(order);
  comps_.assign(width(order), 0.0);
  comps_[0] = value;
}

Jet Jet::from_components(std::vector<double> comps) {
  if (comps.empty() || !std::has_single_bit(comps.size())) {
    throw std::invalid_argument("jet component count must be a power of two");
  }
  Jet out;
  out.order_ = std::countr_zero(comps.size());
  check_order(out.order_);
  out.comps_ = std::move(comps);
  return out;
}

Jet Jet::seeded(double value, std::span<const double> seeds) {
  Jet out(static_cast<int>(seeds.size()), value);
  for (std::size_t t = 0; t < seeds.size(); ++t) {
    out.comps_[std::size_t{1} << t] = seeds[t];
  }
  return out;
}

Jet Jet::lifted(int new_order) const {
  if (new_order < order_) {
    throw std::invalid_argument("cannot lift a jet to a lower order");
  }
  check_order(new_order);
  Jet out = *this;
  out.order_ = new_order;
  out.comps_.resize(width(new_order), 0.0);
  return out;
}

Jet Jet::without_tag(int tag) const {
  if (tag < 1 || tag > order_) {
    throw std::invalid_argument("tag out of range");
  }
  const int bit = tag - 1;
  Jet out(order_ - 1, 0.0);
  for (std::uint32_t mask = 0; mask < comps_.size(); ++mask) {
    if ((mask & (1u << bit)) == 0) {
      out.comps_[squeeze_bit(mask, bit)] = comps_[mask];
    }
  }
  return out;
}

Jet Jet::coefficient_of(int tag) const {
  if (tag < 1 || tag > order_) {
    throw std::invalid_argument("tag out of range");
  }
  const int bit = tag - 1;
  Jet out(order_ - 1, 0.0);
  for (std::uint32_t mask = 0; mask < comps_.size(); ++mask) {
    if ((mask & (1u << bit)) != 0) {
      out.comps_[squeeze_bit(mask, bit)] = comps_[mask];
    }
  }
  return out;
}

Jet Jet::relabeled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != order_) {
    throw std::invalid_argument("relabeling must name every tag");
  }
  Jet out(order_, 0.0);
  for (std::uint32_t mask = 0; mask < comps_.size(); ++mask) {
    std::uint32_t image = 0;
    for (int t = 0; t < order_; ++t) {
      if ((mask & (1u << t)) != 0) {
        image |= 1u << (perm[static_cast<std::size_t>(t)] - 1);
      }
    }
    out.comps_[image] = comps_[mask];
  }
  return out;
}

Jet& Jet::operator+=(const Jet& rhs) {
  if (rhs.order_ > order_) {
    *this = lifted(rhs.order_);
  }
  for (std::size_t i = 0; i < rhs.comps_.size(); ++i) {
    comps_[i] += rhs.comps_[i];
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  if (rhs.order_ > order_) {
    *this = lifted(rhs.order_);
  }
  for (std::size_t i = 0; i < rhs.comps_.size(); ++i) {
    comps_[i] -= rhs.comps_[i];
  }
  return *this;
}

Jet& Jet::operator*=(const Jet& rhs) { return *this = *this * rhs; }
Jet& Jet::operator/=(const Jet& rhs) { return *this = *this / rhs; }

Jet operator*(const Jet& lhs, const Jet& rhs) {
  if (rhs.order_ == 0) {
    Jet out = lhs;
    for (double& c : out.comps_) c *= rhs.comps_[0];
    return out;
  }
  if (lhs.order_ == 0) {
    return rhs * lhs;
  }
  const int order = std::max(lhs.order_, rhs.order_);
  const Jet a = lhs.lifted(order);
  const Jet b = rhs.lifted(order);
  Jet out(order, 0.0);
  const auto n = static_cast<std::uint32_t>(out.comps_.size());
  for (std::uint32_t s = 0; s < n; ++s) {
    double acc = 0.0;
    // Walk every submask t of s, including s itself and the empty set.
    for (std::uint32_t t = s;; t = (t - 1) & s) {
      acc += a.comps_[t] * b.comps_[s ^ t];
      if (t == 0) break;
    }
    out.comps_[s] = acc;
  }
  return out;
}

Jet operator/(const Jet& lhs, const Jet& rhs) {
  if (rhs.order_ == 0) {
    Jet out = lhs;
    const double den = rhs.comps_[0];
    if (den == 0.0) {
      throw SingularEval("division by zero");
    }
    for (double& c : out.comps_) c /= den;
    return out;
  }
  return lhs * reciprocal(rhs);
}

Jet operator-(Jet x) {
  for (double& c : x.comps_) c = -c;
  return x;
}

Jet taylor_compose(const Jet& x, std::span<const double> coeffs) {
  Jet out(x.order(), coeffs.empty() ? 0.0 : coeffs[0]);
  if (x.order() == 0) {
    return out;
  }
  Jet nil = x;
  nil[0] = 0.0;
  Jet power(x.order(), 1.0);
  const std::size_t terms = std::min<std::size_t>(coeffs.size(), static_cast<std::size_t>(x.order()) + 1);
  for (std::size_t j = 1; j < terms; ++j) {
    power = power * nil;
    if (coeffs[j] == 0.0) continue;
    for (std::uint32_t m = 0; m < out.size(); ++m) {
      out[m] += coeffs[j] * power[m];
    }
  }
  return out;
}

Jet sin(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  std::vector<double> coeffs(static_cast<std::size_t>(x.order()) + 1);
  const double cycle[4] = {s, c, -s, -c};
  double factorial = 1.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (j > 0) factorial *= static_cast<double>(j);
    coeffs[j] = cycle[j % 4] / factorial;
  }
  return taylor_compose(x, coeffs);
}

Jet cos(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  std::vector<double> coeffs(static_cast<std::size_t>(x.order()) + 1);
  const double cycle[4] = {c, -s, -c, s};
  double factorial = 1.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (j > 0) factorial *= static_cast<double>(j);
    coeffs[j] = cycle[j % 4] / factorial;
  }
  return taylor_compose(x, coeffs);
}

Jet exp(const Jet& x) {
  const double e = std::exp(x.value());
  std::vector<double> coeffs(static_cast<std::size_t>(x.order()) + 1);
  double factorial = 1.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (j > 0) factorial *= static_cast<double>(j);
    coeffs[j] = e / factorial;
  }
  return taylor_compose(x, coeffs);
}

Jet log(const Jet& x) {
  const double x0 = x.value();
  if (!(x0 > 0.0)) {
    throw SingularEval("log at non-positive argument " + std::to_string(x0));
  }
  std::vector<double> coeffs(static_cast<std::size_t>(x.order()) + 1);
  coeffs[0] = std::log(x0);
  double inv_power = 1.0;
  for (std::size_t j = 1; j < coeffs.size(); ++j) {
    inv_power /= x0;
    coeffs[j] = ((j % 2 == 1) ? 1.0 : -1.0) * inv_power / static_cast<double>(j);
  }
  return taylor_compose(x, coeffs);
}

Jet sqrt(const Jet& x) {
  const double x0 = x.value();
  if (x0 < 0.0) {
    throw SingularEval("sqrt at negative argument " + std::to_string(x0));
  }
  if (x0 == 0.0) {
    if (has_nilpotent_part(x)) {
      throw SingularEval("sqrt differentiated at zero");
    }
    return Jet(x.order(), 0.0);
  }
  // Generalized binomial series: c_j = binom(1/2, j) * x0^(1/2 - j).
  std::vector<double> coeffs(static_cast<std::size_t>(x.order()) + 1);
  double binom = 1.0;
  double power = std::sqrt(x0);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (j > 0) {
      binom *= (0.5 - static_cast<double>(j - 1)) / static_cast<double>(j);
      power /= x0;
    }
    coeffs[j] = binom * power;
  }
  return taylor_compose(x, coeffs);
}

Jet reciprocal(const Jet& x) {
  const double x0 = x.value();
  if (x0 == 0.0) {
    throw SingularEval("division by zero");
  }
  std::vector<double> coeffs(static_cast<std::size_t>(x.order()) + 1);
  double power = 1.0 / x0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    coeffs[j] = (j % 2 == 0) ? power : -power;
    power /= x0;
  }
  return taylor_compose(x, coeffs);
}

Jet pow(const Jet& x, int exponent) {
  if (exponent < 0) {
    return pow(reciprocal(x), -exponent);
  }
  Jet result(x.order(), 1.0);
  Jet base = x;
  unsigned e = static_cast<unsigned>(exponent);
  while (e != 0) {
    if ((e & 1u) != 0) result = result * base;
    e >>= 1;
    if (e != 0) base = base * base;
  }
  return result;
}

Jet flat(const Jet& x) {
  if (x.value() <= 0.0) {
    return Jet(x.order(), 0.0);
  }
  return exp(-reciprocal(x * x));
}

double checked_log(double x) {
  if (!(x > 0.0)) {
    throw SingularEval("log at non-positive argument " + std::to_string(x));
  }
  return std::log(x);
}

double checked_sqrt(double x) {
  if (x < 0.0) {
    throw SingularEval("sqrt at negative argument " + std::to_string(x));
  }
  return std::sqrt(x);
}

double checked_div(double num, double den) {
  if (den == 0.0) {
    throw SingularEval("division by zero");
  }
  return num / den;
}

double flat(double t) { return t > 0.0 ? std::exp(-1.0 / (t * t)) : 0.0; }

double ipow(double x, int exponent) {
  if (exponent < 0) {
    return checked_div(1.0, ipow(x, -exponent));
  }
  double result = 1.0;
  double base = x;
  unsigned e = static_cast<unsigned>(exponent);
  while (e != 0) {
    if ((e & 1u) != 0) result *= base;
    e >>= 1;
    if (e != 0) base *= base;
  }
  return result;
}

}  // namespace tanflow
