#include "tanflow/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tanflow {

double scaled_residual(double a, double b, double tol_abs, double tol_rel) {
  if (std::isnan(a) || std::isnan(b)) return HUGE_VAL;
  const double scale = tol_abs > 0.0 ? tol_rel / tol_abs : 0.0;
  return std::abs(a - b) / (1.0 + scale * std::max(std::abs(a), std::abs(b)));
}

ResidualTracker::ResidualTracker(std::string axiom, double tol_abs, double tol_rel)
    : axiom_(std::move(axiom)), tol_abs_(tol_abs), tol_rel_(tol_rel) {}

void ResidualTracker::compare(double a, double b, const std::function<std::string()>& describe) {
  record(scaled_residual(a, b, tol_abs_, tol_rel_), describe);
}

void ResidualTracker::compare(std::span<const double> a, std::span<const double> b,
                              const std::function<std::string()>& describe) {
  if (a.size() != b.size()) {
    record(HUGE_VAL, describe);
    return;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, scaled_residual(a[i], b[i], tol_abs_, tol_rel_));
  record(worst, describe);
}

void ResidualTracker::record(double residual, const std::function<std::string()>& describe) {
  if (std::isnan(residual)) residual = HUGE_VAL;
  if (residual > max_) {
    max_ = residual;
    if (residual > tol_abs_ && describe) witness_ = describe();
  }
}

AxiomReport ResidualTracker::report(std::string note) const {
  AxiomReport r;
  r.axiom = axiom_;
  r.samples = samples_;
  r.max_residual = max_;
  r.tolerance = tol_abs_;
  r.pass = max_ <= tol_abs_;
  if (!r.pass) r.witness = witness_;
  r.note = std::move(note);
  return r;
}

std::string format_vec(std::span<const double> v) {
  std::string out = "(";
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    std::snprintf(buf, sizeof buf, "%.6g", v[i]);
    out += buf;
  }
  return out + ")";
}

}  // namespace tanflow
