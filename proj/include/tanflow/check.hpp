#pragma once

// Shared plumbing for the property suites: configuration, per-check reports
// and a residual accumulator.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tanflow {

struct CheckConfig {
  std::uint64_t seed = 42;
  int trials = 100;
  double tol_abs = 1e-9;
  double tol_rel = 1e-9;
};

struct AxiomReport {
  std::string axiom;
  int samples = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string witness;  // inputs of the worst failing sample, if any
  std::string note;
};

/// |a - b| measured against tol_abs: the difference is divided by
/// 1 + (tol_rel / tol_abs) * max(|a|, |b|), so a pass means
/// |a - b| <= tol_abs + tol_rel * max(|a|, |b|).
[[nodiscard]] double scaled_residual(double a, double b, double tol_abs, double tol_rel);

/// Tracks the worst residual of a check.
class ResidualTracker {
 public:
  ResidualTracker(std::string axiom, double tol_abs, double tol_rel = 0.0);

  /// Records one comparison; `describe` is only called for a new worst failure.
  void compare(double a, double b, const std::function<std::string()>& describe = {});
  void compare(std::span<const double> a, std::span<const double> b, const std::function<std::string()>& describe = {});
  /// Records a residual computed by the caller (already on the tol_abs scale).
  void record(double residual, const std::function<std::string()>& describe = {});
  void sample() { ++samples_; }

  [[nodiscard]] AxiomReport report(std::string note = {}) const;

 private:
  std::string axiom_;
  double tol_abs_;
  double tol_rel_;
  int samples_ = 0;
  double max_ = 0.0;
  std::string witness_;
};

[[nodiscard]] std::string format_vec(std::span<const double> v);

}  // namespace tanflow
