#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tanflow/expr.hpp"
#include "tanflow/jet.hpp"
#include "tanflow/rng.hpp"

namespace tanflow {

using Vec = std::vector<double>;

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Open subset of R^n: an open box intersected with {g > 0} for each predicate g.
class Domain {
 public:
  Domain() = default;
  explicit Domain(int dim);
  Domain(std::vector<Interval> box, std::vector<Expr> positive = {});

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(box_.size()); }
  [[nodiscard]] const std::vector<Interval>& box() const noexcept { return box_; }
  [[nodiscard]] const std::vector<Expr>& predicates() const noexcept { return positive_; }
  [[nodiscard]] bool is_whole_space() const;

  [[nodiscard]] bool contains(std::span<const double> x) const;

  /// Points in both domains (same dimension).
  [[nodiscard]] Domain intersect(const Domain& other) const;

 private:
  std::vector<Interval> box_;
  std::vector<Expr> positive_;
};

/// Sampling defaults: points come from the domain box clipped to
/// [-radius, radius]^n and shrunk by `margin` on every side.
struct SampleBox {
  double radius = 2.0;
  double margin = 1e-3;
};

/// Uniform point of `domain` by rejection; throws DomainError when the
/// clipped box misses the domain after many attempts.
[[nodiscard]] Vec sample_point(const Domain& domain, Rng& rng, SampleBox box = {});

/// Uniform vector in [-scale, scale]^n.
[[nodiscard]] Vec sample_vector(int n, Rng& rng, double scale = 1.0);

/// A smooth map U -> R^m, U ⊆ R^n open, given by one expression per output.
class SmoothMap {
 public:
  SmoothMap() = default;
  SmoothMap(std::string name, int arity_in, std::vector<Expr> outputs, Domain domain = {});

  [[nodiscard]] static SmoothMap identity(int n);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] int arity_in() const noexcept { return arity_in_; }
  [[nodiscard]] int arity_out() const noexcept { return static_cast<int>(outputs_.size()); }
  [[nodiscard]] const std::vector<Expr>& outputs() const noexcept { return outputs_; }
  [[nodiscard]] const Domain& domain() const noexcept { return domain_; }
  [[nodiscard]] bool is_polynomial() const;

  /// Throws DomainError outside the domain, SingularEval at poles.
  [[nodiscard]] Vec operator()(std::span<const double> x) const;

  /// Jet evaluation: all arguments must share one order; the real parts must
  /// lie in the domain.
  [[nodiscard]] std::vector<Jet> eval(std::span<const Jet> x) const;

  /// Symbolic composition this ∘ inner. The domain is the preimage of this
  /// map's domain under `inner`, intersected with inner's domain.
  [[nodiscard]] SmoothMap compose(const SmoothMap& inner) const;

  [[nodiscard]] SmoothMap renamed(std::string name) const;

 private:
  std::string name_;
  int arity_in_ = 0;
  std::vector<Expr> outputs_;
  Domain domain_;
};

/// Applies f to jets of a common order `order` (the T^order image of f).
[[nodiscard]] std::vector<Jet> jet_eval(const SmoothMap& f, std::span<const Jet> args, int order);

}  // namespace tanflow
