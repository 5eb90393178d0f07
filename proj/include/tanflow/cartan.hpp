#pragma once

// Vector fields, their Lie bracket built from the tangent-structure maps, and
// differential forms on open subsets of R^n with wedge, d, ι, 𝓛 and pullback.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "tanflow/check.hpp"
#include "tanflow/expr.hpp"
#include "tanflow/smooth_map.hpp"
#include "tanflow/tangent.hpp"

namespace tanflow {

/// A section x ↦ (x, v(x)) of TU → U, stored by its velocity components.
class VectorField {
 public:
  VectorField() = default;
  VectorField(std::string name, std::vector<Expr> components, Domain domain = {});

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(components_.size()); }
  [[nodiscard]] const std::vector<Expr>& components() const noexcept { return components_; }
  [[nodiscard]] const Domain& domain() const noexcept { return domain_; }
  [[nodiscard]] bool is_polynomial() const;

  /// v as a map U → R^n.
  [[nodiscard]] SmoothMap velocity() const;
  /// x ↦ (x, v(x)) as a map U → R^{2n}.
  [[nodiscard]] SmoothMap section() const;

  [[nodiscard]] Vec operator()(std::span<const double> x) const;
  [[nodiscard]] std::vector<Jet> eval(std::span<const Jet> x) const;

 private:
  std::string name_;
  std::vector<Expr> components_;
  Domain domain_;
};

[[nodiscard]] VectorField vf_add(const VectorField& v, const VectorField& w);
/// (f·v)(x) = κ(f(x), v(x)).
[[nodiscard]] VectorField vf_module_action(const Expr& f, const VectorField& v);

/// The bracket at one point, with the Tπ component of δ that the kernel
/// condition requires to vanish.
struct BracketSample {
  Vec value;
  double kernel_gap = 0.0;
};

/// Categorical bracket: δ = T(w)∘v −_{πT} τ∘T(v)∘w must lie in the kernel of
/// Tπ; λ₂⁻¹ followed by the second projection gives [v, w]. Polynomial inputs
/// yield polynomial expressions; otherwise the components are call nodes that
/// evaluate the same construction on jets. Throws KernelViolation when the
/// Tπ component of δ exceeds `kernel_tolerance`.
[[nodiscard]] VectorField bracket_categorical(const VectorField& v, const VectorField& w,
                                              double kernel_tolerance = 1e-10);

/// The categorical construction evaluated numerically at x.
[[nodiscard]] BracketSample bracket_categorical_at(const VectorField& v, const VectorField& w,
                                                   std::span<const double> x);

/// (v^i ∂_i w^j − w^i ∂_i v^j) ∂_j with partial derivatives taken by jets.
[[nodiscard]] VectorField bracket_coordinate(const VectorField& v, const VectorField& w);

/// Increasing 0-based index tuple.
using MultiIndex = std::vector<int>;

class DifferentialForm {
 public:
  DifferentialForm() = default;
  DifferentialForm(int dim, int degree, Domain domain = {});

  [[nodiscard]] static DifferentialForm function(int dim, Expr f, Domain domain = {});

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] const Domain& domain() const noexcept { return domain_; }
  [[nodiscard]] const std::map<MultiIndex, Expr>& coefficients() const noexcept { return coeffs_; }
  [[nodiscard]] Expr coefficient(const MultiIndex& index) const;

  /// Adds `c` to the coefficient of dx^{i1}∧…∧dx^{ik}; the index must be
  /// strictly increasing with entries below dim.
  void add_term(MultiIndex index, const Expr& c);

  /// α(x; w1..wk) = Σ_I c_I(x) det[w_j^{i}]_{i∈I}.
  [[nodiscard]] double evaluate(std::span<const double> x, const std::vector<Vec>& ws) const;

  /// Whether every coefficient is polynomial.
  [[nodiscard]] bool is_polynomial() const;
  /// True when every coefficient expands to the zero polynomial.
  [[nodiscard]] bool is_exactly_zero() const;

  friend DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator*(const Expr& f, const DifferentialForm& a);

 private:
  int dim_ = 0;
  int degree_ = 0;
  Domain domain_;
  std::map<MultiIndex, Expr> coeffs_;
};

/// Returns the zero form of degree k + l when k + l exceeds the dimension.
[[nodiscard]] DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
[[nodiscard]] DifferentialForm exterior_d(const DifferentialForm& a);
/// Throws DegreeUnderflow on 0-forms.
[[nodiscard]] DifferentialForm iota(const VectorField& v, const DifferentialForm& a);
/// ι_v dα + d ι_v α; on functions this is df(v).
[[nodiscard]] DifferentialForm lie_derivative(const VectorField& v, const DifferentialForm& a);
/// f*α for f : R^m ⊇ U → R^n.
[[nodiscard]] DifferentialForm pullback(const SmoothMap& f, const DifferentialForm& a);

/// df(x)(w) read off the tangent map: the velocity of Tf(x, w).
[[nodiscard]] double differential_via_tangent_map(const Expr& f, int dim, std::span<const double> x,
                                                  std::span<const double> w);

/// 𝓛_vα(x; w1..wk) from tangent maps alone: the derivative of α(·; w) along
/// v(x) plus Σ_i α(x; …, Dv(x)w_i, …), both computed with one-tag jets.
[[nodiscard]] double lie_derivative_pointwise(const VectorField& v, const DifferentialForm& a,
                                              std::span<const double> x, const std::vector<Vec>& ws);

struct CartanCorpus {
  std::vector<VectorField> fields;
  std::vector<DifferentialForm> forms;
};

/// The six graded commutator relations on random forms, fields, points and
/// arguments from the corpus, plus the exact d² = 0 check on polynomial forms.
[[nodiscard]] std::vector<AxiomReport> cartan_suite(const CartanCorpus& corpus, const CheckConfig& cfg);

/// Categorical vs coordinate bracket on every field pair of equal dimension,
/// with the kernel condition tracked separately.
[[nodiscard]] std::vector<AxiomReport> bracket_suite(const std::vector<VectorField>& fields, const CheckConfig& cfg,
                                                     int points = 200);

/// [u,[v,w]] + [v,[w,u]] + [w,[u,v]] = 0 on random field triples.
[[nodiscard]] AxiomReport jacobi_check(const std::vector<VectorField>& fields, const CheckConfig& cfg);

/// pr₂∘Tf against the coefficient-level df on every 0-form.
[[nodiscard]] AxiomReport differential_two_path_check(const CartanCorpus& corpus, const CheckConfig& cfg);

}  // namespace tanflow
