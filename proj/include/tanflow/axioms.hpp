#pragma once

// Numerical verification of the tangent-structure axioms and of the scalar
// multiplication diagrams against any implementation of TangentOps.

#include <memory>
#include <string>
#include <vector>

#include "tanflow/check.hpp"
#include "tanflow/smooth_map.hpp"
#include "tanflow/tangent.hpp"

namespace tanflow {

/// The operations a tangent structure on euclidean opens must provide.
class TangentOps {
 public:
  virtual ~TangentOps() = default;

  [[nodiscard]] virtual std::string name() const = 0;

  [[nodiscard]] virtual TanVec pushforward_T(const SmoothMap& f, const TanVec& xi) const = 0;
  [[nodiscard]] virtual Tan2 pushforward_T2(const SmoothMap& f, const Tan2& xi) const = 0;
  [[nodiscard]] virtual TanK pushforward_Tk(const SmoothMap& f, const TanK& xi) const = 0;

  [[nodiscard]] virtual Vec pi(const TanVec& xi) const = 0;
  [[nodiscard]] virtual TanVec zero(const Vec& u) const = 0;
  [[nodiscard]] virtual TanVec add(const TanK& xi) const = 0;
  [[nodiscard]] virtual Tan2 lambda(const TanVec& xi) const = 0;
  [[nodiscard]] virtual Tan2 tau(const Tan2& xi) const = 0;
  [[nodiscard]] virtual TanVec kappa(double r, const TanVec& xi) const = 0;
  [[nodiscard]] virtual Tan2 lambda2(const TanK& xi) const = 0;
  [[nodiscard]] virtual TanK lambda2_inverse(const Tan2& xi) const = 0;
  [[nodiscard]] virtual TanK nu(const TanVec& xi, int n) const = 0;
  [[nodiscard]] virtual TanVec nu_inverse(const TanK& xi) const = 0;
  [[nodiscard]] virtual TanVec proj_piT(const Tan2& xi) const = 0;
  [[nodiscard]] virtual TanVec proj_Tpi(const Tan2& xi) const = 0;
};

/// The euclidean tangent structure, computed with jets.
class EuclideanTangentOps : public TangentOps {
 public:
  [[nodiscard]] std::string name() const override { return "euclidean"; }
  [[nodiscard]] TanVec pushforward_T(const SmoothMap& f, const TanVec& xi) const override;
  [[nodiscard]] Tan2 pushforward_T2(const SmoothMap& f, const Tan2& xi) const override;
  [[nodiscard]] TanK pushforward_Tk(const SmoothMap& f, const TanK& xi) const override;
  [[nodiscard]] Vec pi(const TanVec& xi) const override;
  [[nodiscard]] TanVec zero(const Vec& u) const override;
  [[nodiscard]] TanVec add(const TanK& xi) const override;
  [[nodiscard]] Tan2 lambda(const TanVec& xi) const override;
  [[nodiscard]] Tan2 tau(const Tan2& xi) const override;
  [[nodiscard]] TanVec kappa(double r, const TanVec& xi) const override;
  [[nodiscard]] Tan2 lambda2(const TanK& xi) const override;
  [[nodiscard]] TanK lambda2_inverse(const Tan2& xi) const override;
  [[nodiscard]] TanK nu(const TanVec& xi, int n) const override;
  [[nodiscard]] TanVec nu_inverse(const TanK& xi) const override;
  [[nodiscard]] TanVec proj_piT(const Tan2& xi) const override;
  [[nodiscard]] TanVec proj_Tpi(const Tan2& xi) const override;
};

/// Negative control: the euclidean structure with τ replaced by the identity.
class CorruptedTauOps final : public EuclideanTangentOps {
 public:
  [[nodiscard]] std::string name() const override { return "euclidean-corrupted-tau"; }
  [[nodiscard]] Tan2 tau(const Tan2& xi) const override { return xi; }
};

// Whiskered structure maps on T³, built from the ops so that a faulty τ or λ
// shows up in every composite.

/// τ_{TU}: exchanges tags 2 and 3.
[[nodiscard]] Tan3 tau_T(const TangentOps& ops, const Tan3& xi);
/// T(τ_U): exchanges tags 1 and 2.
[[nodiscard]] Tan3 T_tau(const TangentOps& ops, const Tan3& xi);
/// λ_{TU}: T²U = T(TU) → T²(TU).
[[nodiscard]] Tan3 lambda_T(const TangentOps& ops, const Tan2& xi);
/// T(λ_U): T(TU) → T(T²U).
[[nodiscard]] Tan3 T_lambda(const TangentOps& ops, const Tan2& xi);

/// Scalar multiplication of T(TU) over TU: (u, u0, r u1, r u01).
[[nodiscard]] Tan2 kappa_T(const TangentOps& ops, double r, const Tan2& xi);
/// T(κ_U) at (r, 0) ∈ TR: (u, r u0, u1, r u01).
[[nodiscard]] Tan2 T_kappa(const TangentOps& ops, double r, const Tan2& xi);

/// The braid relation τ12 τ23 τ12 = τ23 τ12 τ23 as permutations of the
/// subset labels of {1,2,3}, with τ12 = Tτ and τ23 = τT.
[[nodiscard]] bool braid_permutations_agree();

[[nodiscard]] AxiomReport check_bundle_abelian_group(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                                     const CheckConfig& cfg);
[[nodiscard]] AxiomReport check_symmetric_structure(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                                    const CheckConfig& cfg);
[[nodiscard]] AxiomReport check_vertical_lift(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                              const CheckConfig& cfg);
[[nodiscard]] AxiomReport check_lift_symmetry(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                              const CheckConfig& cfg);
[[nodiscard]] AxiomReport check_kernel_pullback(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                                const CheckConfig& cfg);
[[nodiscard]] AxiomReport check_scalar_mult(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                            const CheckConfig& cfg);
[[nodiscard]] AxiomReport check_naturality(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                           const CheckConfig& cfg);
[[nodiscard]] AxiomReport check_fiber_products(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                               const CheckConfig& cfg);
[[nodiscard]] AxiomReport check_functoriality(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                              const CheckConfig& cfg);

/// Every check above, in a fixed order.
[[nodiscard]] std::vector<AxiomReport> run_axiom_suite(const TangentOps& ops, const std::vector<SmoothMap>& corpus,
                                                       const CheckConfig& cfg);

}  // namespace tanflow
