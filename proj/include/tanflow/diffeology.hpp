#pragma once

// Finitely presented diffeological spaces embedded in an ambient R^N, tangent
// classes as the colimit of TU over a finite set of plots and identification
// generators, and probes for the elasticity comparison maps θ_k.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tanflow/check.hpp"
#include "tanflow/expr.hpp"
#include "tanflow/smooth_map.hpp"

namespace tanflow {

/// A condition on ambient points that the image of every plot must satisfy.
struct Constraint {
  enum class Kind { Equal, NonNegative, Positive };
  Kind kind = Kind::Equal;
  Expr g;  // in the ambient coordinates x1..xN
};

struct Plot {
  std::string name;
  SmoothMap map;  // U ⊆ R^d → ambient R^N

  [[nodiscard]] int dim() const noexcept { return map.arity_in(); }
};

/// A morphism of plots h : dom p → dom q with q∘h = p over the carrier; it
/// identifies (p, u, w) with (q, h(u), Dh(u) w).
struct Identification {
  std::string name;
  std::string from;
  std::string to;
  SmoothMap h;
  std::optional<SmoothMap> inverse;
};

/// Representative (p, u, w_1..w_k) of an element of the colimit of T_kU. With
/// one vector it is a tangent class; with several, a tangent tuple on a common
/// plot.
struct TangentRep {
  std::string plot;
  Vec point;
  std::vector<Vec> vectors;
};

class DiffSpace;

/// A function on tangent representatives that is constant along every
/// identification generator, so differing values separate classes.
struct InvariantCertificate {
  std::string name;
  std::string reason;
  std::function<double(const DiffSpace&, const TangentRep&)> value;
};

struct PlotVerdict {
  bool is_plot = true;
  double worst = 0.0;  // largest violation seen
  std::string reason;  // first violation, if any
};

/// Sampling of plot domains: `per_axis` points per coordinate on
/// [-radius, radius]^d, clipped to the plot's domain.
struct GridSpec {
  int per_axis = 9;
  double radius = 1.0;
};

[[nodiscard]] std::vector<Vec> domain_grid(const Domain& domain, GridSpec grid);

class DiffSpace {
 public:
  DiffSpace(std::string name, int ambient_dim);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] int ambient_dim() const noexcept { return ambient_; }

  DiffSpace& constrain(Constraint::Kind kind, Expr g);
  /// Plots must have Jacobian rank at most r at every sampled point.
  DiffSpace& restrict_rank(int r);
  /// Points of the carrier are ambient points up to this map (default: none).
  DiffSpace& set_normal_form(std::function<Vec(const Vec&)> nf, std::string description);
  DiffSpace& add_plot(Plot p);
  DiffSpace& add_identification(Identification id);
  DiffSpace& add_certificate(InvariantCertificate c);
  /// A base point used by probes that need one.
  DiffSpace& set_base_point(Vec x);

  [[nodiscard]] const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
  [[nodiscard]] std::optional<int> rank_bound() const noexcept { return rank_bound_; }
  [[nodiscard]] const std::vector<Plot>& plots() const noexcept { return plots_; }
  [[nodiscard]] const std::vector<Identification>& identifications() const noexcept { return idents_; }
  [[nodiscard]] const std::vector<InvariantCertificate>& certificates() const noexcept { return certificates_; }
  [[nodiscard]] const Vec& base_point() const noexcept { return base_point_; }
  [[nodiscard]] const std::string& normal_form_description() const noexcept { return nf_description_; }

  [[nodiscard]] const Plot& plot(const std::string& name) const;
  [[nodiscard]] Vec normal_form(const Vec& x) const;
  /// Carrier point p(u) in normal form.
  [[nodiscard]] Vec image(const std::string& plot, const Vec& u) const;

  /// Violation of the constraints at an ambient point (0 when satisfied).
  [[nodiscard]] double violation(const Vec& x) const;
  /// Decides on a sample grid whether `p` is a plot, within 1e-9.
  [[nodiscard]] PlotVerdict check_plot(const SmoothMap& p, GridSpec grid = {}) const;

  /// Every generating plot satisfies the predicate and every identification
  /// commutes over the carrier on the grid; throws CorpusViolation otherwise.
  void validate(GridSpec grid = {}) const;

 private:
  std::string name_;
  int ambient_;
  std::vector<Constraint> constraints_;
  std::optional<int> rank_bound_;
  std::function<Vec(const Vec&)> nf_;
  std::string nf_description_ = "identity";
  std::vector<Plot> plots_;
  std::vector<Identification> idents_;
  std::vector<InvariantCertificate> certificates_;
  Vec base_point_;
};

struct SpaceParams {
  int n = 2;
  int k = 1;
  int r = 1;
  std::optional<Expr> f;  // cusp squeeze function of x1
};

/// euclidean(n), axis_cross, folded_line, half_line, corner(n, k), wedge,
/// cusp(f), pasta(n, r), gl(n). Throws UnknownSpace for other names.
[[nodiscard]] DiffSpace builtin_space(const std::string& name, const SpaceParams& params = {});
[[nodiscard]] std::vector<std::string> builtin_space_names();

/// |Σ w_i| for folded-line style quotients by sign changes: the differential
/// of every generator is ±1, so the absolute fiberwise sum is invariant.
[[nodiscard]] InvariantCertificate fiberwise_sum_certificate();

// ---------------------------------------------------------------------------

struct ChainStep {
  std::string generator;
  bool inverse = false;
};

struct EquivalenceResult {
  enum class Verdict { Equivalent, Separated, Unknown };
  Verdict verdict = Verdict::Unknown;
  std::vector<ChainStep> chain;
  std::string certificate;
  double value_a = 0.0;
  double value_b = 0.0;
  int explored = 0;
  bool budget_exhausted = false;
};

[[nodiscard]] std::string to_string(EquivalenceResult::Verdict v);

/// Bounded breadth-first search over generator applications from `a`; when b
/// is not reached, registered certificates and the base point are compared.
[[nodiscard]] EquivalenceResult equivalent_tangent(const DiffSpace& space, const TangentRep& a, const TangentRep& b,
                                                   int budget = 1000);

/// Applies one chain step to a representative.
[[nodiscard]] TangentRep apply_step(const DiffSpace& space, const TangentRep& rep, const ChainStep& step);

/// Largest change of any certificate along any generator over `samples`
/// random representatives per generator and tuple size 1 and 2.
[[nodiscard]] AxiomReport certificate_soundness(const DiffSpace& space, const CheckConfig& cfg, int samples = 50);

// ---------------------------------------------------------------------------

/// The searched family: polynomial maps R^k → ambient of total degree at most
/// `degree` (0: 6 for k ≤ 2, 3 above), constraints enforced on `grid`;
/// `budget` random restarts of a Levenberg–Marquardt solve.
struct PlotFamily {
  int degree = 0;
  GridSpec grid{0, 1.0};  // per_axis 0: 13 for k ≤ 2, 7 for k = 3
  int budget = 8;
  int max_iterations = 200;
};

struct SurjectivityResult {
  bool found = false;
  std::optional<SmoothMap> witness;
  std::vector<double> residual_curve;  // best constraint residual after each restart
  double best_residual = 0.0;
  PlotFamily family;
  int grid_points = 0;
};

/// Looks for one plot p with p(0) = x and ∂p/∂t^i(0) = targets[i].
[[nodiscard]] SurjectivityResult theta_surjectivity_probe(const DiffSpace& space, const Vec& x,
                                                          const std::vector<Vec>& targets, PlotFamily family = {},
                                                          std::uint64_t seed = 42);

struct RankBoundResult {
  int candidates = 0;
  int constrained = 0;  // candidates meeting the constraints to 1e-9
  double max_sigma = 0.0;  // largest σ_{rank+1} of Dp(0) among constrained candidates
  double bound = 1e-6;
  bool holds = true;
  PlotFamily family;
};

/// Random polynomial candidates through x with ‖Dp(0)‖_F = 1, solved onto the
/// constraints; records σ_{rank+1}(Dp(0)) for every candidate that satisfies
/// them.
[[nodiscard]] RankBoundResult constrained_rank_bound(const DiffSpace& space, const Vec& x, int k, int rank,
                                                     PlotFamily family = {}, int candidates = 24,
                                                     std::uint64_t seed = 42);

// ---------------------------------------------------------------------------

struct HalfLineResult {
  double x = 0.0;
  int dimension = 0;
  bool vacuous = false;
  std::vector<double> max_derivative;  // orders 1..4 at preimages of x
  bool flat_through_order_4 = true;
  int preimages = 0;
  std::optional<SmoothMap> witness;
  std::vector<std::string> non_flat_plots;
};

/// Fiber dimension of T_x[0,∞) from a corpus of plots R → R through x.
/// Throws CorpusViolation if a member takes negative values on the grid.
[[nodiscard]] HalfLineResult half_line_tangent_probe(double x, const std::vector<Plot>& corpus, GridSpec grid = {});

struct RetractResult {
  bool pass = true;
  double worst_identity = 0.0;  // max |r(i(a)) - a|
  double worst_plot = 0.0;      // largest predicate violation of i∘p or r∘q
  std::string witness;
  int points = 0;
  int skipped = 0;  // sample points outside the domain of i or r
  int non_differentiable = 0;  // samples where i∘p or r∘q has no first-order jet
};

/// r∘i = id on images of A's plots, i maps A's plots to plots of B, and r
/// maps B's plots to plots of A.
[[nodiscard]] RetractResult retract_check(const DiffSpace& a, const DiffSpace& b, const SmoothMap& i,
                                          const SmoothMap& r, GridSpec grid = {});

/// Left trivialization of TGL(n): φ(g, v) = Tm(0_g, v_e), φ⁻¹(v_g) = T L_{g⁻¹} v_g.
[[nodiscard]] AxiomReport group_trivialization_check(int n, const CheckConfig& cfg);

/// Matrix multiplication R^{n²} × R^{n²} → R^{n²}, row-major.
[[nodiscard]] SmoothMap matrix_multiplication(int n);

}  // namespace tanflow
