#include "tanflow/cartan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tanflow/errors.hpp"
#include "tanflow/rng.hpp"

namespace tanflow {

// ---------------------------------------------------------------------------
// Vector fields
// ---------------------------------------------------------------------------

VectorField::VectorField(std::string name, std::vector<Expr> components, Domain domain)
    : name_(std::move(name)), components_(std::move(components)), domain_(std::move(domain)) {
  const int n = dim();
  if (domain_.dim() == 0 && n > 0) domain_ = Domain(n);
  if (domain_.dim() != n) throw std::invalid_argument("field " + name_ + ": domain dimension mismatch");
  for (const Expr& c : components_) {
    if (c.max_var_index() >= n) throw std::invalid_argument("field " + name_ + " uses a variable beyond x" + std::to_string(n));
  }
}

bool VectorField::is_polynomial() const {
  return std::all_of(components_.begin(), components_.end(), [](const Expr& e) { return e.is_polynomial(); });
}

SmoothMap VectorField::velocity() const { return SmoothMap(name_, dim(), components_, domain_); }

SmoothMap VectorField::section() const {
  std::vector<Expr> out;
  for (int i = 0; i < dim(); ++i) out.push_back(Expr::var(i));
  out.insert(out.end(), components_.begin(), components_.end());
  return SmoothMap("s_" + name_, dim(), std::move(out), domain_);
}

Vec VectorField::operator()(std::span<const double> x) const { return velocity()(x); }

std::vector<Jet> VectorField::eval(std::span<const Jet> x) const { return velocity().eval(x); }

VectorField vf_add(const VectorField& v, const VectorField& w) {
  if (v.dim() != w.dim()) throw std::invalid_argument("vf_add: dimension mismatch");
  std::vector<Expr> out;
  for (int i = 0; i < v.dim(); ++i) out.push_back(v.components()[i] + w.components()[i]);
  return VectorField(v.name() + "+" + w.name(), std::move(out), v.domain().intersect(w.domain()));
}

VectorField vf_module_action(const Expr& f, const VectorField& v) {
  // κ(f(x), v(x)) applied componentwise; the base is untouched.
  BasicTanVec<Expr> xi{{}, v.components()};
  for (int i = 0; i < v.dim(); ++i) xi.base.push_back(Expr::var(i));
  return VectorField("f*" + v.name(), nt_kappa(f, xi).vel, v.domain());
}

// ---------------------------------------------------------------------------
// Brackets
// ---------------------------------------------------------------------------

namespace {

template <class S>
std::vector<S> categorical_bracket(const VectorField& v, const VectorField& w, const std::vector<S>& x,
                                   const std::vector<S>& vx, const std::vector<S>& wx, double tolerance,
                                   double* gap) {
  // ξ = T(w) ∘ v and η = τ ∘ T(v) ∘ w, both over (x, w(x)) for πT.
  const BasicTan2<S> xi = from_tangent_of_tangent(pushforward_T(w.section(), BasicTanVec<S>{x, vx}));
  const BasicTan2<S> eta = nt_tau(from_tangent_of_tangent(pushforward_T(v.section(), BasicTanVec<S>{x, wx})));
  const BasicTan2<S> delta = subtract_over_piT(xi, eta);
  if (gap != nullptr) *gap = kernel_gap(delta);
  return nt_lambda2_inverse(delta, tolerance).fibers[1];
}

std::vector<Jet> bracket_jets(const VectorField& v, const VectorField& w, std::span<const Jet> x, double tolerance,
                              double* gap) {
  const std::vector<Jet> xs(x.begin(), x.end());
  return categorical_bracket<Jet>(v, w, xs, v.eval(x), w.eval(x), tolerance, gap);
}

class BracketFunction final : public JetFunction {
 public:
  BracketFunction(VectorField v, VectorField w, int component, double tolerance)
      : v_(std::move(v)), w_(std::move(w)), component_(component), tolerance_(tolerance) {}

  [[nodiscard]] int arity() const override { return v_.dim(); }
  [[nodiscard]] Jet eval(std::span<const Jet> x) const override {
    return bracket_jets(v_, w_, x, tolerance_, nullptr)[static_cast<std::size_t>(component_)];
  }
  [[nodiscard]] std::string name() const override {
    return "[" + v_.name() + "," + w_.name() + "]_" + std::to_string(component_ + 1);
  }

 private:
  VectorField v_;
  VectorField w_;
  int component_;
  double tolerance_;
};

void require_same_dim(const VectorField& v, const VectorField& w) {
  if (v.dim() != w.dim()) throw std::invalid_argument("fields " + v.name() + " and " + w.name() + " differ in dimension");
}

std::vector<Expr> variables(int n) {
  std::vector<Expr> x;
  for (int i = 0; i < n; ++i) x.push_back(Expr::var(i));
  return x;
}

}  // namespace

VectorField bracket_categorical(const VectorField& v, const VectorField& w, double kernel_tolerance) {
  require_same_dim(v, w);
  const std::string name = "[" + v.name() + "," + w.name() + "]";
  const Domain domain = v.domain().intersect(w.domain());
  if (v.is_polynomial() && w.is_polynomial()) {
    const std::vector<Expr> x = variables(v.dim());
    return VectorField(name,
                       categorical_bracket<Expr>(v, w, x, v.components(), w.components(), kernel_tolerance, nullptr),
                       domain);
  }
  std::vector<Expr> comps;
  for (int j = 0; j < v.dim(); ++j) comps.push_back(Expr::call(std::make_shared<BracketFunction>(v, w, j, kernel_tolerance)));
  return VectorField(name, std::move(comps), domain);
}

BracketSample bracket_categorical_at(const VectorField& v, const VectorField& w, std::span<const double> x) {
  require_same_dim(v, w);
  const std::vector<Jet> jx(x.begin(), x.end());
  BracketSample out;
  const std::vector<Jet> r = bracket_jets(v, w, jx, HUGE_VAL, &out.kernel_gap);
  for (const Jet& j : r) out.value.push_back(j.value());
  return out;
}

VectorField bracket_coordinate(const VectorField& v, const VectorField& w) {
  require_same_dim(v, w);
  const int n = v.dim();
  auto partial = [n](const Expr& e, const std::string& name, int i) {
    return Expr::call(partial_of(std::make_shared<ExprFunction>(e, n, name), i));
  };
  std::vector<Expr> comps;
  for (int j = 0; j < n; ++j) {
    const Expr& wj = w.components()[static_cast<std::size_t>(j)];
    const Expr& vj = v.components()[static_cast<std::size_t>(j)];
    Expr c(0.0);
    for (int i = 0; i < n; ++i) {
      c += v.components()[static_cast<std::size_t>(i)] * partial(wj, w.name() + "_" + std::to_string(j + 1), i);
      c -= w.components()[static_cast<std::size_t>(i)] * partial(vj, v.name() + "_" + std::to_string(j + 1), i);
    }
    comps.push_back(c);
  }
  return VectorField("[" + v.name() + "," + w.name() + "]_coord", std::move(comps), v.domain().intersect(w.domain()));
}

// ---------------------------------------------------------------------------
// Forms
// ---------------------------------------------------------------------------

namespace {

double determinant(std::vector<Vec> m) {
  const std::size_t k = m.size();
  double det = 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[pivot][c])) pivot = r;
    }
    if (m[pivot][c] == 0.0) return 0.0;
    if (pivot != c) {
      std::swap(m[pivot], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < k; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t j = c; j < k; ++j) m[r][j] -= f * m[c][j];
    }
  }
  return det;
}

// Minor det[w_j^{i}] for rows i in `index`.
double minor_det(const MultiIndex& index, const std::vector<Vec>& ws) {
  std::vector<Vec> m(index.size(), Vec(ws.size()));
  for (std::size_t r = 0; r < index.size(); ++r) {
    for (std::size_t c = 0; c < ws.size(); ++c) m[r][c] = ws[c][static_cast<std::size_t>(index[r])];
  }
  return determinant(std::move(m));
}

// All increasing k-subsets of {0..n-1}.
std::vector<MultiIndex> subsets(int n, int k) {
  std::vector<MultiIndex> out;
  if (k < 0 || k > n) return out;
  MultiIndex cur(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

}  // namespace

DifferentialForm::DifferentialForm(int dim, int degree, Domain domain)
    : dim_(dim), degree_(degree), domain_(std::move(domain)) {
  if (dim < 0 || degree < 0) throw std::invalid_argument("negative form dimension or degree");
  if (domain_.dim() == 0 && dim_ > 0) domain_ = Domain(dim_);
  if (domain_.dim() != dim_) throw std::invalid_argument("form domain dimension mismatch");
}

DifferentialForm DifferentialForm::function(int dim, Expr f, Domain domain) {
  DifferentialForm out(dim, 0, std::move(domain));
  out.add_term({}, f);
  return out;
}

Expr DifferentialForm::coefficient(const MultiIndex& index) const {
  const auto it = coeffs_.find(index);
  return it == coeffs_.end() ? Expr(0.0) : it->second;
}

void DifferentialForm::add_term(MultiIndex index, const Expr& c) {
  if (static_cast<int>(index.size()) != degree_) throw std::invalid_argument("form index has the wrong length");
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= dim_ || (i > 0 && index[i] <= index[i - 1])) {
      throw std::invalid_argument("form index must be strictly increasing within the dimension");
    }
  }
  if (c.max_var_index() >= dim_) throw std::invalid_argument("form coefficient uses a variable beyond the dimension");
  const auto it = coeffs_.find(index);
  const Expr sum = it == coeffs_.end() ? c : it->second + c;
  if (sum.is_constant(0.0)) {
    if (it != coeffs_.end()) coeffs_.erase(it);
  } else {
    coeffs_[std::move(index)] = sum;
  }
}

double DifferentialForm::evaluate(std::span<const double> x, const std::vector<Vec>& ws) const {
  if (static_cast<int>(ws.size()) != degree_) throw std::invalid_argument("form evaluated on the wrong number of vectors");
  if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("form evaluated at a point of the wrong dimension");
  if (!domain_.contains(x)) throw DomainError("point outside the domain of the form");
  double out = 0.0;
  for (const auto& [index, c] : coeffs_) out += c.eval(x) * minor_det(index, ws);
  return out;
}

bool DifferentialForm::is_polynomial() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const auto& kv) { return kv.second.is_polynomial(); });
}

bool DifferentialForm::is_exactly_zero() const {
  for (const auto& [index, c] : coeffs_) {
    if (!c.is_polynomial()) return false;
    if (!expand_polynomial(c, dim_).empty()) return false;
  }
  return true;
}

namespace {

void require_compatible(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) throw std::invalid_argument("forms of different type");
}

}  // namespace

DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
  require_compatible(a, b);
  DifferentialForm out(a.dim(), a.degree(), a.domain().intersect(b.domain()));
  for (const auto& [i, c] : a.coeffs_) out.add_term(i, c);
  for (const auto& [i, c] : b.coeffs_) out.add_term(i, c);
  return out;
}

DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) {
  require_compatible(a, b);
  DifferentialForm out(a.dim(), a.degree(), a.domain().intersect(b.domain()));
  for (const auto& [i, c] : a.coeffs_) out.add_term(i, c);
  for (const auto& [i, c] : b.coeffs_) out.add_term(i, -c);
  return out;
}

DifferentialForm operator*(const Expr& f, const DifferentialForm& a) {
  DifferentialForm out(a.dim(), a.degree(), a.domain());
  for (const auto& [i, c] : a.coeffs_) out.add_term(i, f * c);
  return out;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("wedge of forms on different spaces");
  DifferentialForm out(a.dim(), a.degree() + b.degree(), a.domain().intersect(b.domain()));
  if (out.degree() > out.dim()) return out;
  for (const auto& [I, ca] : a.coefficients()) {
    for (const auto& [J, cb] : b.coefficients()) {
      MultiIndex K;
      std::set_union(I.begin(), I.end(), J.begin(), J.end(), std::back_inserter(K));
      if (K.size() != I.size() + J.size()) continue;
      int inversions = 0;
      for (int i : I) {
        for (int j : J) inversions += i > j ? 1 : 0;
      }
      const Expr term = ca * cb;
      out.add_term(std::move(K), inversions % 2 == 0 ? term : -term);
    }
  }
  return out;
}

DifferentialForm exterior_d(const DifferentialForm& a) {
  DifferentialForm out(a.dim(), a.degree() + 1, a.domain());
  if (out.degree() > out.dim()) return out;
  for (const auto& [I, c] : a.coefficients()) {
    for (int p = 0; p < a.dim(); ++p) {
      if (std::binary_search(I.begin(), I.end(), p)) continue;
      const Expr dc = c.derivative(p);
      if (dc.is_constant(0.0)) continue;
      MultiIndex K = I;
      const auto pos = std::lower_bound(K.begin(), K.end(), p);
      const auto before = pos - K.begin();
      K.insert(pos, p);
      out.add_term(std::move(K), before % 2 == 0 ? dc : -dc);
    }
  }
  return out;
}

DifferentialForm iota(const VectorField& v, const DifferentialForm& a) {
  if (a.degree() == 0) throw DegreeUnderflow("inner derivative of a 0-form");
  if (v.dim() != a.dim()) throw std::invalid_argument("field and form live on different spaces");
  DifferentialForm out(a.dim(), a.degree() - 1, a.domain().intersect(v.domain()));
  for (const auto& [I, c] : a.coefficients()) {
    for (std::size_t r = 0; r < I.size(); ++r) {
      MultiIndex J = I;
      J.erase(J.begin() + static_cast<std::ptrdiff_t>(r));
      const Expr term = v.components()[static_cast<std::size_t>(I[r])] * c;
      out.add_term(std::move(J), r % 2 == 0 ? term : -term);
    }
  }
  return out;
}

DifferentialForm lie_derivative(const VectorField& v, const DifferentialForm& a) {
  if (a.degree() == 0) return iota(v, exterior_d(a));
  return iota(v, exterior_d(a)) + exterior_d(iota(v, a));
}

DifferentialForm pullback(const SmoothMap& f, const DifferentialForm& a) {
  if (f.arity_out() != a.dim()) throw std::invalid_argument("pullback along a map with the wrong target");
  const int m = f.arity_in();
  const int k = a.degree();
  const SmoothMap indicator("dom", a.dim(), variables(a.dim()), a.domain());
  DifferentialForm out(m, k, indicator.compose(f).domain());
  if (k > m) return out;
  std::vector<std::vector<Expr>> jac(static_cast<std::size_t>(a.dim()));
  for (int i = 0; i < a.dim(); ++i) {
    for (int j = 0; j < m; ++j) jac[static_cast<std::size_t>(i)].push_back(f.outputs()[static_cast<std::size_t>(i)].derivative(j));
  }
  const auto targets = subsets(m, k);
  for (const auto& [I, c] : a.coefficients()) {
    const Expr cf = c.substitute(f.outputs());
    for (const MultiIndex& J : targets) {
      std::vector<std::vector<Expr>> minor;
      for (int i : I) {
        std::vector<Expr> row;
        for (int j : J) row.push_back(jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        minor.push_back(std::move(row));
      }
      const Expr det = determinant(minor);
      if (det.is_constant(0.0)) continue;
      out.add_term(J, cf * det);
    }
  }
  return out;
}

double differential_via_tangent_map(const Expr& f, int dim, std::span<const double> x, std::span<const double> w) {
  const SmoothMap map("f", dim, {f});
  return pushforward_T(map, TanVec{Vec(x.begin(), x.end()), Vec(w.begin(), w.end())}).vel[0];
}

double lie_derivative_pointwise(const VectorField& v, const DifferentialForm& a, std::span<const double> x,
                                const std::vector<Vec>& ws) {
  const Vec vx = v(x);
  std::vector<Jet> moving;
  for (std::size_t i = 0; i < x.size(); ++i) moving.push_back(Jet::from_components({x[i], vx[i]}));
  double out = 0.0;
  for (const auto& [I, c] : a.coefficients()) out += c.eval(moving)[1] * minor_det(I, ws);
  const SmoothMap vel = v.velocity();
  for (std::size_t i = 0; i < ws.size(); ++i) {
    std::vector<Vec> args = ws;
    args[i] = pushforward_T(vel, TanVec{Vec(x.begin(), x.end()), ws[i]}).vel;
    out += a.evaluate(x, args);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

namespace {

std::vector<Vec> random_vectors(int count, int n, Rng& rng) {
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_vector(n, rng, 1.0));
  return out;
}

template <class T>
std::vector<const T*> of_dim(const std::vector<T>& items, int n) {
  std::vector<const T*> out;
  for (const T& it : items) {
    if (it.dim() == n) out.push_back(&it);
  }
  return out;
}

std::string sample_text(const std::string& what, std::span<const double> x) { return what + " at " + format_vec(x); }

}  // namespace

std::vector<AxiomReport> cartan_suite(const CartanCorpus& corpus, const CheckConfig& cfg) {
  const double tol = std::max(cfg.tol_abs, 1e-8);
  const double rel = std::max(cfg.tol_rel, 1e-8);
  ResidualTracker dd("dd_zero", tol, rel);
  ResidualTracker exact("dd_exact_polynomial", 0.0, 0.0);
  ResidualTracker ii("iota_iota", tol, rel);
  ResidualTracker id("iota_d_is_lie", tol, rel);
  ResidualTracker ld("lie_d", tol, rel);
  ResidualTracker li("lie_iota_bracket", tol, rel);
  ResidualTracker ll("lie_lie_bracket", tol, rel);

  int polynomial_forms = 0;
  for (const DifferentialForm& a : corpus.forms) {
    if (!a.is_polynomial()) continue;
    ++polynomial_forms;
    exact.sample();
    exact.record(exterior_d(exterior_d(a)).is_exactly_zero() ? 0.0 : HUGE_VAL,
                 [] { return std::string("d(dα) has a non-zero polynomial coefficient"); });
  }

  std::vector<const DifferentialForm*> usable;
  for (const DifferentialForm& a : corpus.forms) {
    if (!of_dim(corpus.fields, a.dim()).empty()) usable.push_back(&a);
  }
  if (usable.empty()) throw std::invalid_argument("cartan suite needs forms and fields of a common dimension");

  Rng rng(derive_seed(cfg.seed, "cartan"));
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const DifferentialForm& a = *usable[rng.index(usable.size())];
    const auto fields = of_dim(corpus.fields, a.dim());
    const VectorField& v = *fields[rng.index(fields.size())];
    const VectorField& w = *fields[rng.index(fields.size())];
    const Domain dom = a.domain().intersect(v.domain()).intersect(w.domain());
    const Vec x = sample_point(dom, rng);
    const int k = a.degree();
    const int n = a.dim();
    const auto ws = random_vectors(k, n, rng);
    const auto ws_up = random_vectors(k + 1, n, rng);
    const auto ws_down = random_vectors(std::max(k - 1, 0), n, rng);
    const auto ws_down2 = random_vectors(std::max(k - 2, 0), n, rng);
    const auto w1 = [&] { return sample_text(v.name() + ", " + w.name() + " on a form of degree " + std::to_string(k), x); };

    // [d, d] = 2 d² = 0
    if (k + 2 <= n) {
      dd.sample();
      const auto ws2 = random_vectors(k + 2, n, rng);
      dd.compare(2.0 * exterior_d(exterior_d(a)).evaluate(x, ws2), 0.0, w1);
    }

    // [𝓛_v, d] = 𝓛_v d − d 𝓛_v = 0
    if (k + 1 <= n) {
      ld.sample();
      ld.compare(lie_derivative(v, exterior_d(a)).evaluate(x, ws_up), exterior_d(lie_derivative(v, a)).evaluate(x, ws_up),
                 w1);
    }

    // [ι_v, d] = ι_v d + d ι_v against 𝓛_v from tangent maps
    id.sample();
    {
      const double lhs = k == 0 ? iota(v, exterior_d(a)).evaluate(x, ws)
                                : (iota(v, exterior_d(a)) + exterior_d(iota(v, a))).evaluate(x, ws);
      id.compare(lhs, lie_derivative_pointwise(v, a, x, ws), w1);
    }

    const VectorField vw = bracket_categorical(v, w);

    // [𝓛_v, 𝓛_w] = 𝓛_{[v,w]}
    ll.sample();
    {
      const double lhs = lie_derivative(v, lie_derivative(w, a)).evaluate(x, ws) -
                         lie_derivative(w, lie_derivative(v, a)).evaluate(x, ws);
      ll.compare(lhs, lie_derivative(vw, a).evaluate(x, ws), w1);
    }

    if (k >= 1) {
      // [ι_v, ι_w] = ι_v ι_w + ι_w ι_v = 0
      if (k >= 2) {
        ii.sample();
        ii.compare(iota(v, iota(w, a)).evaluate(x, ws_down2) + iota(w, iota(v, a)).evaluate(x, ws_down2), 0.0, w1);
      }
      // [𝓛_v, ι_w] = ι_{[v,w]}
      li.sample();
      const double lhs = lie_derivative(v, iota(w, a)).evaluate(x, ws_down) - iota(w, lie_derivative(v, a)).evaluate(x, ws_down);
      li.compare(lhs, iota(vw, a).evaluate(x, ws_down), w1);
    }
  }
  const std::string on = " over " + std::to_string(cfg.trials) + " random (form, fields, point) samples";
  return {dd.report("[d,d] = 0" + on),
          exact.report("d² = 0 after polynomial expansion on " + std::to_string(polynomial_forms) + " forms"),
          ii.report("[ι_v,ι_w] = 0" + on),
          id.report("[ι_v,d] = 𝓛_v with 𝓛_v taken from tangent maps" + on),
          ld.report("[𝓛_v,d] = 0" + on),
          li.report("[𝓛_v,ι_w] = ι_[v,w]" + on),
          ll.report("[𝓛_v,𝓛_w] = 𝓛_[v,w]" + on)};
}

std::vector<AxiomReport> bracket_suite(const std::vector<VectorField>& fields, const CheckConfig& cfg, int points) {
  ResidualTracker poly("bracket_polynomial", cfg.tol_abs, cfg.tol_rel);
  ResidualTracker trans("bracket_transcendental", 1e-7, 1e-7);
  ResidualTracker kernel("bracket_kernel", 1e-10, 0.0);
  ResidualTracker symbolic("bracket_symbolic_output", cfg.tol_abs, cfg.tol_rel);
  int poly_pairs = 0;
  int trans_pairs = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      const VectorField& v = fields[i];
      const VectorField& w = fields[j];
      if (v.dim() != w.dim()) continue;
      const bool polynomial = v.is_polynomial() && w.is_polynomial();
      ResidualTracker& t = polynomial ? poly : trans;
      ++(polynomial ? poly_pairs : trans_pairs);
      const VectorField coord = bracket_coordinate(v, w);
      const VectorField cat = bracket_categorical(v, w);
      Rng rng(derive_seed(cfg.seed, "bracket:" + v.name() + "," + w.name()));
      const Domain dom = v.domain().intersect(w.domain());
      for (int p = 0; p < points; ++p) {
        t.sample();
        kernel.sample();
        const Vec x = sample_point(dom, rng);
        const auto text = [&] { return sample_text("[" + v.name() + "," + w.name() + "]", x); };
        const BracketSample s = bracket_categorical_at(v, w, x);
        const Vec c = coord(x);
        t.compare(s.value, c, text);
        kernel.record(s.kernel_gap, text);
        if (polynomial) {
          symbolic.sample();
          symbolic.compare(cat(x), c, text);
        }
      }
    }
  }
  return {poly.report(std::to_string(poly_pairs) + " polynomial pairs, " + std::to_string(points) + " points each"),
          trans.report(std::to_string(trans_pairs) + " transcendental pairs, " + std::to_string(points) + " points each"),
          kernel.report("largest |v1| of δ over every evaluation"),
          symbolic.report("expression-level bracket of polynomial pairs against the coordinate formula")};
}

AxiomReport jacobi_check(const std::vector<VectorField>& fields, const CheckConfig& cfg) {
  ResidualTracker t("jacobi", 1e-8, 1e-8);
  Rng rng(derive_seed(cfg.seed, "jacobi"));
  std::vector<int> dims;
  for (const auto& f : fields) {
    if (of_dim(fields, f.dim()).size() >= 2 && std::find(dims.begin(), dims.end(), f.dim()) == dims.end()) {
      dims.push_back(f.dim());
    }
  }
  if (dims.empty()) return t.report("no dimension with two or more fields");
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const auto pool = of_dim(fields, dims[rng.index(dims.size())]);
    const VectorField& u = *pool[rng.index(pool.size())];
    const VectorField& v = *pool[rng.index(pool.size())];
    const VectorField& w = *pool[rng.index(pool.size())];
    const Vec x = sample_point(u.domain().intersect(v.domain()).intersect(w.domain()), rng);
    t.sample();
    const Vec a = bracket_categorical(u, bracket_categorical(v, w))(x);
    const Vec b = bracket_categorical(v, bracket_categorical(w, u))(x);
    const Vec c = bracket_categorical(w, bracket_categorical(u, v))(x);
    Vec sum(a.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sum[i] = a[i] + b[i] + c[i];
      scale = std::max({scale, std::abs(a[i]), std::abs(b[i]), std::abs(c[i])});
    }
    for (double s : sum) {
      t.record(std::abs(s) / (1.0 + scale),
               [&] { return sample_text(u.name() + ", " + v.name() + ", " + w.name(), x); });
    }
  }
  return t.report("residual |sum| / (1 + largest term)");
}

AxiomReport differential_two_path_check(const CartanCorpus& corpus, const CheckConfig& cfg) {
  ResidualTracker t("df_two_path", cfg.tol_abs, cfg.tol_rel);
  Rng rng(derive_seed(cfg.seed, "df_two_path"));
  int functions = 0;
  for (const DifferentialForm& a : corpus.forms) {
    if (a.degree() != 0) continue;
    ++functions;
    const Expr f = a.coefficient({});
    const DifferentialForm df = exterior_d(a);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      t.sample();
      const Vec x = sample_point(a.domain(), rng);
      const Vec w = sample_vector(a.dim(), rng, 1.0);
      t.compare(df.evaluate(x, {w}), differential_via_tangent_map(f, a.dim(), x, w),
                [&] { return sample_text("df", x); });
    }
  }
  return t.report(std::to_string(functions) + " functions");
}

}  // namespace tanflow
