#include "tanflow/smooth_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tanflow/errors.hpp"

namespace tanflow {

namespace {

std::string describe_point(std::span<const double> x) {
  std::string out = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(x[i]);
  }
  return out + ")";
}

}  // namespace

Domain::Domain(int dim) : box_(static_cast<std::size_t>(dim)) {}

Domain::Domain(std::vector<Interval> box, std::vector<Expr> positive)
    : box_(std::move(box)), positive_(std::move(positive)) {
  for (const Interval& iv : box_) {
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("empty domain interval");
  }
}

bool Domain::is_whole_space() const {
  return positive_.empty() && std::all_of(box_.begin(), box_.end(), [](const Interval& iv) {
           return std::isinf(iv.lo) && std::isinf(iv.hi);
         });
}

bool Domain::contains(std::span<const double> x) const {
  if (x.size() != box_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > box_[i].lo && x[i] < box_[i].hi)) return false;
  }
  for (const Expr& g : positive_) {
    try {
      if (!(g.eval(x) > 0.0)) return false;
    } catch (const SingularEval&) {
      return false;
    }
  }
  return true;
}

Domain Domain::intersect(const Domain& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("domain dimension mismatch");
  std::vector<Interval> box(box_.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    box[i] = {std::max(box_[i].lo, other.box_[i].lo), std::min(box_[i].hi, other.box_[i].hi)};
  }
  std::vector<Expr> positive = positive_;
  positive.insert(positive.end(), other.positive_.begin(), other.positive_.end());
  return Domain(std::move(box), std::move(positive));
}

Vec sample_point(const Domain& domain, Rng& rng, SampleBox box) {
  const int n = domain.dim();
  std::vector<Interval> clipped(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Interval& iv = domain.box()[static_cast<std::size_t>(i)];
    const double lo = std::max(iv.lo, -box.radius) + box.margin;
    const double hi = std::min(iv.hi, box.radius) - box.margin;
    if (!(lo < hi)) throw DomainError("sampling box is empty");
    clipped[static_cast<std::size_t>(i)] = {lo, hi};
  }
  Vec x(static_cast<std::size_t>(n));
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (int i = 0; i < n; ++i) {
      const Interval& iv = clipped[static_cast<std::size_t>(i)];
      x[static_cast<std::size_t>(i)] = rng.uniform(iv.lo, iv.hi);
    }
    if (domain.contains(x)) return x;
  }
  throw DomainError("could not sample a point inside the domain");
}

Vec sample_vector(int n, Rng& rng, double scale) {
  Vec v(static_cast<std::size_t>(n));
  for (double& c : v) c = rng.uniform(-scale, scale);
  return v;
}

SmoothMap::SmoothMap(std::string name, int arity_in, std::vector<Expr> outputs, Domain domain)
    : name_(std::move(name)), arity_in_(arity_in), outputs_(std::move(outputs)), domain_(std::move(domain)) {
  if (arity_in_ < 0) throw std::invalid_argument("negative arity");
  if (domain_.dim() == 0 && arity_in_ > 0) domain_ = Domain(arity_in_);
  if (domain_.dim() != arity_in_) throw std::invalid_argument("domain dimension does not match arity");
  for (const Expr& e : outputs_) {
    if (e.max_var_index() >= arity_in_) {
      throw std::invalid_argument("map " + name_ + " uses a variable beyond its arity");
    }
  }
}

SmoothMap SmoothMap::identity(int n) {
  std::vector<Expr> out;
  for (int i = 0; i < n; ++i) out.push_back(Expr::var(i));
  return SmoothMap("id", n, std::move(out));
}

bool SmoothMap::is_polynomial() const {
  return std::all_of(outputs_.begin(), outputs_.end(), [](const Expr& e) { return e.is_polynomial(); });
}

Vec SmoothMap::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != arity_in_) throw std::invalid_argument("wrong argument count for " + name_);
  if (!domain_.contains(x)) {
    throw DomainError("point " + describe_point(x) + " outside the domain of " + name_);
  }
  Vec y;
  y.reserve(outputs_.size());
  for (const Expr& e : outputs_) y.push_back(e.eval(x));
  return y;
}

std::vector<Jet> SmoothMap::eval(std::span<const Jet> x) const {
  if (static_cast<int>(x.size()) != arity_in_) throw std::invalid_argument("wrong argument count for " + name_);
  Vec real(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) real[i] = x[i].value();
  if (!domain_.contains(real)) {
    throw DomainError("point " + describe_point(real) + " outside the domain of " + name_);
  }
  int order = 0;
  for (const Jet& xi : x) order = std::max(order, xi.order());
  std::vector<Jet> y;
  y.reserve(outputs_.size());
  for (const Expr& e : outputs_) {
    Jet v = e.eval(x);
    y.push_back(v.order() < order ? v.lifted(order) : std::move(v));
  }
  return y;
}

SmoothMap SmoothMap::compose(const SmoothMap& inner) const {
  if (inner.arity_out() != arity_in_) {
    throw std::invalid_argument("cannot compose " + name_ + " after " + inner.name_);
  }
  std::vector<Expr> outs;
  outs.reserve(outputs_.size());
  for (const Expr& e : outputs_) outs.push_back(e.substitute(inner.outputs_));

  std::vector<Expr> positive = inner.domain_.predicates();
  for (int j = 0; j < arity_in_; ++j) {
    const Interval& iv = domain_.box()[static_cast<std::size_t>(j)];
    const Expr& yj = inner.outputs_[static_cast<std::size_t>(j)];
    if (std::isfinite(iv.lo)) positive.push_back(yj - Expr(iv.lo));
    if (std::isfinite(iv.hi)) positive.push_back(Expr(iv.hi) - yj);
  }
  for (const Expr& g : domain_.predicates()) positive.push_back(g.substitute(inner.outputs_));
  return SmoothMap(name_ + "." + inner.name_, inner.arity_in_, std::move(outs),
                   Domain(inner.domain_.box(), std::move(positive)));
}

SmoothMap SmoothMap::renamed(std::string name) const {
  SmoothMap out = *this;
  out.name_ = std::move(name);
  return out;
}

std::vector<Jet> jet_eval(const SmoothMap& f, std::span<const Jet> args, int order) {
  for (const Jet& a : args) {
    if (a.order() != order) throw std::invalid_argument("jet_eval arguments must share the requested order");
  }
  return f.eval(args);
}

}  // namespace tanflow
