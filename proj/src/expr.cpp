#include "tanflow/expr.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "tanflow/errors.hpp"

namespace tanflow {

namespace {

class FlatFunction final : public JetFunction {
 public:
  [[nodiscard]] int arity() const override { return 1; }
  [[nodiscard]] Jet eval(std::span<const Jet> x) const override { return flat(x[0]); }
  [[nodiscard]] std::string name() const override { return "flat"; }
};

const std::shared_ptr<const JetFunction>& flat_function() {
  static const std::shared_ptr<const JetFunction> fn = std::make_shared<FlatFunction>();
  return fn;
}

Expr::Node leaf_const(double v) {
  Expr::Node n;
  n.op = Expr::Op::Const;
  n.value = v;
  return n;
}

double apply_unary(Expr::Op op, double a) {
  switch (op) {
    case Expr::Op::Neg:
      return -a;
    case Expr::Op::Sin:
      return std::sin(a);
    case Expr::Op::Cos:
      return std::cos(a);
    case Expr::Op::Exp:
      return std::exp(a);
    case Expr::Op::Log:
      return checked_log(a);
    case Expr::Op::Sqrt:
      return checked_sqrt(a);
    case Expr::Op::Flat:
      return flat(a);
    default:
      throw std::logic_error("not a unary op");
  }
}

Jet apply_unary(Expr::Op op, const Jet& a) {
  switch (op) {
    case Expr::Op::Neg:
      return -a;
    case Expr::Op::Sin:
      return sin(a);
    case Expr::Op::Cos:
      return cos(a);
    case Expr::Op::Exp:
      return exp(a);
    case Expr::Op::Log:
      return log(a);
    case Expr::Op::Sqrt:
      return sqrt(a);
    case Expr::Op::Flat:
      return flat(a);
    default:
      throw std::logic_error("not a unary op");
  }
}

template <class T>
T apply_binary(Expr::Op op, const T& a, const T& b) {
  switch (op) {
    case Expr::Op::Add:
      return a + b;
    case Expr::Op::Sub:
      return a - b;
    case Expr::Op::Mul:
      return a * b;
    case Expr::Op::Div:
      if constexpr (std::is_same_v<T, double>) {
        return checked_div(a, b);
      } else {
        return a / b;
      }
    default:
      throw std::logic_error("not a binary op");
  }
}

template <class T>
class Evaluator {
 public:
  explicit Evaluator(std::span<const T> x) : x_(x) {}

  T operator()(const Expr& e) {
    const Expr::Node* n = e.node();
    switch (n->op) {
      case Expr::Op::Const:
        return T(n->value);
      case Expr::Op::Var:
        if (n->index >= static_cast<int>(x_.size())) {
          throw std::out_of_range("expression references x" + std::to_string(n->index + 1) +
                                  " but only " + std::to_string(x_.size()) + " values were given");
        }
        return x_[static_cast<std::size_t>(n->index)];
      default:
        break;
    }
    if (auto it = cache_.find(n); it != cache_.end()) {
      return it->second;
    }
    T result = compute(*n);
    cache_.emplace(n, result);
    return result;
  }

 private:
  T compute(const Expr::Node& n) {
    switch (n.op) {
      case Expr::Op::Add:
      case Expr::Op::Sub:
      case Expr::Op::Mul:
      case Expr::Op::Div:
        return apply_binary(n.op, (*this)(n.args[0]), (*this)(n.args[1]));
      case Expr::Op::Pow:
        if constexpr (std::is_same_v<T, double>) {
          return ipow((*this)(n.args[0]), n.index);
        } else {
          return pow((*this)(n.args[0]), n.index);
        }
      case Expr::Op::Call: {
        std::vector<Jet> args;
        args.reserve(n.args.size());
        for (const Expr& a : n.args) {
          args.emplace_back((*this)(a));
        }
        Jet out = n.fn->eval(args);
        if constexpr (std::is_same_v<T, double>) {
          return out.value();
        } else {
          return out;
        }
      }
      default:
        return apply_unary(n.op, (*this)(n.args[0]));
    }
  }

  std::span<const T> x_;
  std::unordered_map<const Expr::Node*, T> cache_;
};

class Substituter {
 public:
  explicit Substituter(std::span<const Expr> repl) : repl_(repl) {}

  Expr operator()(const Expr& e) {
    const Expr::Node* n = e.node();
    if (n->op == Expr::Op::Const) return e;
    if (n->op == Expr::Op::Var) {
      if (n->index >= static_cast<int>(repl_.size())) {
        throw std::out_of_range("substitution does not cover x" + std::to_string(n->index + 1));
      }
      return repl_[static_cast<std::size_t>(n->index)];
    }
    if (auto it = cache_.find(n); it != cache_.end()) return it->second;
    Expr out = rebuild(e);
    cache_.emplace(n, out);
    return out;
  }

 private:
  Expr rebuild(const Expr& e) {
    const Expr::Node* n = e.node();
    std::vector<Expr> args;
    args.reserve(n->args.size());
    bool same = true;
    for (const Expr& a : n->args) {
      args.push_back((*this)(a));
      same = same && args.back().node() == a.node();
    }
    if (same) return e;
    switch (n->op) {
      case Expr::Op::Neg:
        return -args[0];
      case Expr::Op::Add:
        return args[0] + args[1];
      case Expr::Op::Sub:
        return args[0] - args[1];
      case Expr::Op::Mul:
        return args[0] * args[1];
      case Expr::Op::Div:
        return args[0] / args[1];
      case Expr::Op::Pow:
        return pow(args[0], n->index);
      case Expr::Op::Sin:
        return sin(args[0]);
      case Expr::Op::Cos:
        return cos(args[0]);
      case Expr::Op::Exp:
        return exp(args[0]);
      case Expr::Op::Log:
        return log(args[0]);
      case Expr::Op::Sqrt:
        return sqrt(args[0]);
      case Expr::Op::Flat:
        return flat(args[0]);
      case Expr::Op::Call:
        return Expr::call(n->fn, std::move(args));
      default:
        throw std::logic_error("unexpected op in substitution");
    }
  }

  std::span<const Expr> repl_;
  std::unordered_map<const Expr::Node*, Expr> cache_;
};

class Differentiator {
 public:
  explicit Differentiator(int index) : index_(index) {}

  Expr operator()(const Expr& e) {
    const Expr::Node* n = e.node();
    if (n->op == Expr::Op::Const) return Expr(0.0);
    if (n->op == Expr::Op::Var) return Expr(n->index == index_ ? 1.0 : 0.0);
    if (auto it = cache_.find(n); it != cache_.end()) return it->second;
    Expr out = rule(e);
    cache_.emplace(n, out);
    return out;
  }

 private:
  Expr rule(const Expr& e) {
    const Expr::Node* n = e.node();
    const auto& a = n->args;
    switch (n->op) {
      case Expr::Op::Neg:
        return -(*this)(a[0]);
      case Expr::Op::Add:
        return (*this)(a[0]) + (*this)(a[1]);
      case Expr::Op::Sub:
        return (*this)(a[0]) - (*this)(a[1]);
      case Expr::Op::Mul:
        return (*this)(a[0]) * a[1] + a[0] * (*this)(a[1]);
      case Expr::Op::Div:
        return ((*this)(a[0]) * a[1] - a[0] * (*this)(a[1])) / pow(a[1], 2);
      case Expr::Op::Pow:
        return Expr(static_cast<double>(n->index)) * pow(a[0], n->index - 1) * (*this)(a[0]);
      case Expr::Op::Sin:
        return cos(a[0]) * (*this)(a[0]);
      case Expr::Op::Cos:
        return -(sin(a[0]) * (*this)(a[0]));
      case Expr::Op::Exp:
        return e * (*this)(a[0]);
      case Expr::Op::Log:
        return (*this)(a[0]) / a[0];
      case Expr::Op::Sqrt:
        return (*this)(a[0]) / (Expr(2.0) * e);
      case Expr::Op::Flat:
        // flat'(t) = 2 t^-3 flat(t) is 0/0 at t = 0; jets evaluate it exactly.
        return Expr::call(partial_of(flat_function(), 0), {a[0]}) * (*this)(a[0]);
      case Expr::Op::Call: {
        Expr sum(0.0);
        for (std::size_t k = 0; k < a.size(); ++k) {
          Expr inner = (*this)(a[k]);
          if (inner.is_constant(0.0)) continue;
          sum += Expr::call(partial_of(n->fn, static_cast<int>(k)), a) * inner;
        }
        return sum;
      }
      default:
        throw std::logic_error("unexpected op in derivative");
    }
  }

  int index_;
  std::unordered_map<const Expr::Node*, Expr> cache_;
};

bool fold_unary(Expr::Op op, double a, double& out) {
  switch (op) {
    case Expr::Op::Sin:
      out = std::sin(a);
      return true;
    case Expr::Op::Cos:
      out = std::cos(a);
      return true;
    case Expr::Op::Exp:
      out = std::exp(a);
      return true;
    case Expr::Op::Log:
      if (!(a > 0.0)) return false;
      out = std::log(a);
      return true;
    case Expr::Op::Sqrt:
      if (a < 0.0) return false;
      out = std::sqrt(a);
      return true;
    case Expr::Op::Flat:
      out = flat(a);
      return true;
    default:
      return false;
  }
}


}  // namespace

// --------------------------------------------------------------------------
// PartialFunction / ExprFunction
// --------------------------------------------------------------------------

PartialFunction::PartialFunction(std::shared_ptr<const JetFunction> inner, int index)
    : inner_(std::move(inner)), index_(index) {
  if (index_ < 0 || index_ >= inner_->arity()) {
    throw std::invalid_argument("partial derivative index out of range");
  }
}

std::shared_ptr<const JetFunction> partial_of(const std::shared_ptr<const JetFunction>& fn, int index) {
  // Reusing one object per (function, index) keeps repeated derivatives
  // structurally equal.
  static std::mutex mutex;
  static std::map<std::pair<const JetFunction*, int>,
                  std::pair<std::shared_ptr<const JetFunction>, std::shared_ptr<const JetFunction>>>
      cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{fn.get(), index}];
  if (!slot.second) {
    slot = {fn, std::make_shared<PartialFunction>(fn, index)};
  }
  return slot.second;
}

Jet PartialFunction::eval(std::span<const Jet> x) const {
  int order = 0;
  for (const Jet& xi : x) order = std::max(order, xi.order());
  const int tag = order + 1;
  std::vector<Jet> lifted;
  lifted.reserve(x.size());
  for (const Jet& xi : x) lifted.push_back(xi.lifted(tag));
  lifted[static_cast<std::size_t>(index_)][1u << order] += 1.0;
  return inner_->eval(lifted).lifted(tag).coefficient_of(tag);
}

std::string PartialFunction::name() const {
  return "d" + std::to_string(index_ + 1) + "[" + inner_->name() + "]";
}

ExprFunction::ExprFunction(Expr body, int arity, std::string name)
    : body_(std::move(body)), arity_(arity), name_(std::move(name)) {
  if (body_.max_var_index() >= arity_) {
    throw std::invalid_argument("expression function body uses more variables than its arity");
  }
}

Jet ExprFunction::eval(std::span<const Jet> x) const { return body_.eval(x); }

// --------------------------------------------------------------------------
// Expr
// --------------------------------------------------------------------------

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) : node_(std::make_shared<const Node>(leaf_const(value))) {}

Expr Expr::make(Node node) { return Expr(std::make_shared<const Node>(std::move(node))); }

Expr Expr::constant(double value) { return Expr(value); }

Expr Expr::var(int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  Node n;
  n.op = Op::Var;
  n.index = index;
  return make(std::move(n));
}

Expr Expr::call(std::shared_ptr<const JetFunction> fn, std::vector<Expr> args) {
  if (static_cast<int>(args.size()) != fn->arity()) {
    throw std::invalid_argument("call of " + fn->name() + " with wrong argument count");
  }
  Node n;
  n.op = Op::Call;
  n.fn = std::move(fn);
  n.args = std::move(args);
  return make(std::move(n));
}

Expr Expr::call(std::shared_ptr<const JetFunction> fn) {
  std::vector<Expr> args;
  for (int i = 0; i < fn->arity(); ++i) args.push_back(var(i));
  return call(std::move(fn), std::move(args));
}

Expr::Op Expr::op() const noexcept { return node_->op; }
double Expr::constant_value() const noexcept { return node_->value; }
int Expr::var_index() const noexcept { return node_->index; }
int Expr::exponent() const noexcept { return node_->index; }
std::span<const Expr> Expr::args() const noexcept { return node_->args; }
const std::shared_ptr<const JetFunction>& Expr::function() const noexcept { return node_->fn; }

bool Expr::is_polynomial() const {
  switch (op()) {
    case Op::Const:
    case Op::Var:
      return true;
    case Op::Neg:
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
      for (const Expr& a : args()) {
        if (!a.is_polynomial()) return false;
      }
      return true;
    case Op::Pow:
      return exponent() >= 0 && args()[0].is_polynomial();
    default:
      return false;
  }
}

bool Expr::has_calls() const {
  if (op() == Op::Call) return true;
  for (const Expr& a : args()) {
    if (a.has_calls()) return true;
  }
  return false;
}

int Expr::max_var_index() const {
  if (op() == Op::Var) return var_index();
  int m = -1;
  for (const Expr& a : args()) m = std::max(m, a.max_var_index());
  return m;
}

std::size_t Expr::node_count() const {
  std::size_t count = 1;
  for (const Expr& a : args()) count += a.node_count();
  return count;
}

double Expr::eval(std::span<const double> x) const { return Evaluator<double>(x)(*this); }

Jet Expr::eval(std::span<const Jet> x) const { return Evaluator<Jet>(x)(*this); }

Expr Expr::substitute(std::span<const Expr> replacements) const { return Substituter(replacements)(*this); }

Expr Expr::derivative(int index) const { return Differentiator(index)(*this); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() + b.constant_value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  Expr::Node n;
  n.op = Expr::Op::Add;
  n.args = {a, b};
  return Expr::make(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() - b.constant_value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  if (structurally_equal(a, b)) return Expr(0.0);
  Expr::Node n;
  n.op = Expr::Op::Sub;
  n.args = {a, b};
  return Expr::make(std::move(n));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() * b.constant_value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  Expr::Node n;
  n.op = Expr::Op::Mul;
  n.args = {a, b};
  return Expr::make(std::move(n));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0) {
    return Expr(a.constant_value() / b.constant_value());
  }
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant()) return Expr(0.0);
  Expr::Node n;
  n.op = Expr::Op::Div;
  n.args = {a, b};
  return Expr::make(std::move(n));
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.constant_value());
  if (a.op() == Expr::Op::Neg) return a.args()[0];
  Expr::Node n;
  n.op = Expr::Op::Neg;
  n.args = {a};
  return Expr::make(std::move(n));
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr(1.0);
  if (exponent == 1) return base;
  if (base.is_constant()) {
    const double b = base.constant_value();
    if (!(b == 0.0 && exponent < 0)) return Expr(ipow(b, exponent));
  }
  Expr::Node n;
  n.op = Expr::Op::Pow;
  n.index = exponent;
  n.args = {base};
  return Expr::make(std::move(n));
}


Expr sin(const Expr& a) {
  double v = 0.0;
  if (a.is_constant() && fold_unary(Expr::Op::Sin, a.constant_value(), v)) return Expr(v);
  Expr::Node n;
  n.op = Expr::Op::Sin;
  n.args = {a};
  return Expr::make(std::move(n));
}

Expr cos(const Expr& a) {
  double v = 0.0;
  if (a.is_constant() && fold_unary(Expr::Op::Cos, a.constant_value(), v)) return Expr(v);
  Expr::Node n;
  n.op = Expr::Op::Cos;
  n.args = {a};
  return Expr::make(std::move(n));
}

Expr exp(const Expr& a) {
  double v = 0.0;
  if (a.is_constant() && fold_unary(Expr::Op::Exp, a.constant_value(), v)) return Expr(v);
  Expr::Node n;
  n.op = Expr::Op::Exp;
  n.args = {a};
  return Expr::make(std::move(n));
}

Expr log(const Expr& a) {
  double v = 0.0;
  if (a.is_constant() && fold_unary(Expr::Op::Log, a.constant_value(), v)) return Expr(v);
  Expr::Node n;
  n.op = Expr::Op::Log;
  n.args = {a};
  return Expr::make(std::move(n));
}

Expr sqrt(const Expr& a) {
  double v = 0.0;
  if (a.is_constant() && fold_unary(Expr::Op::Sqrt, a.constant_value(), v)) return Expr(v);
  Expr::Node n;
  n.op = Expr::Op::Sqrt;
  n.args = {a};
  return Expr::make(std::move(n));
}

Expr flat(const Expr& a) {
  double v = 0.0;
  if (a.is_constant() && fold_unary(Expr::Op::Flat, a.constant_value(), v)) return Expr(v);
  Expr::Node n;
  n.op = Expr::Op::Flat;
  n.args = {a};
  return Expr::make(std::move(n));
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return true;
  const Expr::Node& x = *a.node();
  const Expr::Node& y = *b.node();
  if (x.op != y.op || x.args.size() != y.args.size()) return false;
  switch (x.op) {
    case Expr::Op::Const:
      return x.value == y.value;
    case Expr::Op::Var:
    case Expr::Op::Pow:
      if (x.index != y.index) return false;
      break;
    case Expr::Op::Call:
      if (x.fn != y.fn) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (!structurally_equal(x.args[i], y.args[i])) return false;
  }
  return true;
}

std::string_view function_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::Sin:
      return "sin";
    case Expr::Op::Cos:
      return "cos";
    case Expr::Op::Exp:
      return "exp";
    case Expr::Op::Log:
      return "log";
    case Expr::Op::Sqrt:
      return "sqrt";
    case Expr::Op::Flat:
      return "flat";
    default:
      return {};
  }
}

namespace {

Polynomial poly_add(Polynomial a, const Polynomial& b, double sign) {
  for (const auto& [m, c] : b) {
    const double v = (a[m] += sign * c);
    if (v == 0.0) a.erase(m);
  }
  return a;
}

Polynomial poly_mul(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      std::vector<int> m(ma.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      const double v = (out[m] += ca * cb);
      if (v == 0.0) out.erase(m);
    }
  }
  return out;
}

Polynomial expand(const Expr& e, int nvars, std::map<const Expr::Node*, Polynomial>& memo) {
  if (auto it = memo.find(e.node()); it != memo.end()) return it->second;
  Polynomial out;
  const std::vector<int> zero(static_cast<std::size_t>(nvars), 0);
  switch (e.op()) {
    case Expr::Op::Const:
      if (e.constant_value() != 0.0) out[zero] = e.constant_value();
      break;
    case Expr::Op::Var: {
      std::vector<int> m = zero;
      m.at(static_cast<std::size_t>(e.var_index())) = 1;
      out[m] = 1.0;
      break;
    }
    case Expr::Op::Neg:
      out = poly_add({}, expand(e.args()[0], nvars, memo), -1.0);
      break;
    case Expr::Op::Add:
      out = poly_add(expand(e.args()[0], nvars, memo), expand(e.args()[1], nvars, memo), 1.0);
      break;
    case Expr::Op::Sub:
      out = poly_add(expand(e.args()[0], nvars, memo), expand(e.args()[1], nvars, memo), -1.0);
      break;
    case Expr::Op::Mul:
      out = poly_mul(expand(e.args()[0], nvars, memo), expand(e.args()[1], nvars, memo));
      break;
    case Expr::Op::Pow: {
      if (e.exponent() < 0) throw std::invalid_argument("negative power is not polynomial");
      const Polynomial base = expand(e.args()[0], nvars, memo);
      out[zero] = 1.0;
      for (int i = 0; i < e.exponent(); ++i) out = poly_mul(out, base);
      break;
    }
    default:
      throw std::invalid_argument("expression is not a polynomial");
  }
  memo.emplace(e.node(), out);
  return out;
}

}  // namespace

Polynomial expand_polynomial(const Expr& e, int nvars) {
  std::map<const Expr::Node*, Polynomial> memo;
  return expand(e, nvars, memo);
}

Expr determinant(const std::vector<std::vector<Expr>>& m) {
  const std::size_t k = m.size();
  if (k == 0) return Expr(1.0);
  if (k == 1) return m[0][0];
  Expr out(0.0);
  for (std::size_t c = 0; c < k; ++c) {
    if (m[0][c].is_constant(0.0)) continue;
    std::vector<std::vector<Expr>> minor;
    for (std::size_t r = 1; r < k; ++r) {
      std::vector<Expr> row;
      for (std::size_t j = 0; j < k; ++j) {
        if (j != c) row.push_back(m[r][j]);
      }
      minor.push_back(std::move(row));
    }
    const Expr term = m[0][c] * determinant(minor);
    out = (c % 2 == 0) ? out + term : out - term;
  }
  return out;
}

}  // namespace tanflow
