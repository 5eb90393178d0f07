#pragma once

// Expression trees over variables x1..xn.
//
// Expressions are immutable DAGs with value semantics. Constructors fold
// constants and drop neutral elements, so `x1 - x1` and `0 * x2` collapse to
// the constant 0. Besides the elementary functions an expression may contain
// call nodes: applications of an opaque JetFunction to argument expressions.
// Call nodes are how derived objects (jet-computed partial derivatives,
// brackets of transcendental fields) enter the calculus while remaining
// differentiable.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tanflow/jet.hpp"

namespace tanflow {

/// Scalar function that can be evaluated on jets of any order.
class JetFunction {
 public:
  virtual ~JetFunction() = default;
  [[nodiscard]] virtual int arity() const = 0;
  [[nodiscard]] virtual Jet eval(std::span<const Jet> x) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

/// d/dx_index of another JetFunction, computed by adding one tag.
class PartialFunction final : public JetFunction {
 public:
  PartialFunction(std::shared_ptr<const JetFunction> inner, int index);

  [[nodiscard]] int arity() const override { return inner_->arity(); }
  [[nodiscard]] Jet eval(std::span<const Jet> x) const override;
  [[nodiscard]] std::string name() const override;

 private:
  std::shared_ptr<const JetFunction> inner_;
  int index_;
};

/// Shared PartialFunction for (fn, index); repeated requests return the same object.
[[nodiscard]] std::shared_ptr<const JetFunction> partial_of(const std::shared_ptr<const JetFunction>& fn, int index);

class Expr {
 public:
  enum class Op : std::uint8_t {
    Const,
    Var,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Flat,
    Call,
  };

  struct Node;

  Expr();  // the constant 0
  Expr(double value);  // NOLINT(google-explicit-constructor)

  [[nodiscard]] static Expr constant(double value);
  /// Variable x_{index+1}; `index` is 0-based.
  [[nodiscard]] static Expr var(int index);
  [[nodiscard]] static Expr call(std::shared_ptr<const JetFunction> fn, std::vector<Expr> args);
  /// Applies `fn` to x1..x_arity.
  [[nodiscard]] static Expr call(std::shared_ptr<const JetFunction> fn);

  [[nodiscard]] Op op() const noexcept;
  [[nodiscard]] double constant_value() const noexcept;
  [[nodiscard]] int var_index() const noexcept;
  [[nodiscard]] int exponent() const noexcept;
  [[nodiscard]] std::span<const Expr> args() const noexcept;
  [[nodiscard]] const std::shared_ptr<const JetFunction>& function() const noexcept;
  [[nodiscard]] const Node* node() const noexcept { return node_.get(); }

  [[nodiscard]] bool is_constant() const noexcept { return op() == Op::Const; }
  [[nodiscard]] bool is_constant(double v) const noexcept { return is_constant() && constant_value() == v; }

  /// Built only from constants, variables, +, -, * and non-negative powers.
  [[nodiscard]] bool is_polynomial() const;
  [[nodiscard]] bool has_calls() const;
  /// Largest 0-based variable index referenced, or -1.
  [[nodiscard]] int max_var_index() const;
  [[nodiscard]] std::size_t node_count() const;

  /// Evaluates with x_{i+1} = x[i]. Throws SingularEval at poles.
  [[nodiscard]] double eval(std::span<const double> x) const;
  [[nodiscard]] Jet eval(std::span<const Jet> x) const;

  /// Replaces x_{i+1} by replacements[i].
  [[nodiscard]] Expr substitute(std::span<const Expr> replacements) const;

  /// Symbolic partial derivative with respect to x_{index+1}.
  [[nodiscard]] Expr derivative(int index) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

  friend Expr pow(const Expr& base, int exponent);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sqrt(const Expr& a);
  friend Expr flat(const Expr& a);

  /// Deep structural equality (call nodes compare by function identity).
  friend bool structurally_equal(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr make(Node node);

  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  int index = 0;  // variable index or power exponent
  std::vector<Expr> args;
  std::shared_ptr<const JetFunction> fn;
};

/// JetFunction backed by an expression in x1..x_arity.
class ExprFunction final : public JetFunction {
 public:
  ExprFunction(Expr body, int arity, std::string name);

  [[nodiscard]] int arity() const override { return arity_; }
  [[nodiscard]] Jet eval(std::span<const Jet> x) const override;
  [[nodiscard]] std::string name() const override { return name_; }
  [[nodiscard]] const Expr& body() const noexcept { return body_; }

 private:
  Expr body_;
  int arity_;
  std::string name_;
};

/// Expanded polynomial: exponent vector -> coefficient, zero terms dropped.
using Polynomial = std::map<std::vector<int>, double>;

/// Expands a polynomial expression in `nvars` variables. Throws
/// std::invalid_argument when `e.is_polynomial()` is false.
[[nodiscard]] Polynomial expand_polynomial(const Expr& e, int nvars);

/// Laplace expansion along the first row; `m` must be square.
[[nodiscard]] Expr determinant(const std::vector<std::vector<Expr>>& m);

/// Name of an elementary function node ("sin", ...), empty for other ops.
[[nodiscard]] std::string_view function_name(Expr::Op op);

}  // namespace tanflow
