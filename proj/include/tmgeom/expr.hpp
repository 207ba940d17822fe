#pragma once

#include "tmgeom/jet.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tmgeom {

/// Syntax errors carry the byte offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, VariableOutOfRange, BadExponent };

  ParseError(Kind kind, std::size_t offset, const std::string& what);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh };

/// Immutable expression node. Variables are `x1..xn` (base) and `u1..un`
/// (fiber); `index` is zero based.
struct ExprNode {
  enum class Kind { Constant, BaseVar, FiberVar, Add, Sub, Mul, Div, Pow, Neg, Call };

  Kind kind = Kind::Constant;
  double constant = 0.0;
  int index = 0;
  int exponent = 0;
  Func func = Func::Sin;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

/// Scalar expression in the chart variables of TM, bound to a dimension n.
class ExprAst {
 public:
  ExprAst() = default;
  ExprAst(std::shared_ptr<const ExprNode> root, int dimension) : root_(std::move(root)), n_(dimension) {}

  [[nodiscard]] const ExprNode& root() const { return *root_; }
  [[nodiscard]] int dimension() const { return n_; }
  [[nodiscard]] bool empty() const { return root_ == nullptr; }

  [[nodiscard]] bool depends_on_fiber() const;
  [[nodiscard]] bool is_constant() const;

  friend bool operator==(const ExprAst& a, const ExprAst& b);

 private:
  std::shared_ptr<const ExprNode> root_;
  int n_ = 0;
};

/// Parses `source` with precedence ^ > unary minus > * / > + -, all binary
/// operators left associative. `^` takes an integer literal exponent.
ExprAst parse(std::string_view source, int dimension);

/// Canonical text form; parse(print(e)) == e.
std::string print(const ExprAst& e);

/// Truncated Taylor expansion of `e` at `point`. The jet has point.size()
/// variables: n entries evaluate x only, 2n entries evaluate on (x, u).
/// Throws DomainError naming the offending subexpression.
Jet eval_jet(const ExprAst& e, std::span<const double> point, int order);

double eval(const ExprAst& e, std::span<const double> point);

// Builders used by tests and by code that assembles expressions.
ExprAst make_constant(double v, int dimension);
ExprAst make_binary(ExprNode::Kind kind, const ExprAst& a, const ExprAst& b);
ExprAst make_scaled(double s, const ExprAst& a);

}  // namespace tmgeom
