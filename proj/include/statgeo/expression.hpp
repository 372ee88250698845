#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statgeo/jet.hpp"

namespace statgeo {

enum class ExprOp : unsigned char { constant, variable, add, sub, mul, div, pow, neg, call };
enum class ExprFunc : unsigned char { sin, cos, sinh, cosh, tanh, exp, log, sqrt, abs };

struct ExprNode {
  ExprOp op = ExprOp::constant;
  ExprFunc func = ExprFunc::sin;
  double value = 0.0;  // constant
  int var = -1;        // variable
  std::shared_ptr<const ExprNode> lhs;  // also the operand of neg / call
  std::shared_ptr<const ExprNode> rhs;
};

using ExprPtr = std::shared_ptr<const ExprNode>;

/// A closed-form scalar function of chart coordinates.
///
/// Immutable; evaluation is pure and may run concurrently. Derivatives are
/// exact to roundoff: evaluate_jet() propagates truncated Taylor series
/// through the tree, derivative() builds the differentiated tree.
class ExpressionField {
 public:
  ExpressionField() = default;
  ExpressionField(ExprPtr root, std::shared_ptr<const std::vector<std::string>> coords);

  /// Parses `text` over the coordinate identifiers `coords`.
  ///
  /// Precedence, high to low: ^ (right associative), unary -, * /, + -.
  /// Functions: sin cos sinh cosh tanh exp log sqrt abs.
  /// Throws SyntaxError (with byte offset) on malformed text, unknown
  /// identifiers and unknown function names.
  static ExpressionField parse(std::string_view text, const std::vector<std::string>& coords);
  static ExpressionField parse(std::string_view text,
                               std::shared_ptr<const std::vector<std::string>> coords);
  static ExpressionField constant(double v, std::shared_ptr<const std::vector<std::string>> coords);

  int arity() const { return static_cast<int>(coords_->size()); }
  const std::vector<std::string>& coordinates() const { return *coords_; }
  const std::shared_ptr<const std::vector<std::string>>& coordinates_ptr() const { return coords_; }
  const ExprPtr& root() const { return root_; }

  /// Canonical text; parse(to_string()) is structurally identical to the
  /// tree for every tree the parser produces.
  std::string to_string() const;

  double evaluate(std::span<const double> point) const;
  /// Evaluates with jets substituted for the coordinates.
  Jet evaluate_jet(std::span<const Jet> vars) const;
  /// Jet of the field at `point` in its own coordinates.
  Jet jet_at(std::span<const double> point, int order) const;

  /// Symbolic partial derivative d/dx_axis.
  ExpressionField derivative(int axis) const;

  bool is_constant() const { return root_->op == ExprOp::constant; }
  bool is_zero() const { return is_constant() && root_->value == 0.0; }

 private:
  ExprPtr root_;
  std::shared_ptr<const std::vector<std::string>> coords_;
};

/// Partial derivative of `field` at `point` with the given multi-index.
double eval_deriv(const ExpressionField& field, std::span<const double> point,
                  std::span<const int> multi_index);

bool structurally_equal(const ExprNode& a, const ExprNode& b);
inline bool structurally_equal(const ExpressionField& a, const ExpressionField& b) {
  return structurally_equal(*a.root(), *b.root());
}

/// Tree builders with light folding (constants, 0 and 1 identities).
namespace expr {
ExprPtr constant(double v);
ExprPtr variable(int index);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr neg(ExprPtr a);
ExprPtr pow(ExprPtr a, ExprPtr b);
ExprPtr call(ExprFunc f, ExprPtr a);
ExprPtr derivative(const ExprPtr& e, int axis);
std::string_view function_name(ExprFunc f);
}  // namespace expr

}  // namespace statgeo
