#pragma once

// Scalar expression engine: parsing, evaluation and exact symbolic
// differentiation of the formulas in which metrics and tensor fields are
// written.
//
// Grammar (whitespace insignificant):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' powexp)?
//   powexp  := '-' powexp | power              (right associative)
//   primary := number | name | func '(' expr ')' | '(' expr ')'
// with func one of sin cos tan exp log sqrt sinh cosh and the constants pi, e.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varigeo/errors.hpp"

namespace varigeo {

/// Ordered list of declared variables. Several names may refer to the same
/// slot (the jet coordinate x<i>_0 is also reachable as x<i>).
class VariableSet {
 public:
  VariableSet() = default;
  explicit VariableSet(const std::vector<std::string>& names);

  /// t1..tm followed by x1..xn.
  static VariableSet coordinates(int m, int n);

  /// t1..tm followed by the jet block x<i>_<a>, a = 0..m, stored a-major
  /// (all x<i>_0 first, then all x<i>_1, ...). x<i> aliases x<i>_0, so the
  /// layout extends coordinates(m, n).
  static VariableSet jet(int m, int n);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }
  std::optional<int> find(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

  void add_alias(const std::string& alias, int index);

 private:
  int add(const std::string& name);

  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> lookup_;
};

using VariableSetPtr = std::shared_ptr<const VariableSet>;

enum class Op {
  Number,
  Variable,
  Negate,
  Add,
  Subtract,
  Multiply,
  Divide,
  Power,
  Sin,
  Cos,
  Tan,
  Exp,
  Log,
  Sqrt,
  Sinh,
  Cosh,
};

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  Op op = Op::Number;
  double value = 0.0;
  int variable = -1;
  NodePtr lhs;
  NodePtr rhs;
};

/// Immutable expression tree. Copies share structure; evaluation is pure.
class ScalarExpr {
 public:
  ScalarExpr();
  ScalarExpr(NodePtr root, VariableSetPtr variables);

  static ScalarExpr constant(double value);
  static ScalarExpr variable(int index, VariableSetPtr variables);

  /// Evaluate with `point[k]` the value of variable k. Throws DomainError on
  /// log/sqrt of negative arguments, division by zero and non-finite
  /// results; MissingVariableError if `point` is too short.
  double eval(std::span<const double> point) const;
  double eval(const std::map<std::string, double>& values) const;

  /// Exact partial derivative with constant folding and 0/1 identities.
  ScalarExpr diff(int variable) const;
  ScalarExpr diff(std::string_view variable) const;

  /// Replace variables by expressions (slots without a value are kept).
  ScalarExpr substitute(const std::vector<std::optional<ScalarExpr>>& replacement) const;

  bool is_constant() const;
  bool is_zero() const;
  std::optional<double> constant_value() const;
  bool depends_on(int variable) const;
  /// Sorted indices of referenced variables.
  std::vector<int> variables_used() const;

  /// Infix text that parses back to an equivalent tree.
  std::string to_string() const;
  /// Tree dump such as "Add(Var t1, Mul(2, Var x1))".
  std::string structure() const;

  const NodePtr& root() const { return root_; }
  const VariableSetPtr& variable_set() const { return variables_; }

  friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator-(const ScalarExpr& a);
  friend ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent);

 private:
  NodePtr root_;
  VariableSetPtr variables_;
};

ScalarExpr apply(Op function, const ScalarExpr& argument);

ScalarExpr parse_expr(std::string_view source, VariableSetPtr variables);
double eval_expr(const ScalarExpr& e, std::span<const double> point);
ScalarExpr diff_expr(const ScalarExpr& e, int variable);

}  // namespace varigeo
