#include "varigeo/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

namespace varigeo {

// ---------------------------------------------------------------------------
// VariableSet

VariableSet::VariableSet(const std::vector<std::string>& names) {
  for (const auto& n : names) add(n);
}

int VariableSet::add(const std::string& name) {
  if (lookup_.count(name)) throw Error("duplicate variable name '" + name + "'");
  names_.push_back(name);
  const int index = static_cast<int>(names_.size()) - 1;
  lookup_.emplace(name, index);
  return index;
}

void VariableSet::add_alias(const std::string& alias, int index) {
  if (index < 0 || index >= size()) throw Error("alias target out of range");
  if (lookup_.count(alias)) throw Error("duplicate variable name '" + alias + "'");
  lookup_.emplace(alias, index);
}

std::optional<int> VariableSet::find(std::string_view name) const {
  auto it = lookup_.find(name);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

VariableSet VariableSet::coordinates(int m, int n) {
  std::vector<std::string> names;
  for (int a = 1; a <= m; ++a) names.push_back("t" + std::to_string(a));
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  return VariableSet(names);
}

VariableSet VariableSet::jet(int m, int n) {
  std::vector<std::string> names;
  for (int a = 1; a <= m; ++a) names.push_back("t" + std::to_string(a));
  for (int a = 0; a <= m; ++a)
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i) + "_" + std::to_string(a));
  VariableSet set(names);
  for (int i = 1; i <= n; ++i) set.add_alias("x" + std::to_string(i), m + i - 1);
  return set;
}

// ---------------------------------------------------------------------------
// Node construction with constant folding

namespace {

NodePtr make_number(double v) {
  auto node = std::make_shared<ExprNode>();
  node->op = Op::Number;
  node->value = v;
  return node;
}

NodePtr make_variable(int index) {
  auto node = std::make_shared<ExprNode>();
  node->op = Op::Variable;
  node->variable = index;
  return node;
}

NodePtr make_node(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
  auto node = std::make_shared<ExprNode>();
  node->op = op;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  return node;
}

bool is_number(const NodePtr& n) { return n->op == Op::Number; }
bool is_value(const NodePtr& n, double v) { return n->op == Op::Number && n->value == v; }

bool is_function(Op op) {
  switch (op) {
    case Op::Sin:
    case Op::Cos:
    case Op::Tan:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Sinh:
    case Op::Cosh:
      return true;
    default:
      return false;
  }
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tan: return "tan";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Sinh: return "sinh";
    case Op::Cosh: return "cosh";
    default: return "?";
  }
}

std::optional<Op> function_from_name(std::string_view name) {
  static const std::pair<const char*, Op> table[] = {
      {"sin", Op::Sin},   {"cos", Op::Cos},   {"tan", Op::Tan},   {"exp", Op::Exp},
      {"log", Op::Log},   {"sqrt", Op::Sqrt}, {"sinh", Op::Sinh}, {"cosh", Op::Cosh},
  };
  for (const auto& [n, op] : table)
    if (name == n) return op;
  return std::nullopt;
}

// Folded result of a function or power, or nullopt when outside the domain.
std::optional<double> fold_function(Op op, double a) {
  double r = 0.0;
  switch (op) {
    case Op::Sin: r = std::sin(a); break;
    case Op::Cos: r = std::cos(a); break;
    case Op::Tan: r = std::tan(a); break;
    case Op::Exp: r = std::exp(a); break;
    case Op::Log:
      if (a <= 0.0) return std::nullopt;
      r = std::log(a);
      break;
    case Op::Sqrt:
      if (a < 0.0) return std::nullopt;
      r = std::sqrt(a);
      break;
    case Op::Sinh: r = std::sinh(a); break;
    case Op::Cosh: r = std::cosh(a); break;
    default: return std::nullopt;
  }
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

bool pow_in_domain(double base, double exponent) {
  if (base < 0.0 && exponent != std::floor(exponent)) return false;
  if (base == 0.0 && exponent < 0.0) return false;
  return true;
}

NodePtr fold_neg(const NodePtr& a) {
  if (is_number(a)) return make_number(-a->value);
  if (a->op == Op::Negate) return a->lhs;
  return make_node(Op::Negate, a);
}

NodePtr fold_add(const NodePtr& a, const NodePtr& b) {
  if (is_number(a) && is_number(b)) return make_number(a->value + b->value);
  if (is_value(a, 0.0)) return b;
  if (is_value(b, 0.0)) return a;
  return make_node(Op::Add, a, b);
}

NodePtr fold_sub(const NodePtr& a, const NodePtr& b) {
  if (is_number(a) && is_number(b)) return make_number(a->value - b->value);
  if (is_value(b, 0.0)) return a;
  if (is_value(a, 0.0)) return fold_neg(b);
  return make_node(Op::Subtract, a, b);
}

NodePtr fold_mul(const NodePtr& a, const NodePtr& b) {
  if (is_number(a) && is_number(b)) return make_number(a->value * b->value);
  if (is_value(a, 0.0) || is_value(b, 0.0)) return make_number(0.0);
  if (is_value(a, 1.0)) return b;
  if (is_value(b, 1.0)) return a;
  if (is_value(a, -1.0)) return fold_neg(b);
  if (is_value(b, -1.0)) return fold_neg(a);
  return make_node(Op::Multiply, a, b);
}

NodePtr fold_div(const NodePtr& a, const NodePtr& b) {
  if (is_number(a) && is_number(b) && b->value != 0.0) return make_number(a->value / b->value);
  if (is_value(a, 0.0) && !is_value(b, 0.0)) return make_number(0.0);
  if (is_value(b, 1.0)) return a;
  return make_node(Op::Divide, a, b);
}

NodePtr fold_pow(const NodePtr& a, const NodePtr& b) {
  if (is_number(a) && is_number(b) && pow_in_domain(a->value, b->value)) {
    const double r = std::pow(a->value, b->value);
    if (std::isfinite(r)) return make_number(r);
  }
  if (is_value(b, 0.0)) return make_number(1.0);
  if (is_value(b, 1.0)) return a;
  return make_node(Op::Power, a, b);
}

NodePtr fold_function_node(Op op, const NodePtr& a) {
  if (is_number(a)) {
    if (auto r = fold_function(op, a->value)) return make_number(*r);
  }
  return make_node(op, a);
}

const VariableSetPtr& pick(const VariableSetPtr& a, const VariableSetPtr& b) { return a ? a : b; }

// ---------------------------------------------------------------------------
// Printing

constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Shortest representation that round-trips.
  for (int digits = 1; digits < 17; ++digits) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", digits, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

std::string variable_name(int index, const VariableSet* vars) {
  if (vars && index >= 0 && index < vars->size()) return vars->name(index);
  return "v" + std::to_string(index);
}

struct Printed {
  std::string text;
  int precedence;
};

Printed print(const ExprNode& n, const VariableSet* vars);

std::string wrap(const Printed& p, bool parens) { return parens ? "(" + p.text + ")" : p.text; }

Printed print(const ExprNode& n, const VariableSet* vars) {
  switch (n.op) {
    case Op::Number: {
      const std::string s = format_number(n.value);
      if (n.value < 0.0 || std::signbit(n.value)) return {"(" + s + ")", kPrecAtom};
      return {s, kPrecAtom};
    }
    case Op::Variable:
      return {variable_name(n.variable, vars), kPrecAtom};
    case Op::Negate: {
      auto a = print(*n.lhs, vars);
      return {"-" + wrap(a, a.precedence < kPrecPow), kPrecNeg};
    }
    case Op::Add:
    case Op::Subtract: {
      auto a = print(*n.lhs, vars);
      auto b = print(*n.rhs, vars);
      const char* sym = n.op == Op::Add ? " + " : " - ";
      return {wrap(a, a.precedence < kPrecAdd) + sym + wrap(b, b.precedence <= kPrecAdd), kPrecAdd};
    }
    case Op::Multiply:
    case Op::Divide: {
      auto a = print(*n.lhs, vars);
      auto b = print(*n.rhs, vars);
      const char* sym = n.op == Op::Multiply ? "*" : "/";
      return {wrap(a, a.precedence < kPrecMul) + sym + wrap(b, b.precedence <= kPrecNeg), kPrecMul};
    }
    case Op::Power: {
      auto a = print(*n.lhs, vars);
      auto b = print(*n.rhs, vars);
      return {wrap(a, a.precedence < kPrecAtom) + "^" + wrap(b, b.precedence < kPrecPow), kPrecPow};
    }
    default: {
      auto a = print(*n.lhs, vars);
      return {std::string(function_name(n.op)) + "(" + a.text + ")", kPrecAtom};
    }
  }
}

std::string structure_of(const ExprNode& n, const VariableSet* vars) {
  auto binary = [&](const char* name) {
    return std::string(name) + "(" + structure_of(*n.lhs, vars) + ", " + structure_of(*n.rhs, vars) + ")";
  };
  switch (n.op) {
    case Op::Number: return format_number(n.value);
    case Op::Variable: return "Var " + variable_name(n.variable, vars);
    case Op::Negate: return "Neg(" + structure_of(*n.lhs, vars) + ")";
    case Op::Add: return binary("Add");
    case Op::Subtract: return binary("Sub");
    case Op::Multiply: return binary("Mul");
    case Op::Divide: return binary("Div");
    case Op::Power: return binary("Pow");
    default: {
      std::string name = function_name(n.op);
      name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
      return name + "(" + structure_of(*n.lhs, vars) + ")";
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation

struct Evaluator {
  std::span<const double> point;
  const VariableSet* vars;

  [[noreturn]] void fail(const std::string& what, const ExprNode& n) const {
    throw DomainError(what, print(n, vars).text);
  }

  double check(double r, const ExprNode& n) const {
    if (!std::isfinite(r)) fail("non-finite result", n);
    return r;
  }

  double operator()(const ExprNode& n) const {
    switch (n.op) {
      case Op::Number: return n.value;
      case Op::Variable:
        if (n.variable < 0 || static_cast<std::size_t>(n.variable) >= point.size())
          throw MissingVariableError(variable_name(n.variable, vars));
        return point[static_cast<std::size_t>(n.variable)];
      case Op::Negate: return -(*this)(*n.lhs);
      case Op::Add: return check((*this)(*n.lhs) + (*this)(*n.rhs), n);
      case Op::Subtract: return check((*this)(*n.lhs) - (*this)(*n.rhs), n);
      case Op::Multiply: return check((*this)(*n.lhs) * (*this)(*n.rhs), n);
      case Op::Divide: {
        const double a = (*this)(*n.lhs);
        const double b = (*this)(*n.rhs);
        if (b == 0.0) fail("division by zero", n);
        return check(a / b, n);
      }
      case Op::Power: {
        const double a = (*this)(*n.lhs);
        const double b = (*this)(*n.rhs);
        if (!pow_in_domain(a, b)) fail("power outside its domain", n);
        return check(std::pow(a, b), n);
      }
      case Op::Log: {
        const double a = (*this)(*n.lhs);
        if (a <= 0.0) fail("log of non-positive argument", n);
        return std::log(a);
      }
      case Op::Sqrt: {
        const double a = (*this)(*n.lhs);
        if (a < 0.0) fail("sqrt of negative argument", n);
        return std::sqrt(a);
      }
      case Op::Sin: return std::sin((*this)(*n.lhs));
      case Op::Cos: return std::cos((*this)(*n.lhs));
      case Op::Tan: return check(std::tan((*this)(*n.lhs)), n);
      case Op::Exp: return check(std::exp((*this)(*n.lhs)), n);
      case Op::Sinh: return check(std::sinh((*this)(*n.lhs)), n);
      case Op::Cosh: return check(std::cosh((*this)(*n.lhs)), n);
    }
    return 0.0;
  }
};

// ---------------------------------------------------------------------------
// Differentiation

bool node_depends_on(const ExprNode& n, int var) {
  if (n.op == Op::Variable) return n.variable == var;
  if (n.lhs && node_depends_on(*n.lhs, var)) return true;
  if (n.rhs && node_depends_on(*n.rhs, var)) return true;
  return false;
}

NodePtr derivative(const NodePtr& n, int var) {
  if (!node_depends_on(*n, var)) return make_number(0.0);
  const NodePtr& u = n->lhs;
  const NodePtr& v = n->rhs;
  switch (n->op) {
    case Op::Number: return make_number(0.0);
    case Op::Variable: return make_number(1.0);
    case Op::Negate: return fold_neg(derivative(u, var));
    case Op::Add: return fold_add(derivative(u, var), derivative(v, var));
    case Op::Subtract: return fold_sub(derivative(u, var), derivative(v, var));
    case Op::Multiply:
      return fold_add(fold_mul(derivative(u, var), v), fold_mul(u, derivative(v, var)));
    case Op::Divide: {
      auto du = derivative(u, var);
      if (!node_depends_on(*v, var)) return fold_div(du, v);
      auto dv = derivative(v, var);
      return fold_div(fold_sub(fold_mul(du, v), fold_mul(u, dv)), fold_pow(v, make_number(2.0)));
    }
    case Op::Power: {
      if (!node_depends_on(*v, var)) {
        // c * u^(c-1) * u'
        auto reduced = fold_pow(u, fold_sub(v, make_number(1.0)));
        return fold_mul(fold_mul(v, reduced), derivative(u, var));
      }
      if (!node_depends_on(*u, var)) {
        return fold_mul(fold_mul(n, fold_function_node(Op::Log, u)), derivative(v, var));
      }
      // u^v * (v' log u + v u'/u)
      auto inner = fold_add(fold_mul(derivative(v, var), fold_function_node(Op::Log, u)),
                            fold_div(fold_mul(v, derivative(u, var)), u));
      return fold_mul(n, inner);
    }
    case Op::Sin: return fold_mul(fold_function_node(Op::Cos, u), derivative(u, var));
    case Op::Cos: return fold_neg(fold_mul(fold_function_node(Op::Sin, u), derivative(u, var)));
    case Op::Tan:
      return fold_div(derivative(u, var), fold_pow(fold_function_node(Op::Cos, u), make_number(2.0)));
    case Op::Exp: return fold_mul(n, derivative(u, var));
    case Op::Log: return fold_div(derivative(u, var), u);
    case Op::Sqrt: return fold_div(derivative(u, var), fold_mul(make_number(2.0), n));
    case Op::Sinh: return fold_mul(fold_function_node(Op::Cosh, u), derivative(u, var));
    case Op::Cosh: return fold_mul(fold_function_node(Op::Sinh, u), derivative(u, var));
  }
  return make_number(0.0);
}

NodePtr substitute_node(const NodePtr& n, const std::vector<std::optional<ScalarExpr>>& repl) {
  switch (n->op) {
    case Op::Number: return n;
    case Op::Variable: {
      const auto idx = static_cast<std::size_t>(n->variable);
      if (idx < repl.size() && repl[idx]) return repl[idx]->root();
      return n;
    }
    case Op::Negate: return fold_neg(substitute_node(n->lhs, repl));
    case Op::Add: return fold_add(substitute_node(n->lhs, repl), substitute_node(n->rhs, repl));
    case Op::Subtract: return fold_sub(substitute_node(n->lhs, repl), substitute_node(n->rhs, repl));
    case Op::Multiply: return fold_mul(substitute_node(n->lhs, repl), substitute_node(n->rhs, repl));
    case Op::Divide: return fold_div(substitute_node(n->lhs, repl), substitute_node(n->rhs, repl));
    case Op::Power: return fold_pow(substitute_node(n->lhs, repl), substitute_node(n->rhs, repl));
    default: return fold_function_node(n->op, substitute_node(n->lhs, repl));
  }
}

void collect_variables(const ExprNode& n, std::set<int>& out) {
  if (n.op == Op::Variable) out.insert(n.variable);
  if (n.lhs) collect_variables(*n.lhs, out);
  if (n.rhs) collect_variables(*n.rhs, out);
}

// ---------------------------------------------------------------------------
// Parsing

class Parser {
 public:
  Parser(std::string_view src, const VariableSet& vars) : src_(src), vars_(vars) {}

  NodePtr parse() {
    skip_space();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    auto node = parse_sum();
    skip_space();
    if (pos_ < src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return node;
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    auto node = parse_product();
    for (;;) {
      if (accept('+')) {
        node = make_node(Op::Add, node, parse_product());
      } else if (accept('-')) {
        node = make_node(Op::Subtract, node, parse_product());
      } else {
        return node;
      }
    }
  }

  NodePtr parse_product() {
    auto node = parse_unary();
    for (;;) {
      if (accept('*')) {
        node = make_node(Op::Multiply, node, parse_unary());
      } else if (accept('/')) {
        node = make_node(Op::Divide, node, parse_unary());
      } else {
        return node;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_node(Op::Negate, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    if (accept('^')) return make_node(Op::Power, base, parse_exponent());
    return base;
  }

  NodePtr parse_exponent() {
    if (accept('-')) return make_node(Op::Negate, parse_exponent());
    return parse_power();
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        digits();
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_) throw ParseError("malformed number", start);
    return make_number(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (auto fn = function_from_name(name)) {
      if (!accept('(')) throw ParseError("expected '(' after function name", pos_);
      auto arg = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return make_node(*fn, arg);
    }
    if (auto index = vars_.find(name)) return make_variable(*index);
    if (name == "pi") return make_number(std::numbers::pi);
    if (name == "e") return make_number(std::numbers::e);
    throw UnknownIdentifierError(std::string(name), start);
  }

  std::string_view src_;
  const VariableSet& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// ScalarExpr

ScalarExpr::ScalarExpr() : root_(make_number(0.0)) {}

ScalarExpr::ScalarExpr(NodePtr root, VariableSetPtr variables)
    : root_(std::move(root)), variables_(std::move(variables)) {}

ScalarExpr ScalarExpr::constant(double value) { return ScalarExpr(make_number(value), nullptr); }

ScalarExpr ScalarExpr::variable(int index, VariableSetPtr variables) {
  return ScalarExpr(make_variable(index), std::move(variables));
}

double ScalarExpr::eval(std::span<const double> point) const {
  return Evaluator{point, variables_.get()}(*root_);
}

double ScalarExpr::eval(const std::map<std::string, double>& values) const {
  std::vector<double> point;
  std::vector<bool> present;
  if (variables_) {
    point.assign(static_cast<std::size_t>(variables_->size()), 0.0);
    present.assign(point.size(), false);
    for (const auto& [name, v] : values) {
      auto idx = variables_->find(name);
      if (!idx) continue;
      point[static_cast<std::size_t>(*idx)] = v;
      present[static_cast<std::size_t>(*idx)] = true;
    }
  }
  for (int var : variables_used()) {
    if (static_cast<std::size_t>(var) >= present.size() || !present[static_cast<std::size_t>(var)])
      throw MissingVariableError(variable_name(var, variables_.get()));
  }
  return eval(std::span<const double>(point));
}

ScalarExpr ScalarExpr::diff(int variable) const { return ScalarExpr(derivative(root_, variable), variables_); }

ScalarExpr ScalarExpr::diff(std::string_view variable) const {
  if (!variables_) throw UnknownIdentifierError(std::string(variable), 0);
  auto idx = variables_->find(variable);
  if (!idx) throw UnknownIdentifierError(std::string(variable), 0);
  return diff(*idx);
}

ScalarExpr ScalarExpr::substitute(const std::vector<std::optional<ScalarExpr>>& replacement) const {
  VariableSetPtr vars = variables_;
  for (const auto& r : replacement)
    if (r && r->variables_) {
      vars = r->variables_;
      break;
    }
  return ScalarExpr(substitute_node(root_, replacement), vars);
}

bool ScalarExpr::is_constant() const { return root_->op == Op::Number; }
bool ScalarExpr::is_zero() const { return is_value(root_, 0.0); }

std::optional<double> ScalarExpr::constant_value() const {
  if (root_->op == Op::Number) return root_->value;
  return std::nullopt;
}

bool ScalarExpr::depends_on(int variable) const { return node_depends_on(*root_, variable); }

std::vector<int> ScalarExpr::variables_used() const {
  std::set<int> vars;
  collect_variables(*root_, vars);
  return {vars.begin(), vars.end()};
}

std::string ScalarExpr::to_string() const { return print(*root_, variables_.get()).text; }

std::string ScalarExpr::structure() const { return structure_of(*root_, variables_.get()); }

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
  return ScalarExpr(fold_add(a.root_, b.root_), pick(a.variables_, b.variables_));
}
ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
  return ScalarExpr(fold_sub(a.root_, b.root_), pick(a.variables_, b.variables_));
}
ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
  return ScalarExpr(fold_mul(a.root_, b.root_), pick(a.variables_, b.variables_));
}
ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
  return ScalarExpr(fold_div(a.root_, b.root_), pick(a.variables_, b.variables_));
}
ScalarExpr operator-(const ScalarExpr& a) { return ScalarExpr(fold_neg(a.root_), a.variables_); }
ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent) {
  return ScalarExpr(fold_pow(base.root_, exponent.root_), pick(base.variables_, exponent.variables_));
}

ScalarExpr apply(Op function, const ScalarExpr& argument) {
  if (!is_function(function)) throw Error("apply() expects a function op");
  return ScalarExpr(fold_function_node(function, argument.root()), argument.variable_set());
}

ScalarExpr parse_expr(std::string_view source, VariableSetPtr variables) {
  static const VariableSet kEmpty;
  Parser parser(source, variables ? *variables : kEmpty);
  return ScalarExpr(parser.parse(), std::move(variables));
}

double eval_expr(const ScalarExpr& e, std::span<const double> point) { return e.eval(point); }

ScalarExpr diff_expr(const ScalarExpr& e, int variable) { return e.diff(variable); }

}  // namespace varigeo
