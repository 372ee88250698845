#include "statgeo/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <unordered_map>

#include "statgeo/errors.hpp"

namespace statgeo {

namespace expr {

namespace {

ExprPtr make(ExprOp op, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

bool is_const(const ExprPtr& e, double v) { return e->op == ExprOp::constant && e->value == v; }
bool is_const(const ExprPtr& e) { return e->op == ExprOp::constant; }

constexpr std::array<std::string_view, 9> kFunctionNames = {"sin",  "cos", "sinh", "cosh", "tanh",
                                                            "exp",  "log", "sqrt", "abs"};

}  // namespace

std::string_view function_name(ExprFunc f) { return kFunctionNames[static_cast<std::size_t>(f)]; }

ExprPtr constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::constant;
  n->value = v;
  return n;
}

ExprPtr variable(int index) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::variable;
  n->var = index;
  return n;
}

ExprPtr add(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (is_const(a) && is_const(b)) return constant(a->value + b->value);
  return make(ExprOp::add, std::move(a), std::move(b));
}

ExprPtr sub(ExprPtr a, ExprPtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(std::move(b));
  if (is_const(a) && is_const(b)) return constant(a->value - b->value);
  return make(ExprOp::sub, std::move(a), std::move(b));
}

ExprPtr mul(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a, -1.0)) return neg(std::move(b));
  if (is_const(b, -1.0)) return neg(std::move(a));
  if (is_const(a) && is_const(b)) return constant(a->value * b->value);
  return make(ExprOp::mul, std::move(a), std::move(b));
}

ExprPtr div(ExprPtr a, ExprPtr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return constant(0.0);
  return make(ExprOp::div, std::move(a), std::move(b));
}

ExprPtr neg(ExprPtr a) {
  if (is_const(a)) return constant(-a->value);
  if (a->op == ExprOp::neg) return a->lhs;
  return make(ExprOp::neg, std::move(a));
}

ExprPtr pow(ExprPtr a, ExprPtr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(b, 0.0)) return constant(1.0);
  return make(ExprOp::pow, std::move(a), std::move(b));
}

ExprPtr call(ExprFunc f, ExprPtr a) {
  auto n = make(ExprOp::call, std::move(a));
  std::const_pointer_cast<ExprNode>(n)->func = f;
  return n;
}

ExprPtr derivative(const ExprPtr& e, int axis) {
  switch (e->op) {
    case ExprOp::constant:
      return constant(0.0);
    case ExprOp::variable:
      return constant(e->var == axis ? 1.0 : 0.0);
    case ExprOp::add:
      return add(derivative(e->lhs, axis), derivative(e->rhs, axis));
    case ExprOp::sub:
      return sub(derivative(e->lhs, axis), derivative(e->rhs, axis));
    case ExprOp::neg:
      return neg(derivative(e->lhs, axis));
    case ExprOp::mul:
      return add(mul(derivative(e->lhs, axis), e->rhs), mul(e->lhs, derivative(e->rhs, axis)));
    case ExprOp::div: {
      // (a/b)' = a'/b - a b' / b^2
      auto da = derivative(e->lhs, axis);
      auto db = derivative(e->rhs, axis);
      return sub(div(da, e->rhs), div(mul(e->lhs, db), mul(e->rhs, e->rhs)));
    }
    case ExprOp::pow: {
      auto da = derivative(e->lhs, axis);
      if (is_const(e->rhs)) {
        const double c = e->rhs->value;
        return mul(mul(constant(c), pow(e->lhs, constant(c - 1.0))), da);
      }
      // (a^b)' = a^b (b' log a + b a' / a)
      auto db = derivative(e->rhs, axis);
      return mul(e, add(mul(db, call(ExprFunc::log, e->lhs)), div(mul(e->rhs, da), e->lhs)));
    }
    case ExprOp::call: {
      const auto& a = e->lhs;
      auto da = derivative(a, axis);
      if (is_const(da, 0.0)) return constant(0.0);
      switch (e->func) {
        case ExprFunc::sin:
          return mul(call(ExprFunc::cos, a), da);
        case ExprFunc::cos:
          return neg(mul(call(ExprFunc::sin, a), da));
        case ExprFunc::sinh:
          return mul(call(ExprFunc::cosh, a), da);
        case ExprFunc::cosh:
          return mul(call(ExprFunc::sinh, a), da);
        case ExprFunc::tanh:
          return mul(sub(constant(1.0), mul(e, e)), da);
        case ExprFunc::exp:
          return mul(e, da);
        case ExprFunc::log:
          return div(da, a);
        case ExprFunc::sqrt:
          return div(da, mul(constant(2.0), e));
        case ExprFunc::abs:
          return mul(div(a, e), da);
      }
    }
  }
  return constant(0.0);
}

}  // namespace expr

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& coords) : text_(text), coords_(coords) {}

  ExprPtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("empty expression", pos_);
    auto e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr node(ExprOp op, ExprPtr a, ExprPtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  ExprPtr parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = node(ExprOp::add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = node(ExprOp::sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = node(ExprOp::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = node(ExprOp::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) return node(ExprOp::neg, parse_unary());
    return parse_power();
  }

  ExprPtr parse_power() {
    auto base = parse_primary();
    if (accept('^')) return node(ExprOp::pow, base, parse_unary());
    return base;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_sum();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw SyntaxError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  ExprPtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) throw SyntaxError("malformed number", start);
    return expr::constant(v);
  }

  ExprPtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      std::optional<ExprFunc> f;
      for (int k = 0; k < 9; ++k) {
        if (expr::function_name(static_cast<ExprFunc>(k)) == name) f = static_cast<ExprFunc>(k);
      }
      if (!f) throw SyntaxError("unknown function '" + std::string(name) + "'", start);
      ++pos_;
      auto arg = parse_sum();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      auto n = std::make_shared<ExprNode>();
      n->op = ExprOp::call;
      n->func = *f;
      n->lhs = std::move(arg);
      return n;
    }
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (coords_[i] == name) return expr::variable(static_cast<int>(i));
    }
    throw SyntaxError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  const std::vector<std::string>& coords_;
  std::size_t pos_ = 0;
};

// Printing ------------------------------------------------------------------

int precedence(const ExprNode& n) {
  switch (n.op) {
    case ExprOp::add:
    case ExprOp::sub:
      return 1;
    case ExprOp::mul:
    case ExprOp::div:
      return 2;
    case ExprOp::neg:
      return 3;
    case ExprOp::pow:
      return 4;
    case ExprOp::constant:
      return n.value < 0.0 ? 3 : 5;
    default:
      return 5;
  }
}

void print(const ExprNode& n, const std::vector<std::string>& coords, std::string& out);

void print_child(const ExprNode& child, bool parens, const std::vector<std::string>& coords,
                 std::string& out) {
  if (parens) out += '(';
  print(child, coords, out);
  if (parens) out += ')';
}

void print_number(double v, std::string& out) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, ptr);
}

void print(const ExprNode& n, const std::vector<std::string>& coords, std::string& out) {
  const int p = precedence(n);
  switch (n.op) {
    case ExprOp::constant:
      print_number(n.value, out);
      return;
    case ExprOp::variable:
      out += coords[static_cast<std::size_t>(n.var)];
      return;
    case ExprOp::neg:
      out += '-';
      print_child(*n.lhs, precedence(*n.lhs) < p, coords, out);
      return;
    case ExprOp::call:
      out += expr::function_name(n.func);
      out += '(';
      print(*n.lhs, coords, out);
      out += ')';
      return;
    case ExprOp::pow:
      // right associative: the base needs parens at equal precedence
      print_child(*n.lhs, precedence(*n.lhs) <= p, coords, out);
      out += " ^ ";
      print_child(*n.rhs, precedence(*n.rhs) < 3, coords, out);
      return;
    default: {
      const char* sym = n.op == ExprOp::add ? " + " : n.op == ExprOp::sub ? " - " : n.op == ExprOp::mul ? " * " : " / ";
      print_child(*n.lhs, precedence(*n.lhs) < p, coords, out);
      out += sym;
      print_child(*n.rhs, precedence(*n.rhs) <= p, coords, out);
      return;
    }
  }
}

// Evaluation ------------------------------------------------------------------

Jet apply(ExprFunc f, const Jet& a) {
  switch (f) {
    case ExprFunc::sin: return sin(a);
    case ExprFunc::cos: return cos(a);
    case ExprFunc::sinh: return sinh(a);
    case ExprFunc::cosh: return cosh(a);
    case ExprFunc::tanh: return tanh(a);
    case ExprFunc::exp: return exp(a);
    case ExprFunc::log: return log(a);
    case ExprFunc::sqrt: return sqrt(a);
    case ExprFunc::abs: return abs(a);
  }
  return a;
}

// Subtrees shared between several parents (common after symbolic
// construction) are evaluated once per call.
class JetEvaluator {
 public:
  explicit JetEvaluator(std::span<const Jet> vars) : vars_(vars) {}

  Jet eval(const ExprNode& n) {
    switch (n.op) {
      case ExprOp::constant:
        return Jet(vars_[0].dim(), vars_[0].order(), n.value);
      case ExprOp::variable:
        return vars_[static_cast<std::size_t>(n.var)];
      case ExprOp::add:
        return child(n.lhs) + child(n.rhs);
      case ExprOp::sub:
        return child(n.lhs) - child(n.rhs);
      case ExprOp::mul:
        return child(n.lhs) * child(n.rhs);
      case ExprOp::div:
        return child(n.lhs) / child(n.rhs);
      case ExprOp::neg:
        return -child(n.lhs);
      case ExprOp::pow: {
        Jet base = child(n.lhs);
        if (n.rhs->op == ExprOp::constant) return pow(base, n.rhs->value);
        if (n.rhs->op == ExprOp::neg && n.rhs->lhs->op == ExprOp::constant) return pow(base, -n.rhs->lhs->value);
        return pow(base, child(n.rhs));
      }
      case ExprOp::call:
        return apply(n.func, child(n.lhs));
    }
    throw Error("corrupt expression node");
  }

 private:
  Jet child(const ExprPtr& c) {
    if (c.use_count() <= 1 || c->op == ExprOp::constant || c->op == ExprOp::variable) return eval(*c);
    auto it = memo_.find(c.get());
    if (it != memo_.end()) return it->second;
    Jet v = eval(*c);
    memo_.emplace(c.get(), v);
    return v;
  }

  std::span<const Jet> vars_;
  std::unordered_map<const ExprNode*, Jet> memo_;
};

double eval_value(const ExprNode& n, std::span<const double> x) {
  switch (n.op) {
    case ExprOp::constant:
      return n.value;
    case ExprOp::variable:
      return x[static_cast<std::size_t>(n.var)];
    case ExprOp::add:
      return eval_value(*n.lhs, x) + eval_value(*n.rhs, x);
    case ExprOp::sub:
      return eval_value(*n.lhs, x) - eval_value(*n.rhs, x);
    case ExprOp::mul:
      return eval_value(*n.lhs, x) * eval_value(*n.rhs, x);
    case ExprOp::div: {
      const double d = eval_value(*n.rhs, x);
      if (d == 0.0) throw DomainError("division by zero");
      return eval_value(*n.lhs, x) / d;
    }
    case ExprOp::neg:
      return -eval_value(*n.lhs, x);
    case ExprOp::pow: {
      const double b = eval_value(*n.lhs, x);
      const double e = eval_value(*n.rhs, x);
      if (b < 0.0 && e != std::floor(e)) throw DomainError("non-integer power of negative value");
      if (b == 0.0 && e < 0.0) throw DomainError("negative power of zero");
      return std::pow(b, e);
    }
    case ExprOp::call: {
      const double a = eval_value(*n.lhs, x);
      switch (n.func) {
        case ExprFunc::sin: return std::sin(a);
        case ExprFunc::cos: return std::cos(a);
        case ExprFunc::sinh: return std::sinh(a);
        case ExprFunc::cosh: return std::cosh(a);
        case ExprFunc::tanh: return std::tanh(a);
        case ExprFunc::exp: return std::exp(a);
        case ExprFunc::log:
          if (!(a > 0.0)) throw DomainError("log of non-positive value");
          return std::log(a);
        case ExprFunc::sqrt:
          if (a < 0.0) throw DomainError("sqrt of negative value");
          return std::sqrt(a);
        case ExprFunc::abs: return std::abs(a);
      }
    }
  }
  throw Error("corrupt expression node");
}

}  // namespace

// ---------------------------------------------------------------------------

ExpressionField::ExpressionField(ExprPtr root, std::shared_ptr<const std::vector<std::string>> coords)
    : root_(std::move(root)), coords_(std::move(coords)) {}

ExpressionField ExpressionField::parse(std::string_view text, const std::vector<std::string>& coords) {
  return parse(text, std::make_shared<const std::vector<std::string>>(coords));
}

ExpressionField ExpressionField::parse(std::string_view text,
                                       std::shared_ptr<const std::vector<std::string>> coords) {
  for (std::size_t i = 0; i < coords->size(); ++i) {
    for (std::size_t j = i + 1; j < coords->size(); ++j) {
      if ((*coords)[i] == (*coords)[j]) throw Error("duplicate coordinate name '" + (*coords)[i] + "'");
    }
  }
  Parser p(text, *coords);
  return ExpressionField(p.parse(), std::move(coords));
}

ExpressionField ExpressionField::constant(double v, std::shared_ptr<const std::vector<std::string>> coords) {
  return ExpressionField(expr::constant(v), std::move(coords));
}

std::string ExpressionField::to_string() const {
  std::string out;
  print(*root_, *coords_, out);
  return out;
}

double ExpressionField::evaluate(std::span<const double> point) const {
  if (point.size() != coords_->size()) throw Error("point has wrong dimension");
  try {
    const double v = eval_value(*root_, point);
    if (!std::isfinite(v)) throw DomainError("non-finite value");
    return v;
  } catch (const DomainError& e) {
    if (!e.point().empty()) throw;
    throw DomainError(e.what(), std::vector<double>(point.begin(), point.end()));
  }
}

Jet ExpressionField::evaluate_jet(std::span<const Jet> vars) const {
  if (vars.size() != coords_->size()) throw Error("wrong number of jet arguments");
  try {
    Jet r = JetEvaluator(vars).eval(*root_);
    for (double c : r.coefficients()) {
      if (!std::isfinite(c)) throw DomainError("non-finite value or derivative");
    }
    return r;
  } catch (const DomainError& e) {
    if (!e.point().empty()) throw;
    std::vector<double> p;
    for (const auto& v : vars) p.push_back(v.value());
    throw DomainError(e.what(), std::move(p));
  }
}

Jet ExpressionField::jet_at(std::span<const double> point, int order) const {
  const int m = arity();
  if (static_cast<int>(point.size()) != m) throw Error("point has wrong dimension");
  std::vector<Jet> vars;
  vars.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) vars.push_back(Jet::variable(m, order, i, point[static_cast<std::size_t>(i)]));
  return evaluate_jet(vars);
}

ExpressionField ExpressionField::derivative(int axis) const {
  return ExpressionField(expr::derivative(root_, axis), coords_);
}

double eval_deriv(const ExpressionField& field, std::span<const double> point, std::span<const int> multi_index) {
  int order = 0;
  for (int a : multi_index) order += a;
  if (order > kMaxJetOrder) throw Error("derivative order exceeds " + std::to_string(kMaxJetOrder));
  return field.jet_at(point, order).derivative(multi_index);
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case ExprOp::constant:
      return a.value == b.value;
    case ExprOp::variable:
      return a.var == b.var;
    case ExprOp::neg:
      return structurally_equal(*a.lhs, *b.lhs);
    case ExprOp::call:
      return a.func == b.func && structurally_equal(*a.lhs, *b.lhs);
    default:
      return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  }
}

}  // namespace statgeo
