#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "statgeo/errors.hpp"
#include "statgeo/expression.hpp"

using namespace statgeo;

namespace {

const std::vector<std::string> kXY = {"x", "y"};

// Grammar-driven random expression text.
std::string random_text(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  static const char* funcs[] = {"sin", "cos", "sinh", "cosh", "tanh", "exp"};
  switch (pick(rng)) {
    case 0: return "x";
    case 1: return "y";
    case 2: return std::to_string(std::uniform_int_distribution<int>(1, 9)(rng)) + ".25";
    case 3: return random_text(rng, depth - 1) + " + " + random_text(rng, depth - 1);
    case 4: return random_text(rng, depth - 1) + " - " + random_text(rng, depth - 1);
    case 5: return random_text(rng, depth - 1) + " * " + random_text(rng, depth - 1);
    case 6: return "(" + random_text(rng, depth - 1) + ") / (2 + " + random_text(rng, 0) + " * " + random_text(rng, 0) + ")";
    case 7: return "-" + random_text(rng, depth - 1);
    case 8: return random_text(rng, 0) + " ^ " + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng));
    default:
      return std::string(funcs[std::uniform_int_distribution<int>(0, 5)(rng)]) + "(" + random_text(rng, depth - 1) + ")";
  }
}

}  // namespace

TEST_CASE("parse and evaluate") {
  auto f = ExpressionField::parse("x ^ 2 * y - 1/(1-x)", kXY);
  double p[2] = {0.5, 2.0};
  CHECK(f.evaluate(p) == doctest::Approx(-1.5).epsilon(1e-15));

  auto z = ExpressionField::parse("0", kXY);
  CHECK(z.is_zero());
  CHECK(z.evaluate(p) == 0.0);

  auto g = ExpressionField::parse("sinh(x) + cosh(y)", kXY);
  REQUIRE(g.root()->op == ExprOp::add);
  CHECK(g.root()->lhs->op == ExprOp::call);
  CHECK(g.root()->lhs->func == ExprFunc::sinh);
  CHECK(g.root()->rhs->func == ExprFunc::cosh);
}

TEST_CASE("precedence and associativity") {
  double p[2] = {2.0, 3.0};
  CHECK(ExpressionField::parse("2 ^ 3 ^ 2", kXY).evaluate(p) == 512.0);
  CHECK(ExpressionField::parse("-x ^ 2", kXY).evaluate(p) == -4.0);
  CHECK(ExpressionField::parse("x - y - 1", kXY).evaluate(p) == -2.0);
  CHECK(ExpressionField::parse("x / y / 2", kXY).evaluate(p) == doctest::Approx(1.0 / 3.0));
  CHECK(ExpressionField::parse("2 ^ -1", kXY).evaluate(p) == 0.5);
  CHECK(ExpressionField::parse("1.5e1 + .5", kXY).evaluate(p) == 15.5);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(ExpressionField::parse("", kXY), SyntaxError);
  CHECK_THROWS_AS(ExpressionField::parse("x +", kXY), SyntaxError);
  CHECK_THROWS_AS(ExpressionField::parse("(x", kXY), SyntaxError);
  try {
    ExpressionField::parse("x + zeta", kXY);
    FAIL("expected throw");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 4);
    CHECK(std::string(e.what()).find("unknown identifier") != std::string::npos);
  }
  try {
    ExpressionField::parse("1 + foo(x)", kXY);
    FAIL("expected throw");
  } catch (const SyntaxError& e) {
    CHECK(std::string(e.what()).find("unknown function") != std::string::npos);
  }
}

TEST_CASE("domain errors carry the point") {
  auto f = ExpressionField::parse("log(x)", kXY);
  double p[2] = {-1.0, 0.0};
  CHECK_THROWS_AS(f.evaluate(p), DomainError);
  try {
    f.jet_at(p, 2);
  } catch (const DomainError& e) {
    CHECK(e.point().size() == 2);
  }
  auto g = ExpressionField::parse("1/(x-y)", kXY);
  double q[2] = {1.0, 1.0};
  CHECK_THROWS_AS(g.evaluate(q), DomainError);
  CHECK_THROWS_AS(g.jet_at(q, 1), DomainError);
}

TEST_CASE("eval_deriv on known derivatives") {
  auto s = ExpressionField::parse("sinh(x)", std::vector<std::string>{"x"});
  double zero[1] = {0.0};
  int one[1] = {1};
  CHECK(eval_deriv(s, zero, one) == doctest::Approx(1.0));

  auto f = ExpressionField::parse("sinh(x) + cosh(y)", kXY);
  double p[2] = {1.0, 1.0};
  int a40[2] = {4, 0};
  CHECK(eval_deriv(f, p, a40) == doctest::Approx(1.1752011936438014).epsilon(1e-12));

  auto m = ExpressionField::parse("x^2*y", kXY);
  double q[2] = {2.0, 3.0};
  int a11[2] = {1, 1};
  CHECK(eval_deriv(m, q, a11) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("round trip of printed expressions") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string text = random_text(rng, 4);
    auto a = ExpressionField::parse(text, kXY);
    auto b = ExpressionField::parse(a.to_string(), kXY);
    INFO(text, " -> ", a.to_string());
    CHECK(structurally_equal(a, b));
    CHECK(a.to_string() == b.to_string());
  }
}

TEST_CASE("random polynomial derivatives match coefficient differentiation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  std::uniform_int_distribution<int> ord(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    // p(x,y) = sum c_ab x^a y^b, a + b <= 6
    std::vector<std::array<double, 3>> terms;
    std::string text = "0";
    for (int a = 0; a <= 6; ++a) {
      for (int b = 0; a + b <= 6; ++b) {
        const double c = std::round(u(rng) * 8) / 8;
        terms.push_back({c, double(a), double(b)});
        text += " + " + std::to_string(c).substr(0, 6) + " * x^" + std::to_string(a) + " * y^" + std::to_string(b);
      }
    }
    auto f = ExpressionField::parse(text, kXY);
    const double p[2] = {u(rng), u(rng)};
    int alpha[2] = {ord(rng), 0};
    alpha[1] = std::uniform_int_distribution<int>(0, 4 - alpha[0])(rng);
    // coefficients re-read from the parsed constants to avoid text rounding drift
    double expected = 0;
    for (const auto& t : terms) {
      const int a = int(t[1]), b = int(t[2]);
      if (a < alpha[0] || b < alpha[1]) continue;
      double c = std::stod(std::to_string(t[0]).substr(0, 6));
      for (int i = 0; i < alpha[0]; ++i) c *= a - i;
      for (int i = 0; i < alpha[1]; ++i) c *= b - i;
      expected += c * std::pow(p[0], a - alpha[0]) * std::pow(p[1], b - alpha[1]);
    }
    const double got = eval_deriv(f, p, alpha);
    CHECK(std::abs(got - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("chain rule through AST composition") {
  // f(g(x)) with f(s) = exp(s) * sin(s), g(x, y) = x*y + cosh(x)
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  auto h = ExpressionField::parse("exp(x*y + cosh(x)) * sin(x*y + cosh(x))", kXY);
  for (int trial = 0; trial < 100; ++trial) {
    const double p[2] = {u(rng), u(rng)};
    const double g = p[0] * p[1] + std::cosh(p[0]);
    const double gx = p[1] + std::sinh(p[0]);
    const double gxx = std::cosh(p[0]);
    const double fs = std::exp(g) * (std::sin(g) + std::cos(g));
    const double fss = 2 * std::exp(g) * std::cos(g);
    int a1[2] = {1, 0}, a2[2] = {2, 0};
    const double d1 = eval_deriv(h, p, a1);
    const double d2 = eval_deriv(h, p, a2);
    CHECK(std::abs(d1 - fs * gx) <= 1e-10 * std::max(1.0, std::abs(d1)));
    CHECK(std::abs(d2 - (fss * gx * gx + fs * gxx)) <= 1e-10 * std::max(1.0, std::abs(d2)));
  }
}

TEST_CASE("symbolic derivative agrees with jet derivative") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string text = random_text(rng, 3);
    auto f = ExpressionField::parse(text, kXY);
    auto fx = f.derivative(0).derivative(1);
    const double p[2] = {u(rng), u(rng)};
    int a11[2] = {1, 1};
    double jet, sym;
    try {
      jet = eval_deriv(f, p, a11);
      sym = fx.evaluate(p);
    } catch (const DomainError&) {
      continue;
    }
    INFO(text);
    CHECK(std::abs(jet - sym) <= 1e-9 * std::max(1.0, std::abs(jet)));
  }
}
