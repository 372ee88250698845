#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "statgeo/errors.hpp"
#include "statgeo/jet.hpp"

using namespace statgeo;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("layout prefix is independent of order") {
  const auto& lo = JetLayout::get(3, 2);
  const auto& hi = JetLayout::get(3, 5);
  REQUIRE(lo.size() == 10);
  for (std::size_t k = 0; k < lo.size(); ++k) {
    auto a = lo.exponents(k);
    auto b = hi.exponents(k);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
  CHECK(hi.prefix(2) == lo.size());
}

TEST_CASE("univariate derivatives of elementary functions") {
  const double x0 = 0.37;
  Jet x = Jet::variable(1, 6, 0, x0);
  auto check = [&](const Jet& j, auto&& deriv) {
    for (int k = 0; k <= 6; ++k) {
      int alpha[1] = {k};
      CHECK(j.derivative(alpha) == doctest::Approx(deriv(k)).epsilon(1e-12));
    }
  };
  check(exp(x), [&](int) { return std::exp(x0); });
  check(sin(x), [&](int k) { return std::sin(x0 + k * M_PI / 2); });
  check(cos(x), [&](int k) { return std::cos(x0 + k * M_PI / 2); });
  check(sinh(x), [&](int k) { return k % 2 ? std::cosh(x0) : std::sinh(x0); });
  check(cosh(x), [&](int k) { return k % 2 ? std::sinh(x0) : std::cosh(x0); });
  check(log(x), [&](int k) {
    return k == 0 ? std::log(x0) : std::pow(-1.0, k - 1) * factorial(k - 1) / std::pow(x0, k);
  });
  check(pow(x, 2.5), [&](int k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c *= 2.5 - i;
    return c * std::pow(x0, 2.5 - k);
  });
  check(reciprocal(x), [&](int k) { return std::pow(-1.0, k) * factorial(k) / std::pow(x0, k + 1); });
}

TEST_CASE("tanh derivatives match closed forms") {
  const double x0 = -0.8;
  Jet t = tanh(Jet::variable(1, 3, 0, x0));
  const double th = std::tanh(x0);
  const double s2 = 1 - th * th;
  int a1[1] = {1}, a2[1] = {2}, a3[1] = {3};
  CHECK(t.derivative(a1) == doctest::Approx(s2).epsilon(1e-13));
  CHECK(t.derivative(a2) == doctest::Approx(-2 * th * s2).epsilon(1e-13));
  CHECK(t.derivative(a3) == doctest::Approx(s2 * (6 * th * th - 2)).epsilon(1e-13));
}

TEST_CASE("multivariate products and mixed partials") {
  Jet x = Jet::variable(2, 4, 0, 2.0);
  Jet y = Jet::variable(2, 4, 1, 3.0);
  Jet f = x * x * y;
  CHECK(f.d(0, 1) == doctest::Approx(4.0));
  CHECK(f.d(0, 0) == doctest::Approx(6.0));
  int a21[2] = {2, 1};
  CHECK(f.derivative(a21) == doctest::Approx(2.0));
  Jet g = exp(x * y);
  // d^2/dxdy e^{xy} = e^{xy}(1 + xy)
  CHECK(g.d(0, 1) == doctest::Approx(std::exp(6.0) * 7.0).epsilon(1e-13));
}

TEST_CASE("partial and composition") {
  Jet x = Jet::variable(2, 4, 0, 0.4);
  Jet y = Jet::variable(2, 4, 1, -0.2);
  Jet f = sin(x) * exp(y);
  Jet fx = f.partial(0);
  CHECK(fx.order() == 3);
  CHECK(fx.d(1) == doctest::Approx(std::cos(0.4) * std::exp(-0.2)).epsilon(1e-13));

  // outer(s, t) = s^2 t composed with s = x + y, t = x y
  std::vector<Jet> inner = {x + y, x * y};
  JetComposer comp(inner, 4);
  Jet s = Jet::variable(2, 4, 0, inner[0].value());
  Jet t = Jet::variable(2, 4, 1, inner[1].value());
  Jet composed = comp.compose(s * s * t);
  Jet direct = (x + y) * (x + y) * (x * y);
  for (std::size_t k = 0; k < direct.coefficients().size(); ++k) {
    CHECK(composed.coefficients()[k] == doctest::Approx(direct.coefficients()[k]).epsilon(1e-13));
  }
}

TEST_CASE("domain errors instead of NaN") {
  CHECK_THROWS_AS(log(Jet(1, 2, 0.0)), DomainError);
  CHECK_THROWS_AS(log(Jet(1, 2, -1.0)), DomainError);
  CHECK_THROWS_AS(sqrt(Jet(1, 1, 0.0)), DomainError);
  CHECK_NOTHROW(sqrt(Jet(1, 0, 0.0)));
  CHECK_THROWS_AS(reciprocal(Jet(1, 2, 0.0)), DomainError);
  CHECK_THROWS_AS(pow(Jet(1, 2, -1.0), 0.5), DomainError);
  CHECK_NOTHROW(pow(Jet(1, 2, -1.0), 3.0));
  CHECK_THROWS_AS(abs(Jet(1, 1, 0.0)), DomainError);
}

TEST_CASE("random polynomial products agree with coefficient convolution") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    // univariate, expansion at 0: coefficients are the polynomial coefficients
    std::vector<double> a(7), b(7);
    for (auto& c : a) c = u(rng);
    for (auto& c : b) c = u(rng);
    Jet x = Jet::variable(1, 6, 0, 0.0);
    Jet pa(1, 6, 0.0), pb(1, 6, 0.0);
    Jet xp(1, 6, 1.0);
    for (int k = 0; k <= 6; ++k) {
      pa.add_scaled(xp, a[k]);
      pb.add_scaled(xp, b[k]);
      xp *= x;
    }
    Jet prod = pa * pb;
    for (int k = 0; k <= 6; ++k) {
      double c = 0;
      for (int i = 0; i <= k; ++i) c += a[i] * b[k - i];
      CHECK(prod.coefficients()[k] == doctest::Approx(c).epsilon(1e-12));
    }
  }
}
