#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "statgeo/builtins.hpp"
#include "statgeo/errors.hpp"
#include "statgeo/maps.hpp"

using namespace statgeo;
using nlohmann::json;

namespace {

SmoothMap make_map(const std::string& source, const std::string& target, const std::vector<std::string>& comps) {
  return load_map(json{{"source", source}, {"target", target}, {"components", comps}});
}

double max_abs(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

std::vector<std::vector<double>> interval_points(double lo, double hi, int count) {
  std::vector<std::vector<double>> pts;
  for (int k = 0; k < count; ++k) pts.push_back({lo + (hi - lo) * (k + 0.5) / count});
  return pts;
}

json box_source(const std::vector<std::string>& coords, double lo, double hi) {
  json iv = json::array();
  json metric = json::array();
  for (std::size_t i = 0; i < coords.size(); ++i) {
    iv.push_back({lo, hi});
    json row = json::array();
    for (std::size_t j = 0; j < coords.size(); ++j) row.push_back(i == j ? "1" : "0");
    metric.push_back(row);
  }
  return json{{"dimension", coords.size()},
              {"coordinates", coords},
              {"topology", {{"kind", "box"}, {"intervals", iv}}},
              {"metric", metric},
              {"connection", {{"kind", "levi_civita"}}}};
}

}  // namespace

TEST_CASE("identity map of the plane is harmonic") {
  const SmoothMap u = make_map("euclidean:2", "euclidean:2", {"x", "y"});
  for (const auto& p : u.source().domain().probes(10)) {
    CHECK(max_abs(tension(u, p)) == 0.0);
    CHECK(max_abs(bitension(u, p).tau2) == 0.0);
  }
}

TEST_CASE("lines into geost") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
    const SmoothMap curve = load_map(json{{"source", box_source({"t"}, -1.0, 1.0)},
                                          {"target", "geost"},
                                          {"components", {std::to_string(a) + "*t + " + std::to_string(c),
                                                          std::to_string(b) + "*t + " + std::to_string(d)}}});
    const double A = std::stod(std::to_string(a)), B = std::stod(std::to_string(b));
    for (const auto& p : interval_points(-1.0, 1.0, 50)) {
      const TensionValue v = curve_bitension(curve, p[0]);
      CHECK(std::abs(v.tau[0] - A * A) <= 1e-9);
      CHECK(std::abs(v.tau[1] - B * B) <= 1e-9);
      CHECK(max_abs(v.tau2) <= 1e-8);
      const TensionValue w = bitension(curve, p);
      for (int k = 0; k < 2; ++k) CHECK(std::abs(w.tau2[static_cast<std::size_t>(k)] - v.tau2[static_cast<std::size_t>(k)]) <= 1e-9);
    }
  }
  const SmoothMap c = load_map(json{{"source", box_source({"t"}, -1.0, 1.0)}, {"target", "geost"},
                                    {"components", {"2*t + 1", "-t"}}});
  const double t0[1] = {0.25};
  const TensionValue v = bitension(c, t0);
  CHECK(v.tau[0] == doctest::Approx(4.0));
  CHECK(v.tau[1] == doctest::Approx(1.0));
  CHECK(max_abs(v.tau2) <= 1e-12);
  // the conjugate Laplacian term and the K term cancel
  CHECK(v.delta_bar_tau[0] == doctest::Approx(16.0));
  CHECK(v.K_term[0] == doctest::Approx(16.0));
  CHECK(max_abs(v.L_term) == 0.0);
}

TEST_CASE("sinh plus cosh on geost") {
  const SmoothMap f = make_map("geost", "euclidean:1", {"sinh(x) + cosh(y)"});
  const double p[2] = {1.0, 0.0};
  CHECK(std::abs(tension(f, p)[0] - 0.632120558) <= 1e-9);
  for (const auto& q : f.source().domain().probes(100, 1)) {
    const TensionValue v = bitension(f, q);
    CHECK(std::abs(v.tau2[0]) <= 1e-7);
    const double assembled = v.delta_bar_tau[0] + v.div_trK_term[0] - v.L_term[0] - v.K_term[0];
    CHECK(std::abs(assembled - v.tau2[0]) <= 1e-12);
    const double expect = std::sinh(q[0]) + std::cosh(q[1]) - std::cosh(q[0]) - std::sinh(q[1]);
    CHECK(std::abs(v.tau[0] - expect) <= 1e-12);
  }
  const auto rep = check_biharmonic(f, f.source().domain().probes(100));
  CHECK_FALSE(rep.is_harmonic);
  CHECK(rep.is_statistical_biharmonic);
}

TEST_CASE("biharmonic classification of simple maps") {
  const auto probes = euclidean_chart(2, 2.0).domain().probes(50);
  const auto constant = check_biharmonic(make_map("euclidean:2", "euclidean:2", {"1.5", "-2"}), probes);
  CHECK(constant.is_harmonic);
  CHECK(constant.is_statistical_biharmonic);
  const auto quartic = check_biharmonic(make_map("euclidean:2", "euclidean:2", {"x^4", "y"}), probes);
  CHECK_FALSE(quartic.is_harmonic);
  CHECK_FALSE(quartic.is_statistical_biharmonic);
  const auto cubic = check_biharmonic(make_map("euclidean:2", "euclidean:2", {"x^3", "y"}), probes);
  CHECK_FALSE(cubic.is_harmonic);
  CHECK(cubic.is_statistical_biharmonic);
}

TEST_CASE("parallel and serial sweeps agree exactly") {
  const SmoothMap f = make_map("geost", "euclidean:1", {"sinh(x) + cosh(y) + x^3*y"});
  const auto probes = f.source().domain().probes(64, 2);
  const auto a = check_biharmonic(f, probes);
  const auto b = check_biharmonic_serial(f, probes);
  CHECK(a.max_tau == b.max_tau);
  CHECK(a.max_tau2 == b.max_tau2);
  CHECK(a.worst_tau2_point == b.worst_tau2_point);
}

TEST_CASE("circle into the euclidean plane") {
  const SmoothMap c = make_map("euclidean:1", "euclidean:2", {"cos(t)", "sin(t)"});
  for (const auto& p : interval_points(-3.0, 3.0, 20)) {
    const TensionValue v = curve_bitension(c, p[0]);
    CHECK(v.tau2[0] == doctest::Approx(std::cos(p[0])).epsilon(1e-12));
    CHECK(v.tau2[1] == doctest::Approx(std::sin(p[0])).epsilon(1e-12));
  }
}

TEST_CASE("latitude circles on the round sphere") {
  for (double theta0 : {0.5, std::numbers::pi / 4, 1.2}) {
    const SmoothMap c = make_map("euclidean:1", "sphere", {std::to_string(theta0), "0.5*t"});
    const double th = std::stod(std::to_string(theta0));
    for (const auto& p : interval_points(-2.0, 2.0, 10)) {
      const TensionValue v = curve_bitension(c, p[0]);
      CHECK(v.tau[0] == doctest::Approx(-0.25 * std::sin(th) * std::cos(th)).epsilon(1e-12));
      const auto jiang = bitension_riemannian(c, p);
      for (int k = 0; k < 2; ++k) CHECK(std::abs(jiang[static_cast<std::size_t>(k)] - v.tau2[static_cast<std::size_t>(k)]) <= 1e-9);
      // tau2^theta = (1/16) sin cos (cos^2 - sin^2), vanishing only at pi/4
      const double expect = std::sin(th) * std::cos(th) * std::cos(2 * th) / 16.0;
      CHECK(std::abs(v.tau2[0] - expect) <= 1e-10);
    }
  }
}

TEST_CASE("riemannian collapse on sphere targets") {
  const SmoothMap u = load_map(json{{"source", box_source({"x", "y"}, -1.0, 1.0)},
                                    {"target", "sphere"},
                                    {"components", {"1 + 0.3*sin(x) + 0.1*y^2", "y + 0.2*x*y"}}});
  for (const auto& p : u.source().domain().probes(30)) {
    const auto a = bitension(u, p).tau2;
    const auto b = bitension_riemannian(u, p);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) <= 1e-7);
  }
}

TEST_CASE("simplified form for trace-free sources and conjugate symmetric targets") {
  const SmoothMap u = make_map("paraboloid:2", "geost", {"0.5*x + 0.3*sin(y)", "0.4*y + 0.2*x^2"});
  for (const auto& p : u.source().domain().probes(30)) {
    const auto a = bitension(u, p).tau2;
    const auto b = bitension_simplified(u, p);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) <= 1e-7);
  }
}

TEST_CASE("general maps between statistical manifolds") {
  const SmoothMap u = make_map("stat-torus:2", "geost", {"0.5*sin(x) + 0.2*cos(y)", "0.3*cos(x + y)"});
  for (const auto& p : u.source().domain().probes(20)) {
    const TensionValue v = bitension(u, p);
    const double assembled = v.delta_bar_tau[1] + v.div_trK_term[1] - v.L_term[1] - v.K_term[1];
    CHECK(std::abs(assembled - v.tau2[1]) <= 1e-12);
  }
  const SmoothMap c = make_map("euclidean:1", "simplex:2:exponential", {"0.3 + 0.01*t^2", "0.2 + 0.01*sin(t)"});
  for (const auto& p : interval_points(-2.0, 2.0, 20)) {
    const auto a = curve_bitension(c, p[0]).tau2;
    const auto b = bitension(c, p).tau2;
    for (int k = 0; k < 2; ++k) CHECK(std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) <= 1e-9 * std::max(1.0, std::abs(b[static_cast<std::size_t>(k)])));
  }
}

TEST_CASE("images outside the target chart") {
  const SmoothMap u = make_map("euclidean:2", "sphere", {"x", "y"});
  const double p[2] = {5.0, 0.0};
  try {
    tension(u, p);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    REQUIRE(e.point().size() == 2);
    CHECK(e.point()[0] == 5.0);
  }
}

TEST_CASE("divergence identity for the bi-energy integrand") {
  const SmoothMap harmonic = make_map("euclidean:2", "euclidean:2", {"x + 2*y", "x*y"});
  const double p[2] = {0.3, 0.1};
  const auto h = lemma51_integrand(harmonic, p);
  CHECK(h.div_theta_X == doctest::Approx(0.0));
  CHECK(h.tau_norm_sq == doctest::Approx(0.0));

  const SmoothMap circle = make_map("torus:1", "euclidean:2", {"sin(x)", "0"});
  for (const auto& q : circle.source().domain().probes(50)) {
    const auto v = lemma51_integrand(circle, q);
    CHECK(std::abs(v.residual()) <= 1e-8);
    CHECK(v.tau_norm_sq == doctest::Approx(std::sin(q[0]) * std::sin(q[0])).epsilon(1e-12));
  }

  const SmoothMap f = make_map("geost", "euclidean:1", {"sinh(x) + cosh(y)"});
  const double q[2] = {1.0, 0.0};
  const auto v = lemma51_integrand(f, q);
  CHECK(v.tau_norm_sq == doctest::Approx(0.632120558 * 0.632120558).epsilon(1e-8));
  CHECK(std::abs(v.residual()) <= 1e-7);
  for (const auto& r : f.source().domain().probes(50)) CHECK(std::abs(lemma51_integrand(f, r).residual()) <= 1e-7);

  const SmoothMap g = make_map("stat-torus:2", "euclidean:1", {"sin(x)"});
  CHECK_THROWS_AS(lemma51_integrand(g, q), UnsupportedStructure);
}
