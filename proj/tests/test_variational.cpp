#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "statgeo/builtins.hpp"
#include "statgeo/errors.hpp"
#include "statgeo/variational.hpp"

using namespace statgeo;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

SmoothMap make_map(const std::string& source, const std::string& target, const std::vector<std::string>& comps) {
  return load_map(json{{"source", source}, {"target", target}, {"components", comps}});
}

// Random trigonometric polynomial of low degree in the given coordinates.
std::string random_trig(std::mt19937_64& rng, const std::vector<std::string>& coords) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_int_distribution<int> freq(0, 3);
  std::string out = std::to_string(amp(rng));
  for (int t = 0; t < 3; ++t) {
    std::string arg;
    for (const auto& c : coords) {
      arg += (arg.empty() ? "" : "+") + std::to_string(freq(rng)) + "*" + c;
    }
    out += "+" + std::to_string(amp(rng)) + "*sin(" + arg + "+" + std::to_string(amp(rng)) + ")";
  }
  return out;
}

std::vector<double> sample(const StatStructure& s, const Lattice& lattice, const std::string& text, int rank = 1) {
  std::vector<double> v;
  std::vector<ExpressionField> f;
  for (int r = 0; r < rank; ++r) {
    f.push_back(ExpressionField::parse(text + "*" + std::to_string(1.0 + 0.5 * r), s.coordinates()));
  }
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    for (const auto& c : f) v.push_back(c.evaluate(lattice.point(k)));
  }
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) r = std::max(r, std::abs(a[k] - b[k]));
  return r;
}

}  // namespace

TEST_CASE("lattice indexing") {
  const Lattice L({5, 6}, {2 * pi, 1.0});
  CHECK(L.size() == 30);
  CHECK(L.stride(0) == 6);
  CHECK(L.stride(1) == 1);
  CHECK(L.point(7)[0] == doctest::Approx(2 * pi / 5));
  CHECK(L.point(7)[1] == doctest::Approx(1.0 / 6));
  CHECK(L.shift(0, 0, -1) == 24);
  CHECK(L.shift(5, 1, 1) == 0);
  CHECK_THROWS_AS(Lattice({4}, {1.0}), SchemaError);
}

TEST_CASE("fd4 and spectral derivatives of sin") {
  const Lattice L({32}, {2 * pi});
  std::vector<double> v(L.size());
  for (std::size_t k = 0; k < L.size(); ++k) v[k] = std::sin(L.point(k)[0]);
  const auto d1 = differentiate(L, v, 1, 0, 1);
  const auto d2 = differentiate(L, v, 1, 0, 2, Stencil::spectral);
  const auto s1 = differentiate(L, v, 1, 0, 1, Stencil::spectral);
  for (std::size_t k = 0; k < L.size(); ++k) {
    const double x = L.point(k)[0];
    CHECK(std::abs(d1[k] - std::cos(x)) < 2e-4);
    CHECK(std::abs(s1[k] - std::cos(x)) < 1e-13);
    CHECK(std::abs(d2[k] + std::sin(x)) < 1e-13);
  }
}

TEST_CASE("integration on the torus") {
  for (int N : {8, 16, 64}) {
    const auto one = ExpressionField::parse("1", {"x", "y"});
    CHECK(integrate(builtin_structure("torus:2"), one, {N}) == doctest::Approx(4 * pi * pi).epsilon(1e-12));
    const auto s2 = ExpressionField::parse("sin(x)^2", {"x"});
    CHECK(std::abs(integrate(builtin_structure("torus:1"), s2, {N}) - pi) < 1e-12);
  }
  // sqrt(1 + 0.25 sin x) has no elementary primitive; compare with a fine lattice.
  const auto one = ExpressionField::parse("1", {"x"});
  const auto s = builtin_structure("stat-torus:1");
  CHECK(integrate(s, one, {64}) == doctest::Approx(integrate(s, one, {512})).epsilon(1e-12));
  CHECK_THROWS_AS(integrate(builtin_structure("geost"), one, {8}), Error);
}

TEST_CASE("Green's formula on torus fixtures") {
  std::mt19937_64 rng(11);
  for (const std::string name : {"torus:1", "torus:2", "stat-torus:1", "stat-torus:2"}) {
    const auto s = builtin_structure(name);
    const auto& coords = s.coordinates();
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<ExpressionField> X;
      for (std::size_t i = 0; i < coords.size(); ++i) X.push_back(ExpressionField::parse(random_trig(rng, coords), coords));
      CHECK(std::abs(green_integral(s, X, {64})) <= 1e-9);
    }
  }
}

TEST_CASE("bi-energy and bi-tension of sin into the line") {
  const auto u = GridMap::sample(make_map("torus:1", "euclidean:1", {"sin(x)"}), {64});
  CHECK(bienergy(u) == doctest::Approx(pi / 2).epsilon(1e-5));
  const auto tau = grid_tension(u);
  const auto tau2 = grid_bitension(u);
  double err_tau = 0.0, err_tau2 = 0.0;
  for (std::size_t k = 0; k < u.lattice().size(); ++k) {
    const double x = u.lattice().point(k)[0];
    err_tau = std::max(err_tau, std::abs(tau[k] + std::sin(x)));
    err_tau2 = std::max(err_tau2, std::abs(tau2[k] - std::sin(x)));
  }
  CHECK(err_tau <= 1e-5);
  CHECK(err_tau2 <= 1e-3);
}

TEST_CASE("grid bi-tension converges to the closed form at fourth order") {
  const auto map = make_map("stat-torus:2", "geost", {"0.5*sin(x)+0.2*cos(y)", "0.3*cos(y)-0.2*sin(x+y)"});
  std::vector<double> errs;
  for (int N : {16, 32, 64}) {
    const auto u = GridMap::sample(map, {N});
    const auto tau2 = grid_bitension(u);
    double err = 0.0;
    for (std::size_t k = 0; k < u.lattice().size(); ++k) {
      const auto exact = bitension(map, u.lattice().point(k)).tau2;
      for (int a = 0; a < 2; ++a) err = std::max(err, std::abs(tau2[k * 2 + static_cast<std::size_t>(a)] - exact[static_cast<std::size_t>(a)]));
    }
    errs.push_back(err);
  }
  MESSAGE("errors " << errs[0] << " " << errs[1] << " " << errs[2]);
  CHECK(std::log2(errs[1] / errs[2]) >= 3.5);
  CHECK(std::log2(errs[0] / errs[1]) >= 3.5);
}

TEST_CASE("grid tension matches the closed form for a 1-dimensional statistical source") {
  const auto map = make_map("stat-torus:1", "geost", {"0.4*sin(x)", "0.6*cos(x)"});
  const auto u = GridMap::sample(map, {128});
  const auto tau = grid_tension(u);
  for (std::size_t k = 0; k < u.lattice().size(); k += 7) {
    const auto exact = tension(map, u.lattice().point(k));
    CHECK(std::abs(tau[k * 2] - exact[0]) < 1e-6);
    CHECK(std::abs(tau[k * 2 + 1] - exact[1]) < 1e-6);
  }
}

TEST_CASE("Laplacian adjointness with the trace term") {
  std::mt19937_64 rng(3);
  for (const std::string name : {"torus:2", "stat-torus:1", "stat-torus:2"}) {
    const auto s = builtin_structure(name);
    const Lattice L = torus_lattice(s, {64});
    for (int rank : {1, 2}) {
      for (int trial = 0; trial < 3; ++trial) {
        const auto xi = sample(s, L, random_trig(rng, s.coordinates()), rank);
        const auto eta = sample(s, L, random_trig(rng, s.coordinates()), rank);
        const auto rep = adjointness_check(s, L, xi, eta, rank);
        CHECK(rep.delta <= 1e-6);
        if (name == "stat-torus:1") CHECK(std::abs(rep.div_term) > 1e-3);
      }
    }
  }
}

TEST_CASE("first variation formula") {
  const auto u = GridMap::sample(make_map("torus:1", "euclidean:1", {"sin(x)"}), {64});
  const Lattice& L = u.lattice();
  std::vector<double> cosv(L.size()), sinv(L.size()), zero(L.size(), 0.0);
  for (std::size_t k = 0; k < L.size(); ++k) {
    cosv[k] = std::cos(L.point(k)[0]);
    sinv[k] = std::sin(L.point(k)[0]);
  }
  const auto a = first_variation_check(u, cosv);
  CHECK(std::abs(a.lhs) < 1e-8);
  CHECK(a.pass());
  const auto b = first_variation_check(u, sinv);
  CHECK(b.lhs == doctest::Approx(pi).epsilon(1e-5));
  CHECK(b.rhs == doctest::Approx(pi).epsilon(1e-5));
  CHECK(b.pass());
  const auto c = first_variation_check(u, zero);
  CHECK(c.lhs == 0.0);
  CHECK(c.rhs == 0.0);
  CHECK(c.pass());

  std::mt19937_64 rng(19);
  const auto map = make_map("stat-torus:1", "geost", {"0.5*sin(x)+0.2*cos(2*x)", "0.4*cos(x)"});
  for (int trial = 0; trial < 5; ++trial) {
    const std::string f0 = random_trig(rng, {"x"}), f1 = random_trig(rng, {"x"});
    std::vector<double> rel;
    for (int N : {32, 64}) {
      const auto curve = GridMap::sample(map, {N});
      const auto v0 = sample(curve.source(), curve.lattice(), f0);
      const auto v1 = sample(curve.source(), curve.lattice(), f1);
      std::vector<double> V;
      for (std::size_t k = 0; k < v0.size(); ++k) {
        V.push_back(0.2 * v0[k]);
        V.push_back(0.2 * v1[k]);
      }
      rel.push_back(first_variation_check(curve, V).rel_error);
    }
    CHECK_MESSAGE(rel[1] < 1e-3, rel[1]);
    CHECK(rel[1] < rel[0] / 8);
  }
}

TEST_CASE("first variation mismatch shrinks with the lattice on a surface") {
  const auto map = make_map("stat-torus:2", "geost", {"0.5*sin(x)+0.2*cos(y)", "0.3*cos(y)-0.2*sin(x+y)"});
  std::vector<double> rel;
  for (int N : {16, 32, 64}) {
    const auto w = GridMap::sample(map, {N});
    std::vector<double> V;
    for (std::size_t k = 0; k < w.lattice().size(); ++k) {
      const auto p = w.lattice().point(k);
      V.push_back(0.2 * std::cos(p[0] + 2 * p[1]));
      V.push_back(0.1 * std::sin(2 * p[0]) + 0.1);
    }
    rel.push_back(first_variation_check(w, V).rel_error);
  }
  MESSAGE("relative errors " << rel[0] << " " << rel[1] << " " << rel[2]);
  CHECK(rel[1] < rel[0] / 8);
  CHECK(rel[2] < rel[1] / 8);
}

TEST_CASE("descent on the bi-energy") {
  SolverConfig cfg;
  cfg.resolution = {12};

  SUBCASE("constant map is already biharmonic") {
    const auto u0 = GridMap::sample(make_map("torus:1", "euclidean:1", {"0.5"}), {12});
    const auto r = minimize(u0, cfg);
    CHECK(r.report.iterations == 0);
    CHECK(r.report.termination == "tolerance met");
  }
  SUBCASE("infinite tolerance stops immediately") {
    cfg.tol = std::numeric_limits<double>::infinity();
    const auto u0 = GridMap::sample(make_map("torus:1", "euclidean:1", {"sin(x)"}), {12});
    const auto r = minimize(u0, cfg);
    CHECK(r.report.iterations == 0);
    CHECK(r.report.energy.size() == 1);
  }
  SUBCASE("zero step stagnates") {
    cfg.step = 0.0;
    const auto u0 = GridMap::sample(make_map("torus:1", "euclidean:1", {"sin(x)"}), {12});
    CHECK_THROWS_AS(minimize(u0, cfg), StagnationError);
  }
  SUBCASE("max iterations") {
    cfg.max_iter = 3;
    const auto u0 = GridMap::sample(make_map("torus:1", "euclidean:1", {"sin(x)"}), {12});
    const auto r = minimize(u0, cfg);
    CHECK(r.report.iterations == 3);
    CHECK(r.report.termination == "max iterations");
  }
  SUBCASE("sin plus harmonic converges monotonically") {
    const auto u0 = GridMap::sample(make_map("torus:1", "euclidean:1", {"sin(x)+0.3*sin(2*x)"}), {12});
    const auto r = minimize(u0, cfg);
    CHECK(r.report.termination == "tolerance met");
    CHECK(r.report.max_tau2 <= 1e-4);
    for (std::size_t k = 1; k < r.report.energy.size(); ++k) CHECK(r.report.energy[k] < r.report.energy[k - 1]);
    MESSAGE("iterations " << r.report.iterations);
  }
}

TEST_CASE("parallel and serial kernels agree bitwise") {
  const auto map = make_map("stat-torus:2", "geost", {"0.5*sin(x)+0.2*cos(y)", "0.3*cos(y)-0.2*sin(x+y)"});
  const auto u = GridMap::sample(map, {24});
  CHECK(grid_bitension(u, Exec::serial) == grid_bitension(u, Exec::parallel));
  CHECK(bienergy(u, Exec::serial) == bienergy(u, Exec::parallel));
  CHECK(max_abs_diff(grid_tension(u, Exec::serial), grid_tension(u, Exec::parallel)) == 0.0);
}

TEST_CASE("solver config and domain errors") {
  const auto c = load_solver_config(json{{"resolution", {16}}, {"tol", "inf"}});
  CHECK(c.resolution == std::vector<int>{16});
  CHECK(std::isinf(c.tol));
  CHECK(c.step == 0.1);
  CHECK_THROWS_AS(load_solver_config(json{{"step", -1.0}}), SchemaError);
  CHECK_THROWS_AS(load_solver_config(json{{"max_iter", "many"}}), SchemaError);
  CHECK_THROWS_AS(GridMap::sample(make_map("torus:1", "geost", {"4*sin(x)", "0"}), {16}), DomainError);
}
