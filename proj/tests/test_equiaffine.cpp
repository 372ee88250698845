#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "statgeo/builtins.hpp"
#include "statgeo/equiaffine.hpp"
#include "statgeo/errors.hpp"

using namespace statgeo;
using nlohmann::json;

namespace {

double max_abs(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

std::vector<GraphHypersurface> corpus() {
  return {builtin_hypersurface("paraboloid:1"), builtin_hypersurface("paraboloid:2"),
          builtin_hypersurface("ellipse"),      builtin_hypersurface("sphere-cap"),
          builtin_hypersurface("exp-graph"),
          load_hypersurface(json::parse(R"j({"dimension": 2, "graph": "exp(x) + 0.5*y^2 + 0.1*x*y",
                                             "domain": [[-1, 1], [-1, 1]]})j"))};
}

}  // namespace

TEST_CASE("paraboloid blaschke data") {
  for (int m : {1, 2, 3}) {
    const GraphHypersurface hs = builtin_hypersurface("paraboloid:" + std::to_string(m));
    for (const auto& p : hs.domain().probes(20)) {
      const EquiaffineStructure e = blaschke(hs, p);
      CHECK(e.lambda == doctest::Approx(1.0));
      for (int a = 0; a <= m; ++a) CHECK(std::abs(e.xi[static_cast<std::size_t>(a)] - (a == m ? 1.0 : 0.0)) <= 1e-12);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) CHECK(e.h[static_cast<std::size_t>(i * m + j)] == doctest::Approx(i == j ? 1.0 : 0.0));
      }
      CHECK(max_abs(e.S) <= 1e-9);
      CHECK(max_abs(e.gamma) <= 1e-12);
    }
  }
}

TEST_CASE("exp graph has a tangential normal component") {
  const GraphHypersurface hs = builtin_hypersurface("exp-graph");
  const double p[1] = {0.3};
  const EquiaffineStructure e = blaschke(hs, p);
  CHECK(std::abs(e.xi[0]) > 1e-3);
  CHECK(equiaffine_checks(hs, p).max() <= 1e-8);
}

TEST_CASE("defining conditions on the corpus") {
  for (const auto& hs : corpus()) {
    CAPTURE(hs.name());
    for (const auto& p : hs.domain().probes(50)) {
      const EquiaffineChecks c = equiaffine_checks(hs, p);
      CHECK(c.decomposition <= 1e-8);
      CHECK(c.equiaffine <= 1e-8);
      CHECK(c.volume <= 1e-8);
      CHECK(c.apolarity <= 1e-8);
      CHECK(c.gauss <= 1e-8);
    }
  }
}

TEST_CASE("classification") {
  const GraphHypersurface par = builtin_hypersurface("paraboloid:2");
  CHECK(classify(par, par.domain().probes(20)) == AffineClass::improper_sphere);
  const GraphHypersurface ell = builtin_hypersurface("ellipse");
  CHECK(classify(ell, ell.domain().probes(20)) == AffineClass::generic);
  for (const auto& p : ell.domain().probes(20)) {
    const EquiaffineStructure e = blaschke(ell, p);
    CHECK(e.S[0] > 0.0);
    // a proper affine sphere: S is the same multiple of the identity everywhere
    CHECK(e.S[0] == doctest::Approx(blaschke(ell, ell.domain().probes(1)[0]).S[0]).epsilon(1e-9));
    CHECK(max_abs(affine_invariants(ell, p).tr_h_nabla_S) <= 1e-8);
  }
  const GraphHypersurface cap = builtin_hypersurface("sphere-cap");
  for (const auto& p : cap.domain().probes(10)) {
    const EquiaffineStructure e = blaschke(cap, p);
    CHECK(std::abs(e.S[1]) <= 1e-9);
    CHECK(std::abs(e.S[2]) <= 1e-9);
    CHECK(e.S[0] == doctest::Approx(e.S[3]).epsilon(1e-9));
  }
  for (const auto& p : par.domain().probes(10)) CHECK(max_abs(affine_invariants(par, p).tr_h_nabla_S) == 0.0);
}

TEST_CASE("shape operator from the gauss equation") {
  for (const auto& hs : corpus()) {
    if (hs.dim() < 2) continue;
    CAPTURE(hs.name());
    const StatStructure s = induced_structure(hs);
    for (const auto& p : hs.domain().probes(20)) {
      const auto S = shape_from_curvature(s, p);
      const auto e = blaschke(hs, p);
      for (std::size_t k = 0; k < S.size(); ++k) CHECK(std::abs(S[k] - e.S[k]) <= 1e-7);
    }
  }
  const double p[1] = {0.1};
  CHECK_THROWS_AS(shape_from_curvature(induced_structure(builtin_hypersurface("ellipse")), p), UnsupportedStructure);
}

TEST_CASE("interchange tensor of graph structures matches the closed form") {
  for (const auto& name : {"paraboloid:2", "sphere-cap"}) {
    const GraphHypersurface hs = builtin_hypersurface(name);
    const StatStructure s = induced_structure(hs);
    for (const auto& p : hs.domain().probes(10)) {
      const auto e = blaschke(hs, p);
      const auto closed = space_form_interchange(e.S, e.h, hs.dim(), p);
      const auto L = curvature(s, CurvatureKind::interchange, p);
      for (std::size_t k = 0; k < L.components.size(); ++k) CHECK(std::abs(L.components[k] - closed.components[k]) <= 1e-8);
    }
  }
}

TEST_CASE("tension and bitension of graph immersions") {
  for (int m : {1, 2}) {
    const GraphHypersurface hs = builtin_hypersurface("paraboloid:" + std::to_string(m));
    for (const auto& p : hs.domain().probes(50)) {
      const auto b = hypersurface_bitension(hs, p);
      for (int a = 0; a <= m; ++a) CHECK(std::abs(b.tau[static_cast<std::size_t>(a)] - (a == m ? m : 0.0)) <= 1e-8);
      CHECK(max_abs(b.tau2_formula) <= 1e-6);
      CHECK(max_abs(b.tau2_direct) <= 1e-6);
    }
  }
  for (const auto& hs : corpus()) {
    CAPTURE(hs.name());
    for (const auto& p : hs.domain().probes(20, 3)) {
      const auto b = hypersurface_bitension(hs, p);
      const auto e = blaschke(hs, p);
      for (std::size_t a = 0; a < b.tau.size(); ++a) {
        CHECK(std::abs(b.tau[a] - hs.dim() * e.xi[a]) <= 1e-8);
        CHECK(std::abs(b.tau_direct[a] - b.tau[a]) <= 1e-8);
        CHECK(std::abs(b.tau2_formula[a] - b.tau2_direct[a]) <= 1e-5);
      }
    }
  }
  const GraphHypersurface ell = builtin_hypersurface("ellipse");
  const double p[1] = {0.4};
  CHECK(max_abs(hypersurface_bitension(ell, p).tau2_formula) > 1e-3);
}

TEST_CASE("non-convex graphs are rejected") {
  const GraphHypersurface saddle("saddle", ExpressionField::parse("x^2 - y^2", {"x", "y"}),
                                 Domain::box({{-1, 1}, {-1, 1}}));
  const double p[2] = {0.1, 0.2};
  CHECK_THROWS_AS(blaschke(saddle, p), DomainError);
  CHECK_THROWS_AS(load_hypersurface(json::parse(R"j({"dimension": 1, "graph": "-x^2", "domain": [[-1, 1]],
                                                    "coordinates": ["x"]})j")),
                  DomainError);
}
