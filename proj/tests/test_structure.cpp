#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "statgeo/builtins.hpp"
#include "statgeo/equiaffine.hpp"
#include "statgeo/errors.hpp"
#include "statgeo/simplex.hpp"
#include "statgeo/structure.hpp"

using namespace statgeo;

namespace {

std::vector<StatStructure> fixtures() {
  return {builtin_structure("geost"),        builtin_structure("euclidean:2"),
          builtin_structure("sphere"),       builtin_structure("stat-torus:1"),
          builtin_structure("stat-torus:2"), builtin_structure("simplex:2:exponential"),
          builtin_structure("simplex:3:mixture"), builtin_structure("paraboloid:2"),
          builtin_structure("sphere-cap")};
}

double max_abs(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

}  // namespace

TEST_CASE("geost difference tensor and conjugate symbols") {
  const StatStructure s = builtin_structure("geost");
  for (const auto& p : s.domain().probes(10)) {
    const LocalTensors t = s.local(p, 1);
    for (int k = 0; k < 2; ++k) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const double expect = (i == j && j == k) ? 1.0 : 0.0;
          CHECK(t.K[t.idx3(k, i, j)].value() == doctest::Approx(expect));
          CHECK(t.gamma_bar[t.idx3(k, i, j)].value() == doctest::Approx(-expect));
          CHECK(t.gamma_g[t.idx3(k, i, j)].value() == doctest::Approx(0.0));
        }
      }
    }
  }
}

TEST_CASE("euclidean structure is trivial") {
  const StatStructure s = builtin_structure("euclidean:2");
  const double p[2] = {0.3, 0.2};
  const LocalTensors t = s.local(p, 1);
  for (const auto& j : t.gamma) CHECK(j.value() == 0.0);
  for (const auto& j : t.gamma_bar) CHECK(j.value() == 0.0);
  CHECK(s.riemannian());
}

TEST_CASE("codazzi violation is reported") {
  // g = I with Gamma^x_yy = y: (nabla_x g)(y,y) = 0 but (nabla_y g)(x,y) = -y
  auto coords = std::vector<std::string>{"x", "y"};
  auto cptr = std::make_shared<const std::vector<std::string>>(coords);
  std::vector<ExpressionField> g{ExpressionField::parse("1", cptr), ExpressionField::parse("0", cptr),
                                 ExpressionField::parse("0", cptr), ExpressionField::parse("1", cptr)};
  std::vector<ExpressionField> c(8, ExpressionField::parse("0", cptr));
  c[3] = ExpressionField::parse("1 + y^2", cptr);
  const ChartManifold chart("bad", coords, Domain::box({{-1, 1}, {-1, 1}}), g, ConnectionKind::christoffel, c);
  try {
    build_structure(chart);
    FAIL("expected CodazziError");
  } catch (const CodazziError& e) {
    CHECK(e.residual() > 1e-3);
    CHECK(e.point().size() == 2);
  }
}

TEST_CASE("derivative of g equals -2 g(K, .) on every fixture") {
  for (const auto& s : fixtures()) {
    CAPTURE(s.name());
    for (const auto& p : s.domain().probes(20, 5)) {
      const LocalTensors t = s.local(p, 1);
      const auto C = codazzi_tensor(t);
      const int m = t.m;
      double worst = 0.0;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          for (int k = 0; k < m; ++k) {
            double gk = 0.0;
            for (int l = 0; l < m; ++l) gk += t.g[t.idx2(k, l)].value() * t.K[t.idx3(l, i, j)].value();
            worst = std::max(worst, std::abs(C[t.idx3(i, j, k)] + 2.0 * gk));
          }
        }
      }
      CHECK(worst <= 1e-8);
    }
  }
}

TEST_CASE("conjugation is an involution") {
  for (const auto& s : fixtures()) {
    CAPTURE(s.name());
    const StatStructure cc = s.conjugate().conjugate();
    for (const auto& p : s.domain().probes(5, 2)) {
      const LocalTensors a = s.local(p, 1);
      const LocalTensors b = cc.local(p, 1);
      for (std::size_t k = 0; k < a.gamma.size(); ++k) {
        CHECK(std::abs(a.gamma[k].value() - b.gamma[k].value()) <= 1e-12 * std::max(1.0, std::abs(a.gamma[k].value())));
      }
    }
  }
}

TEST_CASE("geost is flat in both connections") {
  const StatStructure s = builtin_structure("geost");
  for (const auto& p : s.domain().probes(100)) {
    CHECK(max_abs(curvature(s, CurvatureKind::primal, p).components) <= 1e-9);
    CHECK(max_abs(curvature(s, CurvatureKind::conjugate, p).components) <= 1e-9);
  }
}

TEST_CASE("curvature antisymmetry in the first two slots") {
  for (const auto& s : fixtures()) {
    CAPTURE(s.name());
    for (const auto& p : s.domain().probes(5, 9)) {
      for (auto kind : {CurvatureKind::primal, CurvatureKind::conjugate, CurvatureKind::levi_civita}) {
        const auto R = curvature(s, kind, p);
        for (int l = 0; l < R.m; ++l) {
          for (int i = 0; i < R.m; ++i) {
            for (int j = 0; j < R.m; ++j) {
              for (int k = 0; k < R.m; ++k) CHECK(R.at(l, i, j, k) == doctest::Approx(-R.at(l, j, i, k)));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("riemannian structures have equal curvatures") {
  const StatStructure s = builtin_structure("sphere");
  for (const auto& p : s.domain().probes(10)) {
    const auto R = curvature(s, CurvatureKind::primal, p);
    const auto Rb = curvature(s, CurvatureKind::conjugate, p);
    const auto Rg = curvature(s, CurvatureKind::levi_civita, p);
    for (std::size_t k = 0; k < R.components.size(); ++k) {
      CHECK(std::abs(R.components[k] - Rg.components[k]) <= 1e-12);
      CHECK(std::abs(Rb.components[k] - Rg.components[k]) <= 1e-12);
    }
    // Gaussian curvature 1: R^theta_{theta phi phi} = sin^2 theta
    CHECK(Rg.at(0, 0, 1, 1) == doctest::Approx(std::sin(p[0]) * std::sin(p[0])).epsilon(1e-12));
  }
}

TEST_CASE("curvature identities on every fixture") {
  for (const auto& s : fixtures()) {
    CAPTURE(s.name());
    for (const auto& p : s.domain().probes(20, 1)) {
      const IdentityReport rep = check_curvature_identities(s, p);
      for (const auto& r : rep.residuals) {
        CAPTURE(r.name);
        if (r.asserted) CHECK(r.residual <= 1e-7);
      }
      CHECK(rep.pass());
    }
  }
}

TEST_CASE("geost identities at a fixed point") {
  const StatStructure s = builtin_structure("geost");
  const double p[2] = {0.3, -0.7};
  const IdentityReport rep = check_curvature_identities(s, p, 1e-9);
  CHECK(rep.conjugate_symmetric);
  for (const auto& r : rep.residuals) CHECK(r.residual <= 1e-9);
}

TEST_CASE("space form interchange closed form") {
  const std::vector<double> g{1, 0, 0, 1};
  const std::vector<double> zero(4, 0.0);
  CHECK(max_abs(space_form_interchange(zero, g, 2).components) == 0.0);
  const std::vector<double> id{1, 0, 0, 1};
  const auto L = space_form_interchange(id, g, 2);
  // L(Z,W)X = -g(X,Z) W + g(X,W) Z, at(d, a, b, c) = L(d_a, d_b) d_c
  for (int d = 0; d < 2; ++d) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (int c = 0; c < 2; ++c) {
          const double expect = -(c == a ? 1.0 : 0.0) * (d == b ? 1.0 : 0.0) + (c == b ? 1.0 : 0.0) * (d == a ? 1.0 : 0.0);
          CHECK(L.at(d, a, b, c) == expect);
        }
      }
    }
  }
  const std::vector<double> asym{1, 2, 0, 1};
  CHECK_THROWS_AS(space_form_interchange(asym, g, 2), Error);
}

TEST_CASE("tchebychev objects") {
  const StatStructure geost = builtin_structure("geost");
  for (const auto& p : geost.domain().probes(20)) {
    const auto tv = tchebychev(geost, p);
    CHECK(tv.trK[0] == doctest::Approx(1.0));
    CHECK(tv.trK[1] == doctest::Approx(1.0));
    CHECK(max_abs(tv.T_op) <= 1e-10);
  }
  const double p2[2] = {0.3, 0.3};
  CHECK(max_abs(tchebychev(builtin_structure("sphere"), p2).trK) == 0.0);
  const double half[1] = {0.5};
  CHECK(tchebychev(builtin_structure("simplex:1:exponential"), half).trK[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("divergences") {
  const StatStructure geost = builtin_structure("geost");
  auto cptr = std::make_shared<const std::vector<std::string>>(geost.coordinates());
  const std::vector<ExpressionField> trK{ExpressionField::parse("1", cptr), ExpressionField::parse("1", cptr)};
  const double p[2] = {0.2, 0.9};
  CHECK(divergence(geost, trK, DivergenceKind::levi_civita, p) == 0.0);
  const std::vector<ExpressionField> zero{ExpressionField::parse("0", cptr), ExpressionField::parse("0", cptr)};
  for (auto k : {DivergenceKind::nabla_primal, DivergenceKind::nabla_conjugate, DivergenceKind::levi_civita,
                 DivergenceKind::theta_volume}) {
    CHECK(divergence(geost, zero, k, p) == 0.0);
  }
  const StatStructure simplex = builtin_structure("simplex:2:exponential");
  const double uniform[2] = {1.0 / 3, 1.0 / 3};
  CHECK(div_trK(simplex.local(uniform, 2)) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("divergence product rule") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (const auto& s : fixtures()) {
    CAPTURE(s.name());
    const auto cptr = std::make_shared<const std::vector<std::string>>(s.coordinates());
    const int m = s.dim();
    auto poly = [&]() {
      std::string t = std::to_string(coef(rng));
      for (int i = 0; i < m; ++i) {
        t += " + " + std::to_string(coef(rng)) + "*" + s.coordinates()[static_cast<std::size_t>(i)];
        t += " + " + std::to_string(coef(rng)) + "*" + s.coordinates()[static_cast<std::size_t>(i)] + "^2";
      }
      return ExpressionField::parse(t, cptr);
    };
    const ExpressionField f = poly();
    std::vector<ExpressionField> X, fX;
    for (int i = 0; i < m; ++i) {
      X.push_back(poly());
      fX.emplace_back(expr::mul(f.root(), X.back().root()), cptr);
    }
    for (const auto& p : s.domain().probes(5, 4)) {
      for (auto k : {DivergenceKind::nabla_primal, DivergenceKind::nabla_conjugate, DivergenceKind::levi_civita}) {
        const Jet fj = f.jet_at(p, 1);
        double Xf = 0.0;
        for (int i = 0; i < m; ++i) Xf += X[static_cast<std::size_t>(i)].evaluate(p) * fj.d(i);
        const double lhs = divergence(s, fX, k, p);
        const double rhs = Xf + fj.value() * divergence(s, X, k, p);
        CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
      }
      // the Riemannian volume form divergence is div^g
      CHECK(divergence(s, X, DivergenceKind::theta_volume, p) ==
            doctest::Approx(divergence(s, X, DivergenceKind::levi_civita, p)).epsilon(1e-10));
    }
  }
}

TEST_CASE("laplacians") {
  const StatStructure geost = builtin_structure("geost");
  const auto f = ExpressionField::parse("sinh(x) + cosh(y)", geost.coordinates());
  const double p[2] = {1.0, 0.0};
  const double expect = (std::sinh(1.0) + 1.0) - std::cosh(1.0);
  CHECK(std::abs(laplacian_scalar(geost, f, LaplacianKind::primal, p) - expect) <= 1e-12);
  CHECK(std::abs(laplacian_scalar(geost, f, LaplacianKind::primal, p) - 0.632120558) <= 1e-9);
  const auto c = ExpressionField::parse("3.5", geost.coordinates());
  CHECK(laplacian_scalar(geost, c, LaplacianKind::riemannian, p) == 0.0);

  // conjugate Laplacian of the primal Laplacian of f vanishes
  const auto cptr = f.coordinates_ptr();
  const auto lap = ExpressionField::parse("sinh(x) + cosh(y) - cosh(x) - sinh(y)", cptr);
  for (const auto& q : geost.domain().probes(100)) {
    CHECK(laplacian_scalar(geost, f, LaplacianKind::primal, q) == doctest::Approx(lap.evaluate(q)).epsilon(1e-12));
    CHECK(std::abs(laplacian_scalar(geost, lap, LaplacianKind::conjugate, q)) <= 1e-10);
  }

  for (const auto& s : fixtures()) {
    CAPTURE(s.name());
    const auto g = ExpressionField::parse(s.dim() == 1 ? "sin(x) + x^2" : s.coordinates()[0] + "*" + s.coordinates()[1] + " + sin(" + s.coordinates()[0] + ")", s.coordinates());
    for (const auto& q : s.domain().probes(5, 3)) {
      const double a = laplacian_scalar(s, g, LaplacianKind::primal, q);
      const double b = laplacian_scalar(s, g, LaplacianKind::conjugate, q);
      const double r = laplacian_scalar(s, g, LaplacianKind::riemannian, q);
      CHECK(std::abs(a + b - 2.0 * r) <= 1e-12 * std::max(1.0, std::abs(r)));
    }
  }
}

TEST_CASE("ricci contractions and U") {
  const double p[2] = {0.1, 0.2};
  const RicciValue flat = ricci_and_U(builtin_structure("euclidean:2"), p);
  CHECK(max_abs(flat.ric) == 0.0);
  CHECK(max_abs(flat.U.components) == 0.0);
  const RicciValue geost = ricci_and_U(builtin_structure("geost"), p);
  CHECK(max_abs(geost.U.components) <= 1e-12);
  const double uniform[2] = {1.0 / 3, 1.0 / 3};
  const RicciValue simplex = ricci_and_U(builtin_structure("simplex:2:exponential"), uniform);
  CHECK(max_abs(simplex.ric) <= 1e-9);
  CHECK(simplex.min_U_sectional == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("validation flags") {
  const StatStructure geost = builtin_structure("geost");
  const auto rep = validate(geost, geost.domain().probes(32));
  CHECK(rep.flag("codazzi").ok);
  CHECK(rep.flag("conjugate_symmetric").ok);
  CHECK_FALSE(rep.flag("trace_free").ok);
  CHECK(rep.flag("trace_free").worst_point.size() == 2);
  const StatStructure e = builtin_structure("euclidean:2");
  for (const auto& f : validate(e, e.domain().probes(32)).flags) CHECK(f.ok);
  const StatStructure par = builtin_structure("paraboloid:2");
  CHECK(validate(par, par.domain().probes(32)).flag("trace_free").ok);
}
