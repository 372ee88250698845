#include "statgeo/battery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "statgeo/builtins.hpp"
#include "statgeo/equiaffine.hpp"
#include "statgeo/errors.hpp"
#include "statgeo/maps.hpp"
#include "statgeo/simplex.hpp"
#include "statgeo/structure.hpp"
#include "statgeo/variational.hpp"

namespace statgeo {

using nlohmann::json;

bool CriterionResult::pass() const {
  return error.empty() && !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
}

namespace {

constexpr double pi = std::numbers::pi;

// Running maximum of a residual over probes.
class Collector {
 public:
  Collector(std::vector<Check>& out, double scale) : out_(out), scale_(scale) {}

  // residual <= tol * scale
  void le(const std::string& name, double residual, double tol) { add(name, residual, tol * scale_, false); }
  // residual <= tol, not scaled (counts, exact bounds)
  void fixed(const std::string& name, double residual, double tol) { add(name, residual, tol, false); }
  // residual >= bound; keeps the minimum
  void ge(const std::string& name, double residual, double bound) { add(name, residual, bound, true); }

 private:
  void add(const std::string& name, double residual, double tol, bool at_least) {
    for (auto& c : out_) {
      if (c.name == name) {
        c.residual = at_least ? std::min(c.residual, residual) : std::max(c.residual, residual);
        return;
      }
    }
    out_.push_back(Check{name, residual, tol, at_least});
  }

  std::vector<Check>& out_;
  double scale_;
};

double max_abs(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

double norm(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r += x * x;
  return std::sqrt(r);
}

json box_json(const std::vector<std::string>& coords, double lo, double hi) {
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

SmoothMap make_map(const json& source, const std::string& target, const std::vector<std::string>& comps) {
  return load_map(json{{"source", source}, {"target", target}, {"components", comps}});
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Trigonometric polynomial with three random modes of frequency <= 3.
std::string random_trig(std::mt19937_64& rng, const std::vector<std::string>& coords) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_int_distribution<int> freq(0, 3);
  std::string out = num(amp(rng));
  for (int t = 0; t < 3; ++t) {
    std::string arg;
    for (const auto& c : coords) arg += (arg.empty() ? "" : "+") + std::to_string(freq(rng)) + "*" + c;
    out += "+" + num(amp(rng)) + "*sin(" + arg + "+" + num(amp(rng)) + ")";
  }
  return out;
}

std::vector<double> sample_fields(const Lattice& lattice, const std::vector<ExpressionField>& f) {
  std::vector<double> v;
  v.reserve(lattice.size() * f.size());
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const auto p = lattice.point(k);
    for (const auto& c : f) v.push_back(c.evaluate(p));
  }
  return v;
}

int count_or(const BatteryOptions& o, int n) { return o.probes > 0 ? o.probes : n; }

std::vector<StatStructure> identity_fixtures() {
  std::vector<StatStructure> out;
  for (const char* name : {"geost", "euclidean:2", "sphere", "stat-torus:1", "stat-torus:2", "simplex:2:exponential",
                           "simplex:3:mixture", "paraboloid:2", "sphere-cap"}) {
    out.push_back(builtin_structure(name));
  }
  return out;
}

// ---------------------------------------------------------------------------

void flat_plane_structure(const BatteryOptions& o, Collector& c) {
  const StatStructure s = builtin_structure("geost");
  for (const auto& p : s.domain().probes(count_or(o, 100), o.seed)) {
    const LocalTensors t = s.local(p, 2);
    c.le("primal_curvature", max_abs(curvature(t, CurvatureKind::primal).components), 1e-9);
    c.le("conjugate_curvature", max_abs(curvature(t, CurvatureKind::conjugate).components), 1e-9);
    c.le("codazzi", codazzi_residual(t), 1e-10);
    const TchebychevValue tv = tchebychev(s, p);
    c.le("trK_equals_1_1", std::max(std::abs(tv.trK[0] - 1.0), std::abs(tv.trK[1] - 1.0)), 1e-10);
    c.le("trK_levi_civita_parallel", t.m * max_abs(tv.T_op), 1e-10);
  }
}

void sinh_cosh_bitension(const BatteryOptions& o, Collector& c) {
  const SmoothMap f = make_map("geost", "euclidean:1", {"sinh(x) + cosh(y)"});
  const auto rep = check_biharmonic(f, f.source().domain().probes(count_or(o, 100), o.seed), 1e-7);
  c.le("tau2", rep.max_tau2, 1e-7);
  c.ge("tau_nonzero", rep.max_tau, 1e-3);
  const double p[2] = {1.0, 0.0};
  c.le("tau_at_1_0", std::abs(tension(f, p)[0] - 0.632120558), 1e-9);
  c.le("tau_at_1_0_closed_form", std::abs(tension(f, p)[0] - (std::sinh(1.0) + 1.0 - std::cosh(1.0))), 1e-9);
}

void line_curves_bitension(const BatteryOptions& o, Collector& c) {
  std::mt19937_64 rng(o.seed + 41);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int params = count_or(o, 50);
  for (int trial = 0; trial < 20; ++trial) {
    const std::string a = num(coef(rng)), b = num(coef(rng)), cc = num(coef(rng)), d = num(coef(rng));
    const SmoothMap curve = make_map(box_json({"t"}, -1.0, 1.0), "geost", {a + "*t + " + cc, b + "*t + " + d});
    const double A = std::stod(a), B = std::stod(b);
    const double expect = std::hypot(A * A, B * B);
    for (int k = 0; k < params; ++k) {
      const double t = -1.0 + 2.0 * (k + 0.5) / params;
      const TensionValue v = curve_bitension(curve, t);
      c.le("curve_tau2", max_abs(v.tau2), 1e-8);
      c.le("tau_norm", std::abs(norm(v.tau) - expect), 1e-9);
      const double q[1] = {t};
      c.le("general_pipeline_agreement", max_abs(std::vector<double>{bitension(curve, q).tau2[0] - v.tau2[0],
                                                                     bitension(curve, q).tau2[1] - v.tau2[1]}),
           1e-8);
    }
  }
}

void simplex_fisher(const BatteryOptions& o, Collector& c) {
  for (int n = 1; n <= 3; ++n) {
    const StatStructure ex = simplex_structure(n, SimplexConnection::exponential);
    for (const auto& p : ex.domain().probes(count_or(o, 50), o.seed)) {
      const auto inv = simplex_invariants(ex, p);
      c.le("div_trK_relative", inv.div_trK_relative_delta, 1e-6);
      c.le("K_pairing", inv.K_pairing_delta, 1e-7);
      if (n == 2) c.le("fisher_sectional_quarter", std::abs(sectional_curvature(ex, p, 0, 1) - 0.25), 1e-6);
    }
  }
  const double half[1] = {0.5};
  c.le("div_trK_uniform_n1", std::abs(simplex_invariants(1, half).div_trK_numeric - 1.0), 1e-6);
  const double third[2] = {1.0 / 3, 1.0 / 3};
  c.le("div_trK_uniform_n2", std::abs(simplex_invariants(2, third).div_trK_numeric - 3.0) / 3.0, 1e-6);
}

void improper_affine_sphere(const BatteryOptions& o, Collector& c) {
  for (int m : {1, 2}) {
    const GraphHypersurface hs = builtin_hypersurface("paraboloid:" + std::to_string(m));
    const auto mu = static_cast<std::size_t>(m);
    for (const auto& p : hs.domain().probes(count_or(o, 50), o.seed)) {
      const EquiaffineStructure e = blaschke(hs, p);
      std::vector<double> dxi(e.xi);
      dxi[mu] -= 1.0;
      c.le("xi_vertical", max_abs(dxi), 1e-9);
      c.le("shape_operator_zero", max_abs(e.S), 1e-9);
      const HypersurfaceBitension b = hypersurface_bitension(hs, p);
      std::vector<double> dtau(b.tau_direct);
      dtau[mu] -= m;
      c.le("tau_equals_m_xi", max_abs(dtau), 1e-8);
      c.le("tau2_formula", max_abs(b.tau2_formula), 1e-6);
      c.le("tau2_direct", max_abs(b.tau2_direct), 1e-6);
      std::vector<double> diff(b.tau2_formula.size());
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = b.tau2_formula[k] - b.tau2_direct[k];
      c.le("formula_direct_agreement", max_abs(diff), 1e-5);
    }
  }
  const GraphHypersurface ell = builtin_hypersurface("ellipse");
  for (const auto& p : ell.domain().probes(count_or(o, 50), o.seed)) {
    const HypersurfaceBitension b = hypersurface_bitension(ell, p);
    c.ge("ellipse_tau2_nonzero", norm(b.tau2_formula), 1e-3);
    std::vector<double> diff(b.tau2_formula.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = b.tau2_formula[k] - b.tau2_direct[k];
    c.le("ellipse_formula_direct_agreement", max_abs(diff), 1e-5);
  }
}

void first_variation(const BatteryOptions&, Collector& c) {
  const auto pairs = first_variation_pairs();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pr = pairs[i];
    const SmoothMap u = make_map(pr.source, pr.target, pr.map);
    const GridMap grid = GridMap::sample(u, {64});
    std::vector<ExpressionField> V;
    for (const auto& d : pr.direction) V.push_back(ExpressionField::parse(d, u.source().coordinates()));
    const VariationReport rep = first_variation_check(grid, sample_fields(grid.lattice(), V));
    const std::string tag = "pair" + std::to_string(i + 1) + "_" + pr.source + "_to_" + pr.target;
    if (pr.expected == 0.0) {
      c.le(tag + "_both_zero", std::max(std::abs(rep.lhs), std::abs(rep.rhs)), 1e-8);
    } else {
      c.le(tag + "_relative", rep.rel_error, 1e-4);
      if (!std::isnan(pr.expected)) {
        c.le(tag + "_lhs_exact", std::abs(rep.lhs - pr.expected) / std::abs(pr.expected), 1e-4);
        c.le(tag + "_rhs_exact", std::abs(rep.rhs - pr.expected) / std::abs(pr.expected), 1e-4);
      }
    }
  }
}

void green_adjointness(const BatteryOptions& o, Collector& c) {
  std::mt19937_64 rng(o.seed + 7);
  for (const char* name : {"torus:1", "torus:2", "stat-torus:1", "stat-torus:2"}) {
    const StatStructure s = builtin_structure(name);
    const auto& coords = s.coordinates();
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<ExpressionField> X;
      for (std::size_t i = 0; i < coords.size(); ++i) X.push_back(ExpressionField::parse(random_trig(rng, coords), coords));
      c.le(std::string("green_") + name, std::abs(green_integral(s, X, {64})), 1e-9);
    }
  }
  for (const char* name : {"torus:2", "stat-torus:1", "stat-torus:2"}) {
    const StatStructure s = builtin_structure(name);
    const Lattice L = torus_lattice(s, {64});
    for (int rank : {1, 2}) {
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<ExpressionField> xi, eta;
        for (int r = 0; r < rank; ++r) {
          xi.push_back(ExpressionField::parse(random_trig(rng, s.coordinates()), s.coordinates()));
          eta.push_back(ExpressionField::parse(random_trig(rng, s.coordinates()), s.coordinates()));
        }
        const auto rep = adjointness_check(s, L, sample_fields(L, xi), sample_fields(L, eta), rank);
        c.le(std::string("adjoint_") + name, rep.delta, 1e-6);
      }
    }
  }
}

void identity_suite(const BatteryOptions& o, Collector& c) {
  std::mt19937_64 rng(o.seed + 13);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (const auto& s : identity_fixtures()) {
    const int m = s.dim();
    for (const auto& p : s.domain().probes(count_or(o, 100), o.seed)) {
      const LocalTensors t = s.local(p, 1);
      const auto C = codazzi_tensor(t);
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
      c.le("metric_derivative_difference_tensor", worst / std::max(1.0, max_abs(C)), 1e-8);
    }
    for (const auto& p : s.domain().probes(count_or(o, 20), o.seed + 1)) {
      const IdentityReport rep = check_curvature_identities(s, p);
      for (const auto& r : rep.residuals) {
        if (r.asserted) c.le(r.name, r.residual, 1e-7);
      }
    }
    auto poly = [&]() {
      std::string txt = num(coef(rng));
      for (const auto& x : s.coordinates()) txt += " + " + num(coef(rng)) + "*" + x + " + " + num(coef(rng)) + "*" + x + "^2";
      return txt;
    };
    const std::string f = poly();
    std::vector<std::string> X;
    for (int i = 0; i < m; ++i) X.push_back(poly());
    const auto fe = ExpressionField::parse(f, s.coordinates());
    std::vector<ExpressionField> Xe, fXe;
    for (const auto& x : X) {
      Xe.push_back(ExpressionField::parse(x, s.coordinates()));
      fXe.push_back(ExpressionField::parse("(" + f + ")*(" + x + ")", s.coordinates()));
    }
    for (const auto& p : s.domain().probes(count_or(o, 10), o.seed + 2)) {
      const Jet fj = fe.jet_at(p, 1);
      double Xf = 0.0;
      for (int i = 0; i < m; ++i) Xf += Xe[static_cast<std::size_t>(i)].evaluate(p) * fj.d(i);
      for (auto k : {DivergenceKind::nabla_primal, DivergenceKind::nabla_conjugate}) {
        const double lhs = divergence(s, fXe, k, p);
        const double rhs = Xf + fj.value() * divergence(s, Xe, k, p);
        c.le("divergence_product_rule", std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)), 1e-8);
      }
    }
  }

  const SmoothMap simplified = make_map("paraboloid:2", "geost", {"0.5*x + 0.3*sin(y)", "0.4*y + 0.2*x^2"});
  for (const auto& p : simplified.source().domain().probes(count_or(o, 30), o.seed)) {
    const auto a = bitension(simplified, p).tau2;
    const auto b = bitension_simplified(simplified, p);
    c.le("tracefree_conjugate_symmetric_collapse", std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])), 1e-7);
  }
  const SmoothMap sphere_map = make_map(box_json({"x", "y"}, -1.0, 1.0), "sphere",
                                        {"1 + 0.3*sin(x) + 0.1*y^2", "y + 0.2*x*y"});
  for (const auto& p : sphere_map.source().domain().probes(count_or(o, 30), o.seed)) {
    const auto a = bitension(sphere_map, p).tau2;
    const auto b = bitension_riemannian(sphere_map, p);
    c.le("riemannian_collapse", std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])), 1e-7);
  }
  const SmoothMap circle = make_map("torus:1", "euclidean:2", {"sin(x)", "0"});
  for (const auto& p : circle.source().domain().probes(count_or(o, 50), o.seed)) {
    c.le("bienergy_divergence_identity", std::abs(lemma51_integrand(circle, p).residual()), 1e-8);
  }
  const SmoothMap fn = make_map("geost", "euclidean:1", {"sinh(x) + cosh(y)"});
  for (const auto& p : fn.source().domain().probes(count_or(o, 50), o.seed)) {
    c.le("bienergy_divergence_identity", std::abs(lemma51_integrand(fn, p).residual()), 1e-7);
  }
}

void solver_descent(const BatteryOptions& o, Collector& c) {
  SolverConfig cfg;
  cfg.resolution = {12};
  cfg.tol = 1e-4 * o.tol_scale;
  const SmoothMap u = make_map("torus:1", "euclidean:1", {"sin(x) + 0.3*sin(2*x)"});
  const SolveResult r = minimize(GridMap::sample(u, cfg.resolution), cfg);
  c.le("max_tau2", r.report.max_tau2, 1e-4);
  double rise = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < r.report.energy.size(); ++k) rise = std::max(rise, r.report.energy[k] - r.report.energy[k - 1]);
  c.fixed("energy_increase", std::max(rise, -1.0), 0.0);
  c.fixed("iterations", r.report.iterations, cfg.max_iter);
  c.fixed("tolerance_met", r.report.termination == "tolerance met" ? 0.0 : 1.0, 0.0);
}

struct Criterion {
  const char* name;
  const char* anchor;
  double runtime_limit;
  std::function<void(const BatteryOptions&, Collector&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {"flat_plane_structure", "geost plane: flat primal and conjugate connections, Tchebychev trace (1,1) and Levi-Civita parallel", 1.0,
       flat_plane_structure},
      {"sinh_cosh_bitension", "sinh x + cosh y on the geost plane: not harmonic, statistical biharmonic", 1.0,
       sinh_cosh_bitension},
      {"line_curves_bitension", "affine lines into the geost plane are statistical biharmonic with tension (a^2, b^2)", 1.0,
       line_curves_bitension},
      {"simplex_fisher", "probability simplex: divergence of the Tchebychev trace, Fisher curvature 1/4, K pairing", 5.0,
       simplex_fisher},
      {"improper_affine_sphere", "Blaschke immersion of the paraboloid is statistical biharmonic; the ellipse is not", 10.0,
       improper_affine_sphere},
      {"first_variation", "derivative of the bi-energy equals the L2 pairing with the bi-tension field", 5.0,
       first_variation},
      {"green_adjointness", "divergence integrates to zero; Laplacian adjoint identity with the Tchebychev term", 5.0,
       green_adjointness},
      {"identity_suite", "structure identities, curvature identities, collapse forms of the bi-tension, divergence identity", 30.0,
       identity_suite},
      {"solver_descent", "gradient descent on the bi-energy reaches a statistical biharmonic map", 60.0, solver_descent},
  };
  return list;
}

}  // namespace

std::vector<std::string> criterion_names() {
  std::vector<std::string> out;
  for (const auto& c : criteria()) out.emplace_back(c.name);
  return out;
}

std::vector<VariationPair> first_variation_pairs() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {
      {"torus:1", "euclidean:1", {"sin(x)"}, {"cos(x)"}, 0.0},
      {"torus:1", "euclidean:1", {"sin(x)"}, {"sin(x)"}, pi},
      {"torus:1", "euclidean:1", {"sin(x)"}, {"0"}, 0.0},
      {"torus:1", "euclidean:1", {"sin(x) + 0.3*sin(2*x)"}, {"cos(3*x + 1) + 0.2*sin(x + 0.5)"}, nan},
      {"stat-torus:1", "euclidean:1", {"sin(x)"}, {"cos(x - 0.7) + 0.5"}, nan},
      {"torus:1", "geost", {"0.5*sin(x)", "0.4*cos(x)"}, {"cos(x + 0.4)", "sin(x) + 0.3*cos(2*x)"}, nan},
      {"stat-torus:1", "geost", {"0.5*sin(x) + 0.2*cos(2*x)", "0.4*cos(x)"}, {"cos(x + 0.3)", "0.5*sin(2*x - 0.4) + 0.2"}, nan},
      {"stat-torus:1", "sphere", {"1.5 + 0.3*sin(x)", "0.5*cos(x)"}, {"0.2*cos(x + 0.5)", "0.3*sin(x)"}, nan},
      {"torus:1", "euclidean:2", {"cos(x)", "sin(x)"}, {"sin(x + 0.1)", "cos(x - 0.2)"}, nan},
  };
}

std::vector<CriterionResult> run_battery(const BatteryOptions& opts) {
  std::vector<CriterionResult> out;
  for (const auto& cr : criteria()) {
    if (!opts.filter.empty() && std::string(cr.name).find(opts.filter) == std::string::npos) continue;
    CriterionResult r;
    r.name = cr.name;
    r.anchor = cr.anchor;
    r.runtime_limit = cr.runtime_limit;
    Collector c(r.checks, opts.tol_scale);
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(opts, c);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

json battery_json(const std::vector<CriterionResult>& results) {
  json checks = json::object();
  json crit = json::object();
  bool all = !results.empty();
  for (const auto& r : results) {
    json entry{{"anchor", r.anchor}, {"pass", r.pass()}, {"checks", r.checks.size()}};
    if (!r.error.empty()) entry["error"] = r.error;
    crit[r.name] = entry;
    all = all && r.pass();
    for (const auto& c : r.checks) {
      checks[r.name + "/" + c.name] = json{{"anchor", r.anchor},
                                           {"residual", c.residual},
                                           {"tolerance", c.tolerance},
                                           {"relation", c.at_least ? ">=" : "<="},
                                           {"pass", c.pass()}};
    }
  }
  return json{{"checks", checks}, {"criteria", crit}, {"pass", all}};
}

}  // namespace statgeo
