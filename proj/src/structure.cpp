#include "statgeo/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "statgeo/errors.hpp"

namespace statgeo {

namespace {

double max_abs(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

std::vector<Jet> variables(std::span<const double> p, int order) {
  const int m = static_cast<int>(p.size());
  std::vector<Jet> vars;
  vars.reserve(p.size());
  for (int i = 0; i < m; ++i) vars.push_back(Jet::variable(m, order, i, p[static_cast<std::size_t>(i)]));
  return vars;
}

// Primal connection jets (order - 1) from whatever the source supplies.
std::vector<Jet> primal_connection(const GeometryJets& ge, const std::vector<Jet>& gamma_g) {
  switch (ge.kind) {
    case ConnectionKind::levi_civita:
      return gamma_g;
    case ConnectionKind::christoffel:
      return ge.conn;
    case ConnectionKind::difference_tensor: {
      std::vector<Jet> out = gamma_g;
      for (std::size_t n = 0; n < out.size(); ++n) out[n] += ge.conn[n];
      return out;
    }
  }
  return gamma_g;
}

class ConjugateSource final : public GeometrySource {
 public:
  explicit ConjugateSource(std::shared_ptr<const GeometrySource> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return "conjugate(" + inner_->name() + ")"; }
  int dim() const override { return inner_->dim(); }
  const std::vector<std::string>& coordinates() const override { return inner_->coordinates(); }
  const Domain& domain() const override { return inner_->domain(); }
  ConnectionKind connection_kind() const override {
    return inner_->connection_kind() == ConnectionKind::levi_civita ? ConnectionKind::levi_civita
                                                                    : ConnectionKind::christoffel;
  }
  GeometryJets evaluate(std::span<const double> p, int order) const override {
    GeometryJets ge = inner_->evaluate(p, order);
    if (ge.kind == ConnectionKind::levi_civita) return ge;
    const int m = ge.dim;
    auto ginv = invert_metric(ge.g, m);
    auto gamma_g = levi_civita_symbols(ge.g, ginv, m);
    auto gamma = primal_connection(ge, gamma_g);
    GeometryJets out;
    out.dim = m;
    out.order = ge.order;
    out.g = std::move(ge.g);
    out.kind = ConnectionKind::christoffel;
    out.conn.reserve(gamma.size());
    for (std::size_t n = 0; n < gamma.size(); ++n) out.conn.push_back(2.0 * gamma_g[n] - gamma[n]);
    return out;
  }

 private:
  std::shared_ptr<const GeometrySource> inner_;
};

void check_order(const LocalTensors& t, int needed, const char* what) {
  if (t.order < needed) {
    throw Error(std::string(what) + " needs local tensors of order " + std::to_string(needed));
  }
}

}  // namespace

GeometryJets ChartSource::evaluate(std::span<const double> p, int order) const {
  if (order < 1) throw Error("metric jets need order >= 1");
  const int m = chart_.dim();
  GeometryJets out;
  out.dim = m;
  out.order = order;
  out.kind = chart_.connection_kind();
  auto vars = variables(p, order);
  out.g.resize(static_cast<std::size_t>(m * m));
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const auto& f = chart_.metric(i, j);
      Jet v = f.is_constant() ? Jet(m, order, f.root()->value) : f.evaluate_jet(vars);
      out.g[static_cast<std::size_t>(j * m + i)] = v;
      out.g[static_cast<std::size_t>(i * m + j)] = std::move(v);
    }
  }
  if (out.kind != ConnectionKind::levi_civita) {
    auto low = variables(p, order - 1);
    out.conn.reserve(chart_.connection().size());
    for (const auto& f : chart_.connection()) {
      out.conn.push_back(f.is_constant() ? Jet(m, order - 1, f.root()->value) : f.evaluate_jet(low));
    }
  }
  return out;
}

std::vector<Jet> invert_metric(std::span<const Jet> g, int m) {
  const auto n = static_cast<std::size_t>(m);
  const int order = g[0].order();
  std::vector<Jet> a(g.begin(), g.end());
  std::vector<Jet> inv(n * n, Jet(m > 0 ? g[0].dim() : 1, order, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = Jet(g[0].dim(), order, 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c].value()) > std::abs(a[piv * n + c].value())) piv = r;
    }
    if (a[piv * n + c].value() == 0.0) throw DomainError("singular metric");
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a[piv * n + k], a[c * n + k]);
        std::swap(inv[piv * n + k], inv[c * n + k]);
      }
    }
    const Jet rp = reciprocal(a[c * n + c]);
    for (std::size_t k = 0; k < n; ++k) {
      a[c * n + k] *= rp;
      inv[c * n + k] *= rp;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const Jet f = a[r * n + c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r * n + k].add_product(f, a[c * n + k] * -1.0);
        inv[r * n + k].add_product(f, inv[c * n + k] * -1.0);
      }
    }
  }
  return inv;
}

std::vector<Jet> levi_civita_symbols(std::span<const Jet> g, std::span<const Jet> ginv, int m) {
  const auto n = static_cast<std::size_t>(m);
  const int order = g[0].order() - 1;
  // dg[(l*m + i)*m + j] = d_l g_ij
  std::vector<Jet> dg(n * n * n);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t ij = 0; ij < n * n; ++ij) dg[l * n * n + ij] = g[ij].partial(static_cast<int>(l));
  }
  auto d = [&](std::size_t l, std::size_t i, std::size_t j) -> const Jet& { return dg[(l * n + i) * n + j]; };
  // first kind: G_lij = (d_i g_jl + d_j g_il - d_l g_ij) / 2
  std::vector<Jet> first(n * n * n);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        Jet v = (d(i, j, l) + d(j, i, l) - d(l, i, j)) * 0.5;
        first[(l * n + j) * n + i] = v;
        first[(l * n + i) * n + j] = std::move(v);
      }
    }
  }
  std::vector<Jet> out(n * n * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        Jet acc(g[0].dim(), order, 0.0);
        for (std::size_t l = 0; l < n; ++l) acc.add_product(ginv[k * n + l], first[(l * n + i) * n + j]);
        out[(k * n + j) * n + i] = acc;
        out[(k * n + i) * n + j] = std::move(acc);
      }
    }
  }
  return out;
}

LocalTensors StatStructure::local(std::span<const double> p, int order) const {
  if (!source_) throw Error("empty structure");
  if (static_cast<int>(p.size()) != dim()) throw Error("point has wrong dimension for " + name());
  if (!domain().contains(p)) {
    throw DomainError("point outside the domain of " + name(), std::vector<double>(p.begin(), p.end()));
  }
  GeometryJets ge = source_->evaluate(p, order);
  const int m = ge.dim;
  LocalTensors t;
  t.m = m;
  t.order = order;
  t.point.assign(p.begin(), p.end());
  t.ginv = invert_metric(ge.g, m);
  t.gamma_g = levi_civita_symbols(ge.g, t.ginv, m);
  t.gamma = primal_connection(ge, t.gamma_g);
  t.g = std::move(ge.g);
  const std::size_t n3 = t.gamma.size();
  t.K.reserve(n3);
  t.gamma_bar.reserve(n3);
  for (std::size_t i = 0; i < n3; ++i) {
    t.K.push_back(t.gamma[i] - t.gamma_g[i]);
    t.gamma_bar.push_back(t.gamma_g[i] - t.K[i]);
  }
  return t;
}

StatStructure StatStructure::conjugate() const {
  return StatStructure(std::make_shared<ConjugateSource>(source_));
}

std::vector<double> codazzi_tensor(const LocalTensors& t) {
  const int m = t.m;
  std::vector<double> c(static_cast<std::size_t>(m * m * m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        double v = t.g[t.idx2(j, k)].d(i);
        for (int l = 0; l < m; ++l) {
          v -= t.gamma[t.idx3(l, i, j)].value() * t.g[t.idx2(l, k)].value();
          v -= t.gamma[t.idx3(l, i, k)].value() * t.g[t.idx2(j, l)].value();
        }
        c[t.idx3(i, j, k)] = v;
      }
    }
  }
  return c;
}

double codazzi_residual(const LocalTensors& t) {
  const int m = t.m;
  const auto c = codazzi_tensor(t);
  double r = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) r = std::max(r, std::abs(c[t.idx3(i, j, k)] - c[t.idx3(j, i, k)]));
    }
  }
  return r / std::max(1.0, max_abs(c));
}

StatStructure build_structure(std::shared_ptr<const GeometrySource> source, const BuildOptions& opts) {
  StatStructure s(std::move(source));
  double worst = -1.0;
  std::vector<double> worst_point;
  for (const auto& p : s.domain().probes(opts.probes, opts.seed)) {
    const double r = codazzi_residual(s.local(p, 1));
    if (r > worst) {
      worst = r;
      worst_point = p;
    }
  }
  if (worst > opts.codazzi_tol) {
    throw CodazziError("(g, nabla) fails the Codazzi condition: residual " + std::to_string(worst) + " at " +
                           format_point(worst_point),
                       worst_point, worst);
  }
  return s;
}

StatStructure build_structure(const ChartManifold& chart, const BuildOptions& opts) {
  return build_structure(std::make_shared<ChartSource>(chart), opts);
}

// ---------------------------------------------------------------------------

std::string to_string(CurvatureKind k) {
  switch (k) {
    case CurvatureKind::primal: return "primal";
    case CurvatureKind::conjugate: return "conjugate";
    case CurvatureKind::levi_civita: return "levi_civita";
    case CurvatureKind::interchange: return "interchange";
    case CurvatureKind::conjugate_interchange: return "conjugate_interchange";
  }
  return "unknown";
}

CurvatureValue riemann_from_connection(std::span<const Jet> gamma, int m) {
  if (gamma.empty() || gamma[0].order() < 1) throw Error("curvature needs connection jets of order >= 1");
  CurvatureValue r;
  r.m = m;
  r.components.assign(static_cast<std::size_t>(m * m * m * m), 0.0);
  auto G = [&](int k, int i, int j) { return gamma[static_cast<std::size_t>((k * m + i) * m + j)].value(); };
  auto dG = [&](int a, int k, int i, int j) { return gamma[static_cast<std::size_t>((k * m + i) * m + j)].d(a); };
  for (int l = 0; l < m; ++l) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        for (int k = 0; k < m; ++k) {
          double v = dG(i, l, j, k) - dG(j, l, i, k);
          for (int p = 0; p < m; ++p) v += G(l, i, p) * G(p, j, k) - G(l, j, p) * G(p, i, k);
          r.at(l, i, j, k) = v;
        }
      }
    }
  }
  return r;
}

CurvatureValue interchange_from(const CurvatureValue& r, std::span<const double> g, std::span<const double> ginv) {
  const int m = r.m;
  CurvatureValue L;
  L.m = m;
  L.point = r.point;
  L.kind = r.kind == CurvatureKind::conjugate ? CurvatureKind::conjugate_interchange : CurvatureKind::interchange;
  L.components.assign(r.components.size(), 0.0);
  auto G = [&](int i, int j) { return g[static_cast<std::size_t>(i * m + j)]; };
  auto Gi = [&](int i, int j) { return ginv[static_cast<std::size_t>(i * m + j)]; };
  // L^d(a,b,c) = g^{dy} g_{bl} R^l(c,y,a)
  for (int d = 0; d < m; ++d) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        for (int c = 0; c < m; ++c) {
          double v = 0.0;
          for (int y = 0; y < m; ++y) {
            double s = 0.0;
            for (int l = 0; l < m; ++l) s += G(b, l) * r.at(l, c, y, a);
            v += Gi(d, y) * s;
          }
          L.at(d, a, b, c) = v;
        }
      }
    }
  }
  return L;
}

namespace {

std::vector<double> values(std::span<const Jet> jets) {
  std::vector<double> v;
  v.reserve(jets.size());
  for (const auto& j : jets) v.push_back(j.value());
  return v;
}

}  // namespace

CurvatureValue curvature(const LocalTensors& t, CurvatureKind kind) {
  check_order(t, 2, "curvature");
  CurvatureValue out;
  switch (kind) {
    case CurvatureKind::primal:
    case CurvatureKind::interchange:
      out = riemann_from_connection(t.gamma, t.m);
      out.kind = CurvatureKind::primal;
      break;
    case CurvatureKind::conjugate:
    case CurvatureKind::conjugate_interchange:
      out = riemann_from_connection(t.gamma_bar, t.m);
      out.kind = CurvatureKind::conjugate;
      break;
    case CurvatureKind::levi_civita:
      out = riemann_from_connection(t.gamma_g, t.m);
      out.kind = CurvatureKind::levi_civita;
      break;
  }
  out.point = t.point;
  if (kind == CurvatureKind::interchange || kind == CurvatureKind::conjugate_interchange) {
    return interchange_from(out, values(t.g), values(t.ginv));
  }
  return out;
}

CurvatureValue curvature(const StatStructure& s, CurvatureKind kind, std::span<const double> p) {
  return curvature(s.local(p, 2), kind);
}

bool IdentityReport::pass() const {
  return std::all_of(residuals.begin(), residuals.end(),
                     [&](const IdentityResidual& r) { return !r.asserted || r.residual <= tolerance; });
}

IdentityReport check_curvature_identities(const StatStructure& s, std::span<const double> p, double tol) {
  const LocalTensors t = s.local(p, 2);
  const int m = t.m;
  const auto R = curvature(t, CurvatureKind::primal);
  const auto Rb = curvature(t, CurvatureKind::conjugate);
  const auto Rg = curvature(t, CurvatureKind::levi_civita);
  const auto g = values(t.g);
  const auto ginv = values(t.ginv);
  const auto L = interchange_from(R, g, ginv);
  const auto Lb = interchange_from(Rb, g, ginv);
  auto G = [&](int i, int j) { return g[t.idx2(i, j)]; };
  auto Kv = [&](int k, int i, int j) { return t.K[t.idx3(k, i, j)].value(); };

  const double scale = std::max({1.0, max_abs(R.components), max_abs(Rb.components), max_abs(Rg.components)});
  double eq6 = 0, eq7 = 0, r27a = 0, r27b = 0, r27c = 0, eq8 = 0, csym = 0;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        for (int d = 0; d < m; ++d) {
          // g(R(a,b)c, d) + g(c, R-bar(a,b)d)
          double lhs = 0, rhs = 0, left8 = 0, right8 = 0, pair_b = 0;
          for (int l = 0; l < m; ++l) {
            lhs += R.at(l, a, b, c) * G(l, d);
            rhs += G(c, l) * Rb.at(l, a, b, d);
            left8 += R.at(l, c, d, a) * G(l, b);
            right8 += R.at(l, a, b, c) * G(l, d);
            // g(L(a,b)c, d) + g(c, L(a,b)d)
            pair_b += L.at(l, a, b, c) * G(l, d) + G(c, l) * L.at(l, a, b, d);
          }
          eq6 = std::max(eq6, std::abs(lhs + rhs));
          eq8 = std::max(eq8, std::abs(left8 - right8));
          r27b = std::max(r27b, std::abs(pair_b));

          // index roles: component d of the operator applied to (a, b, c)
          double kk = 0;
          for (int q = 0; q < m; ++q) kk += Kv(d, a, q) * Kv(q, b, c) - Kv(d, b, q) * Kv(q, a, c);
          eq7 = std::max(eq7, std::abs(0.5 * (R.at(d, a, b, c) + Rb.at(d, a, b, c)) - Rg.at(d, a, b, c) - kk));
          r27a = std::max(r27a, std::abs(L.at(d, a, b, c) + Lb.at(d, b, a, c)));
          // R-bar(a,b)c = L(a,c)b - L(b,c)a
          r27c = std::max(r27c, std::abs(Rb.at(d, a, b, c) - (L.at(d, a, c, b) - L.at(d, b, c, a))));
          csym = std::max(csym, std::abs(R.at(d, a, b, c) - Rb.at(d, a, b, c)));
        }
      }
    }
  }
  IdentityReport rep;
  rep.point = t.point;
  rep.tolerance = tol;
  rep.conjugate_symmetric = csym / scale <= tol;
  rep.residuals = {
      {"duality_R_Rbar", eq6 / scale, true},
      {"mean_curvature_decomposition", eq7 / scale, true},
      {"interchange_swap", r27a / scale, true},
      {"interchange_skew", r27b / scale, true},
      {"interchange_bianchi", r27c / scale, true},
      {"pair_symmetry", eq8 / scale, rep.conjugate_symmetric},
  };
  return rep;
}

CurvatureValue space_form_interchange(std::span<const double> S, std::span<const double> g, int m,
                                      std::span<const double> point) {
  auto G = [&](int i, int j) { return g[static_cast<std::size_t>(i * m + j)]; };
  auto Sv = [&](int i, int j) { return S[static_cast<std::size_t>(i * m + j)]; };
  // g-symmetry: g(SX, Y) = g(X, SY), i.e. g_ie S^e_j symmetric in (i, j)
  std::vector<double> gs(static_cast<std::size_t>(m * m), 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int e = 0; e < m; ++e) gs[static_cast<std::size_t>(i * m + j)] += G(i, e) * Sv(e, j);
    }
  }
  const double scale = std::max(1.0, max_abs(gs));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (std::abs(gs[static_cast<std::size_t>(i * m + j)] - gs[static_cast<std::size_t>(j * m + i)]) > 1e-9 * scale) {
        throw Error("shape operator is not symmetric with respect to the metric");
      }
    }
  }
  CurvatureValue L;
  L.kind = CurvatureKind::interchange;
  L.m = m;
  L.point.assign(point.begin(), point.end());
  L.components.assign(static_cast<std::size_t>(m * m * m * m), 0.0);
  // L(d_a, d_b) d_c = g(S d_c, d_b) d_a - g(d_c, d_a) S d_b
  for (int d = 0; d < m; ++d) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        for (int c = 0; c < m; ++c) {
          L.at(d, a, b, c) = (d == a ? gs[static_cast<std::size_t>(b * m + c)] : 0.0) - G(c, a) * Sv(d, b);
        }
      }
    }
  }
  return L;
}

// ---------------------------------------------------------------------------

std::vector<Jet> trace_K(const LocalTensors& t) {
  const int m = t.m;
  std::vector<Jet> tr;
  tr.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Jet acc(m, t.order - 1, 0.0);
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) acc.add_product(t.ginv[t.idx2(j, k)], t.K[t.idx3(i, j, k)]);
    }
    tr.push_back(std::move(acc));
  }
  return tr;
}

TchebychevValue tchebychev(const StatStructure& s, std::span<const double> p) {
  const LocalTensors t = s.local(p, 2);
  const int m = t.m;
  const auto tr = trace_K(t);
  TchebychevValue out;
  out.trK.resize(static_cast<std::size_t>(m));
  out.T.resize(static_cast<std::size_t>(m));
  out.T_op.assign(static_cast<std::size_t>(m * m), 0.0);
  for (int i = 0; i < m; ++i) {
    out.trK[static_cast<std::size_t>(i)] = tr[static_cast<std::size_t>(i)].value();
    out.T[static_cast<std::size_t>(i)] = tr[static_cast<std::size_t>(i)].value() / m;
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double v = tr[static_cast<std::size_t>(i)].d(j);
      for (int k = 0; k < m; ++k) v += t.gamma_g[t.idx3(i, j, k)].value() * tr[static_cast<std::size_t>(k)].value();
      out.T_op[t.idx2(i, j)] = v / m;
    }
  }
  return out;
}

double div_trK(const LocalTensors& t) {
  check_order(t, 2, "div trK");
  const auto tr = trace_K(t);
  return divergence(t, tr, DivergenceKind::levi_civita);
}

std::string to_string(DivergenceKind k) {
  switch (k) {
    case DivergenceKind::nabla_primal: return "nabla_primal";
    case DivergenceKind::nabla_conjugate: return "nabla_conjugate";
    case DivergenceKind::levi_civita: return "levi_civita";
    case DivergenceKind::theta_volume: return "theta_volume";
  }
  return "unknown";
}

namespace {

// det g as a jet, by elimination without pivoting on a copy.
Jet determinant(std::span<const Jet> g, int m) {
  const auto n = static_cast<std::size_t>(m);
  std::vector<Jet> a(g.begin(), g.end());
  Jet det(g[0].dim(), g[0].order(), 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c].value()) > std::abs(a[piv * n + c].value())) piv = r;
    }
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[piv * n + k], a[c * n + k]);
      det *= -1.0;
    }
    det *= a[c * n + c];
    const Jet rp = reciprocal(a[c * n + c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const Jet f = a[r * n + c] * rp;
      for (std::size_t k = c; k < n; ++k) a[r * n + k].add_product(f, a[c * n + k] * -1.0);
    }
  }
  return det;
}

}  // namespace

double divergence(const LocalTensors& t, std::span<const Jet> X, DivergenceKind kind) {
  const int m = t.m;
  if (static_cast<int>(X.size()) != m) throw Error("vector field has wrong dimension");
  if (kind == DivergenceKind::theta_volume) {
    // (1/sqrt g) d_i (sqrt g X^i)
    check_order(t, 1, "divergence");
    std::vector<Jet> g1;
    for (const auto& j : t.g) g1.push_back(j.truncated(1));
    const Jet vol = sqrt(determinant(g1, m));
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += (vol * X[static_cast<std::size_t>(i)].truncated(1)).d(i);
    return acc / vol.value();
  }
  const std::vector<Jet>& G = kind == DivergenceKind::nabla_primal      ? t.gamma
                              : kind == DivergenceKind::nabla_conjugate ? t.gamma_bar
                                                                        : t.gamma_g;
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    acc += X[static_cast<std::size_t>(i)].d(i);
    for (int j = 0; j < m; ++j) acc += G[t.idx3(i, i, j)].value() * X[static_cast<std::size_t>(j)].value();
  }
  return acc;
}

double divergence(const StatStructure& s, std::span<const ExpressionField> X, DivergenceKind kind,
                  std::span<const double> p) {
  const LocalTensors t = s.local(p, 1);
  std::vector<Jet> xs;
  for (const auto& f : X) xs.push_back(f.jet_at(p, 1));
  return divergence(t, xs, kind);
}

std::string to_string(LaplacianKind k) {
  switch (k) {
    case LaplacianKind::primal: return "primal";
    case LaplacianKind::conjugate: return "conjugate";
    case LaplacianKind::riemannian: return "riemannian";
  }
  return "unknown";
}

double laplacian_scalar(const LocalTensors& t, const Jet& f, LaplacianKind kind) {
  const int m = t.m;
  double lg = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double h = f.d(i, j);
      for (int k = 0; k < m; ++k) h -= t.gamma_g[t.idx3(k, i, j)].value() * f.d(k);
      lg += t.ginv[t.idx2(i, j)].value() * h;
    }
  }
  if (kind == LaplacianKind::riemannian) return lg;
  double trk = 0.0;
  for (int k = 0; k < m; ++k) {
    double tk = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) tk += t.ginv[t.idx2(i, j)].value() * t.K[t.idx3(k, i, j)].value();
    }
    trk += tk * f.d(k);
  }
  return kind == LaplacianKind::primal ? lg - trk : lg + trk;
}

double laplacian_scalar(const StatStructure& s, const ExpressionField& f, LaplacianKind kind,
                        std::span<const double> p) {
  return laplacian_scalar(s.local(p, 1), f.jet_at(p, 2), kind);
}

RicciValue ricci_and_U(const StatStructure& s, std::span<const double> p, std::uint64_t seed) {
  const LocalTensors t = s.local(p, 2);
  const int m = t.m;
  const auto R = curvature(t, CurvatureKind::primal);
  const auto Rb = curvature(t, CurvatureKind::conjugate);
  const auto Rg = curvature(t, CurvatureKind::levi_civita);
  const auto g = values(t.g);
  RicciValue out;
  out.m = m;
  auto ricci = [&](const CurvatureValue& r) {
    std::vector<double> ric(static_cast<std::size_t>(m * m), 0.0);
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) ric[t.idx2(j, k)] += r.at(l, l, j, k);
      }
    }
    return ric;
  };
  out.ric = ricci(R);
  out.ric_bar = ricci(Rb);
  out.ric_g = ricci(Rg);
  out.U = Rg;
  out.U.kind = CurvatureKind::primal;
  for (std::size_t n = 0; n < out.U.components.size(); ++n) {
    out.U.components[n] = 2.0 * Rg.components[n] - R.components[n];
  }

  Eigen::MatrixXd G(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) G(i, j) = g[t.idx2(i, j)];
  }
  if (m >= 2) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    double best = std::numeric_limits<double>::infinity();
    for (int plane = 0; plane < 64; ++plane) {
      Eigen::VectorXd X(m), Y(m);
      for (int i = 0; i < m; ++i) X(i) = nd(rng);
      for (int i = 0; i < m; ++i) Y(i) = nd(rng);
      X /= std::sqrt(X.dot(G * X));
      Y -= X.dot(G * Y) * X;
      Y /= std::sqrt(Y.dot(G * Y));
      double sec = 0.0;
      for (int l = 0; l < m; ++l) {
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) {
            for (int k = 0; k < m; ++k) {
              for (int d = 0; d < m; ++d) sec += G(l, d) * out.U.at(l, i, j, k) * X(i) * Y(j) * Y(k) * X(d);
            }
          }
        }
      }
      best = std::min(best, sec);
    }
    out.min_U_sectional = best;
  }

  Eigen::MatrixXd A(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      auto comb = [&](int a, int b) {
        return out.ric[t.idx2(a, b)] - out.ric_bar[t.idx2(a, b)] - 2.0 * out.ric_g[t.idx2(a, b)];
      };
      A(i, j) = 0.5 * (comb(i, j) + comb(j, i));
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, G, Eigen::EigenvaluesOnly);
  out.min_eig_ricci_combination = es.eigenvalues()(0);
  return out;
}

const FlagResult& StructureReport::flag(const std::string& name) const {
  for (const auto& f : flags) {
    if (f.name == name) return f;
  }
  throw Error("no flag named " + name);
}

StructureReport validate(const StatStructure& s, const std::vector<std::vector<double>>& probes, double tol) {
  if (probes.empty()) throw Error("validate needs at least one probe point");
  StructureReport rep;
  rep.tolerance = tol;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  auto named = [](const char* n) {
    FlagResult f;
    f.name = n;
    return f;
  };
  FlagResult torsion = named("torsion_free"), codazzi = named("codazzi"), spd = named("spd"),
             csym = named("conjugate_symmetric"), trace = named("trace_free");
  auto update = [](FlagResult& f, double r, const std::vector<double>& p) {
    if (f.worst_point.empty() || r > f.residual) {
      f.residual = r;
      f.worst_point = p;
    }
  };
  for (const auto& p : probes) {
    const LocalTensors t = s.local(p, 2);
    const int m = t.m;
    double tor = 0.0;
    for (int k = 0; k < m; ++k) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          tor = std::max(tor, std::abs(t.gamma[t.idx3(k, i, j)].value() - t.gamma[t.idx3(k, j, i)].value()));
        }
      }
    }
    update(torsion, tor, p);
    update(codazzi, codazzi_residual(t), p);

    const auto g = values(t.g);
    const double ev = min_eigenvalue(g, m);
    if (ev < rep.min_eigenvalue) {
      rep.min_eigenvalue = ev;
      spd.worst_point = p;
    }

    const auto R = curvature(t, CurvatureKind::primal);
    const auto Rb = curvature(t, CurvatureKind::conjugate);
    double d = 0.0;
    for (std::size_t n = 0; n < R.components.size(); ++n) d = std::max(d, std::abs(R.components[n] - Rb.components[n]));
    update(csym, d / std::max({1.0, max_abs(R.components), max_abs(Rb.components)}), p);

    const auto tr = trace_K(t);
    double norm2 = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        norm2 += g[t.idx2(i, j)] * tr[static_cast<std::size_t>(i)].value() * tr[static_cast<std::size_t>(j)].value();
      }
    }
    update(trace, std::sqrt(std::max(0.0, norm2)), p);
  }
  spd.residual = std::max(0.0, -rep.min_eigenvalue);
  for (FlagResult* f : {&torsion, &codazzi, &csym, &trace}) f->ok = f->residual <= tol;
  spd.ok = rep.min_eigenvalue > 0.0;
  rep.flags = {torsion, codazzi, spd, csym, trace};
  return rep;
}

}  // namespace statgeo
