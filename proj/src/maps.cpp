#include "statgeo/maps.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "statgeo/errors.hpp"

namespace statgeo {

namespace {

enum class Mode { statistical, simplified, riemannian };

// Everything the pullback computations need at one source point.
struct PullbackJets {
  int m = 0;
  int n = 0;
  LocalTensors src;               // order 3
  LocalTensors tgt;               // order 3, at u(p), in target variables
  std::vector<double> image;
  std::vector<Jet> du;            // du[a*m + i], order 3
  std::vector<Jet> hN;            // target metric along u, order 3
  std::vector<Jet> gammaN;        // primal target symbols along u, order 2
  std::vector<Jet> gammaBarN;     // conjugate target symbols along u, order 2
  std::vector<Jet> tau;           // order 2
  std::vector<Jet> W;             // W[a*m + j] = nbar^u_j tau, order 1

  std::size_t n3(int a, int b, int c) const { return static_cast<std::size_t>((a * n + b) * n + c); }
  const Jet& d(int a, int i) const { return du[static_cast<std::size_t>(a * m + i)]; }
};

PullbackJets pullback(const SmoothMap& u, std::span<const double> p, Mode mode) {
  PullbackJets pj;
  pj.m = u.m();
  pj.n = u.n();
  const int m = pj.m;
  const int n = pj.n;
  pj.image = u.image(p);
  pj.src = u.source().local(p, 3);
  pj.tgt = u.target().local(pj.image, 3);

  std::vector<Jet> U;
  U.reserve(static_cast<std::size_t>(n));
  for (const auto& c : u.components()) U.push_back(c.jet_at(p, 4));
  pj.du.reserve(static_cast<std::size_t>(n * m));
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < m; ++i) pj.du.push_back(U[static_cast<std::size_t>(a)].partial(i));
  }

  JetComposer comp(U, 3);
  const bool riem = mode == Mode::riemannian;
  const auto& tgam = riem ? pj.tgt.gamma_g : pj.tgt.gamma;
  const auto& tgamb = riem ? pj.tgt.gamma_g : pj.tgt.gamma_bar;
  for (const auto& j : pj.tgt.g) pj.hN.push_back(comp.compose(j));
  for (const auto& j : tgam) pj.gammaN.push_back(comp.compose(j));
  for (const auto& j : tgamb) pj.gammaBarN.push_back(comp.compose(j));

  const auto& sgam = riem ? pj.src.gamma_g : pj.src.gamma;
  const LocalTensors& s = pj.src;

  // tau^a = g^{ij} (d_ij u^a - Gamma^k_ij d_k u^a + GammaN^a_bc d_i u^b d_j u^c)
  pj.tau.reserve(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    Jet acc(m, 2, 0.0);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        Jet inner = pj.d(a, i).partial(j);
        for (int k = 0; k < m; ++k) inner.add_product(sgam[s.idx3(k, i, j)], pj.d(a, k) * -1.0);
        for (int b = 0; b < n; ++b) {
          for (int c = 0; c < n; ++c) inner.add_product(pj.gammaN[pj.n3(a, b, c)], pj.d(b, i) * pj.d(c, j));
        }
        acc.add_product(s.ginv[s.idx2(i, j)], inner);
      }
    }
    pj.tau.push_back(std::move(acc));
  }

  // W_j = d_j tau + GammaBarN(d_j u, tau)
  pj.W.reserve(static_cast<std::size_t>(n * m));
  for (int a = 0; a < n; ++a) {
    for (int j = 0; j < m; ++j) {
      Jet w = pj.tau[static_cast<std::size_t>(a)].partial(j);
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          w.add_product(pj.gammaBarN[pj.n3(a, b, c)], pj.d(b, j) * pj.tau[static_cast<std::size_t>(c)]);
        }
      }
      pj.W.push_back(std::move(w));
    }
  }
  return pj;
}

// g^{ij} (d_i W_j + GammaBarN(d_i u, W_j) - GammaBarM^k_ij W_k)
std::vector<double> rough_laplacian(const PullbackJets& pj, Mode mode) {
  const int m = pj.m;
  const int n = pj.n;
  const LocalTensors& s = pj.src;
  const auto& sgamb = mode == Mode::riemannian ? s.gamma_g : s.gamma_bar;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int a = 0; a < n; ++a) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double v = pj.W[static_cast<std::size_t>(a * m + j)].d(i);
        for (int b = 0; b < n; ++b) {
          for (int c = 0; c < n; ++c) {
            v += pj.gammaBarN[pj.n3(a, b, c)].value() * pj.d(b, i).value() *
                 pj.W[static_cast<std::size_t>(c * m + j)].value();
          }
        }
        for (int k = 0; k < m; ++k) v -= sgamb[s.idx3(k, i, j)].value() * pj.W[static_cast<std::size_t>(a * m + k)].value();
        acc += s.ginv[s.idx2(i, j)].value() * v;
      }
    }
    out[static_cast<std::size_t>(a)] = acc;
  }
  return out;
}

// g^{ij} T(d_i u, tau) d_j u for a (1,3) tensor T with T.at(d, a, b, c) the
// d-component of T(d_a, d_b) d_c.
std::vector<double> curvature_term(const PullbackJets& pj, const CurvatureValue& T) {
  const int m = pj.m;
  const int n = pj.n;
  const LocalTensors& s = pj.src;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double gij = s.ginv[s.idx2(i, j)].value();
      if (gij == 0.0) continue;
      for (int d = 0; d < n; ++d) {
        double v = 0.0;
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
              v += T.at(d, a, b, c) * pj.d(a, i).value() * pj.tau[static_cast<std::size_t>(b)].value() *
                   pj.d(c, j).value();
            }
          }
        }
        out[static_cast<std::size_t>(d)] += gij * v;
      }
    }
  }
  return out;
}

std::vector<double> k_term(const LocalTensors& tgt, std::span<const double> X, std::span<const double> Y) {
  const int n = tgt.m;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int d = 0; d < n; ++d) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        out[static_cast<std::size_t>(d)] +=
            tgt.K[tgt.idx3(d, a, b)].value() * X[static_cast<std::size_t>(a)] * Y[static_cast<std::size_t>(b)];
      }
    }
  }
  return out;
}

std::vector<double> jet_values(const std::vector<Jet>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.value());
  return out;
}

double metric_norm(std::span<const double> h, std::span<const double> v) {
  const auto n = v.size();
  double s = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) s += h[a * n + b] * v[a] * v[b];
  }
  return std::sqrt(std::max(0.0, s));
}

TensionValue assemble(const SmoothMap& u, std::span<const double> p) {
  const PullbackJets pj = pullback(u, p, Mode::statistical);
  TensionValue tv;
  tv.point.assign(p.begin(), p.end());
  tv.image = pj.image;
  tv.tau = jet_values(pj.tau);
  tv.delta_bar_tau = rough_laplacian(pj, Mode::statistical);
  const double div = div_trK(pj.src);
  tv.div_trK_term.resize(tv.tau.size());
  for (std::size_t a = 0; a < tv.tau.size(); ++a) tv.div_trK_term[a] = div * tv.tau[a];
  tv.L_term = curvature_term(pj, curvature(pj.tgt, CurvatureKind::interchange));
  tv.K_term = k_term(pj.tgt, tv.tau, tv.tau);
  tv.tau2.resize(tv.tau.size());
  for (std::size_t a = 0; a < tv.tau.size(); ++a) {
    tv.tau2[a] = tv.delta_bar_tau[a] + tv.div_trK_term[a] - tv.L_term[a] - tv.K_term[a];
  }
  return tv;
}

}  // namespace

SmoothMap::SmoothMap(StatStructure source, StatStructure target, std::vector<ExpressionField> components)
    : source_(std::move(source)), target_(std::move(target)), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != target_.dim()) {
    throw SchemaError("map needs one component per target coordinate (" + std::to_string(target_.dim()) + ")");
  }
  for (const auto& c : components_) {
    if (c.arity() != source_.dim()) throw SchemaError("map components must be functions of the source coordinates");
  }
}

std::vector<double> SmoothMap::image(std::span<const double> p) const {
  std::vector<double> q;
  q.reserve(components_.size());
  for (const auto& c : components_) q.push_back(c.evaluate(p));
  if (!target_.domain().contains(q)) {
    throw DomainError("image " + format_point(q) + " leaves the target chart " + target_.name() + " at source point",
                      std::vector<double>(p.begin(), p.end()));
  }
  return q;
}

std::vector<double> tension(const SmoothMap& u, std::span<const double> p) {
  return jet_values(pullback(u, p, Mode::statistical).tau);
}

TensionValue bitension(const SmoothMap& u, std::span<const double> p) { return assemble(u, p); }

std::vector<double> bitension_simplified(const SmoothMap& u, std::span<const double> p) {
  const PullbackJets pj = pullback(u, p, Mode::simplified);
  const auto tau = jet_values(pj.tau);
  auto out = rough_laplacian(pj, Mode::simplified);
  const auto r = curvature_term(pj, curvature(pj.tgt, CurvatureKind::primal));
  const auto k = k_term(pj.tgt, tau, tau);
  for (std::size_t a = 0; a < out.size(); ++a) out[a] -= r[a] + k[a];
  return out;
}

std::vector<double> bitension_riemannian(const SmoothMap& u, std::span<const double> p) {
  const PullbackJets pj = pullback(u, p, Mode::riemannian);
  auto out = rough_laplacian(pj, Mode::riemannian);
  const auto r = curvature_term(pj, curvature(pj.tgt, CurvatureKind::levi_civita));
  for (std::size_t a = 0; a < out.size(); ++a) out[a] -= r[a];
  return out;
}

TensionValue curve_bitension(const SmoothMap& c, double t) {
  if (c.m() != 1) throw UnsupportedStructure("curve_bitension needs a one-dimensional source");
  const double p[1] = {t};
  {
    const LocalTensors s = c.source().local(p, 1);
    if (std::abs(s.g[0].value() - 1.0) > 1e-12 || std::abs(s.g[0].d(0)) > 1e-12 ||
        std::abs(s.gamma[0].value()) > 1e-12) {
      throw UnsupportedStructure("curve_bitension needs the Euclidean structure on the source interval");
    }
  }
  const int n = c.n();
  TensionValue tv;
  tv.point = {t};
  tv.image = c.image(p);
  const LocalTensors tgt = c.target().local(tv.image, 3);
  std::vector<Jet> U;
  for (const auto& f : c.components()) U.push_back(f.jet_at(p, 4));
  JetComposer comp(U, 2);
  std::vector<Jet> G, Gb;
  for (const auto& j : tgt.gamma) G.push_back(comp.compose(j));
  for (const auto& j : tgt.gamma_bar) Gb.push_back(comp.compose(j));
  auto idx = [&](int a, int b, int d) { return static_cast<std::size_t>((a * n + b) * n + d); };

  std::vector<Jet> v;  // c'
  for (const auto& j : U) v.push_back(j.partial(0));
  // nabla_c' X = X' + conn(c', X)
  auto covariant = [&](const std::vector<Jet>& conn, const std::vector<Jet>& X) {
    std::vector<Jet> out;
    for (int a = 0; a < n; ++a) {
      Jet r = X[static_cast<std::size_t>(a)].partial(0);
      for (int b = 0; b < n; ++b) {
        for (int d = 0; d < n; ++d) r.add_product(conn[idx(a, b, d)], v[static_cast<std::size_t>(b)] * X[static_cast<std::size_t>(d)]);
      }
      out.push_back(std::move(r));
    }
    return out;
  };
  const auto A = covariant(G, v);
  const auto B = covariant(Gb, A);
  const auto C = covariant(Gb, B);

  tv.tau = jet_values(A);
  tv.delta_bar_tau = jet_values(C);
  tv.div_trK_term.assign(static_cast<std::size_t>(n), 0.0);
  const auto L = curvature(tgt, CurvatureKind::interchange);
  const auto vv = jet_values(v);
  tv.L_term.assign(static_cast<std::size_t>(n), 0.0);
  for (int d = 0; d < n; ++d) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int e = 0; e < n; ++e) {
          tv.L_term[static_cast<std::size_t>(d)] += L.at(d, a, b, e) * vv[static_cast<std::size_t>(a)] *
                                                    tv.tau[static_cast<std::size_t>(b)] * vv[static_cast<std::size_t>(e)];
        }
      }
    }
  }
  tv.K_term = k_term(tgt, tv.tau, tv.tau);
  tv.tau2.resize(static_cast<std::size_t>(n));
  for (std::size_t a = 0; a < tv.tau2.size(); ++a) tv.tau2[a] = tv.delta_bar_tau[a] - tv.L_term[a] - tv.K_term[a];
  return tv;
}

namespace {

struct ProbeResult {
  double tau = 0.0;
  double tau2 = 0.0;
};

ProbeResult probe(const SmoothMap& u, std::span<const double> p) {
  const TensionValue tv = assemble(u, p);
  const LocalTensors t = u.target().local(tv.image, 1);
  const auto h = jet_values(t.g);
  return {metric_norm(h, tv.tau), metric_norm(h, tv.tau2)};
}

BiharmonicReport reduce(const std::vector<ProbeResult>& r, const std::vector<std::vector<double>>& probes, double tol) {
  BiharmonicReport rep;
  rep.probes = static_cast<int>(probes.size());
  rep.tolerance = tol;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (k == 0 || r[k].tau > rep.max_tau) {
      rep.max_tau = r[k].tau;
      rep.worst_tau_point = probes[k];
    }
    if (k == 0 || r[k].tau2 > rep.max_tau2) {
      rep.max_tau2 = r[k].tau2;
      rep.worst_tau2_point = probes[k];
    }
  }
  rep.is_harmonic = rep.max_tau <= tol;
  rep.is_statistical_biharmonic = rep.max_tau2 <= tol;
  return rep;
}

}  // namespace

BiharmonicReport check_biharmonic_serial(const SmoothMap& u, const std::vector<std::vector<double>>& probes,
                                         double tol) {
  std::vector<ProbeResult> r;
  r.reserve(probes.size());
  for (const auto& p : probes) r.push_back(probe(u, p));
  return reduce(r, probes, tol);
}

BiharmonicReport check_biharmonic(const SmoothMap& u, const std::vector<std::vector<double>>& probes, double tol) {
  const auto count = static_cast<long>(probes.size());
  std::vector<ProbeResult> r(probes.size());
  std::vector<std::exception_ptr> errors(probes.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < count; ++k) {
    try {
      r[static_cast<std::size_t>(k)] = probe(u, probes[static_cast<std::size_t>(k)]);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reduce(r, probes, tol);
}

double Lemma51Value::residual() const { return div_theta_X - tau_norm_sq - correction; }

Lemma51Value lemma51_integrand(const SmoothMap& u, std::span<const double> p) {
  const PullbackJets pj = pullback(u, p, Mode::statistical);
  const int m = pj.m;
  const int n = pj.n;
  const LocalTensors& s = pj.src;

  // omega_j = Gamma-bar^i_{ij}; a nabla-bar parallel density rho exists
  // locally iff d omega = 0, and then d log rho = omega.
  std::vector<Jet> omega;
  for (int j = 0; j < m; ++j) {
    Jet w(m, s.order - 1, 0.0);
    for (int i = 0; i < m; ++i) w += s.gamma_bar[s.idx3(i, i, j)];
    omega.push_back(std::move(w));
  }
  double curl = 0.0, scale = 1.0;
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      curl = std::max(curl, std::abs(omega[static_cast<std::size_t>(j)].d(k) - omega[static_cast<std::size_t>(k)].d(j)));
      scale = std::max(scale, std::abs(omega[static_cast<std::size_t>(j)].d(k)));
    }
  }
  if (curl > 1e-8 * scale) {
    throw UnsupportedStructure("source " + u.source().name() + " has no nabla-bar parallel volume form near " +
                               format_point(pj.src.point));
  }

  // X^i = g^{ij} h(d_j u, tau)
  std::vector<Jet> X;
  for (int i = 0; i < m; ++i) {
    Jet acc(m, 1, 0.0);
    for (int j = 0; j < m; ++j) {
      Jet pair(m, 1, 0.0);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) pair.add_product(pj.hN[static_cast<std::size_t>(a * n + b)], pj.d(a, j) * pj.tau[static_cast<std::size_t>(b)]);
      }
      acc.add_product(s.ginv[s.idx2(i, j)], pair);
    }
    X.push_back(std::move(acc));
  }
  Lemma51Value out;
  for (int i = 0; i < m; ++i) {
    out.div_theta_X += X[static_cast<std::size_t>(i)].d(i) + omega[static_cast<std::size_t>(i)].value() * X[static_cast<std::size_t>(i)].value();
  }
  const auto tau = jet_values(pj.tau);
  std::vector<double> h;
  for (const auto& j : pj.hN) h.push_back(j.value());
  const double nt = metric_norm(h, tau);
  out.tau_norm_sq = nt * nt;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double pair = 0.0;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          pair += h[static_cast<std::size_t>(a * n + b)] * pj.d(a, i).value() * pj.W[static_cast<std::size_t>(b * m + j)].value();
        }
      }
      out.correction += s.ginv[s.idx2(i, j)].value() * pair;
    }
  }
  return out;
}

}  // namespace statgeo
