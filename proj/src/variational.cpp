#include "statgeo/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "node_loop.hpp"
#include "statgeo/builtins.hpp"

namespace statgeo {

using detail::for_nodes;

namespace {

void require_torus(const StatStructure& s) {
  if (!s.domain().is_torus()) throw Error("source " + s.name() + " is not a torus; lattice operations need a torus");
}

double sqrt_det(const LocalTensors& t) {
  Eigen::MatrixXd g(t.m, t.m);
  for (int i = 0; i < t.m; ++i) {
    for (int j = 0; j < t.m; ++j) g(i, j) = t.g[t.idx2(i, j)].value();
  }
  return std::sqrt(g.determinant());
}

// Target data at the node values.
struct TargetGrid {
  int n = 0;
  std::vector<double> h, gamma, gamma_bar, K, L;
};

TargetGrid target_grid(const GridMap& u, bool with_curvature, Exec exec) {
  const int n = u.n();
  const auto N = static_cast<std::size_t>(n);
  const std::size_t nodes = u.lattice().size();
  TargetGrid tg;
  tg.n = n;
  tg.h.resize(nodes * N * N);
  tg.gamma.resize(nodes * N * N * N);
  tg.gamma_bar.resize(nodes * N * N * N);
  tg.K.resize(nodes * N * N * N);
  if (with_curvature) tg.L.resize(nodes * N * N * N * N);
  for_nodes(nodes, exec, [&](std::size_t k) {
    const auto q = u.value(k);
    if (!u.target().domain().contains(q)) {
      throw DomainError("node value " + format_point({q.begin(), q.end()}) + " leaves the target chart " + u.target().name() +
                            " at source node",
                        u.lattice().point(k));
    }
    const LocalTensors t = u.target().local(q, with_curvature ? 2 : 1);
    for (std::size_t a = 0; a < N * N; ++a) tg.h[k * N * N + a] = t.g[a].value();
    for (std::size_t a = 0; a < N * N * N; ++a) {
      tg.gamma[k * N * N * N + a] = t.gamma[a].value();
      tg.gamma_bar[k * N * N * N + a] = t.gamma_bar[a].value();
      tg.K[k * N * N * N + a] = t.K[a].value();
    }
    if (with_curvature) {
      const auto L = curvature(t, CurvatureKind::interchange);
      std::copy(L.components.begin(), L.components.end(), tg.L.begin() + static_cast<long>(k * N * N * N * N));
    }
  });
  return tg;
}

// First and second lattice derivatives of the node values.
struct MapDerivatives {
  std::vector<std::vector<double>> d;   // d[i]: nodes x n
  std::vector<std::vector<double>> dd;  // dd[i*m+j]
};

MapDerivatives map_derivatives(const GridMap& u) {
  const int m = u.m();
  MapDerivatives md;
  for (int i = 0; i < m; ++i) md.d.push_back(differentiate(u.lattice(), u.values(), u.n(), i, 1));
  md.dd.resize(static_cast<std::size_t>(m * m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      md.dd[static_cast<std::size_t>(i * m + j)] =
          i == j ? differentiate(u.lattice(), u.values(), u.n(), i, 2)
                 : differentiate(u.lattice(), md.d[static_cast<std::size_t>(j)], u.n(), i, 1);
    }
  }
  return md;
}

std::vector<double> tension_nodes(const GridMap& u, const MapDerivatives& md, const TargetGrid& tg, Exec exec) {
  const int m = u.m();
  const int n = u.n();
  const auto M = static_cast<std::size_t>(m);
  const auto N = static_cast<std::size_t>(n);
  const SourceGrid& sg = u.geometry();
  std::vector<double> tau(u.lattice().size() * N, 0.0);
  for_nodes(u.lattice().size(), exec, [&](std::size_t k) {
    const double* ginv = &sg.ginv[k * M * M];
    const double* gam = &sg.gamma[k * M * M * M];
    const double* G = &tg.gamma[k * N * N * N];
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t j = 0; j < M; ++j) {
        const double gij = ginv[i * M + j];
        if (gij == 0.0) continue;
        for (std::size_t a = 0; a < N; ++a) {
          double v = md.dd[i * M + j][k * N + a];
          for (std::size_t l = 0; l < M; ++l) v -= gam[(l * M + i) * M + j] * md.d[l][k * N + a];
          for (std::size_t b = 0; b < N; ++b) {
            for (std::size_t c = 0; c < N; ++c) v += G[(a * N + b) * N + c] * md.d[i][k * N + b] * md.d[j][k * N + c];
          }
          tau[k * N + a] += gij * v;
        }
      }
    }
  });
  return tau;
}

// h(X, Y) per node.
std::vector<double> pair_nodes(const TargetGrid& tg, std::span<const double> X, std::span<const double> Y,
                               std::size_t nodes, Exec exec) {
  const auto N = static_cast<std::size_t>(tg.n);
  std::vector<double> out(nodes, 0.0);
  for_nodes(nodes, exec, [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t a = 0; a < N; ++a) {
      for (std::size_t b = 0; b < N; ++b) s += tg.h[k * N * N + a * N + b] * X[k * N + a] * Y[k * N + b];
    }
    out[k] = s;
  });
  return out;
}

double weighted_sum(const SourceGrid& sg, const Lattice& lattice, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t k = 0; k < lattice.size(); ++k) s += f[k] * sg.sqrt_det_g[k];
  return s * lattice.cell_volume();
}

double bienergy_with(const GridMap& u, Exec exec) {
  const TargetGrid tg = target_grid(u, false, exec);
  const auto tau = tension_nodes(u, map_derivatives(u), tg, exec);
  const auto sq = pair_nodes(tg, tau, tau, u.lattice().size(), exec);
  return 0.5 * weighted_sum(u.geometry(), u.lattice(), sq);
}

struct BitensionResult {
  std::vector<double> tau2;
  TargetGrid tg;
};

BitensionResult bitension_with(const GridMap& u, Exec exec) {
  const int m = u.m();
  const int n = u.n();
  const auto M = static_cast<std::size_t>(m);
  const auto N = static_cast<std::size_t>(n);
  const std::size_t nodes = u.lattice().size();
  const SourceGrid& sg = u.geometry();
  BitensionResult r;
  r.tg = target_grid(u, true, exec);
  const TargetGrid& tg = r.tg;
  const MapDerivatives md = map_derivatives(u);
  const auto tau = tension_nodes(u, md, tg, exec);

  // W_j = d_j tau + Gamma-bar^N(d_j u, tau)
  std::vector<std::vector<double>> W(M);
  for (std::size_t j = 0; j < M; ++j) {
    W[j] = differentiate(u.lattice(), tau, n, static_cast<int>(j), 1);
    for_nodes(nodes, exec, [&](std::size_t k) {
      const double* Gb = &tg.gamma_bar[k * N * N * N];
      for (std::size_t a = 0; a < N; ++a) {
        double v = 0.0;
        for (std::size_t b = 0; b < N; ++b) {
          for (std::size_t c = 0; c < N; ++c) v += Gb[(a * N + b) * N + c] * md.d[j][k * N + b] * tau[k * N + c];
        }
        W[j][k * N + a] += v;
      }
    });
  }
  std::vector<std::vector<double>> dW(M * M);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) dW[i * M + j] = differentiate(u.lattice(), W[j], n, static_cast<int>(i), 1);
  }

  r.tau2.assign(nodes * N, 0.0);
  for_nodes(nodes, exec, [&](std::size_t k) {
    const double* ginv = &sg.ginv[k * M * M];
    const double* gamb = &sg.gamma_bar[k * M * M * M];
    const double* Gb = &tg.gamma_bar[k * N * N * N];
    const double* KN = &tg.K[k * N * N * N];
    const double* L = &tg.L[k * N * N * N * N];
    const double* t = &tau[k * N];
    for (std::size_t a = 0; a < N; ++a) {
      double lap = 0.0, curv = 0.0;
      for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < M; ++j) {
          const double gij = ginv[i * M + j];
          if (gij == 0.0) continue;
          double v = dW[i * M + j][k * N + a];
          for (std::size_t b = 0; b < N; ++b) {
            for (std::size_t c = 0; c < N; ++c) v += Gb[(a * N + b) * N + c] * md.d[i][k * N + b] * W[j][k * N + c];
          }
          for (std::size_t l = 0; l < M; ++l) v -= gamb[(l * M + i) * M + j] * W[l][k * N + a];
          lap += gij * v;
          double c4 = 0.0;
          for (std::size_t b = 0; b < N; ++b) {
            for (std::size_t c = 0; c < N; ++c) {
              for (std::size_t d = 0; d < N; ++d) {
                c4 += L[((a * N + b) * N + c) * N + d] * md.d[i][k * N + b] * t[c] * md.d[j][k * N + d];
              }
            }
          }
          curv += gij * c4;
        }
      }
      double kt = 0.0;
      for (std::size_t b = 0; b < N; ++b) {
        for (std::size_t c = 0; c < N; ++c) kt += KN[(a * N + b) * N + c] * t[b] * t[c];
      }
      r.tau2[k * N + a] = lap + sg.div_trK[k] * t[a] - curv - kt;
    }
  });
  return r;
}

double max_norm(const TargetGrid& tg, std::span<const double> v, std::size_t nodes, Exec exec) {
  const auto sq = pair_nodes(tg, v, v, nodes, exec);
  double mx = 0.0;
  for (double s : sq) mx = std::max(mx, std::sqrt(std::max(0.0, s)));
  return mx;
}

}  // namespace

SourceGrid source_grid(const StatStructure& s, const Lattice& lattice, Exec exec) {
  require_torus(s);
  const int m = s.dim();
  if (lattice.dim() != m) throw Error("lattice dimension does not match the source");
  const auto M = static_cast<std::size_t>(m);
  const std::size_t nodes = lattice.size();
  SourceGrid sg;
  sg.m = m;
  sg.ginv.resize(nodes * M * M);
  sg.gamma.resize(nodes * M * M * M);
  sg.gamma_bar.resize(nodes * M * M * M);
  sg.sqrt_det_g.resize(nodes);
  sg.div_trK.resize(nodes);
  for_nodes(nodes, exec, [&](std::size_t k) {
    const LocalTensors t = s.local(lattice.point(k), 2);
    for (std::size_t a = 0; a < M * M; ++a) sg.ginv[k * M * M + a] = t.ginv[a].value();
    for (std::size_t a = 0; a < M * M * M; ++a) {
      sg.gamma[k * M * M * M + a] = t.gamma[a].value();
      sg.gamma_bar[k * M * M * M + a] = t.gamma_bar[a].value();
    }
    sg.sqrt_det_g[k] = sqrt_det(t);
    sg.div_trK[k] = div_trK(t);
  });
  return sg;
}

Lattice torus_lattice(const StatStructure& s, std::vector<int> resolution) {
  require_torus(s);
  if (static_cast<int>(resolution.size()) == 1 && s.dim() > 1) resolution.assign(static_cast<std::size_t>(s.dim()), resolution[0]);
  return Lattice(std::move(resolution), s.domain().periods());
}

GridMap::GridMap(StatStructure source, StatStructure target, Lattice lattice, std::vector<double> values)
    : source_(std::move(source)), target_(std::move(target)), lattice_(std::move(lattice)), values_(std::move(values)) {
  require_torus(source_);
  if (values_.size() != lattice_.size() * static_cast<std::size_t>(n())) {
    throw SchemaError("grid map needs " + std::to_string(n()) + " values per lattice node");
  }
  geometry_ = std::make_shared<const SourceGrid>(source_grid(source_, lattice_));
}

GridMap GridMap::sample(const SmoothMap& u, std::vector<int> resolution) {
  const Lattice lattice = torus_lattice(u.source(), std::move(resolution));
  const auto N = static_cast<std::size_t>(u.n());
  std::vector<double> values(lattice.size() * N);
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const auto p = lattice.point(k);
    for (std::size_t a = 0; a < N; ++a) values[k * N + a] = u.components()[a].evaluate(p);
  }
  GridMap g(u.source(), u.target(), lattice, std::move(values));
  g.check_domain();
  return g;
}

std::span<const double> GridMap::value(std::size_t node) const {
  const auto N = static_cast<std::size_t>(n());
  return std::span<const double>(values_).subspan(node * N, N);
}

GridMap GridMap::with_values(std::vector<double> values) const {
  if (values.size() != values_.size()) throw Error("grid map values have the wrong size");
  GridMap g = *this;
  g.values_ = std::move(values);
  return g;
}

void GridMap::check_domain() const {
  for (std::size_t k = 0; k < lattice_.size(); ++k) {
    if (!target_.domain().contains(value(k))) {
      throw DomainError("node value " + format_point({value(k).begin(), value(k).end()}) + " leaves the target chart " + target_.name() +
                            " at source node",
                        lattice_.point(k));
    }
  }
}

double integrate(const StatStructure& s, const Lattice& lattice, std::span<const double> f, Exec exec) {
  if (f.size() != lattice.size()) throw Error("integrand needs one value per lattice node");
  return weighted_sum(source_grid(s, lattice, exec), lattice, f);
}

double integrate(const StatStructure& s, const ExpressionField& f, std::vector<int> resolution, Exec exec) {
  const Lattice lattice = torus_lattice(s, std::move(resolution));
  std::vector<double> v(lattice.size());
  for_nodes(lattice.size(), exec, [&](std::size_t k) { v[k] = f.evaluate(lattice.point(k)); });
  return integrate(s, lattice, v, exec);
}

std::vector<double> grid_tension(const GridMap& u, Exec exec) {
  return tension_nodes(u, map_derivatives(u), target_grid(u, false, exec), exec);
}

double bienergy(const GridMap& u, Exec exec) { return bienergy_with(u, exec); }

std::vector<double> grid_bitension(const GridMap& u, Exec exec) { return bitension_with(u, exec).tau2; }

double green_integral(const StatStructure& s, std::span<const ExpressionField> X, std::vector<int> resolution) {
  const Lattice lattice = torus_lattice(s, std::move(resolution));
  std::vector<double> div(lattice.size());
  for_nodes(lattice.size(), Exec::parallel, [&](std::size_t k) {
    div[k] = divergence(s, X, DivergenceKind::levi_civita, lattice.point(k));
  });
  return integrate(s, lattice, div);
}

AdjointnessReport adjointness_check(const StatStructure& s, const Lattice& lattice, std::span<const double> xi,
                                    std::span<const double> eta, int rank) {
  require_torus(s);
  const int m = s.dim();
  const auto M = static_cast<std::size_t>(m);
  const auto R = static_cast<std::size_t>(rank);
  const std::size_t nodes = lattice.size();
  if (xi.size() != nodes * R || eta.size() != nodes * R) throw Error("sections need rank values per lattice node");

  std::vector<double> ginv(nodes * M * M), gamma_g(nodes * M * M * M), trK(nodes * M), sq(nodes), dtr(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const LocalTensors t = s.local(lattice.point(k), 2);
    for (std::size_t a = 0; a < M * M; ++a) ginv[k * M * M + a] = t.ginv[a].value();
    for (std::size_t a = 0; a < M * M * M; ++a) gamma_g[k * M * M * M + a] = t.gamma_g[a].value();
    const auto tr = trace_K(t);
    for (std::size_t a = 0; a < M; ++a) trK[k * M + a] = tr[a].value();
    sq[k] = sqrt_det(t);
    dtr[k] = div_trK(t);
  }

  auto derivs = [&](std::span<const double> f) {
    MapDerivatives d;
    for (int i = 0; i < m; ++i) d.d.push_back(differentiate(lattice, f, rank, i, 1, Stencil::spectral));
    d.dd.resize(M * M);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        d.dd[static_cast<std::size_t>(i * m + j)] =
            i == j ? differentiate(lattice, f, rank, i, 2, Stencil::spectral)
                   : differentiate(lattice, d.d[static_cast<std::size_t>(j)], rank, i, 1, Stencil::spectral);
      }
    }
    return d;
  };
  // Delta_g f + sign * tr_g K (f)
  auto laplacian = [&](const MapDerivatives& d, double sign) {
    std::vector<double> out(nodes * R, 0.0);
    for (std::size_t k = 0; k < nodes; ++k) {
      for (std::size_t r = 0; r < R; ++r) {
        double v = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
          for (std::size_t j = 0; j < M; ++j) {
            double w = d.dd[i * M + j][k * R + r];
            for (std::size_t l = 0; l < M; ++l) w -= gamma_g[k * M * M * M + (l * M + i) * M + j] * d.d[l][k * R + r];
            v += ginv[k * M * M + i * M + j] * w;
          }
          v += sign * trK[k * M + i] * d.d[i][k * R + r];
        }
        out[k * R + r] = v;
      }
    }
    return out;
  };
  const auto lap_xi = laplacian(derivs(xi), -1.0);
  const auto lapbar_eta = laplacian(derivs(eta), 1.0);

  AdjointnessReport rep;
  for (std::size_t k = 0; k < nodes; ++k) {
    double a = 0.0, b = 0.0, c = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      a += lap_xi[k * R + r] * eta[k * R + r];
      b += xi[k * R + r] * lapbar_eta[k * R + r];
      c += xi[k * R + r] * eta[k * R + r];
    }
    rep.lhs += a * sq[k];
    rep.rhs += b * sq[k];
    rep.div_term += dtr[k] * c * sq[k];
  }
  const double vol = lattice.cell_volume();
  rep.lhs *= vol;
  rep.rhs *= vol;
  rep.div_term *= vol;
  rep.delta = std::abs(rep.lhs - rep.rhs - rep.div_term);
  return rep;
}

bool VariationReport::pass(double rel_tol, double abs_tol) const { return rel_error <= rel_tol || abs_error <= abs_tol; }

VariationReport first_variation_check(const GridMap& u, std::span<const double> V, double t_step) {
  if (V.size() != u.values().size()) throw Error("variation field needs n values per lattice node");
  auto energy_at = [&](double t) {
    std::vector<double> w(u.values());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += t * V[k];
    const GridMap g = u.with_values(std::move(w));
    g.check_domain();
    return bienergy(g);
  };
  auto central = [&](double t) { return (energy_at(t) - energy_at(-t)) / (2.0 * t); };
  VariationReport rep;
  rep.lhs = (4.0 * central(0.5 * t_step) - central(t_step)) / 3.0;
  const BitensionResult b = bitension_with(u, Exec::parallel);
  const auto pairing = pair_nodes(b.tg, V, b.tau2, u.lattice().size(), Exec::parallel);
  rep.rhs = weighted_sum(u.geometry(), u.lattice(), pairing);
  rep.abs_error = std::abs(rep.lhs - rep.rhs);
  const double scale = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
  rep.rel_error = scale > 0.0 ? rep.abs_error / scale : 0.0;
  return rep;
}

SolverConfig load_solver_config(const nlohmann::json& doc) {
  SolverConfig c;
  try {
    if (doc.contains("resolution")) c.resolution = doc["resolution"].get<std::vector<int>>();
    if (doc.contains("max_iter")) c.max_iter = doc["max_iter"].get<int>();
    if (doc.contains("step")) c.step = doc["step"].get<double>();
    if (doc.contains("tol")) {
      const auto& t = doc["tol"];
      c.tol = t.is_string() && (t.get<std::string>() == "inf" || t.get<std::string>() == "infinity")
                  ? std::numeric_limits<double>::infinity()
                  : t.get<double>();
    }
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed solver config: ") + e.what());
  }
  if (c.max_iter < 0) throw SchemaError("max_iter must be non-negative");
  if (!(c.step >= 0.0)) throw SchemaError("step must be non-negative");
  return c;
}

nlohmann::json to_json(const SolveReport& r) {
  return nlohmann::json{{"iterations", r.iterations},
                        {"energy", r.energy},
                        {"steps", r.steps},
                        {"max_tau2", r.max_tau2},
                        {"termination", r.termination}};
}

SolveResult minimize(const GridMap& u0, const SolverConfig& config, Exec exec) {
  constexpr double armijo = 1e-4;
  constexpr int max_halvings = 40;
  u0.check_domain();
  const std::size_t nodes = u0.lattice().size();
  GridMap u = u0;
  SolveReport rep;
  double E = bienergy(u, exec);
  rep.energy.push_back(E);
  while (true) {
    const BitensionResult b = bitension_with(u, exec);
    rep.max_tau2 = max_norm(b.tg, b.tau2, nodes, exec);
    if (rep.max_tau2 <= config.tol) {
      rep.termination = "tolerance met";
      break;
    }
    if (rep.iterations >= config.max_iter) {
      rep.termination = "max iterations";
      break;
    }
    const double grad_sq = weighted_sum(u.geometry(), u.lattice(), pair_nodes(b.tg, b.tau2, b.tau2, nodes, exec));
    double eta = config.step;
    bool accepted = false;
    for (int halving = 0; halving <= max_halvings; ++halving, eta *= 0.5) {
      std::vector<double> w(u.values());
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= eta * b.tau2[k];
      GridMap cand = u.with_values(std::move(w));
      double Ec = 0.0;
      try {
        Ec = bienergy(cand, exec);
      } catch (const DomainError&) {
        continue;
      }
      if (Ec < E && Ec <= E - armijo * eta * grad_sq) {
        u = std::move(cand);
        E = Ec;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.termination = "stagnation";
      throw StagnationError("line search failed to decrease the bi-energy after " + std::to_string(max_halvings) +
                                " halvings at iteration " + std::to_string(rep.iterations),
                            rep);
    }
    ++rep.iterations;
    rep.energy.push_back(E);
    rep.steps.push_back(eta);
  }
  return SolveResult{std::move(u), std::move(rep)};
}

nlohmann::json grid_to_json(const GridMap& u) {
  nlohmann::json values = nlohmann::json::array();
  for (std::size_t k = 0; k < u.lattice().size(); ++k) {
    const auto v = u.value(k);
    values.push_back(std::vector<double>(v.begin(), v.end()));
  }
  return nlohmann::json{{"source", u.source().name()},
                        {"target", u.target().name()},
                        {"resolution", u.lattice().resolution()},
                        {"periods", u.lattice().periods()},
                        {"n", u.n()},
                        {"values", values}};
}

GridMap grid_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("source") || !doc.contains("target") || !doc.contains("values")) {
    throw SchemaError("grid document needs source, target and values");
  }
  StatStructure source = load_structure(doc["source"]);
  StatStructure target = load_structure(doc["target"]);
  std::vector<int> resolution;
  std::vector<double> values;
  try {
    for (const auto& v : doc["values"]) {
      if (v.is_array()) {
        for (const auto& x : v) values.push_back(x.get<double>());
      } else {
        values.push_back(v.get<double>());
      }
    }
    resolution = doc.contains("resolution") ? doc["resolution"].get<std::vector<int>>()
                                            : std::vector<int>{static_cast<int>(doc["values"].size())};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed grid document: ") + e.what());
  }
  Lattice lattice = torus_lattice(source, resolution);
  GridMap g(std::move(source), std::move(target), std::move(lattice), std::move(values));
  g.check_domain();
  return g;
}

}  // namespace statgeo
