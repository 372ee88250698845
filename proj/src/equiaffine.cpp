#include "statgeo/equiaffine.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "statgeo/builtins.hpp"
#include "statgeo/errors.hpp"
#include "statgeo/maps.hpp"

namespace statgeo {

namespace {

// Jets of the Blaschke construction, with metric order K:
// H = Hess F, lambda = det(H)^(1/(m+2)), h = H / lambda (order K),
// Z = -h^{-1} d log lambda and Gamma^k_ij = -h_ij Z^k (order K - 1).
struct BlaschkeJets {
  int m = 0;
  Jet F;
  std::vector<Jet> H, h, Z, gamma;
  Jet lambda;
  std::vector<Jet> tau1;
};

Jet jet_determinant(std::vector<Jet> a, int m) {
  const auto n = static_cast<std::size_t>(m);
  Jet det(a[0].dim(), a[0].order(), 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c].value()) > std::abs(a[piv * n + c].value())) piv = r;
    }
    if (a[piv * n + c].value() == 0.0) return Jet(a[0].dim(), a[0].order(), 0.0);
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

BlaschkeJets blaschke_jets(const GraphHypersurface& hs, std::span<const double> p, int K) {
  if (K + 2 > kMaxJetOrder) throw Error("Blaschke jets limited to metric order " + std::to_string(kMaxJetOrder - 2));
  if (!hs.domain().contains(p)) {
    throw DomainError("point outside the domain of " + hs.name(), std::vector<double>(p.begin(), p.end()));
  }
  const int m = hs.dim();
  BlaschkeJets b;
  b.m = m;
  b.F = hs.F().jet_at(p, K + 2);
  std::vector<Jet> dF;
  for (int i = 0; i < m; ++i) dF.push_back(b.F.partial(i));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) b.H.push_back(dF[static_cast<std::size_t>(i)].partial(j));
  }
  std::vector<double> hv;
  for (const auto& j : b.H) hv.push_back(j.value());
  const double ev = min_eigenvalue(hv, m);
  if (!(ev > 0.0)) {
    throw DomainError("Hessian of the graph function is not positive definite (smallest eigenvalue " +
                          std::to_string(ev) + ")",
                      std::vector<double>(p.begin(), p.end()));
  }
  const Jet det = jet_determinant(b.H, m);
  b.lambda = pow(det, 1.0 / (m + 2));
  const Jet inv_lambda = reciprocal(b.lambda);
  for (const auto& j : b.H) b.h.push_back(j * inv_lambda);
  const Jet log_lambda = log(det) / static_cast<double>(m + 2);
  for (int i = 0; i < m; ++i) b.tau1.push_back(log_lambda.partial(i));
  const auto hinv = invert_metric(b.h, m);
  for (int k = 0; k < m; ++k) {
    Jet z(m, K - 1, 0.0);
    for (int l = 0; l < m; ++l) z.add_product(hinv[static_cast<std::size_t>(k * m + l)], b.tau1[static_cast<std::size_t>(l)] * -1.0);
    b.Z.push_back(std::move(z));
  }
  b.gamma.resize(static_cast<std::size_t>(m * m * m));
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        b.gamma[static_cast<std::size_t>((k * m + i) * m + j)] =
            b.h[static_cast<std::size_t>(i * m + j)] * b.Z[static_cast<std::size_t>(k)] * -1.0;
      }
    }
  }
  return b;
}

class EquiaffineSource final : public GeometrySource {
 public:
  explicit EquiaffineSource(GraphHypersurface hs) : hs_(std::move(hs)) {}
  std::string name() const override { return hs_.name(); }
  int dim() const override { return hs_.dim(); }
  const std::vector<std::string>& coordinates() const override { return hs_.coordinates(); }
  const Domain& domain() const override { return hs_.domain(); }
  ConnectionKind connection_kind() const override { return ConnectionKind::christoffel; }
  GeometryJets evaluate(std::span<const double> p, int order) const override {
    BlaschkeJets b = blaschke_jets(hs_, p, order);
    GeometryJets ge;
    ge.dim = b.m;
    ge.order = order;
    ge.g = std::move(b.h);
    ge.kind = ConnectionKind::christoffel;
    ge.conn = std::move(b.gamma);
    return ge;
  }

 private:
  GraphHypersurface hs_;
};

// xi = (Z, lambda + dF . Z)
std::vector<Jet> xi_jets(const BlaschkeJets& b) {
  const int m = b.m;
  std::vector<Jet> xi(b.Z.begin(), b.Z.end());
  Jet last = b.lambda.truncated(b.Z[0].order());
  for (int i = 0; i < m; ++i) last.add_product(b.F.partial(i), b.Z[static_cast<std::size_t>(i)]);
  xi.push_back(std::move(last));
  return xi;
}

}  // namespace

GraphHypersurface::GraphHypersurface(std::string name, ExpressionField F, Domain domain)
    : name_(std::move(name)), F_(std::move(F)), domain_(std::move(domain)) {
  if (domain_.dim() != F_.arity()) throw SchemaError("graph domain dimension does not match the graph function");
  if (domain_.is_torus()) throw SchemaError("graph hypersurfaces need a box domain");
}

void GraphHypersurface::check_convexity(int probes) const {
  for (const auto& p : domain_.probes(probes)) blaschke_jets(*this, p, 1);
}

GraphHypersurface load_hypersurface(const nlohmann::json& doc) {
  try {
    const int m = doc.at("dimension").get<int>();
    std::vector<std::string> coords;
    if (doc.contains("coordinates")) {
      coords = doc["coordinates"].get<std::vector<std::string>>();
    } else {
      coords = euclidean_coordinates(m);
    }
    if (static_cast<int>(coords.size()) != m) throw SchemaError("'coordinates' length must equal 'dimension'");
    std::vector<std::pair<double, double>> iv;
    for (const auto& pair : doc.at("domain")) iv.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    if (static_cast<int>(iv.size()) != m) throw SchemaError("'domain' needs one interval per axis");
    GraphHypersurface hs(doc.value("name", std::string("graph")),
                         ExpressionField::parse(doc.at("graph").get<std::string>(), coords), Domain::box(iv));
    hs.check_convexity();
    return hs;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed hypersurface spec: ") + e.what());
  }
}

double EquiaffineChecks::max() const { return std::max({decomposition, equiaffine, volume, apolarity, gauss}); }

EquiaffineStructure blaschke(const GraphHypersurface& hs, std::span<const double> p) {
  const BlaschkeJets b = blaschke_jets(hs, p, 2);
  const int m = b.m;
  EquiaffineStructure e;
  e.m = m;
  e.point.assign(p.begin(), p.end());
  e.lambda = b.lambda.value();
  for (const auto& j : xi_jets(b)) e.xi.push_back(j.value());
  for (const auto& j : b.h) e.h.push_back(j.value());
  for (const auto& j : b.gamma) e.gamma.push_back(j.value());
  for (const auto& j : b.tau1) e.tau1.push_back(j.value());
  e.S.resize(static_cast<std::size_t>(m * m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) e.S[static_cast<std::size_t>(i * m + j)] = -b.Z[static_cast<std::size_t>(i)].d(j);
  }
  return e;
}

EquiaffineChecks equiaffine_checks(const GraphHypersurface& hs, std::span<const double> p) {
  const BlaschkeJets b = blaschke_jets(hs, p, 2);
  const EquiaffineStructure e = blaschke(hs, p);
  const int m = b.m;
  const auto M = static_cast<std::size_t>(m);
  EquiaffineChecks c;

  // f_* d_i = (e_i, F_i)
  Eigen::MatrixXd frame(m + 1, m + 1);
  frame.setZero();
  for (int i = 0; i < m; ++i) {
    frame(i, i) = 1.0;
    frame(m, i) = b.F.d(i);
  }
  for (int a = 0; a <= m; ++a) frame(a, m) = e.xi[static_cast<std::size_t>(a)];

  // D_{d_i} f_* d_j = (0, F_ij) = f_* nabla_i d_j + h_ij xi
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int a = 0; a <= m; ++a) {
        double lhs = a == m ? b.F.d(i, j) : 0.0;
        double rhs = e.h[static_cast<std::size_t>(i * m + j)] * e.xi[static_cast<std::size_t>(a)];
        for (int k = 0; k < m; ++k) rhs += e.gamma[static_cast<std::size_t>((k * m + i) * m + j)] * frame(a, k);
        c.decomposition = std::max(c.decomposition, std::abs(lhs - rhs));
      }
    }
  }

  // D_{d_i} xi in the frame (f_* d_1..f_* d_m, xi): transversal part must vanish
  const auto xi = xi_jets(b);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(frame);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd dxi(m + 1);
    for (int a = 0; a <= m; ++a) dxi(a) = xi[static_cast<std::size_t>(a)].d(i);
    const Eigen::VectorXd coef = lu.solve(dxi);
    c.equiaffine = std::max(c.equiaffine, std::abs(coef(m)));
  }

  // vol_h(d_1..d_m) = sqrt(det h) vs det(f_* d_1..f_* d_m, xi)
  Eigen::MatrixXd h(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) h(i, j) = e.h[static_cast<std::size_t>(i * m + j)];
  }
  c.volume = std::abs(std::sqrt(h.determinant()) - frame.determinant());

  // tr_h K with K = nabla - nabla^h, and the Gauss equation
  const StatStructure induced = induced_structure(hs);
  const LocalTensors t = induced.local(p, 2);
  const auto tr = trace_K(t);
  for (const auto& j : tr) c.apolarity = std::max(c.apolarity, std::abs(j.value()));
  const auto R = curvature(t, CurvatureKind::primal);
  for (int l = 0; l < m; ++l) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          const double g = e.h[static_cast<std::size_t>(j * m + k)] * e.S[static_cast<std::size_t>(l * m + i)] -
                           e.h[static_cast<std::size_t>(i * m + k)] * e.S[static_cast<std::size_t>(l * m + j)];
          c.gauss = std::max(c.gauss, std::abs(R.at(l, i, j, k) - g));
        }
      }
    }
  }
  (void)M;
  return c;
}

std::string to_string(AffineClass c) {
  switch (c) {
    case AffineClass::improper_sphere: return "improper_sphere";
    case AffineClass::affine_minimal: return "affine_minimal";
    case AffineClass::generic: return "generic";
  }
  return "unknown";
}

AffineInvariants affine_invariants(const GraphHypersurface& hs, std::span<const double> p, double tol) {
  const BlaschkeJets b = blaschke_jets(hs, p, 3);
  const int m = b.m;
  auto I2 = [m](int i, int j) { return static_cast<std::size_t>(i * m + j); };
  auto I3 = [m](int k, int i, int j) { return static_cast<std::size_t>((k * m + i) * m + j); };
  // S^i_j = -d_j Z^i, as jets of order 1
  std::vector<Jet> S;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) S.push_back(b.Z[static_cast<std::size_t>(i)].partial(j) * -1.0);
  }
  const auto hinv = invert_metric(b.h, m);
  AffineInvariants out;
  out.tr_h_nabla_S.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    out.trS += S[I2(i, i)].value();
    for (int j = 0; j < m; ++j) out.max_abs_S = std::max(out.max_abs_S, std::abs(S[I2(i, j)].value()));
  }
  // (nabla_k S)^i_j = d_k S^i_j + Gamma^i_kl S^l_j - S^i_l Gamma^l_kj
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
      for (int j = 0; j < m; ++j) {
        double v = S[I2(i, j)].d(k);
        for (int l = 0; l < m; ++l) {
          v += b.gamma[I3(i, k, l)].value() * S[I2(l, j)].value() - S[I2(i, l)].value() * b.gamma[I3(l, k, j)].value();
        }
        acc += hinv[I2(k, j)].value() * v;
      }
    }
    out.tr_h_nabla_S[static_cast<std::size_t>(i)] = acc;
  }
  out.classification = out.max_abs_S <= tol             ? AffineClass::improper_sphere
                       : std::abs(out.trS) <= tol        ? AffineClass::affine_minimal
                                                         : AffineClass::generic;
  return out;
}

AffineClass classify(const GraphHypersurface& hs, const std::vector<std::vector<double>>& probes, double tol) {
  bool improper = true;
  bool minimal = true;
  for (const auto& p : probes) {
    const auto inv = affine_invariants(hs, p, tol);
    improper = improper && inv.max_abs_S <= tol;
    minimal = minimal && std::abs(inv.trS) <= tol;
  }
  return improper ? AffineClass::improper_sphere : minimal ? AffineClass::affine_minimal : AffineClass::generic;
}

std::vector<double> shape_from_curvature(const StatStructure& induced, std::span<const double> p) {
  const int m = induced.dim();
  if (m < 2) throw UnsupportedStructure("the shape operator is not determined by curvature in dimension 1");
  const LocalTensors t = induced.local(p, 2);
  const auto R = curvature(t, CurvatureKind::primal);
  std::vector<double> ric(static_cast<std::size_t>(m * m), 0.0);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      for (int l = 0; l < m; ++l) ric[t.idx2(j, k)] += R.at(l, l, j, k);
    }
  }
  double scal = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) scal += t.ginv[t.idx2(j, k)].value() * ric[t.idx2(j, k)];
  }
  const double trS = scal / (m - 1);
  std::vector<double> S(static_cast<std::size_t>(m * m), 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double v = i == j ? trS : 0.0;
      for (int k = 0; k < m; ++k) v -= t.ginv[t.idx2(i, k)].value() * ric[t.idx2(k, j)];
      S[t.idx2(i, j)] = v;
    }
  }
  return S;
}

StatStructure induced_structure(const GraphHypersurface& hs) {
  return StatStructure(std::make_shared<EquiaffineSource>(hs));
}

HypersurfaceBitension hypersurface_bitension(const GraphHypersurface& hs, std::span<const double> p) {
  const int m = hs.dim();
  const EquiaffineStructure e = blaschke(hs, p);
  const AffineInvariants inv = affine_invariants(hs, p);
  const Jet F = hs.F().jet_at(p, 1);
  HypersurfaceBitension out;
  for (double x : e.xi) out.tau.push_back(m * x);
  // -m f_*(tr_h nabla S) - m trS xi with f_* V = (V, dF . V)
  out.tau2_formula.assign(static_cast<std::size_t>(m + 1), 0.0);
  double last = 0.0;
  for (int i = 0; i < m; ++i) {
    const double v = inv.tr_h_nabla_S[static_cast<std::size_t>(i)];
    out.tau2_formula[static_cast<std::size_t>(i)] = -m * v;
    last += F.d(i) * v;
  }
  out.tau2_formula[static_cast<std::size_t>(m)] = -m * last;
  for (int a = 0; a <= m; ++a) out.tau2_formula[static_cast<std::size_t>(a)] -= m * inv.trS * e.xi[static_cast<std::size_t>(a)];

  const auto cptr = hs.F().coordinates_ptr();
  std::vector<ExpressionField> comps;
  for (int i = 0; i < m; ++i) comps.emplace_back(expr::variable(i), cptr);
  comps.push_back(hs.F());
  const SmoothMap f(induced_structure(hs), build_structure(euclidean_chart(m + 1, 1e6)), std::move(comps));
  const TensionValue v = bitension(f, p);
  out.tau_direct = v.tau;
  out.tau2_direct = v.tau2;
  return out;
}

}  // namespace statgeo
