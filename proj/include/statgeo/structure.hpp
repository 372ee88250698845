#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "statgeo/chart.hpp"
#include "statgeo/jet.hpp"

namespace statgeo {

/// Metric and connection data of a structure as jets at one point.
struct GeometryJets {
  int dim = 0;
  int order = 0;            // order of the metric jets
  std::vector<Jet> g;       // m*m, order `order`
  ConnectionKind kind = ConnectionKind::levi_civita;
  std::vector<Jet> conn;    // m^3 [k][i][j], order `order - 1`; empty for levi_civita
};

/// Anything that can produce metric and connection jets at a point.
class GeometrySource {
 public:
  virtual ~GeometrySource() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual const std::vector<std::string>& coordinates() const = 0;
  virtual const Domain& domain() const = 0;
  virtual ConnectionKind connection_kind() const = 0;
  /// Metric jets of order `order` (>= 1) and connection jets of order - 1.
  virtual GeometryJets evaluate(std::span<const double> p, int order) const = 0;
};

/// Source backed by the expressions of a chart.
class ChartSource final : public GeometrySource {
 public:
  explicit ChartSource(ChartManifold chart) : chart_(std::move(chart)) {}
  std::string name() const override { return chart_.name(); }
  int dim() const override { return chart_.dim(); }
  const std::vector<std::string>& coordinates() const override { return chart_.coordinates(); }
  const Domain& domain() const override { return chart_.domain(); }
  ConnectionKind connection_kind() const override { return chart_.connection_kind(); }
  GeometryJets evaluate(std::span<const double> p, int order) const override;
  const ChartManifold& chart() const { return chart_; }

 private:
  ChartManifold chart_;
};

/// All connection objects of a statistical structure at one point, as jets.
///
/// g and ginv have order `order`; the connection arrays have order - 1.
/// Index layout: g[i*m+j], conn[(k*m+i)*m+j] for Gamma^k_{ij}.
struct LocalTensors {
  int m = 0;
  int order = 0;
  std::vector<double> point;
  std::vector<Jet> g, ginv;
  std::vector<Jet> gamma_g;    // Levi-Civita
  std::vector<Jet> gamma;      // primal
  std::vector<Jet> K;          // gamma - gamma_g
  std::vector<Jet> gamma_bar;  // gamma_g - K

  std::size_t idx2(int i, int j) const { return static_cast<std::size_t>(i * m + j); }
  std::size_t idx3(int k, int i, int j) const { return static_cast<std::size_t>((k * m + i) * m + j); }
};

/// Metric inverse as jets (Gauss-Jordan with partial pivoting on values).
std::vector<Jet> invert_metric(std::span<const Jet> g, int m);
/// Levi-Civita symbols from metric jets, order = order(g) - 1.
std::vector<Jet> levi_civita_symbols(std::span<const Jet> g, std::span<const Jet> ginv, int m);

/// A validated statistical structure (g, nabla). Immutable and cheap to copy.
class StatStructure {
 public:
  StatStructure() = default;
  explicit StatStructure(std::shared_ptr<const GeometrySource> source) : source_(std::move(source)) {}

  const GeometrySource& source() const { return *source_; }
  const std::shared_ptr<const GeometrySource>& source_ptr() const { return source_; }
  std::string name() const { return source_->name(); }
  int dim() const { return source_->dim(); }
  const Domain& domain() const { return source_->domain(); }
  const std::vector<std::string>& coordinates() const { return source_->coordinates(); }
  /// True when nabla is declared to be the Levi-Civita connection.
  bool riemannian() const { return source_->connection_kind() == ConnectionKind::levi_civita; }

  LocalTensors local(std::span<const double> p, int order) const;

  /// The structure (g, nabla-bar).
  StatStructure conjugate() const;

 private:
  std::shared_ptr<const GeometrySource> source_;
};

struct BuildOptions {
  int probes = 32;
  std::uint64_t seed = 0;
  double codazzi_tol = 1e-9;
};

/// Wraps a chart, checks the Codazzi condition at the probe set and throws
/// CodazziError with the worst point otherwise.
StatStructure build_structure(const ChartManifold& chart, const BuildOptions& opts = {});
StatStructure build_structure(std::shared_ptr<const GeometrySource> source, const BuildOptions& opts = {});

/// Codazzi tensor C_{ijk} = (nabla_i g)_{jk}, m^3 values at the point.
std::vector<double> codazzi_tensor(const LocalTensors& t);
/// max |C_{ijk} - C_{jik}| / max(1, max |C|).
double codazzi_residual(const LocalTensors& t);

// ---------------------------------------------------------------------------
// Curvature

enum class CurvatureKind { primal, conjugate, levi_civita, interchange, conjugate_interchange };

std::string to_string(CurvatureKind k);

/// at(l, i, j, k) is the d_l component of R(d_i, d_j) d_k. For the
/// interchange kinds, at(d, a, b, c) is the component of L(d_a, d_b) d_c.
struct CurvatureValue {
  CurvatureKind kind = CurvatureKind::primal;
  int m = 0;
  std::vector<double> point;
  std::vector<double> components;

  double at(int l, int i, int j, int k) const {
    return components[static_cast<std::size_t>(((l * m + i) * m + j) * m + k)];
  }
  double& at(int l, int i, int j, int k) {
    return components[static_cast<std::size_t>(((l * m + i) * m + j) * m + k)];
  }
};

/// Riemann tensor of a connection given as jets of order >= 1.
CurvatureValue riemann_from_connection(std::span<const Jet> gamma, int m);
/// Interchange tensor from a curvature by metric pairing:
/// g(L(Z,W)X, Y) = g(R(X,Y)Z, W).
CurvatureValue interchange_from(const CurvatureValue& r, std::span<const double> g, std::span<const double> ginv);

CurvatureValue curvature(const LocalTensors& t, CurvatureKind kind);
CurvatureValue curvature(const StatStructure& s, CurvatureKind kind, std::span<const double> p);

struct IdentityResidual {
  std::string name;
  double residual = 0.0;
  bool asserted = true;  // false for identities that only hold under a hypothesis
};

struct IdentityReport {
  std::vector<double> point;
  double tolerance = 0.0;
  bool conjugate_symmetric = false;
  std::vector<IdentityResidual> residuals;
  bool pass() const;
};

/// Residuals of the curvature identities (duality of R and R-bar, the
/// mean-curvature decomposition, the interchange identities and, asserted
/// only under conjugate symmetry, pair symmetry of R).
IdentityReport check_curvature_identities(const StatStructure& s, std::span<const double> p, double tol = 1e-7);

/// L(Z,W)X = g(SX,W)Z - g(X,Z)SW for a g-symmetric operator S (S[i*m+j] =
/// S^i_j). Throws Error if S is not g-symmetric.
CurvatureValue space_form_interchange(std::span<const double> S, std::span<const double> g, int m,
                                      std::span<const double> point = {});

// ---------------------------------------------------------------------------
// Tchebychev objects, divergence, Laplacians

struct TchebychevValue {
  std::vector<double> trK;  // tr_g K
  std::vector<double> T;    // trK / m
  std::vector<double> T_op; // (nabla^g T)^i_j, row-major
};

/// tr_g K as jets of order order(K).
std::vector<Jet> trace_K(const LocalTensors& t);
TchebychevValue tchebychev(const StatStructure& s, std::span<const double> p);

/// div^g (tr_g K) at the point of `t` (needs order >= 2).
double div_trK(const LocalTensors& t);

enum class DivergenceKind { nabla_primal, nabla_conjugate, levi_civita, theta_volume };
std::string to_string(DivergenceKind k);

/// Divergence of the vector field with components X[i] (jets of order >= 1
/// at the point of `t`).
double divergence(const LocalTensors& t, std::span<const Jet> X, DivergenceKind kind);
double divergence(const StatStructure& s, std::span<const ExpressionField> X, DivergenceKind kind,
                  std::span<const double> p);

enum class LaplacianKind { primal, conjugate, riemannian };
std::string to_string(LaplacianKind k);

/// Laplacian of a scalar given as a jet of order >= 2 at the point of `t`.
double laplacian_scalar(const LocalTensors& t, const Jet& f, LaplacianKind kind);
double laplacian_scalar(const StatStructure& s, const ExpressionField& f, LaplacianKind kind,
                        std::span<const double> p);

struct RicciValue {
  int m = 0;
  std::vector<double> ric, ric_bar, ric_g;  // row-major m x m, Ric(Y,Z) = tr(X -> R(X,Y)Z)
  CurvatureValue U;                          // 2 R^g - R
  double min_U_sectional = 0.0;              // over 64 fixed-seed g-orthonormal planes
  double min_eig_ricci_combination = 0.0;    // of sym(Ric - Ric-bar - 2 Ric_g) relative to g
};

/// Ricci contractions, U = 2R^g - R and the two sign probes. The plane
/// sample is a fixed pseudo-random set, not a certified minimum.
RicciValue ricci_and_U(const StatStructure& s, std::span<const double> p, std::uint64_t seed = 17);

// ---------------------------------------------------------------------------
// Validation

struct FlagResult {
  std::string name;
  bool ok = true;
  double residual = 0.0;
  std::vector<double> worst_point;
};

struct StructureReport {
  double tolerance = 0.0;
  double min_eigenvalue = 0.0;
  std::vector<FlagResult> flags;  // torsion_free, codazzi, spd, conjugate_symmetric, trace_free
  const FlagResult& flag(const std::string& name) const;
};

StructureReport validate(const StatStructure& s, const std::vector<std::vector<double>>& probes, double tol = 1e-9);

}  // namespace statgeo
