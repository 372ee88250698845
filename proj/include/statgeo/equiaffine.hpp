#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "statgeo/structure.hpp"

namespace statgeo {

/// Graph immersion f(x) = (x, F(x)) of a domain in R^m into R^(m+1).
class GraphHypersurface {
 public:
  GraphHypersurface(std::string name, ExpressionField F, Domain domain);

  const std::string& name() const { return name_; }
  int dim() const { return F_.arity(); }
  const ExpressionField& F() const { return F_; }
  const Domain& domain() const { return domain_; }
  const std::vector<std::string>& coordinates() const { return F_.coordinates(); }

  /// Throws DomainError if Hess F is not positive definite at a probe point.
  void check_convexity(int probes = 32) const;

 private:
  std::string name_;
  ExpressionField F_;
  Domain domain_;
};

/// {"dimension": m, "graph": "0.5*(x^2+y^2)", "domain": [[-1,1],[-1,1]],
///  "coordinates": [...] (optional)}
GraphHypersurface load_hypersurface(const nlohmann::json& doc);

/// Blaschke data at a point. Vectors in R^(m+1) have m+1 entries; matrices
/// are row-major m x m; S[i*m+j] = S^i_j; gamma[(k*m+i)*m+j] = Gamma^k_{ij}.
struct EquiaffineStructure {
  int m = 0;
  std::vector<double> point;
  double lambda = 0.0;          // (det Hess F)^(1/(m+2))
  std::vector<double> xi;       // Blaschke normal
  std::vector<double> h;        // affine metric
  std::vector<double> gamma;    // induced connection
  std::vector<double> S;        // affine shape operator
  std::vector<double> tau1;     // connection form of the scaled transversal lambda e_(m+1)
};

struct EquiaffineChecks {
  double decomposition = 0.0;  // D_X f_*Y - f_*nabla_X Y - h(X,Y) xi
  double equiaffine = 0.0;     // transversal component of D_X xi
  double volume = 0.0;         // vol_h(d_1..d_m) - det(f_*d_1, ..., f_*d_m, xi)
  double apolarity = 0.0;      // |tr_h K|
  double gauss = 0.0;          // R(X,Y)Z - h(Y,Z)SX + h(X,Z)SY
  double max() const;
};

/// Blaschke normal, affine metric, induced connection and shape operator.
/// Throws DomainError if Hess F is not positive definite at p.
EquiaffineStructure blaschke(const GraphHypersurface& hs, std::span<const double> p);

/// The five defining conditions evaluated independently of blaschke().
EquiaffineChecks equiaffine_checks(const GraphHypersurface& hs, std::span<const double> p);

enum class AffineClass { improper_sphere, affine_minimal, generic };
std::string to_string(AffineClass c);

struct AffineInvariants {
  double trS = 0.0;
  std::vector<double> tr_h_nabla_S;  // m-vector: h^{kj} (nabla_k S)^i_j
  double max_abs_S = 0.0;
  AffineClass classification = AffineClass::generic;
};

AffineInvariants affine_invariants(const GraphHypersurface& hs, std::span<const double> p, double tol = 1e-9);
/// Classification over a probe set: improper_sphere if S vanishes at every
/// probe, affine_minimal if trS does, generic otherwise.
AffineClass classify(const GraphHypersurface& hs, const std::vector<std::vector<double>>& probes, double tol = 1e-9);

/// Shape operator recovered from the induced curvature via the Gauss
/// equation (m >= 2): trS = scal / (m - 1), S = trS id - Ric^sharp.
std::vector<double> shape_from_curvature(const StatStructure& induced, std::span<const double> p);

/// (h, nabla) of the graph as a statistical structure on its domain.
StatStructure induced_structure(const GraphHypersurface& hs);

struct HypersurfaceBitension {
  std::vector<double> tau;           // m xi
  std::vector<double> tau_direct;    // general tension pipeline
  std::vector<double> tau2_formula;  // -m f_*(tr_h nabla S) - m trS xi
  std::vector<double> tau2_direct;   // general bitension pipeline
};

HypersurfaceBitension hypersurface_bitension(const GraphHypersurface& hs, std::span<const double> p);

}  // namespace statgeo
