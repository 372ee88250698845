#pragma once

#include <span>
#include <string>
#include <vector>

#include "statgeo/structure.hpp"

namespace statgeo {

/// Closed-form map u between statistical manifolds, components u^alpha
/// expressed in the source coordinates.
class SmoothMap {
 public:
  SmoothMap(StatStructure source, StatStructure target, std::vector<ExpressionField> components);

  const StatStructure& source() const { return source_; }
  const StatStructure& target() const { return target_; }
  const std::vector<ExpressionField>& components() const { return components_; }
  int m() const { return source_.dim(); }
  int n() const { return target_.dim(); }

  /// u(p); throws DomainError naming p if the image leaves the target chart.
  std::vector<double> image(std::span<const double> p) const;

 private:
  StatStructure source_;
  StatStructure target_;
  std::vector<ExpressionField> components_;
};

/// Tension and bi-tension at a point, in target coordinates, with the four
/// terms of the bi-tension kept for inspection:
/// tau2 = delta_bar_tau + div_trK_term - L_term - K_term.
struct TensionValue {
  std::vector<double> point;
  std::vector<double> image;
  std::vector<double> tau;
  std::vector<double> tau2;
  std::vector<double> delta_bar_tau;
  std::vector<double> div_trK_term;
  std::vector<double> L_term;
  std::vector<double> K_term;
};

/// g^{ij}(d_ij u - Gamma^M{}^k_ij d_k u + Gamma^N(u)(d_i u, d_j u)).
std::vector<double> tension(const SmoothMap& u, std::span<const double> p);

/// Statistical bi-tension field with all four terms.
TensionValue bitension(const SmoothMap& u, std::span<const double> p);

/// Bi-tension in the simplified form valid for trace-free sources and
/// conjugate symmetric targets: Laplacian term - R^N term - K^N term.
std::vector<double> bitension_simplified(const SmoothMap& u, std::span<const double> p);

/// Classical bi-tension computed with the Levi-Civita connections of both
/// metrics only: rough Laplacian of tau - trace R^N(du, tau) du.
std::vector<double> bitension_riemannian(const SmoothMap& u, std::span<const double> p);

/// Curves from an interval with the Euclidean structure:
/// tau2 = nbar nbar A - L(c', A) c' - K(A, A), A = nabla_c' c'.
TensionValue curve_bitension(const SmoothMap& c, double t);

struct BiharmonicReport {
  int probes = 0;
  double tolerance = 0.0;
  double max_tau = 0.0;   // in the target metric
  double max_tau2 = 0.0;
  std::vector<double> worst_tau_point;
  std::vector<double> worst_tau2_point;
  bool is_harmonic = false;
  bool is_statistical_biharmonic = false;
};

/// Sweeps the probes in parallel (OpenMP); results are independent of the
/// thread count.
BiharmonicReport check_biharmonic(const SmoothMap& u, const std::vector<std::vector<double>>& probes,
                                  double tol = 1e-7);
/// Sequential reference for check_biharmonic.
BiharmonicReport check_biharmonic_serial(const SmoothMap& u, const std::vector<std::vector<double>>& probes,
                                         double tol = 1e-7);

/// Divergence identity for X = sum_i h(u_* e_i, tau) e_i taken with a
/// nabla-bar parallel volume form theta:
/// div^theta X = |tau|^2 + sum_i h(u_* e_i, nbar^u_{e_i} tau).
struct Lemma51Value {
  double div_theta_X = 0.0;
  double tau_norm_sq = 0.0;
  double correction = 0.0;  // sum_i h(u_* e_i, nbar^u_{e_i} tau); zero when tau is nbar-parallel
  double residual() const;
};

/// Throws UnsupportedStructure if the source has no local nabla-bar
/// parallel volume form (the 1-form Gamma-bar^i_{ij} dx^j is not closed).
Lemma51Value lemma51_integrand(const SmoothMap& u, std::span<const double> p);

}  // namespace statgeo
