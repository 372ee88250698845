#pragma once

#include <span>
#include <string>
#include <vector>

#include "statgeo/structure.hpp"

namespace statgeo {

enum class SimplexConnection { mixture, exponential };

std::string to_string(SimplexConnection c);

/// Fisher metric of the open probability simplex in the coordinates
/// p(1), ..., p(n); p(n+1) = 1 - sum. Row-major n x n. Throws DomainError
/// outside the open simplex.
std::vector<double> fisher_metric(int n, std::span<const double> p);
/// The dual pairing -p(i)p(j) + delta_ij p(i), i.e. the inverse Fisher metric.
std::vector<double> fisher_inverse(int n, std::span<const double> p);

/// Chart on the open simplex with the Fisher metric. The mixture connection
/// has vanishing symbols; the exponential one is generated from it by
/// symbolic conjugation.
ChartManifold simplex_chart(int n, SimplexConnection conn);
StatStructure simplex_structure(int n, SimplexConnection conn);

struct SimplexInvariants {
  int n = 0;
  std::vector<double> point;
  std::vector<double> K_pairing_closed;   // g(K(d_i, d_j), d_k), n^3, exponential primal
  std::vector<double> K_pairing_numeric;
  std::vector<double> trK_closed;
  std::vector<double> trK_numeric;
  double div_trK_closed = 0.0;
  double div_trK_numeric = 0.0;
  double K_pairing_delta = 0.0;  // max |numeric - closed| / max(1, |closed|)
  double trK_delta = 0.0;
  double div_trK_relative_delta = 0.0;
};

/// Closed forms for the exponential structure next to the values computed
/// by the general pipeline.
SimplexInvariants simplex_invariants(const StatStructure& exponential, std::span<const double> p);
SimplexInvariants simplex_invariants(int n, std::span<const double> p);

/// Sectional curvature of the plane spanned by d_i, d_j under the given
/// curvature kind.
double sectional_curvature(const StatStructure& s, std::span<const double> p, int i, int j,
                           CurvatureKind kind = CurvatureKind::levi_civita);

}  // namespace statgeo
