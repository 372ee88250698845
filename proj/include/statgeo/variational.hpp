#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "statgeo/errors.hpp"
#include "statgeo/lattice.hpp"
#include "statgeo/maps.hpp"
#include "statgeo/structure.hpp"

namespace statgeo {

/// Node loops run with OpenMP (parallel) or as a plain loop (serial). Both
/// give bitwise identical results: reductions are summed in node order.
enum class Exec { serial, parallel };

/// Closed-form source data at every lattice node (metric inverse, primal and
/// conjugate symbols, sqrt det g, div^g tr_g K).
struct SourceGrid {
  int m = 0;
  std::vector<double> ginv, gamma, gamma_bar, sqrt_det_g, div_trK;
};

SourceGrid source_grid(const StatStructure& s, const Lattice& lattice, Exec exec = Exec::parallel);

/// Map from a flat-torus source to a target, sampled on a lattice. values
/// holds n target coordinates per node.
class GridMap {
 public:
  GridMap(StatStructure source, StatStructure target, Lattice lattice, std::vector<double> values);

  /// Samples closed-form components at the lattice nodes.
  static GridMap sample(const SmoothMap& u, std::vector<int> resolution);

  const StatStructure& source() const { return source_; }
  const StatStructure& target() const { return target_; }
  const Lattice& lattice() const { return lattice_; }
  int m() const { return source_.dim(); }
  int n() const { return target_.dim(); }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> value(std::size_t node) const;

  const SourceGrid& geometry() const { return *geometry_; }

  /// Same source, target and lattice with new node values.
  GridMap with_values(std::vector<double> values) const;

  /// Throws DomainError naming the source node whose value leaves the target.
  void check_domain() const;

 private:
  StatStructure source_;
  StatStructure target_;
  Lattice lattice_;
  std::vector<double> values_;
  std::shared_ptr<const SourceGrid> geometry_;
};

/// Lattice matching the periods of a torus structure.
Lattice torus_lattice(const StatStructure& s, std::vector<int> resolution);

/// sum_k f(x_k) sqrt(det g(x_k)) * cell volume. Throws Error for non-torus
/// sources.
double integrate(const StatStructure& s, const Lattice& lattice, std::span<const double> f, Exec exec = Exec::parallel);
double integrate(const StatStructure& s, const ExpressionField& f, std::vector<int> resolution,
                 Exec exec = Exec::parallel);

/// tau(u) per node (n values per node), 4th-order central differences.
std::vector<double> grid_tension(const GridMap& u, Exec exec = Exec::parallel);
/// 1/2 int |tau(u)|_h^2 dmu_g.
double bienergy(const GridMap& u, Exec exec = Exec::parallel);
/// tau2(u) per node; the outer conjugate Laplacian uses the same 4th-order
/// stencils as tau.
std::vector<double> grid_bitension(const GridMap& u, Exec exec = Exec::parallel);

/// Green's formula probe: int div^g X dmu_g for a closed-form field X.
double green_integral(const StatStructure& s, std::span<const ExpressionField> X, std::vector<int> resolution);

struct AdjointnessReport {
  double lhs = 0.0;       // int <Delta xi, eta>
  double rhs = 0.0;       // int <xi, Delta-bar eta>
  double div_term = 0.0;  // int div^g(tr_g K) <xi, eta>
  double delta = 0.0;     // |lhs - rhs - div_term|
};

/// Laplacian adjoint identity for sections xi, eta of a trivial bundle of
/// rank r (r values per node, flat connection, Euclidean fibre metric),
/// with spectral lattice derivatives.
AdjointnessReport adjointness_check(const StatStructure& s, const Lattice& lattice, std::span<const double> xi,
                                    std::span<const double> eta, int rank = 1);

struct VariationReport {
  double lhs = 0.0;  // Richardson-extrapolated central difference of E2 along V
  double rhs = 0.0;  // int <V, tau2(u)>_h dmu_g
  double abs_error = 0.0;
  double rel_error = 0.0;  // abs_error / max(|lhs|, |rhs|), 0 when both vanish
  bool pass(double rel_tol = 1e-4, double abs_tol = 1e-8) const;
};

/// First variation of E2 at u in the direction V (n values per node).
VariationReport first_variation_check(const GridMap& u, std::span<const double> V, double t_step = 1e-3);

struct SolverConfig {
  std::vector<int> resolution{64};
  int max_iter = 5000;
  double step = 0.1;
  double tol = 1e-4;
  std::uint64_t seed = 7;
};

/// {"resolution": [64], "max_iter": 5000, "step": 0.1, "tol": 1e-4, "seed": 7};
/// omitted keys keep their defaults.
SolverConfig load_solver_config(const nlohmann::json& doc);

struct SolveReport {
  int iterations = 0;
  std::vector<double> energy;      // E2 before the first and after every accepted step
  std::vector<double> steps;       // accepted step sizes
  double max_tau2 = 0.0;           // final max |tau2|_h over nodes
  std::string termination;         // "tolerance met" or "max iterations"
};

nlohmann::json to_json(const SolveReport& r);

/// Line search exhausted its 40 halvings without decreasing E2.
class StagnationError : public Error {
 public:
  StagnationError(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

struct SolveResult {
  GridMap map;
  SolveReport report;
};

/// Gradient descent u <- u - eta tau2(u) with backtracking on E2 (eta reset
/// to config.step each iteration, halved until the Armijo condition with
/// constant 1e-4 holds and E2 strictly decreases).
SolveResult minimize(const GridMap& u0, const SolverConfig& config, Exec exec = Exec::parallel);

/// Lattice dimensions, periods and node values with round-trip precision.
nlohmann::json grid_to_json(const GridMap& u);
/// Inverse of grid_to_json; source and target may be builtin names or
/// manifold documents. Throws SchemaError on malformed documents.
GridMap grid_from_json(const nlohmann::json& doc);

}  // namespace statgeo
