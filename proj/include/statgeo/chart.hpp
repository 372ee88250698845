#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "statgeo/expression.hpp"

namespace statgeo {

/// Strict linear inequality a . x < bound on chart coordinates.
struct LinearConstraint {
  std::vector<double> coefficients;
  double bound = 0.0;
};

/// Coordinate domain: an open box, optionally cut by linear constraints, or
/// a flat torus.
class Domain {
 public:
  enum class Kind { box, torus };

  static Domain box(std::vector<std::pair<double, double>> intervals,
                    std::vector<LinearConstraint> constraints = {});
  static Domain torus(std::vector<double> periods);

  Kind kind() const { return kind_; }
  bool is_torus() const { return kind_ == Kind::torus; }
  int dim() const { return static_cast<int>(kind_ == Kind::torus ? periods_.size() : intervals_.size()); }
  const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }
  const std::vector<double>& periods() const { return periods_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }

  /// Box: strictly inside the box and every constraint. Torus: always.
  bool contains(std::span<const double> p) const;
  /// Torus coordinates reduced to [0, period); box points unchanged.
  std::vector<double> reduce(std::span<const double> p) const;

  /// Deterministic low-discrepancy probe points (Halton, prime bases).
  /// `seed` offsets the start of the sequence. Constrained boxes use
  /// rejection along the same sequence.
  std::vector<std::vector<double>> probes(int count, std::uint64_t seed = 0) const;

 private:
  Kind kind_ = Kind::box;
  std::vector<std::pair<double, double>> intervals_;
  std::vector<double> periods_;
  std::vector<LinearConstraint> constraints_;
};

double halton(std::uint64_t index, int base);

enum class ConnectionKind { levi_civita, christoffel, difference_tensor };

std::string to_string(ConnectionKind k);

/// Coordinate chart with metric and connection given by expressions.
///
/// Connection arrays are indexed [k][i][j] for Gamma^k_{ij} or K^k_{ij},
/// flattened as k*m*m + i*m + j.
class ChartManifold {
 public:
  ChartManifold(std::string name, std::vector<std::string> coords, Domain domain,
                std::vector<ExpressionField> metric, ConnectionKind kind,
                std::vector<ExpressionField> connection);

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(coords_->size()); }
  const std::vector<std::string>& coordinates() const { return *coords_; }
  const std::shared_ptr<const std::vector<std::string>>& coordinates_ptr() const { return coords_; }
  const Domain& domain() const { return domain_; }
  const ExpressionField& metric(int i, int j) const { return metric_[static_cast<std::size_t>(i * dim() + j)]; }
  const std::vector<ExpressionField>& metric() const { return metric_; }
  ConnectionKind connection_kind() const { return kind_; }
  /// Gamma^k_{ij} or K^k_{ij}; empty for levi_civita.
  const std::vector<ExpressionField>& connection() const { return connection_; }
  const ExpressionField& connection(int k, int i, int j) const {
    const int m = dim();
    return connection_[static_cast<std::size_t>((k * m + i) * m + j)];
  }

  /// Symmetry of g and of the lower connection indices, on the expressions
  /// (structural identity, otherwise numeric agreement at `probe_points`).
  void check_symmetry(const std::vector<std::vector<double>>& probe_points) const;
  /// Throws SpdError at the worst probe if g is not positive definite.
  void check_spd(const std::vector<std::vector<double>>& probe_points) const;
  /// Torus only: f(x + period e_a) == f(x) for every expression, 16 points
  /// per axis, tolerance 1e-9.
  void check_periodicity(double tol = 1e-9) const;

 private:
  std::string name_;
  std::shared_ptr<const std::vector<std::string>> coords_;
  Domain domain_;
  std::vector<ExpressionField> metric_;
  ConnectionKind kind_;
  std::vector<ExpressionField> connection_;
};

struct ChartOptions {
  int probes = 32;
  std::uint64_t seed = 0;
};

/// Builds a chart from a manifold document and runs the symmetry, SPD and
/// (for tori) periodicity checks.
ChartManifold load_chart(const nlohmann::json& doc, const ChartOptions& opts = {});
/// Runs the same checks on an already assembled chart.
void validate_chart(const ChartManifold& chart, const ChartOptions& opts = {});

/// The chart of the conjugate connection, built symbolically:
/// Gamma-bar = 2 Gamma^g - Gamma for christoffel charts, K -> -K for
/// difference-tensor charts, unchanged for levi_civita. The symbolic metric
/// inverse uses cofactors and is limited to dimension 4.
ChartManifold conjugate_chart(const ChartManifold& chart);

/// Smallest eigenvalue of the symmetric matrix `a` (row-major, m x m).
double min_eigenvalue(std::span<const double> a, int m);

}  // namespace statgeo
