#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "statgeo/chart.hpp"
#include "statgeo/equiaffine.hpp"
#include "statgeo/maps.hpp"
#include "statgeo/structure.hpp"

namespace statgeo {

/// t for m = 1, x y z for m <= 3, x1..xm otherwise.
std::vector<std::string> euclidean_coordinates(int m);

/// R^m with g = I and the Levi-Civita connection on the box (-w, w)^m.
ChartManifold euclidean_chart(int m, double half_width = 1000.0);

/// Plane with g = I and Gamma^x_xx = Gamma^y_yy = 1, all other symbols zero.
ChartManifold geost_chart();

/// Round unit sphere in (theta, phi) with theta in (0.2, 2.9), phi in (-3, 3).
ChartManifold sphere_chart();

/// Flat torus with periods 2 pi and the Levi-Civita connection.
ChartManifold flat_torus_chart(int m);

/// Periodic non-Riemannian structures for m = 1, 2 (sin-perturbed K).
ChartManifold stat_torus_chart(int m);

/// Graph hypersurfaces: "paraboloid:m", "ellipse", "sphere-cap", "exp-graph".
GraphHypersurface builtin_hypersurface(const std::string& name);

/// Named structures: geost, euclidean:m, sphere, torus:m, stat-torus:m,
/// simplex:n:conn, simplex:n=N:conn, and the hypersurface names above
/// (their induced Blaschke structure). An optional "builtin:" prefix is
/// accepted.
StatStructure builtin_structure(const std::string& name);

std::vector<std::string> builtin_names();

/// A builtin name (string) or a manifold document (object); documents with
/// a "graph" field are read as hypersurfaces.
StatStructure load_structure(const nlohmann::json& spec, const ChartOptions& opts = {});

/// {"source": ..., "target": ..., "components": [...]}
SmoothMap load_map(const nlohmann::json& doc, const ChartOptions& opts = {});

}  // namespace statgeo
