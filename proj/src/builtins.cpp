#include "statgeo/builtins.hpp"

#include <array>
#include <map>
#include <numbers>

#include "statgeo/errors.hpp"
#include "statgeo/simplex.hpp"

namespace statgeo {

namespace {

using Sparse = std::map<std::array<int, 3>, std::string>;

ChartManifold make_chart(std::string name, const std::vector<std::string>& coords, Domain domain,
                         const std::vector<std::string>& metric, ConnectionKind kind, const Sparse& conn) {
  auto cptr = std::make_shared<const std::vector<std::string>>(coords);
  const int m = static_cast<int>(coords.size());
  std::vector<ExpressionField> g;
  for (const auto& t : metric) g.push_back(ExpressionField::parse(t, cptr));
  std::vector<ExpressionField> c;
  if (kind != ConnectionKind::levi_civita) {
    c.assign(static_cast<std::size_t>(m * m * m), ExpressionField::constant(0.0, cptr));
    for (const auto& [idx, text] : conn) {
      c[static_cast<std::size_t>((idx[0] * m + idx[1]) * m + idx[2])] = ExpressionField::parse(text, cptr);
    }
  }
  return ChartManifold(std::move(name), coords, std::move(domain), std::move(g), kind, std::move(c));
}

std::vector<std::string> identity_metric(int m) {
  std::vector<std::string> g;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) g.emplace_back(i == j ? "1" : "0");
  }
  return g;
}

int parse_dim(const std::string& text, const std::string& full) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || v < 1) throw SchemaError("bad dimension in builtin name '" + full + "'");
  return v;
}

std::string strip_prefix(const std::string& name) {
  const std::string prefix = "builtin:";
  return name.rfind(prefix, 0) == 0 ? name.substr(prefix.size()) : name;
}

}  // namespace

std::vector<std::string> euclidean_coordinates(int m) {
  if (m == 1) return {"t"};
  if (m <= 3) {
    const std::vector<std::string> xyz{"x", "y", "z"};
    return {xyz.begin(), xyz.begin() + m};
  }
  std::vector<std::string> c;
  for (int i = 1; i <= m; ++i) c.push_back("x" + std::to_string(i));
  return c;
}

ChartManifold euclidean_chart(int m, double half_width) {
  std::vector<std::pair<double, double>> iv(static_cast<std::size_t>(m), {-half_width, half_width});
  return make_chart("euclidean:" + std::to_string(m), euclidean_coordinates(m), Domain::box(iv),
                    identity_metric(m), ConnectionKind::levi_civita, {});
}

ChartManifold geost_chart() {
  return make_chart("geost", {"x", "y"}, Domain::box({{-3.0, 3.0}, {-3.0, 3.0}}), identity_metric(2),
                    ConnectionKind::christoffel, {{{0, 0, 0}, "1"}, {{1, 1, 1}, "1"}});
}

ChartManifold sphere_chart() {
  return make_chart("sphere", {"theta", "phi"}, Domain::box({{0.2, 2.9}, {-3.0, 3.0}}),
                    {"1", "0", "0", "sin(theta)^2"}, ConnectionKind::levi_civita, {});
}

ChartManifold flat_torus_chart(int m) {
  const auto coords = m == 1 ? std::vector<std::string>{"x"} : euclidean_coordinates(m);
  return make_chart("torus:" + std::to_string(m), coords,
                    Domain::torus(std::vector<double>(static_cast<std::size_t>(m), 2.0 * std::numbers::pi)),
                    identity_metric(m), ConnectionKind::levi_civita, {});
}

ChartManifold stat_torus_chart(int m) {
  const double P = 2.0 * std::numbers::pi;
  if (m == 1) {
    return make_chart("stat-torus:1", {"x"}, Domain::torus({P}), {"1 + 0.25*sin(x)"},
                      ConnectionKind::difference_tensor, {{{0, 0, 0}, "0.4*cos(x)"}});
  }
  if (m == 2) {
    // g = I, so K^i_jk = C_ijk with C totally symmetric
    const std::string c111 = "0.3*sin(x)", c112 = "0.2*cos(y)", c122 = "0.1*sin(x + y)", c222 = "0.25*cos(x)";
    Sparse k{{{0, 0, 0}, c111}, {{0, 0, 1}, c112}, {{0, 1, 0}, c112}, {{0, 1, 1}, c122},
             {{1, 0, 0}, c112}, {{1, 0, 1}, c122}, {{1, 1, 0}, c122}, {{1, 1, 1}, c222}};
    return make_chart("stat-torus:2", {"x", "y"}, Domain::torus({P, P}), identity_metric(2),
                      ConnectionKind::difference_tensor, k);
  }
  throw SchemaError("stat-torus is available for m = 1, 2");
}

GraphHypersurface builtin_hypersurface(const std::string& raw) {
  const std::string name = strip_prefix(raw);
  if (name.rfind("paraboloid:", 0) == 0) {
    const int m = parse_dim(name.substr(11), name);
    const auto coords = euclidean_coordinates(m);
    std::string F = "0.5*(";
    for (int i = 0; i < m; ++i) F += (i ? " + " : "") + coords[static_cast<std::size_t>(i)] + "^2";
    F += ")";
    std::vector<std::pair<double, double>> iv(static_cast<std::size_t>(m), {-2.0, 2.0});
    return GraphHypersurface(name, ExpressionField::parse(F, coords), Domain::box(iv));
  }
  if (name == "ellipse") {
    return GraphHypersurface(name, ExpressionField::parse("-sqrt(1 - t^2)", {"t"}), Domain::box({{-0.9, 0.9}}));
  }
  if (name == "sphere-cap") {
    return GraphHypersurface(name, ExpressionField::parse("-sqrt(1 - x^2 - y^2)", {"x", "y"}),
                             Domain::box({{-0.6, 0.6}, {-0.6, 0.6}}));
  }
  if (name == "exp-graph") {
    return GraphHypersurface(name, ExpressionField::parse("exp(t)", {"t"}), Domain::box({{-1.0, 1.0}}));
  }
  throw SchemaError("unknown hypersurface '" + raw + "'");
}

StatStructure builtin_structure(const std::string& raw) {
  const std::string name = strip_prefix(raw);
  auto suffix_dim = [&](const std::string& prefix) { return parse_dim(name.substr(prefix.size()), name); };
  if (name == "geost") return build_structure(geost_chart());
  if (name == "sphere") return build_structure(sphere_chart());
  if (name.rfind("euclidean:", 0) == 0) return build_structure(euclidean_chart(suffix_dim("euclidean:")));
  if (name.rfind("torus:", 0) == 0) return build_structure(flat_torus_chart(suffix_dim("torus:")));
  if (name.rfind("stat-torus:", 0) == 0) return build_structure(stat_torus_chart(suffix_dim("stat-torus:")));
  if (name.rfind("simplex:", 0) == 0) {
    const auto rest = name.substr(8);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw SchemaError("simplex builtin needs a connection: '" + raw + "'");
    std::string dim = rest.substr(0, colon);
    if (dim.rfind("n=", 0) == 0) dim = dim.substr(2);
    const std::string conn = rest.substr(colon + 1);
    SimplexConnection c;
    if (conn == "mixture") {
      c = SimplexConnection::mixture;
    } else if (conn == "exponential") {
      c = SimplexConnection::exponential;
    } else {
      throw SchemaError("unknown simplex connection '" + conn + "'");
    }
    return simplex_structure(parse_dim(dim, name), c);
  }
  if (name.rfind("paraboloid:", 0) == 0 || name == "ellipse" || name == "sphere-cap" || name == "exp-graph") {
    return induced_structure(builtin_hypersurface(name));
  }
  throw SchemaError("unknown builtin '" + raw + "'");
}

std::vector<std::string> builtin_names() {
  return {"geost",         "euclidean:m",  "sphere",     "torus:m",   "stat-torus:1",     "stat-torus:2",
          "simplex:n:mixture", "simplex:n:exponential", "paraboloid:m", "ellipse", "sphere-cap", "exp-graph"};
}

StatStructure load_structure(const nlohmann::json& spec, const ChartOptions& opts) {
  if (spec.is_string()) return builtin_structure(spec.get<std::string>());
  if (!spec.is_object()) throw SchemaError("structure spec must be a builtin name or a manifold document");
  if (spec.contains("graph")) return induced_structure(load_hypersurface(spec));
  return build_structure(load_chart(spec, opts), BuildOptions{opts.probes, opts.seed});
}

SmoothMap load_map(const nlohmann::json& doc, const ChartOptions& opts) {
  try {
    StatStructure source = load_structure(doc.at("source"), opts);
    StatStructure target = load_structure(doc.at("target"), opts);
    std::vector<ExpressionField> comps;
    const auto cptr = std::make_shared<const std::vector<std::string>>(source.coordinates());
    for (const auto& c : doc.at("components")) comps.push_back(ExpressionField::parse(c.get<std::string>(), cptr));
    return SmoothMap(std::move(source), std::move(target), std::move(comps));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed map spec: ") + e.what());
  }
}

}  // namespace statgeo
