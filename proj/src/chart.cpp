#include "statgeo/chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "statgeo/errors.hpp"

namespace statgeo {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : key) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int coord_index(const std::vector<std::string>& coords, const std::string& name, const std::string& key) {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] == name) return static_cast<int>(i);
  }
  throw SchemaError("tensor key '" + key + "' names unknown coordinate '" + name + "'");
}

std::string expr_text(const nlohmann::json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  throw SchemaError(where + " must be an expression string or a number");
}

ExpressionField parse_field(const nlohmann::json& v, const std::shared_ptr<const std::vector<std::string>>& coords,
                            const std::string& where) {
  const std::string text = expr_text(v, where);
  try {
    return ExpressionField::parse(text, coords);
  } catch (const SyntaxError& e) {
    throw SyntaxError(where + ": " + e.what(), e.offset());
  }
}

bool fields_agree(const ExpressionField& a, const ExpressionField& b,
                  const std::vector<std::vector<double>>& probe_points) {
  if (structurally_equal(a, b)) return true;
  for (const auto& p : probe_points) {
    const double x = a.evaluate(p);
    const double y = b.evaluate(p);
    if (std::abs(x - y) > 1e-12 * std::max({1.0, std::abs(x), std::abs(y)})) return false;
  }
  return true;
}

}  // namespace

double halton(std::uint64_t index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
  }
  return r;
}

Domain Domain::box(std::vector<std::pair<double, double>> intervals, std::vector<LinearConstraint> constraints) {
  for (const auto& [lo, hi] : intervals) {
    if (!(lo < hi)) throw SchemaError("box interval must satisfy lo < hi");
  }
  for (const auto& c : constraints) {
    if (c.coefficients.size() != intervals.size()) throw SchemaError("constraint has wrong dimension");
  }
  Domain d;
  d.kind_ = Kind::box;
  d.intervals_ = std::move(intervals);
  d.constraints_ = std::move(constraints);
  return d;
}

Domain Domain::torus(std::vector<double> periods) {
  for (double p : periods) {
    if (!(p > 0.0)) throw SchemaError("torus periods must be positive");
  }
  Domain d;
  d.kind_ = Kind::torus;
  d.periods_ = std::move(periods);
  return d;
}

bool Domain::contains(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim()) return false;
  if (kind_ == Kind::torus) {
    return std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > intervals_[i].first && p[i] < intervals_[i].second)) return false;
  }
  for (const auto& c : constraints_) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += c.coefficients[i] * p[i];
    if (!(s < c.bound)) return false;
  }
  return true;
}

std::vector<double> Domain::reduce(std::span<const double> p) const {
  std::vector<double> out(p.begin(), p.end());
  if (kind_ == Kind::torus) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = std::fmod(out[i], periods_[i]);
      if (out[i] < 0.0) out[i] += periods_[i];
    }
  }
  return out;
}

std::vector<std::vector<double>> Domain::probes(int count, std::uint64_t seed) const {
  const int m = dim();
  if (m > static_cast<int>(std::size(kPrimes))) throw Error("probe dimension too large");
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(count));
  std::uint64_t index = seed * 1000003ULL + 1;
  const std::uint64_t limit = index + 1000ULL * static_cast<std::uint64_t>(count) + 1000;
  while (static_cast<int>(out.size()) < count) {
    if (index > limit) throw Error("probe rejection sampling did not find enough interior points");
    std::vector<double> p(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      const double h = halton(index, kPrimes[a]);
      if (kind_ == Kind::torus) {
        p[static_cast<std::size_t>(a)] = h * periods_[static_cast<std::size_t>(a)];
      } else {
        const auto [lo, hi] = intervals_[static_cast<std::size_t>(a)];
        p[static_cast<std::size_t>(a)] = lo + (hi - lo) * h;
      }
    }
    ++index;
    if (contains(p)) out.push_back(std::move(p));
  }
  return out;
}

std::string to_string(ConnectionKind k) {
  switch (k) {
    case ConnectionKind::levi_civita: return "levi_civita";
    case ConnectionKind::christoffel: return "christoffel";
    case ConnectionKind::difference_tensor: return "difference_tensor";
  }
  return "unknown";
}

ChartManifold::ChartManifold(std::string name, std::vector<std::string> coords, Domain domain,
                             std::vector<ExpressionField> metric, ConnectionKind kind,
                             std::vector<ExpressionField> connection)
    : name_(std::move(name)),
      coords_(std::make_shared<const std::vector<std::string>>(std::move(coords))),
      domain_(std::move(domain)),
      metric_(std::move(metric)),
      kind_(kind),
      connection_(std::move(connection)) {
  const auto m = static_cast<std::size_t>(dim());
  if (m == 0) throw SchemaError("dimension must be positive");
  if (domain_.dim() != static_cast<int>(m)) throw SchemaError("topology dimension does not match coordinates");
  if (metric_.size() != m * m) throw SchemaError("metric must be an m x m array");
  if (kind_ == ConnectionKind::levi_civita) {
    if (!connection_.empty()) throw SchemaError("levi_civita connection takes no components");
  } else if (connection_.size() != m * m * m) {
    throw SchemaError("connection must have m^3 components");
  }
}

void ChartManifold::check_symmetry(const std::vector<std::vector<double>>& probe_points) const {
  const int m = dim();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (!fields_agree(metric(i, j), metric(j, i), probe_points)) {
        throw SymmetryError("metric is not symmetric: g(" + coordinates()[i] + "," + coordinates()[j] + ") = " +
                            metric(i, j).to_string() + " but g(" + coordinates()[j] + "," + coordinates()[i] +
                            ") = " + metric(j, i).to_string());
      }
    }
  }
  if (kind_ == ConnectionKind::levi_civita) return;
  const char* what = kind_ == ConnectionKind::christoffel ? "christoffel symbols are not torsion-free"
                                                          : "difference tensor is not symmetric";
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        if (!fields_agree(connection(k, i, j), connection(k, j, i), probe_points)) {
          throw SymmetryError(std::string(what) + " at upper index " + coordinates()[k] + ", lower (" +
                              coordinates()[i] + "," + coordinates()[j] + ")");
        }
      }
    }
  }
}

double min_eigenvalue(std::span<const double> a, int m) {
  Eigen::MatrixXd mat(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) mat(i, j) = a[static_cast<std::size_t>(i * m + j)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void ChartManifold::check_spd(const std::vector<std::vector<double>>& probe_points) const {
  const int m = dim();
  double worst = std::numeric_limits<double>::infinity();
  std::vector<double> worst_point;
  std::vector<double> g(static_cast<std::size_t>(m * m));
  for (const auto& p : probe_points) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) g[static_cast<std::size_t>(i * m + j)] = metric(i, j).evaluate(p);
    }
    const double ev = min_eigenvalue(g, m);
    if (ev < worst) {
      worst = ev;
      worst_point = p;
    }
  }
  if (!(worst > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "metric is not positive definite at " << format_point(worst_point) << " (smallest eigenvalue " << worst
       << ")";
    throw SpdError(os.str(), worst_point, worst);
  }
}

void ChartManifold::check_periodicity(double tol) const {
  if (!domain_.is_torus()) return;
  const int m = dim();
  const auto pts = domain_.probes(16, 0);
  auto check = [&](const ExpressionField& f, const std::string& label) {
    for (int a = 0; a < m; ++a) {
      for (const auto& p : pts) {
        auto q = p;
        q[static_cast<std::size_t>(a)] += domain_.periods()[static_cast<std::size_t>(a)];
        const double x = f.evaluate(p);
        const double y = f.evaluate(q);
        if (std::abs(x - y) > tol * std::max(1.0, std::abs(x))) {
          throw PeriodicityError(label + " = " + f.to_string() + " is not periodic along " + coordinates()[a] +
                                 " (differs at " + format_point(p) + ")");
        }
      }
    }
  };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) check(metric(i, j), "g(" + coordinates()[i] + "," + coordinates()[j] + ")");
  }
  for (std::size_t n = 0; n < connection_.size(); ++n) check(connection_[n], "connection component");
}

void validate_chart(const ChartManifold& chart, const ChartOptions& opts) {
  const auto pts = chart.domain().probes(opts.probes, opts.seed);
  chart.check_symmetry(pts);
  chart.check_spd(pts);
  chart.check_periodicity();
}

namespace {

ChartManifold build_chart(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("manifold spec must be an object");
  for (const char* key : {"dimension", "coordinates", "topology", "metric", "connection"}) {
    if (!doc.contains(key)) throw SchemaError(std::string("manifold spec is missing '") + key + "'");
  }
  if (!doc["dimension"].is_number_integer()) throw SchemaError("'dimension' must be an integer");
  const int m = doc["dimension"].get<int>();
  if (m < 1 || m > kMaxJetDim) throw SchemaError("'dimension' must be between 1 and " + std::to_string(kMaxJetDim));

  std::vector<std::string> coords;
  if (!doc["coordinates"].is_array()) throw SchemaError("'coordinates' must be an array");
  for (const auto& c : doc["coordinates"]) {
    if (!c.is_string()) throw SchemaError("coordinate names must be strings");
    coords.push_back(c.get<std::string>());
  }
  if (static_cast<int>(coords.size()) != m) throw SchemaError("'coordinates' length must equal 'dimension'");
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i].empty() || !(std::isalpha(static_cast<unsigned char>(coords[i][0])) || coords[i][0] == '_')) {
      throw SchemaError("invalid coordinate identifier '" + coords[i] + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (coords[i] == coords[j]) throw SchemaError("duplicate coordinate '" + coords[i] + "'");
    }
  }

  const auto& topo = doc["topology"];
  if (!topo.is_object() || !topo.contains("kind")) throw SchemaError("'topology' must be an object with 'kind'");
  Domain domain;
  const std::string tkind = topo["kind"].get<std::string>();
  if (tkind == "box") {
    if (!topo.contains("intervals") || !topo["intervals"].is_array() || static_cast<int>(topo["intervals"].size()) != m) {
      throw SchemaError("box topology needs 'intervals' with one [lo,hi] per axis");
    }
    std::vector<std::pair<double, double>> iv;
    for (const auto& pair : topo["intervals"]) {
      if (!pair.is_array() || pair.size() != 2) throw SchemaError("interval must be [lo, hi]");
      iv.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    std::vector<LinearConstraint> cons;
    if (topo.contains("constraints")) {
      for (const auto& c : topo["constraints"]) {
        LinearConstraint lc;
        lc.coefficients = c.at("coefficients").get<std::vector<double>>();
        lc.bound = c.at("bound").get<double>();
        cons.push_back(std::move(lc));
      }
    }
    domain = Domain::box(std::move(iv), std::move(cons));
  } else if (tkind == "torus") {
    std::vector<double> periods(static_cast<std::size_t>(m), 2.0 * M_PI);
    if (topo.contains("periods")) {
      periods = topo["periods"].get<std::vector<double>>();
      if (static_cast<int>(periods.size()) != m) throw SchemaError("torus needs one period per axis");
    }
    domain = Domain::torus(std::move(periods));
  } else {
    throw SchemaError("unknown topology kind '" + tkind + "'");
  }

  auto cptr = std::make_shared<const std::vector<std::string>>(coords);
  const auto& met = doc["metric"];
  if (!met.is_array() || static_cast<int>(met.size()) != m) throw SchemaError("'metric' must be an m x m array");
  std::vector<ExpressionField> metric;
  for (int i = 0; i < m; ++i) {
    const auto& row = met[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != m) throw SchemaError("'metric' must be an m x m array");
    for (int j = 0; j < m; ++j) {
      metric.push_back(parse_field(row[static_cast<std::size_t>(j)], cptr,
                                   "metric[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
    }
  }

  const auto& conn = doc["connection"];
  if (!conn.is_object() || !conn.contains("kind")) throw SchemaError("'connection' must be an object with 'kind'");
  const std::string ckind = conn["kind"].get<std::string>();
  ConnectionKind kind;
  const char* table = nullptr;
  if (ckind == "levi_civita") {
    kind = ConnectionKind::levi_civita;
  } else if (ckind == "christoffel") {
    kind = ConnectionKind::christoffel;
    table = "gamma";
  } else if (ckind == "difference_tensor") {
    kind = ConnectionKind::difference_tensor;
    table = "k";
  } else {
    throw SchemaError("unknown connection kind '" + ckind + "'");
  }
  std::vector<ExpressionField> components;
  if (table) {
    components.assign(static_cast<std::size_t>(m * m * m), ExpressionField::constant(0.0, cptr));
    if (conn.contains(table)) {
      if (!conn[table].is_object()) throw SchemaError(std::string("'") + table + "' must be an object");
      for (const auto& [key, value] : conn[table].items()) {
        const auto parts = split_key(key);
        if (parts.size() != 3) throw SchemaError("tensor key '" + key + "' must be 'upper,lower1,lower2'");
        const int k = coord_index(coords, parts[0], key);
        const int i = coord_index(coords, parts[1], key);
        const int j = coord_index(coords, parts[2], key);
        components[static_cast<std::size_t>((k * m + i) * m + j)] =
            parse_field(value, cptr, std::string(table) + "[" + key + "]");
      }
    }
  }

  const std::string name = doc.contains("name") ? doc["name"].get<std::string>() : std::string("chart");
  return ChartManifold(name, coords, std::move(domain), std::move(metric), kind, std::move(components));
}

}  // namespace

ChartManifold load_chart(const nlohmann::json& doc, const ChartOptions& opts) {
  try {
    ChartManifold chart = build_chart(doc);
    validate_chart(chart, opts);
    return chart;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed manifold spec: ") + e.what());
  }
}

}  // namespace statgeo
