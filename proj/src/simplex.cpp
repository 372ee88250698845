#include "statgeo/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "statgeo/errors.hpp"

namespace statgeo {

namespace {

double last_probability(int n, std::span<const double> p) {
  if (static_cast<int>(p.size()) != n) throw Error("simplex point has wrong dimension");
  double s = 0.0;
  for (double v : p) {
    if (!(v > 0.0)) throw DomainError("point outside the open simplex", std::vector<double>(p.begin(), p.end()));
    s += v;
  }
  const double q = 1.0 - s;
  if (!(q > 0.0)) throw DomainError("point outside the open simplex", std::vector<double>(p.begin(), p.end()));
  return q;
}

}  // namespace

std::string to_string(SimplexConnection c) { return c == SimplexConnection::mixture ? "mixture" : "exponential"; }

std::vector<double> fisher_metric(int n, std::span<const double> p) {
  const double q = last_probability(n, p);
  std::vector<double> g(static_cast<std::size_t>(n * n), 1.0 / q);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i * n + i)] += 1.0 / p[static_cast<std::size_t>(i)];
  return g;
}

std::vector<double> fisher_inverse(int n, std::span<const double> p) {
  last_probability(n, p);
  std::vector<double> h(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      h[static_cast<std::size_t>(i * n + j)] =
          -p[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(j)] + (i == j ? p[static_cast<std::size_t>(i)] : 0.0);
    }
  }
  return h;
}

ChartManifold simplex_chart(int n, SimplexConnection conn) {
  if (n < 1 || n > 4) throw UnsupportedStructure("simplex charts are available for 1 <= n <= 4");
  std::vector<std::string> coords;
  for (int i = 1; i <= n; ++i) coords.push_back("p" + std::to_string(i));
  auto cptr = std::make_shared<const std::vector<std::string>>(coords);
  std::string last = "1";
  for (const auto& c : coords) last += " - " + c;
  std::vector<ExpressionField> metric;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::string text = (i == j ? "1/" + coords[static_cast<std::size_t>(i)] + " + " : std::string()) + "1/(" + last + ")";
      metric.push_back(ExpressionField::parse(text, cptr));
    }
  }
  std::vector<ExpressionField> zero(static_cast<std::size_t>(n * n * n), ExpressionField::constant(0.0, cptr));
  LinearConstraint sum{std::vector<double>(static_cast<std::size_t>(n), 1.0), 1.0};
  Domain dom = Domain::box(std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {0.0, 1.0}), {sum});
  ChartManifold mixture("simplex:" + std::to_string(n) + ":mixture", coords, std::move(dom), std::move(metric),
                        ConnectionKind::christoffel, std::move(zero));
  if (conn == SimplexConnection::mixture) return mixture;
  ChartManifold e = conjugate_chart(mixture);
  return ChartManifold("simplex:" + std::to_string(n) + ":exponential", e.coordinates(), e.domain(), e.metric(),
                       e.connection_kind(), e.connection());
}

StatStructure simplex_structure(int n, SimplexConnection conn) {
  return build_structure(simplex_chart(n, conn));
}

SimplexInvariants simplex_invariants(const StatStructure& exponential, std::span<const double> p) {
  const int n = exponential.dim();
  const double q = last_probability(n, p);
  SimplexInvariants out;
  out.n = n;
  out.point.assign(p.begin(), p.end());
  const LocalTensors t = exponential.local(p, 2);
  const auto N = static_cast<std::size_t>(n);
  out.K_pairing_closed.resize(N * N * N);
  out.K_pairing_numeric.resize(N * N * N);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double pi = p[static_cast<std::size_t>(i)];
        const double delta = (i == j && j == k) ? 1.0 / (pi * pi) : 0.0;
        out.K_pairing_closed[t.idx3(i, j, k)] = -0.5 * (delta - 1.0 / (q * q));
        double v = 0.0;
        for (int l = 0; l < n; ++l) v += t.g[t.idx2(l, k)].value() * t.K[t.idx3(l, i, j)].value();
        out.K_pairing_numeric[t.idx3(i, j, k)] = v;
        const double c = out.K_pairing_closed[t.idx3(i, j, k)];
        out.K_pairing_delta = std::max(out.K_pairing_delta, std::abs(v - c) / std::max(1.0, std::abs(c)));
      }
    }
  }
  const auto tr = trace_K(t);
  double inv_sum = 1.0 / q;
  for (int i = 0; i < n; ++i) {
    const double pi = p[static_cast<std::size_t>(i)];
    inv_sum += 1.0 / pi;
    out.trK_closed.push_back(0.5 * ((n + 1) * pi - 1.0));
    out.trK_numeric.push_back(tr[static_cast<std::size_t>(i)].value());
    out.trK_delta = std::max(out.trK_delta, std::abs(out.trK_closed.back() - out.trK_numeric.back()));
  }
  out.div_trK_closed = 0.25 * (n * n - 1.0 + inv_sum);
  out.div_trK_numeric = div_trK(t);
  out.div_trK_relative_delta =
      std::abs(out.div_trK_numeric - out.div_trK_closed) / std::max(1.0, std::abs(out.div_trK_closed));
  return out;
}

SimplexInvariants simplex_invariants(int n, std::span<const double> p) {
  return simplex_invariants(simplex_structure(n, SimplexConnection::exponential), p);
}

double sectional_curvature(const StatStructure& s, std::span<const double> p, int i, int j, CurvatureKind kind) {
  const LocalTensors t = s.local(p, 2);
  const auto R = curvature(t, kind);
  const int m = t.m;
  auto G = [&](int a, int b) { return t.g[t.idx2(a, b)].value(); };
  // g(R(X,Y)Y, X) / (g(X,X) g(Y,Y) - g(X,Y)^2) with X = d_i, Y = d_j
  double num = 0.0;
  for (int l = 0; l < m; ++l) num += R.at(l, i, j, j) * G(l, i);
  return num / (G(i, i) * G(j, j) - G(i, j) * G(i, j));
}

}  // namespace statgeo
