#include <string>
#include <vector>

#include "statgeo/chart.hpp"
#include "statgeo/errors.hpp"

namespace statgeo {

namespace {

using Matrix = std::vector<ExprPtr>;

ExprPtr determinant(const Matrix& a, int n) {
  if (n == 1) return a[0];
  if (n == 2) return expr::sub(expr::mul(a[0], a[3]), expr::mul(a[1], a[2]));
  ExprPtr det = expr::constant(0.0);
  for (int c = 0; c < n; ++c) {
    Matrix minor;
    for (int r = 1; r < n; ++r) {
      for (int k = 0; k < n; ++k) {
        if (k != c) minor.push_back(a[static_cast<std::size_t>(r * n + k)]);
      }
    }
    auto term = expr::mul(a[static_cast<std::size_t>(c)], determinant(minor, n - 1));
    det = c % 2 == 0 ? expr::add(det, term) : expr::sub(det, term);
  }
  return det;
}

Matrix inverse(const Matrix& a, int n) {
  const auto det = determinant(a, n);
  Matrix inv(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      ExprPtr cof;
      if (n == 1) {
        cof = expr::constant(1.0);
      } else {
        Matrix minor;
        for (int r = 0; r < n; ++r) {
          if (r == j) continue;
          for (int k = 0; k < n; ++k) {
            if (k != i) minor.push_back(a[static_cast<std::size_t>(r * n + k)]);
          }
        }
        cof = determinant(minor, n - 1);
        if ((i + j) % 2) cof = expr::neg(cof);
      }
      inv[static_cast<std::size_t>(i * n + j)] = expr::div(cof, det);
    }
  }
  return inv;
}

}  // namespace

ChartManifold conjugate_chart(const ChartManifold& chart) {
  const int m = chart.dim();
  const auto cptr = chart.coordinates_ptr();
  std::vector<ExpressionField> conn;
  switch (chart.connection_kind()) {
    case ConnectionKind::levi_civita:
      return chart;
    case ConnectionKind::difference_tensor:
      for (const auto& k : chart.connection()) conn.emplace_back(expr::neg(k.root()), cptr);
      return ChartManifold("conjugate(" + chart.name() + ")", chart.coordinates(), chart.domain(), chart.metric(),
                           ConnectionKind::difference_tensor, std::move(conn));
    case ConnectionKind::christoffel:
      break;
  }
  if (m > 4) throw UnsupportedStructure("symbolic conjugation is limited to dimension 4");
  Matrix g;
  for (const auto& f : chart.metric()) g.push_back(f.root());
  const Matrix ginv = inverse(g, m);
  auto G = [&](int i, int j) { return g[static_cast<std::size_t>(i * m + j)]; };
  // dg[(l*m+i)*m+j] = d_l g_ij
  std::vector<ExprPtr> dg(static_cast<std::size_t>(m * m * m));
  for (int l = 0; l < m; ++l) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) dg[static_cast<std::size_t>((l * m + i) * m + j)] = expr::derivative(G(i, j), l);
    }
  }
  auto D = [&](int l, int i, int j) { return dg[static_cast<std::size_t>((l * m + i) * m + j)]; };
  conn.reserve(static_cast<std::size_t>(m * m * m));
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        ExprPtr lc = expr::constant(0.0);
        for (int l = 0; l < m; ++l) {
          auto first = expr::sub(expr::add(D(i, j, l), D(j, i, l)), D(l, i, j));
          lc = expr::add(lc, expr::mul(ginv[static_cast<std::size_t>(k * m + l)], first));
        }
        // 2 * (lc / 2) - Gamma
        conn.emplace_back(expr::sub(lc, chart.connection(k, i, j).root()), cptr);
      }
    }
  }
  return ChartManifold("conjugate(" + chart.name() + ")", chart.coordinates(), chart.domain(), chart.metric(),
                       ConnectionKind::christoffel, std::move(conn));
}

}  // namespace statgeo
