#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace statgeo {

/// Highest total derivative order carried by a Jet.
inline constexpr int kMaxJetOrder = 6;
/// Highest number of variables a Jet may depend on.
inline constexpr int kMaxJetDim = 8;

/// Monomial bookkeeping for truncated Taylor polynomials in `dim` variables
/// up to total degree `order`.
///
/// Monomials are enumerated by degree, and inside one degree in descending
/// lexicographic order of their exponents. The enumeration of a degree does
/// not depend on `order`, so the coefficients of a lower-order jet are a
/// prefix of the coefficients of a higher-order one.
class JetLayout {
 public:
  struct Product {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  /// Shared, immutable layout. Safe to call concurrently.
  static const JetLayout& get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return degree_.size(); }

  int degree(std::size_t idx) const { return degree_[idx]; }
  std::span<const std::uint8_t> exponents(std::size_t idx) const {
    return {exponents_.data() + idx * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  /// Index of the monomial with exponents `alpha`; throws if the degree
  /// exceeds the layout order.
  std::size_t index(std::span<const int> alpha) const;

  /// All (lhs, rhs, out) with deg(lhs) + deg(rhs) <= order.
  std::span<const Product> products() const { return products_; }

  /// Index of monomial `idx` multiplied by x_axis. Requires
  /// degree(idx) < order.
  std::uint32_t raised(std::size_t idx, int axis) const {
    return raised_[idx * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(axis)];
  }

  /// Number of monomials of degree <= d.
  std::size_t prefix(int d) const { return prefix_[static_cast<std::size_t>(d)]; }

 private:
  JetLayout(int dim, int order);

  int dim_;
  int order_;
  std::vector<std::uint8_t> exponents_;
  std::vector<int> degree_;
  std::vector<std::size_t> prefix_;
  std::vector<Product> products_;
  std::vector<std::uint32_t> raised_;
};

/// Truncated multivariate Taylor polynomial: the value and all partial
/// derivatives up to `order()` of a scalar function at one point.
///
/// Coefficients are Taylor coefficients (derivative / alpha!). Arithmetic
/// between jets of different orders truncates to the smaller order.
class Jet {
 public:
  Jet() = default;
  /// Constant jet.
  Jet(int dim, int order, double value);
  /// The coordinate function x_axis expanded at x_axis = value.
  static Jet variable(int dim, int order, int axis, double value);

  bool empty() const { return layout_ == nullptr; }
  int dim() const { return layout_->dim(); }
  int order() const { return layout_->order(); }
  const JetLayout& layout() const { return *layout_; }

  double value() const { return coeffs_[0]; }
  std::span<const double> coefficients() const { return coeffs_; }
  std::span<double> coefficients() { return coeffs_; }

  /// Partial derivative with multi-index `alpha` at the expansion point.
  double derivative(std::span<const int> alpha) const;
  /// First partial derivative d/dx_i at the expansion point.
  double d(int i) const;
  /// Second partial derivative d2/dx_i dx_j at the expansion point.
  double d(int i, int j) const;

  /// d/dx_axis of the jet as a jet of order - 1.
  Jet partial(int axis) const;
  Jet truncated(int order) const;
  /// The same polynomial with its constant term removed.
  Jet shifted() const;

  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator+=(double rhs);
  Jet& operator-=(double rhs);
  Jet& operator*=(double rhs);
  Jet& operator/=(double rhs);

  /// Accumulate a * b into *this (truncated to the common order).
  void add_product(const Jet& a, const Jet& b);
  void add_scaled(const Jet& a, double s);

 private:
  Jet(const JetLayout* layout, std::vector<double> coeffs)
      : layout_(layout), coeffs_(std::move(coeffs)) {}

  friend Jet operator*(const Jet&, const Jet&);
  friend Jet apply_series(const Jet&, std::span<const double>);

  const JetLayout* layout_ = nullptr;
  std::vector<double> coeffs_;
};

Jet operator-(const Jet& a);
Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(const Jet& a, double b);
Jet operator+(double a, const Jet& b);
Jet operator-(const Jet& a, double b);
Jet operator-(double a, const Jet& b);
Jet operator*(const Jet& a, double b);
Jet operator*(double a, const Jet& b);
Jet operator/(const Jet& a, double b);
Jet operator/(double a, const Jet& b);

/// f(a) where taylor[k] = f^(k)(a0) / k!, for k = 0..a.order().
Jet apply_series(const Jet& a, std::span<const double> taylor);

// Elementary functions. They throw DomainError where the function or one of
// the requested derivatives is undefined at the expansion point.
Jet reciprocal(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet tanh(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet abs(const Jet& a);
Jet pow(const Jet& a, int n);
Jet pow(const Jet& a, double c);
Jet pow(const Jet& a, const Jet& b);

/// Substitutes jets into a jet: given `outer`, expanded in n variables at
/// y0, and n jets `inner` (in m variables) whose values equal y0, returns
/// the jet of outer(inner(x)). The monomials of the inner shifts are
/// precomputed so many outer jets can be composed with the same inner map.
class JetComposer {
 public:
  JetComposer(std::span<const Jet> inner, int max_outer_order);

  Jet compose(const Jet& outer) const;
  int inner_dim() const { return inner_dim_; }

 private:
  int outer_dim_;
  int inner_dim_;
  int inner_order_;
  int max_outer_order_;
  // monomials_[k] = prod_alpha (inner_alpha - y0_alpha)^(e_alpha) for the k-th
  // monomial of the outer layout at max_outer_order_.
  std::vector<Jet> monomials_;
};

}  // namespace statgeo
