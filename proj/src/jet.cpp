#include "statgeo/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "statgeo/errors.hpp"

namespace statgeo {

DomainError::DomainError(const std::string& what, std::vector<double> point)
    : Error(what + " at " + format_point(point)), point_(std::move(point)) {}

std::string format_point(const std::vector<double>& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << p[i];
  }
  os << ')';
  return os.str();
}

namespace {

std::uint32_t encode(std::span<const std::uint8_t> e) {
  std::uint32_t key = 0;
  for (auto v : e) key = key * 8u + v;
  return key;
}

std::uint32_t encode(std::span<const int> e) {
  std::uint32_t key = 0;
  for (auto v : e) key = key * 8u + static_cast<std::uint32_t>(v);
  return key;
}

// Exponent tuples of total degree `deg` in `dim` variables, descending lex.
void enumerate_degree(int dim, int deg, std::vector<std::uint8_t>& current, int axis,
                      std::vector<std::uint8_t>& out) {
  if (axis == dim - 1) {
    current[static_cast<std::size_t>(axis)] = static_cast<std::uint8_t>(deg);
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int e = deg; e >= 0; --e) {
    current[static_cast<std::size_t>(axis)] = static_cast<std::uint8_t>(e);
    enumerate_degree(dim, deg - e, current, axis + 1, out);
  }
}

}  // namespace

JetLayout::JetLayout(int dim, int order) : dim_(dim), order_(order) {
  std::vector<std::uint8_t> current(static_cast<std::size_t>(dim), 0);
  prefix_.reserve(static_cast<std::size_t>(order) + 1);
  for (int d = 0; d <= order; ++d) {
    enumerate_degree(dim, d, current, 0, exponents_);
    prefix_.push_back(exponents_.size() / static_cast<std::size_t>(dim));
  }
  const std::size_t n = prefix_.back();
  degree_.resize(n);
  std::unordered_map<std::uint32_t, std::uint32_t> lookup;
  for (std::size_t i = 0; i < n; ++i) {
    int deg = 0;
    for (auto e : exponents(i)) deg += e;
    degree_[i] = deg;
    lookup.emplace(encode(exponents(i)), static_cast<std::uint32_t>(i));
  }

  std::vector<std::uint8_t> sum(static_cast<std::size_t>(dim));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n && degree_[a] + degree_[b] <= order; ++b) {
      auto ea = exponents(a);
      auto eb = exponents(b);
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = static_cast<std::uint8_t>(ea[k] + eb[k]);
      products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                           lookup.at(encode(sum))});
    }
  }

  raised_.assign(n * static_cast<std::size_t>(dim), 0);
  for (std::size_t a = 0; a < n; ++a) {
    if (degree_[a] >= order) continue;
    for (int axis = 0; axis < dim; ++axis) {
      auto ea = exponents(a);
      std::copy(ea.begin(), ea.end(), sum.begin());
      ++sum[static_cast<std::size_t>(axis)];
      raised_[a * static_cast<std::size_t>(dim) + static_cast<std::size_t>(axis)] =
          lookup.at(encode(sum));
    }
  }
}

const JetLayout& JetLayout::get(int dim, int order) {
  if (dim < 1 || dim > kMaxJetDim || order < 0 || order > kMaxJetOrder) {
    throw Error("jet layout out of range: dim " + std::to_string(dim) + ", order " +
                std::to_string(order));
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, order}];
  if (!slot) slot.reset(new JetLayout(dim, order));
  return *slot;
}

std::size_t JetLayout::index(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != dim_) throw Error("multi-index has wrong length");
  int deg = 0;
  for (int a : alpha) {
    if (a < 0) throw Error("negative multi-index entry");
    deg += a;
  }
  if (deg > order_) {
    throw Error("derivative order " + std::to_string(deg) + " exceeds jet order " +
                std::to_string(order_));
  }
  const std::uint32_t key = encode(alpha);
  const std::size_t begin = deg == 0 ? 0 : prefix_[static_cast<std::size_t>(deg - 1)];
  const std::size_t end = prefix_[static_cast<std::size_t>(deg)];
  for (std::size_t i = begin; i < end; ++i) {
    if (encode(exponents(i)) == key) return i;
  }
  throw Error("multi-index not found");
}

// ---------------------------------------------------------------------------

Jet::Jet(int dim, int order, double value) : layout_(&JetLayout::get(dim, order)) {
  coeffs_.assign(layout_->size(), 0.0);
  coeffs_[0] = value;
}

Jet Jet::variable(int dim, int order, int axis, double value) {
  Jet j(dim, order, value);
  if (order >= 1) j.coeffs_[1 + static_cast<std::size_t>(axis)] = 1.0;
  return j;
}

double Jet::derivative(std::span<const int> alpha) const {
  const std::size_t idx = layout_->index(alpha);
  double factorial = 1.0;
  for (int a : alpha) {
    for (int k = 2; k <= a; ++k) factorial *= k;
  }
  return coeffs_[idx] * factorial;
}

double Jet::d(int i) const {
  assert(order() >= 1);
  return coeffs_[1 + static_cast<std::size_t>(i)];
}

double Jet::d(int i, int j) const {
  assert(order() >= 2);
  const std::size_t idx = layout_->raised(1 + static_cast<std::size_t>(i), j);
  return i == j ? 2.0 * coeffs_[idx] : coeffs_[idx];
}

Jet Jet::partial(int axis) const {
  if (order() == 0) throw Error("cannot differentiate an order-0 jet");
  const JetLayout& out = JetLayout::get(dim(), order() - 1);
  std::vector<double> c(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t src = layout_->raised(i, axis);
    c[i] = coeffs_[src] * (out.exponents(i)[static_cast<std::size_t>(axis)] + 1);
  }
  return Jet(&out, std::move(c));
}

Jet Jet::truncated(int order) const {
  if (order >= this->order()) return *this;
  const JetLayout& out = JetLayout::get(dim(), order);
  return Jet(&out, std::vector<double>(coeffs_.begin(),
                                       coeffs_.begin() + static_cast<std::ptrdiff_t>(out.size())));
}

Jet Jet::shifted() const {
  Jet r = *this;
  r.coeffs_[0] = 0.0;
  return r;
}

Jet& Jet::operator+=(const Jet& rhs) {
  if (rhs.order() < order()) *this = truncated(rhs.order());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  if (rhs.order() < order()) *this = truncated(rhs.order());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& rhs) {
  *this = *this * rhs;
  return *this;
}

Jet& Jet::operator+=(double rhs) {
  coeffs_[0] += rhs;
  return *this;
}

Jet& Jet::operator-=(double rhs) {
  coeffs_[0] -= rhs;
  return *this;
}

Jet& Jet::operator*=(double rhs) {
  for (double& c : coeffs_) c *= rhs;
  return *this;
}

Jet& Jet::operator/=(double rhs) {
  for (double& c : coeffs_) c /= rhs;
  return *this;
}

void Jet::add_product(const Jet& a, const Jet& b) {
  const int k = std::min({order(), a.order(), b.order()});
  if (k < order()) *this = truncated(k);
  const JetLayout& lay = JetLayout::get(dim(), k);
  for (const auto& p : lay.products()) coeffs_[p.out] += a.coeffs_[p.lhs] * b.coeffs_[p.rhs];
}

void Jet::add_scaled(const Jet& a, double s) {
  if (a.order() < order()) *this = truncated(a.order());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * a.coeffs_[i];
}

Jet operator-(const Jet& a) {
  Jet r = a;
  r *= -1.0;
  return r;
}

Jet operator+(const Jet& a, const Jet& b) {
  if (a.order() <= b.order()) {
    Jet r = a;
    r += b;
    return r;
  }
  Jet r = b;
  r += a;
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a.truncated(std::min(a.order(), b.order()));
  r -= b;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  const int k = std::min(a.order(), b.order());
  const JetLayout& lay = JetLayout::get(a.dim(), k);
  std::vector<double> c(lay.size(), 0.0);
  for (const auto& p : lay.products()) c[p.out] += a.coeffs_[p.lhs] * b.coeffs_[p.rhs];
  return Jet(&lay, std::move(c));
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet operator+(const Jet& a, double b) {
  Jet r = a;
  r += b;
  return r;
}
Jet operator+(double a, const Jet& b) { return b + a; }
Jet operator-(const Jet& a, double b) {
  Jet r = a;
  r -= b;
  return r;
}
Jet operator-(double a, const Jet& b) {
  Jet r = -b;
  r += a;
  return r;
}
Jet operator*(const Jet& a, double b) {
  Jet r = a;
  r *= b;
  return r;
}
Jet operator*(double a, const Jet& b) { return b * a; }
Jet operator/(const Jet& a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  Jet r = a;
  r /= b;
  return r;
}
Jet operator/(double a, const Jet& b) { return a * reciprocal(b); }

Jet apply_series(const Jet& a, std::span<const double> taylor) {
  const int k = a.order();
  assert(static_cast<int>(taylor.size()) > k);
  for (int i = 0; i <= k; ++i) {
    if (!std::isfinite(taylor[static_cast<std::size_t>(i)])) {
      throw DomainError("non-finite function value or derivative");
    }
  }
  // Horner in the nilpotent part h = a - a0.
  const Jet h = a.shifted();
  Jet r(a.dim(), k, taylor[static_cast<std::size_t>(k)]);
  for (int i = k - 1; i >= 0; --i) {
    r = r * h;
    r.coeffs_[0] += taylor[static_cast<std::size_t>(i)];
  }
  return r;
}

namespace {

using Series = std::vector<double>;

double inv_factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return 1.0 / f;
}

// Taylor coefficients of x^c at x0 > 0 (or any x0 when c is a non-negative
// integer and the series terminates).
Series power_series(double x0, double c, int order) {
  Series s(static_cast<std::size_t>(order) + 1);
  double binom = 1.0;
  for (int k = 0; k <= order; ++k) {
    s[static_cast<std::size_t>(k)] = binom * std::pow(x0, c - k);
    binom *= (c - k) / (k + 1);
  }
  return s;
}

}  // namespace

Jet reciprocal(const Jet& a) {
  const double x0 = a.value();
  if (x0 == 0.0) throw DomainError("division by zero");
  Series s(static_cast<std::size_t>(a.order()) + 1);
  double p = 1.0 / x0;
  for (auto& v : s) {
    v = p;
    p *= -1.0 / x0;
  }
  return apply_series(a, s);
}

Jet sin(const Jet& a) {
  const double x0 = a.value();
  Series s(static_cast<std::size_t>(a.order()) + 1);
  const double sv = std::sin(x0), cv = std::cos(x0);
  const double cyc[4] = {sv, cv, -sv, -cv};
  for (int k = 0; k <= a.order(); ++k) s[static_cast<std::size_t>(k)] = cyc[k % 4] * inv_factorial(k);
  return apply_series(a, s);
}

Jet cos(const Jet& a) {
  const double x0 = a.value();
  Series s(static_cast<std::size_t>(a.order()) + 1);
  const double sv = std::sin(x0), cv = std::cos(x0);
  const double cyc[4] = {cv, -sv, -cv, sv};
  for (int k = 0; k <= a.order(); ++k) s[static_cast<std::size_t>(k)] = cyc[k % 4] * inv_factorial(k);
  return apply_series(a, s);
}

Jet sinh(const Jet& a) {
  const double x0 = a.value();
  Series s(static_cast<std::size_t>(a.order()) + 1);
  const double sv = std::sinh(x0), cv = std::cosh(x0);
  for (int k = 0; k <= a.order(); ++k) s[static_cast<std::size_t>(k)] = (k % 2 ? cv : sv) * inv_factorial(k);
  return apply_series(a, s);
}

Jet cosh(const Jet& a) {
  const double x0 = a.value();
  Series s(static_cast<std::size_t>(a.order()) + 1);
  const double sv = std::sinh(x0), cv = std::cosh(x0);
  for (int k = 0; k <= a.order(); ++k) s[static_cast<std::size_t>(k)] = (k % 2 ? sv : cv) * inv_factorial(k);
  return apply_series(a, s);
}

Jet tanh(const Jet& a) {
  // t' = 1 - t^2 gives (k+1) t_{k+1} = [k == 0] - sum_j t_j t_{k-j}.
  const int order = a.order();
  Series s(static_cast<std::size_t>(order) + 1, 0.0);
  s[0] = std::tanh(a.value());
  for (int k = 0; k < order; ++k) {
    double conv = 0.0;
    for (int j = 0; j <= k; ++j) conv += s[static_cast<std::size_t>(j)] * s[static_cast<std::size_t>(k - j)];
    s[static_cast<std::size_t>(k + 1)] = ((k == 0 ? 1.0 : 0.0) - conv) / (k + 1);
  }
  return apply_series(a, s);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  Series s(static_cast<std::size_t>(a.order()) + 1);
  for (int k = 0; k <= a.order(); ++k) s[static_cast<std::size_t>(k)] = e * inv_factorial(k);
  return apply_series(a, s);
}

Jet log(const Jet& a) {
  const double x0 = a.value();
  if (!(x0 > 0.0)) throw DomainError("log of non-positive value");
  Series s(static_cast<std::size_t>(a.order()) + 1);
  s[0] = std::log(x0);
  double p = 1.0;
  for (int k = 1; k <= a.order(); ++k) {
    p /= x0;
    s[static_cast<std::size_t>(k)] = (k % 2 ? 1.0 : -1.0) * p / k;
  }
  return apply_series(a, s);
}

Jet sqrt(const Jet& a) {
  const double x0 = a.value();
  if (x0 < 0.0) throw DomainError("sqrt of negative value");
  if (x0 == 0.0) {
    if (a.order() > 0) throw DomainError("sqrt is not differentiable at zero");
    return Jet(a.dim(), 0, 0.0);
  }
  return apply_series(a, power_series(x0, 0.5, a.order()));
}

Jet abs(const Jet& a) {
  const double x0 = a.value();
  if (x0 == 0.0 && a.order() > 0) throw DomainError("abs is not differentiable at zero");
  return x0 < 0.0 ? -a : a;
}

Jet pow(const Jet& a, int n) {
  if (n < 0) return reciprocal(pow(a, -n));
  Jet result(a.dim(), a.order(), 1.0);
  Jet base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return result;
}

Jet pow(const Jet& a, double c) {
  if (c == std::floor(c) && std::abs(c) <= 64.0) return pow(a, static_cast<int>(c));
  const double x0 = a.value();
  if (x0 < 0.0) throw DomainError("non-integer power of negative value");
  if (x0 == 0.0) {
    if (c < 0.0) throw DomainError("negative power of zero");
    if (a.order() > 0 && c < a.order()) throw DomainError("power not differentiable at zero");
  }
  return apply_series(a, power_series(x0, c, a.order()));
}

Jet pow(const Jet& a, const Jet& b) {
  if (!(a.value() > 0.0)) throw DomainError("variable power of non-positive base");
  return exp(b * log(a));
}

// ---------------------------------------------------------------------------

JetComposer::JetComposer(std::span<const Jet> inner, int max_outer_order)
    : outer_dim_(static_cast<int>(inner.size())),
      inner_dim_(inner.empty() ? 0 : inner[0].dim()),
      inner_order_(0),
      max_outer_order_(max_outer_order) {
  if (inner.empty()) throw Error("JetComposer needs at least one inner jet");
  inner_order_ = inner[0].order();
  for (const auto& j : inner) inner_order_ = std::min(inner_order_, j.order());

  const JetLayout& outer = JetLayout::get(outer_dim_, max_outer_order_);
  std::vector<Jet> shifts;
  shifts.reserve(inner.size());
  for (const auto& j : inner) shifts.push_back(j.truncated(inner_order_).shifted());

  monomials_.resize(outer.size());
  monomials_[0] = Jet(inner_dim_, inner_order_, 1.0);
  // Each monomial of degree >= 1 is a lower one times a single shift: find
  // the first non-zero exponent and peel it off.
  for (std::size_t k = 1; k < outer.size(); ++k) {
    auto e = outer.exponents(k);
    int axis = 0;
    while (e[static_cast<std::size_t>(axis)] == 0) ++axis;
    std::vector<int> lower(e.begin(), e.end());
    --lower[static_cast<std::size_t>(axis)];
    monomials_[k] = monomials_[outer.index(lower)] * shifts[static_cast<std::size_t>(axis)];
  }
}

Jet JetComposer::compose(const Jet& outer) const {
  if (outer.dim() != outer_dim_) throw Error("JetComposer: outer jet has wrong dimension");
  const int k = std::min(outer.order(), max_outer_order_);
  const int result_order = std::min(inner_order_, k);
  Jet r(inner_dim_, result_order, 0.0);
  const JetLayout& lay = JetLayout::get(outer_dim_, k);
  auto c = outer.coefficients();
  for (std::size_t i = 0; i < lay.size(); ++i) {
    if (c[i] != 0.0) r.add_scaled(monomials_[i], c[i]);
  }
  return r;
}

}  // namespace statgeo
