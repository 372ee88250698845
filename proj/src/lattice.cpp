#include "statgeo/lattice.hpp"

#include <complex>
#include <numbers>

#include <fftw3.h>

#include "statgeo/errors.hpp"

namespace statgeo {

Lattice::Lattice(std::vector<int> resolution, std::vector<double> periods)
    : resolution_(std::move(resolution)), periods_(std::move(periods)) {
  if (resolution_.empty() || resolution_.size() != periods_.size()) {
    throw SchemaError("lattice needs one resolution per torus axis");
  }
  strides_.assign(resolution_.size(), 1);
  size_ = 1;
  for (std::size_t a = resolution_.size(); a-- > 0;) {
    if (resolution_[a] < 5) throw SchemaError("lattice resolution must be at least 5 per axis");
    strides_[a] = size_;
    size_ *= static_cast<std::size_t>(resolution_[a]);
  }
}

double Lattice::spacing(int axis) const {
  const auto a = static_cast<std::size_t>(axis);
  return periods_[a] / resolution_[a];
}

double Lattice::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= spacing(a);
  return v;
}

std::vector<double> Lattice::point(std::size_t node) const {
  std::vector<double> p(resolution_.size());
  for (std::size_t a = 0; a < resolution_.size(); ++a) {
    const auto k = (node / strides_[a]) % static_cast<std::size_t>(resolution_[a]);
    p[a] = static_cast<double>(k) * spacing(static_cast<int>(a));
  }
  return p;
}

std::size_t Lattice::shift(std::size_t node, int axis, int offset) const {
  const auto a = static_cast<std::size_t>(axis);
  const auto N = static_cast<long>(resolution_[a]);
  const auto k = static_cast<long>((node / strides_[a]) % static_cast<std::size_t>(N));
  const long moved = ((k + offset) % N + N) % N;
  return node + static_cast<std::size_t>(moved - k) * strides_[a];
}

namespace {

std::vector<double> fd4(const Lattice& L, std::span<const double> v, int comps, int axis, int order) {
  const double h = L.spacing(axis);
  const auto c = static_cast<std::size_t>(comps);
  std::vector<double> out(v.size());
  for (std::size_t node = 0; node < L.size(); ++node) {
    const std::size_t m2 = L.shift(node, axis, -2), m1 = L.shift(node, axis, -1);
    const std::size_t p1 = L.shift(node, axis, 1), p2 = L.shift(node, axis, 2);
    for (std::size_t k = 0; k < c; ++k) {
      const double a = v[m2 * c + k], b = v[m1 * c + k], d = v[p1 * c + k], e = v[p2 * c + k];
      out[node * c + k] = order == 1 ? (a - 8.0 * b + 8.0 * d - e) / (12.0 * h)
                                     : (-a + 16.0 * b - 30.0 * v[node * c + k] + 16.0 * d - e) / (12.0 * h * h);
    }
  }
  return out;
}

std::vector<double> spectral(const Lattice& L, std::span<const double> v, int comps, int axis, int order) {
  const int N = L.resolution()[static_cast<std::size_t>(axis)];
  const double period = L.periods()[static_cast<std::size_t>(axis)];
  const auto c = static_cast<std::size_t>(comps);
  const std::size_t stride = L.stride(axis);
  std::vector<double> out(v.size());
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(N));
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan fwd = fftw_plan_dft_1d(N, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_1d(N, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  std::vector<std::complex<double>> mult(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    const int freq = k <= N / 2 ? k : k - N;
    const double w = 2.0 * std::numbers::pi * freq / period;
    std::complex<double> f = order == 1 ? std::complex<double>(0.0, w) : std::complex<double>(-w * w, 0.0);
    if (order == 1 && N % 2 == 0 && k == N / 2) f = 0.0;
    mult[static_cast<std::size_t>(k)] = f / static_cast<double>(N);
  }
  for (std::size_t start = 0; start < L.size(); ++start) {
    if ((start / stride) % static_cast<std::size_t>(N) != 0) continue;
    for (std::size_t k = 0; k < c; ++k) {
      for (int j = 0; j < N; ++j) buf[static_cast<std::size_t>(j)] = v[(start + static_cast<std::size_t>(j) * stride) * c + k];
      fftw_execute(fwd);
      for (int j = 0; j < N; ++j) buf[static_cast<std::size_t>(j)] *= mult[static_cast<std::size_t>(j)];
      fftw_execute(bwd);
      for (int j = 0; j < N; ++j) out[(start + static_cast<std::size_t>(j) * stride) * c + k] = buf[static_cast<std::size_t>(j)].real();
    }
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  return out;
}

}  // namespace

std::vector<double> differentiate(const Lattice& lattice, std::span<const double> values, int comps, int axis,
                                  int order, Stencil stencil) {
  if (order != 1 && order != 2) throw Error("lattice derivatives are available for orders 1 and 2");
  if (values.size() != lattice.size() * static_cast<std::size_t>(comps)) throw Error("lattice array has the wrong size");
  return stencil == Stencil::fd4 ? fd4(lattice, values, comps, axis, order) : spectral(lattice, values, comps, axis, order);
}

}  // namespace statgeo
