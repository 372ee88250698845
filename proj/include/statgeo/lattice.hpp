#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace statgeo {

/// Uniform periodic lattice on a flat torus: node coordinates
/// x_a = k_a * period_a / N_a, row-major with the last axis fastest.
class Lattice {
 public:
  Lattice(std::vector<int> resolution, std::vector<double> periods);

  int dim() const { return static_cast<int>(resolution_.size()); }
  const std::vector<int>& resolution() const { return resolution_; }
  const std::vector<double>& periods() const { return periods_; }
  std::size_t size() const { return size_; }
  double spacing(int axis) const;
  double cell_volume() const;
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

  std::vector<double> point(std::size_t node) const;
  /// Node reached from `node` by `offset` steps along `axis`, wrapping around.
  std::size_t shift(std::size_t node, int axis, int offset) const;

 private:
  std::vector<int> resolution_;
  std::vector<double> periods_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

enum class Stencil { fd4, spectral };

/// d/dx_axis (order 1) or d^2/dx_axis^2 (order 2) of a lattice array holding
/// `comps` interleaved components per node. fd4 uses 5-point central
/// stencils; spectral uses FFTs along lattice lines (not thread-safe, call
/// from one thread).
std::vector<double> differentiate(const Lattice& lattice, std::span<const double> values, int comps, int axis,
                                  int order, Stencil stencil = Stencil::fd4);

}  // namespace statgeo
