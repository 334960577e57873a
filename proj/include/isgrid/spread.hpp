#pragma once

#include <span>
#include <vector>

#include "isgrid/grid.hpp"
#include "isgrid/kernel.hpp"

namespace isgrid {

/// Separable kernel taps of a fixed point set on a periodic oversampled grid.
///
/// Positions are absolute oversampled-grid indices and are folded into [0, G) per axis.
/// `scatter` is the projection core (points -> grid, accumulating) and `gather` the
/// backprojection core (grid -> points); both read the same tap table, so they are
/// exact adjoints of each other.
class SpreadTable {
public:
  SpreadTable() = default;
  SpreadTable(const KernelSpec& kernel, const Shape& oversampled_shape, std::span<const double> positions);

  std::size_t count() const { return count_; }
  std::size_t ndim() const { return shape_.size(); }
  const Shape& grid_shape() const { return shape_; }

  /// grid += sum_j values[j] * k(. - p_j)
  void scatter(std::span<const Complex> values, std::span<Complex> grid) const;
  /// out[j] = sum_n k(n - p_j) grid[n]
  void gather(std::span<const Complex> grid, std::span<Complex> out) const;

  /// Test hook: perturbs one scatter tap so the pair stops being adjoint.
  void inject_fault(bool on) { fault_ = on; }

private:
  std::size_t tap_offset(std::size_t j, std::size_t a) const { return (j * shape_.size() + a) * width_; }

  Shape shape_;
  std::size_t count_ = 0;
  std::size_t width_ = 0;
  std::vector<std::size_t> index_;  // wrapped flat contribution per (point, axis, tap)
  std::vector<double> weight_;
  bool fault_ = false;
};

/// Maps centred grid coordinates to absolute oversampled positions: s * c + G/2 per axis.
std::vector<double> to_oversampled_positions(std::span<const double> centred, const Shape& grid_shape,
                                             const Shape& oversampled_shape);

}  // namespace isgrid
