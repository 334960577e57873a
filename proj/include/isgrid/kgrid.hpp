#pragma once

#include <span>
#include <vector>

#include "isgrid/grid.hpp"
#include "isgrid/kernel.hpp"
#include "isgrid/spread.hpp"

namespace isgrid {

/// k-space gridding (type-1 NUFFT) and inverse gridding (type-2) over a fixed trajectory.
///
/// Trajectory coordinates are centred k-space positions in cycles per field of view,
/// so integer values coincide with the Cartesian DFT of the N-grid. The per-sample
/// weights multiply on the projection side and again after the backprojection gather,
/// which keeps the pair exactly adjoint; pass all-ones for an unweighted model.
///
/// With unit weights, kgrid_inverse approximates the centred NDFT
///   y_j = prod(N)^(-1/2) * sum_n m[n] exp(-2 pi i k_j . (n - N/2) / N)
/// and kgrid_forward approximates its adjoint.
class KSpaceGridder {
public:
  KSpaceGridder(GriddingPlan plan, std::vector<double> trajectory, std::vector<double> weights);
  /// Unit density weights.
  KSpaceGridder(GriddingPlan plan, std::vector<double> trajectory);

  const GriddingPlan& plan() const { return plan_; }
  std::size_t count() const { return weights_.size(); }
  std::size_t ndim() const { return plan_.ndim(); }
  std::span<const double> trajectory() const { return trajectory_; }
  std::span<const double> weights() const { return weights_; }

  /// P(k): weighted samples spread onto the oversampled k-space grid.
  ComplexGrid project_core(std::span<const Complex> samples) const;
  /// B(k): gather from the oversampled grid, then weight.
  std::vector<Complex> backproject_core(const ComplexGrid& oversampled) const;

  /// Samples -> N-grid image: P(k), inverse FFT, crop, deapodize.
  ComplexGrid forward(std::span<const Complex> samples) const;
  /// N-grid image -> samples: conjugate deapodize, pad, FFT, B(k).
  std::vector<Complex> inverse(const ComplexGrid& image) const;

  void inject_fault_for_testing(bool on) { table_.inject_fault(on); }

private:
  GriddingPlan plan_;
  std::vector<double> trajectory_;
  std::vector<double> weights_;
  SpreadTable table_;
};

// Free-function spellings of the operator pair.
inline ComplexGrid project_core_k(const KSpaceGridder& g, std::span<const Complex> s) { return g.project_core(s); }
inline std::vector<Complex> backproject_core_k(const KSpaceGridder& g, const ComplexGrid& grid) {
  return g.backproject_core(grid);
}
inline ComplexGrid kgrid_forward(const KSpaceGridder& g, std::span<const Complex> s) { return g.forward(s); }
inline std::vector<Complex> kgrid_inverse(const KSpaceGridder& g, const ComplexGrid& image) {
  return g.inverse(image);
}

}  // namespace isgrid
