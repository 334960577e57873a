#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "isgrid/grid.hpp"
#include "isgrid/igrid.hpp"
#include "isgrid/kgrid.hpp"

namespace isgrid {

/// Complex sensitivity maps on the N-grid, one per coil.
struct CoilSet {
  std::vector<ComplexGrid> maps;

  std::size_t count() const { return maps.size(); }
  const Shape& shape() const { return maps.front().shape(); }
  void validate() const;
  /// Root-sum-of-squares magnitude per voxel.
  std::vector<double> rss() const;
  /// A single all-ones coil.
  static CoilSet unit(const Shape& shape);
};

/// Per-coil sample blocks for one state: blocks[c][j].
using CoilData = std::vector<std::vector<Complex>>;

/// A_j = G . S . T_j : warp, coil multiply, inverse k-space gridding.
/// An empty warp is the identity (no image-space gridding round trip).
class NonrigidSenseOp {
public:
  NonrigidSenseOp(std::shared_ptr<const ImageGridder> warp, std::shared_ptr<const CoilSet> coils,
                  std::shared_ptr<const KSpaceGridder> gridder);

  const Shape& shape() const { return gridder_->plan().grid_shape; }
  std::size_t coil_count() const { return coils_->count(); }
  std::size_t sample_count() const { return gridder_->count(); }
  bool has_warp() const { return static_cast<bool>(warp_); }
  const KSpaceGridder& gridder() const { return *gridder_; }
  const CoilSet& coils() const { return *coils_; }
  const ImageGridder* warp() const { return warp_.get(); }

  CoilData forward(const ComplexGrid& x) const;
  ComplexGrid adjoint(const CoilData& y) const;

private:
  std::shared_ptr<const ImageGridder> warp_;
  std::shared_ptr<const CoilSet> coils_;
  std::shared_ptr<const KSpaceGridder> gridder_;
};

inline CoilData sense_forward(const NonrigidSenseOp& op, const ComplexGrid& x) { return op.forward(x); }
inline ComplexGrid sense_adjoint(const NonrigidSenseOp& op, const CoilData& y) { return op.adjoint(y); }

/// Vertically stacked per-state operators with their measured data blocks.
struct StackedSenseModel {
  std::vector<NonrigidSenseOp> states;
  std::vector<CoilData> data;

  const Shape& shape() const { return states.front().shape(); }
  void validate() const;
  /// Total complex samples across states and coils.
  std::size_t total_samples() const;
};

std::vector<CoilData> stacked_forward(const StackedSenseModel& model, const ComplexGrid& x);
/// sum_j A_j^H y_j, accumulated in state order.
ComplexGrid stacked_adjoint(const StackedSenseModel& model, const std::vector<CoilData>& blocks);

/// Concatenates blocks state-major, then coil, then sample.
std::vector<Complex> flatten(const std::vector<CoilData>& blocks);
/// Inverse of flatten using the sample layout of `model`.
std::vector<CoilData> unflatten(const StackedSenseModel& model, std::span<const Complex> flat);

}  // namespace isgrid
