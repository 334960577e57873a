#pragma once

#include <span>
#include <vector>

#include "isgrid/grid.hpp"
#include "isgrid/kernel.hpp"
#include "isgrid/spread.hpp"

namespace isgrid {

/// Per-voxel displacement vectors in voxel units, voxel-major: offsets[v * ndim + axis].
/// Pull convention: the warped image at r samples the source at r + d[r].
struct DisplacementField {
  Shape shape;
  std::vector<double> offsets;

  DisplacementField() = default;
  DisplacementField(Shape shape_, std::vector<double> offsets_);
  static DisplacementField zeros(const Shape& shape);

  std::size_t ndim() const { return shape.size(); }
  std::size_t voxels() const { return numel(shape); }
  bool is_zero() const;
  double max_abs() const;
  DisplacementField negated() const;
  void validate() const;
  bool operator==(const DisplacementField&) const = default;
};

/// Image-space gridding: the nonrigid warp T and its exact adjoint.
///
/// Forward: F, conjugate k-space deapodization, zero-pad, F^H, kernel gather at r + d[r].
/// Adjoint: kernel scatter from r + d[r], F, crop, k-space deapodization, F^H.
/// The interpolation model is periodic band-limited; warped points wrap across edges.
class ImageGridder {
public:
  ImageGridder(GriddingPlan plan, DisplacementField field);
  ImageGridder(const KernelSpec& kernel, DisplacementField field);

  const GriddingPlan& plan() const { return plan_; }
  const DisplacementField& field() const { return field_; }
  const Shape& shape() const { return plan_.grid_shape; }
  /// Warped voxel locations r + d[r] as absolute oversampled-grid positions.
  std::span<const double> warped_positions() const { return warped_; }

  ComplexGrid forward(const ComplexGrid& image) const;
  ComplexGrid adjoint(const ComplexGrid& warped) const;

private:
  GriddingPlan plan_;
  DisplacementField field_;
  std::vector<double> warped_;
  SpreadTable table_;
};

inline ComplexGrid igrid_forward(const ImageGridder& g, const ComplexGrid& image) { return g.forward(image); }
inline ComplexGrid igrid_adjoint(const ImageGridder& g, const ComplexGrid& warped) { return g.adjoint(warped); }

enum class InterpMethod { nearest, linear };

/// Direct per-voxel resampling of `image` at r + d[r] with periodic wrap.
ComplexGrid warp_oracle(const ComplexGrid& image, const DisplacementField& field, InterpMethod method);

}  // namespace isgrid
