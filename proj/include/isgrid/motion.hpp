#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "isgrid/grid.hpp"
#include "isgrid/igrid.hpp"

namespace isgrid {

using ShiftVector = std::vector<double>;

/// Per-heartbeat bulk translation (voxels, per axis) relative to `reference_index`.
struct MotionEstimate {
  std::vector<ShiftVector> shifts;
  std::size_t reference_index = 0;

  std::size_t count() const { return shifts.size(); }
  std::size_t ndim() const { return shifts.empty() ? 0 : shifts.front().size(); }
};

/// Translation t such that nav(r) ~ reference(r - t), from the peak of the magnitude
/// cross-correlation (Fourier product) with a separable 3-point parabolic refinement.
/// Returned components lie in [-N/2, N/2).
ShiftVector estimate_translation(const ComplexGrid& reference_nav, const ComplexGrid& nav);

/// Estimates every navigator against navs[reference_index].
MotionEstimate estimate_motion(std::span<const ComplexGrid> navs, std::size_t reference_index = 0);

/// Multiplies each sample by exp(-2 pi i sum_a k_a shift_a / N_a), with k in cycles per
/// field of view and shift in voxels. This translates the imaged object by `shift`.
std::vector<Complex> apply_phase_shift(std::span<const double> coords, std::span<const Complex> values,
                                       const Shape& grid_shape, std::span<const double> shift);

struct RespiratoryBins {
  std::vector<std::size_t> labels;       // per heartbeat
  std::size_t bins = 0;
  std::vector<ShiftVector> centroids;    // per bin
  std::vector<double> variances;         // mean squared distance to centroid, per bin
  std::size_t reference_bin = 0;         // least variance; ties go to the larger bin

  std::vector<std::size_t> members(std::size_t bin) const;
};

/// k-means (k-means++ seeding, Lloyd to a fixpoint or 100 iterations) on the shift
/// vectors. Bins are relabelled by ascending centroid (lexicographic), so labels do
/// not depend on heartbeat order for well-separated data.
RespiratoryBins kmeans_bin(const MotionEstimate& estimates, std::size_t k, std::uint64_t seed);

/// Externally supplied (or simulator ground-truth) per-bin displacement fields.
struct FieldSet {
  std::size_t reference_bin = 0;
  std::vector<DisplacementField> fields;  // indexed by bin
};

/// Reads a field set file and checks it against the model grid and bin count.
/// The reference bin's field must be identically zero.
FieldSet ingest_displacement_fields(const std::filesystem::path& path, const Shape& grid_shape, std::size_t bins);

void validate_field_set(const FieldSet& set, const Shape& grid_shape, std::size_t bins);

}  // namespace isgrid
