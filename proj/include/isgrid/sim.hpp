#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "isgrid/grid.hpp"
#include "isgrid/igrid.hpp"
#include "isgrid/kernel.hpp"
#include "isgrid/motion.hpp"
#include "isgrid/sense.hpp"

namespace isgrid {

/// Ellipse/ellipsoid with centre and semi-axes in fractions of the half field of view,
/// per grid axis. Rotation (degrees) is about the first axis pair in the last two axes.
struct Ellipse {
  std::vector<double> center;
  std::vector<double> semi_axes;
  double rotation_deg = 0.0;
  double intensity = 1.0;
};

struct PhantomSpec {
  Shape shape;
  std::vector<Ellipse> ellipses;
  double smoothing_sigma = 0.0;  // Gaussian blur width in voxels, applied in k-space

  void validate() const;
  /// Modified Shepp-Logan, shrunk by `scale` about the centre.
  static PhantomSpec shepp_logan(const Shape& shape, double scale = 0.7);
};

ComplexGrid make_phantom(const PhantomSpec& spec);

/// Smallest distance (voxels) from any voxel above `rel_threshold * max` to the grid edge.
std::size_t support_margin(const ComplexGrid& image, double rel_threshold = 1e-3);

/// Gaussian displacement bump: centre in voxels relative to the grid centre,
/// peak displacement per axis, radius (standard deviation) in voxels.
struct Bump {
  std::vector<double> center;
  std::vector<double> amplitude;
  double radius = 8.0;
};

struct FieldSpec {
  Shape shape;
  std::vector<Bump> bumps;

  void validate() const;
  /// Per-axis bound: max over bumps of |amplitude|.
  std::vector<double> max_amplitude() const;
  FieldSpec scaled(double factor) const;
};

/// Sum of tapered Gaussian bumps, exactly zero beyond 3 radii of every bump and
/// rescaled if overlaps push any axis past the per-axis amplitude bound.
DisplacementField make_field(const FieldSpec& spec);

/// Smooth complex coil maps: Gaussian magnitude profiles centred around the field of view
/// with distinct linear phase ramps; normalised to unit peak root-sum-of-squares.
CoilSet make_coils(const Shape& shape, std::size_t count, double smoothness, std::uint64_t seed);

enum class TrajectoryKind { radial2d, radial3d };

struct Trajectory {
  std::size_t dim = 0;
  std::vector<double> coords;                                   // centred, cycles/FOV
  std::vector<std::pair<std::size_t, std::size_t>> interleaves;  // [begin, end) per spoke
  std::vector<double> density;                                   // area (volume) per sample

  std::size_t count() const { return dim ? coords.size() / dim : 0; }
  /// Coordinates for a list of sample indices.
  std::vector<double> gather_coords(std::span<const std::size_t> samples) const;
};

/// Full-diameter spokes at the given angles (radians from axis 1 towards axis 0).
Trajectory radial2d_from_angles(std::span<const double> angles, std::size_t samples_per_spoke, double kmax);

/// Golden-angle (2D) or golden-means (3D) ordered spokes through the k-space centre.
/// Sample s of a spoke sits at (s - S/2) * 2 kmax / S; density is proportional to |k|
/// (|k|^2 in 3D) with the centre given the area of its half-pixel disc (ball).
Trajectory radial_trajectory(TrajectoryKind kind, std::size_t spokes, std::size_t samples_per_spoke, double kmax);

std::string to_string(TrajectoryKind k);
TrajectoryKind trajectory_kind_from_string(const std::string& s);

struct AcquisitionSpec {
  std::size_t heartbeats = 40;
  std::size_t interleaves_per_heartbeat = 18;
  TrajectoryKind trajectory = TrajectoryKind::radial2d;
  std::size_t samples_per_spoke = 0;  // 0: grid size along axis 0
  std::size_t nav_factor = 4;         // navigator grid = main grid / nav_factor per axis
  std::size_t bins = 4;
  std::vector<double> bin_shift_step = {2.0};  // per-axis shift between consecutive bins (voxels)
  double shift_jitter = 0.1;                   // per-axis std of heartbeat shifts (voxels)
  double reference_jitter_fraction = 0.25;     // reference bin jitter relative to shift_jitter
  double respiratory_period = 4.7;             // heartbeats per breath
  FieldSpec field;                             // field of the deepest bin; others scale linearly
  double noise_sigma = 0.00375;                // complex noise std relative to the DC magnitude
  std::size_t coils = 4;
  double coil_smoothness = 0.5;

  void validate(const Shape& shape) const;
};

struct HeartbeatData {
  std::vector<std::size_t> interleaves;  // spoke indices into the master trajectory
  std::vector<std::size_t> samples;      // sample indices into the master trajectory
  CoilData data;                         // raw (unweighted) samples per coil
  ComplexGrid nav;                       // low-resolution navigator image
};

struct SimTruth {
  std::vector<ShiftVector> shifts;  // translation of the object per heartbeat (voxels)
  std::vector<std::size_t> bins;    // respiratory bin per heartbeat
  FieldSet fields;                  // per-bin nonrigid field; reference bin is zero
};

struct SimulatedAcquisition {
  Shape shape;
  Shape nav_shape;
  Trajectory trajectory;
  std::shared_ptr<const CoilSet> coils;
  std::vector<HeartbeatData> heartbeats;
  SimTruth truth;
  double noise_std = 0.0;  // absolute per-sample complex noise std
};

/// Object seen during heartbeat h: phantom warped by its bin's field, then translated.
ComplexGrid moved_object(const ComplexGrid& phantom, const DisplacementField& field, std::span<const double> shift,
                         const KernelSpec& kernel);

SimulatedAcquisition simulate_acquisition(const ComplexGrid& phantom, const AcquisitionSpec& spec,
                                          const KernelSpec& kernel, std::uint64_t seed);
/// Same, with caller-supplied coil maps in place of the spec's generated ones.
SimulatedAcquisition simulate_acquisition(const ComplexGrid& phantom, const AcquisitionSpec& spec,
                                          const KernelSpec& kernel, std::uint64_t seed,
                                          std::shared_ptr<const CoilSet> coils);

/// Exact band-limited translation by `shift` voxels (linear phase in the centred DFT).
ComplexGrid fourier_shift(const ComplexGrid& image, std::span<const double> shift);
/// Gaussian blur with standard deviation `sigma` voxels, applied in k-space.
ComplexGrid gaussian_smooth(const ComplexGrid& image, double sigma);
/// Centred low-resolution copy: crop the centred spectrum to `shape` and transform back.
ComplexGrid lowres(const ComplexGrid& image, const Shape& shape);

}  // namespace isgrid
