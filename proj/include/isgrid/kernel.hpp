#pragma once

#include <vector>

#include "isgrid/grid.hpp"

namespace isgrid {

/// Separable Kaiser-Bessel interpolation kernel.
///
/// The window is pedestal-free, (I0(beta*sqrt(1-(2u/W)^2)) - 1) / (I0(beta) - 1), so it is
/// continuous and exactly zero at |u| = W/2. Distances are in oversampled-grid units.
struct KernelSpec {
  int width = 4;
  double oversampling = 2.0;
  double beta = 0.0;

  /// Kernel with the Beatty closed-form shape parameter for (width, oversampling).
  static KernelSpec make(int width = 4, double oversampling = 2.0);

  void validate() const;
  bool operator==(const KernelSpec&) const = default;
};

double beatty_beta(int width, double oversampling);

double kernel_eval(const KernelSpec& spec, double distance);

/// Continuous Fourier transform of the kernel, integral of k(u) exp(-2 pi i u nu) du,
/// evaluated by Gauss-Legendre quadrature over the support. `nu` is in cycles per grid unit.
double kernel_transform(const KernelSpec& spec, double nu);

/// Precomputed state shared by both gridding directions on one grid.
///
/// `deapod_image` and `deapod_kspace` hold 1/c and 1/C on the N-grid (centred indices).
/// For a kernel used identically in k-space and image space the two arrays coincide;
/// both are kept so each operator names the weight it applies. `scale` is the constant
/// sqrt(prod G / prod N) that reconciles the two unitary FFT normalisations.
struct GriddingPlan {
  KernelSpec kernel;
  Shape grid_shape;
  Shape oversampled_shape;
  std::vector<double> deapod_image;
  std::vector<double> deapod_kspace;
  double scale = 1.0;

  std::size_t ndim() const { return grid_shape.size(); }
  /// Oversampling actually realised on axis `a` (G/N after even rounding).
  double axis_oversampling(std::size_t a) const {
    return static_cast<double>(oversampled_shape[a]) / static_cast<double>(grid_shape[a]);
  }
};

GriddingPlan make_plan(const Shape& grid_shape, const KernelSpec& kernel = KernelSpec::make());

}  // namespace isgrid
