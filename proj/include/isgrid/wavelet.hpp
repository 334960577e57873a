#pragma once

#include "isgrid/grid.hpp"

namespace isgrid {

/// Multi-level orthonormal Haar transform on 1-3D complex grids (separable, Mallat layout:
/// the coarsest scaling block sits at the low-index corner). Every axis must be divisible
/// by 2^levels.
ComplexGrid wavelet_forward(const ComplexGrid& image, int levels);
/// Inverse, which is also the adjoint.
ComplexGrid wavelet_adjoint(const ComplexGrid& coeffs, int levels);

void check_wavelet_levels(const Shape& shape, int levels);

}  // namespace isgrid
