#pragma once

#include "isgrid/grid.hpp"

namespace isgrid {

enum class FftDirection { forward, inverse };

/// Centred (DC at N/2 on every axis) DFT with 1/sqrt(total) scaling in both directions.
/// Requires even axes. The output space tag is flipped.
ComplexGrid fft_unitary(const ComplexGrid& grid, FftDirection direction);

/// In-place variant on a raw row-major buffer.
void fft_unitary_inplace(std::span<Complex> data, const Shape& shape, FftDirection direction);

/// Centres `grid` inside a zero grid of `target_shape`.
ComplexGrid zero_pad(const ComplexGrid& grid, const Shape& target_shape);

/// Extracts the centred `target_shape` block; adjoint of zero_pad.
ComplexGrid crop_center(const ComplexGrid& grid, const Shape& target_shape);

}  // namespace isgrid
