#include "isgrid/wavelet.hpp"

#include <cmath>
#include <numbers>

namespace isgrid {

void check_wavelet_levels(const Shape& shape, int levels) {
  if (levels < 1) throw std::invalid_argument("wavelet levels must be >= 1");
  const std::size_t block = std::size_t{1} << levels;
  for (auto n : shape)
    if (n % block != 0)
      throw ShapeError("grid " + to_string(shape) + " is not divisible by 2^" + std::to_string(levels));
}

namespace {

// One Haar step along `axis` restricted to the leading `extent` block.
void haar_axis(std::vector<Complex>& data, const Shape& shape, const Shape& extent, std::size_t axis, bool inverse) {
  const auto st = strides(shape);
  const std::size_t len = extent[axis];
  const std::size_t half = len / 2;
  const double r = std::numbers::sqrt2 / 2.0;

  // Enumerate every line start within the block (axis index fixed at 0).
  Shape lines = extent;
  lines[axis] = 1;
  const std::size_t nlines = numel(lines);
  const auto line_st = strides(lines);
  std::vector<Complex> buf(len);
  for (std::size_t l = 0; l < nlines; ++l) {
    std::size_t base = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) base += ((l / line_st[a]) % lines[a]) * st[a];
    const std::size_t s = st[axis];
    if (!inverse) {
      for (std::size_t i = 0; i < half; ++i) {
        const Complex a = data[base + (2 * i) * s], b = data[base + (2 * i + 1) * s];
        buf[i] = r * (a + b);
        buf[half + i] = r * (a - b);
      }
    } else {
      for (std::size_t i = 0; i < half; ++i) {
        const Complex lo = data[base + i * s], hi = data[base + (half + i) * s];
        buf[2 * i] = r * (lo + hi);
        buf[2 * i + 1] = r * (lo - hi);
      }
    }
    for (std::size_t i = 0; i < len; ++i) data[base + i * s] = buf[i];
  }
}

}  // namespace

ComplexGrid wavelet_forward(const ComplexGrid& image, int levels) {
  check_wavelet_levels(image.shape(), levels);
  ComplexGrid out = image;
  Shape extent = image.shape();
  for (int l = 0; l < levels; ++l) {
    for (std::size_t a = 0; a < extent.size(); ++a) haar_axis(out.values(), out.shape(), extent, a, false);
    for (auto& e : extent) e /= 2;
  }
  return out;
}

ComplexGrid wavelet_adjoint(const ComplexGrid& coeffs, int levels) {
  check_wavelet_levels(coeffs.shape(), levels);
  ComplexGrid out = coeffs;
  for (int l = levels - 1; l >= 0; --l) {
    Shape extent = coeffs.shape();
    for (auto& e : extent) e >>= l;
    for (std::size_t a = extent.size(); a-- > 0;) haar_axis(out.values(), out.shape(), extent, a, true);
  }
  return out;
}

}  // namespace isgrid
