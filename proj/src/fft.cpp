#include "isgrid/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace isgrid {
namespace {

// fftw planning is not thread-safe; execution with new arrays is. Plans live for the process.
class PlanCache {
public:
  fftw_plan get(const Shape& shape, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(shape, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<int> n(shape.begin(), shape.end());
    const std::size_t total = numel(shape);
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(static_cast<int>(n.size()), n.data(), in, out, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (!p) throw std::runtime_error("fftw planning failed for shape " + to_string(shape));
    plans_.emplace(key, p);
    return p;
  }

private:
  std::mutex mutex_;
  std::map<std::pair<Shape, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// (-1)^(sum of indices) checkerboard; with even axes it converts an uncentred DFT into
// the centred one up to the global sign (-1)^(sum N/2).
void checkerboard(std::span<Complex> data, const Shape& shape, double global) {
  const auto st = strides(shape);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t parity = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) parity += (i / st[a]) % shape[a];
    data[i] *= (parity % 2 ? -global : global);
  }
}

}  // namespace

void fft_unitary_inplace(std::span<Complex> data, const Shape& shape, FftDirection direction) {
  validate_shape(shape, true);
  if (data.size() != numel(shape)) throw ShapeError("fft buffer does not match shape " + to_string(shape));
  const int sign = direction == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = plan_cache().get(shape, sign);

  std::size_t half_sum = 0;
  for (auto s : shape) half_sum += s / 2;
  const double global = (half_sum % 2 ? -1.0 : 1.0) / std::sqrt(static_cast<double>(data.size()));

  std::vector<Complex> tmp(data.begin(), data.end());
  checkerboard(tmp, shape, 1.0);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(tmp.data()),
                   reinterpret_cast<fftw_complex*>(data.data()));
  checkerboard(data, shape, global);
}

ComplexGrid fft_unitary(const ComplexGrid& grid, FftDirection direction) {
  ComplexGrid out = grid;
  fft_unitary_inplace(out.data(), out.shape(), direction);
  out.set_space_tag(grid.space_tag() == SpaceTag::image ? SpaceTag::kspace : SpaceTag::image);
  return out;
}

namespace {

// Copies the centred overlap of the smaller and larger grid in the direction given by `pad`.
void copy_centered(const ComplexGrid& src, ComplexGrid& dst, bool pad) {
  const Shape& small = pad ? src.shape() : dst.shape();
  const Shape& large = pad ? dst.shape() : src.shape();
  const auto st_small = strides(small);
  const auto st_large = strides(large);
  const std::size_t total = numel(small);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t j = 0;
    for (std::size_t a = 0; a < small.size(); ++a) {
      const std::size_t idx = (i / st_small[a]) % small[a];
      j += (idx + (large[a] - small[a]) / 2) * st_large[a];
    }
    if (pad)
      dst[j] = src[i];
    else
      dst[i] = src[j];
  }
}

void check_pair(const Shape& small, const Shape& large, const char* what) {
  if (small.size() != large.size())
    throw ShapeError(std::string(what) + ": dimensionality mismatch " + to_string(small) + " vs " +
                     to_string(large));
  for (std::size_t a = 0; a < small.size(); ++a) {
    if (small[a] > large[a] || (large[a] - small[a]) % 2 != 0)
      throw ShapeError(std::string(what) + ": incompatible shapes " + to_string(small) + " and " +
                       to_string(large));
  }
}

}  // namespace

ComplexGrid zero_pad(const ComplexGrid& grid, const Shape& target_shape) {
  check_pair(grid.shape(), target_shape, "zero_pad");
  ComplexGrid out(target_shape, grid.space_tag());
  copy_centered(grid, out, true);
  return out;
}

ComplexGrid crop_center(const ComplexGrid& grid, const Shape& target_shape) {
  check_pair(target_shape, grid.shape(), "crop_center");
  ComplexGrid out(target_shape, grid.space_tag());
  copy_centered(grid, out, false);
  return out;
}

}  // namespace isgrid
