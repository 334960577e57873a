#include "isgrid/spread.hpp"

#include <cmath>

namespace isgrid {

SpreadTable::SpreadTable(const KernelSpec& kernel, const Shape& oversampled_shape,
                         std::span<const double> positions)
    : shape_(oversampled_shape), width_(static_cast<std::size_t>(kernel.width)) {
  validate_shape(shape_, false);
  const std::size_t d = shape_.size();
  if (positions.size() % d != 0) throw ShapeError("position list is not a multiple of the grid rank");
  count_ = positions.size() / d;
  index_.resize(count_ * d * width_);
  weight_.resize(count_ * d * width_);
  const auto st = strides(shape_);
  const double half = 0.5 * kernel.width;

  for (std::size_t j = 0; j < count_; ++j) {
    for (std::size_t a = 0; a < d; ++a) {
      const double p = positions[j * d + a];
      if (!std::isfinite(p)) throw std::invalid_argument("non-finite gridding coordinate");
      const auto g = static_cast<long>(shape_[a]);
      const long first = static_cast<long>(std::floor(p - half)) + 1;
      for (std::size_t t = 0; t < width_; ++t) {
        const long node = first + static_cast<long>(t);
        const long wrapped = ((node % g) + g) % g;
        index_[tap_offset(j, a) + t] = static_cast<std::size_t>(wrapped) * st[a];
        weight_[tap_offset(j, a) + t] = kernel_eval(kernel, static_cast<double>(node) - p);
      }
    }
  }
}

void SpreadTable::scatter(std::span<const Complex> values, std::span<Complex> grid) const {
  if (values.size() != count_) throw ShapeError("scatter: value count does not match point count");
  if (grid.size() != numel(shape_)) throw ShapeError("scatter: grid size mismatch");
  const std::size_t w = width_;
  const std::size_t d = shape_.size();
  for (std::size_t j = 0; j < count_; ++j) {
    const Complex v = values[j];
    const std::size_t* ix = &index_[tap_offset(j, 0)];
    const double* wt = &weight_[tap_offset(j, 0)];
    double w0 = wt[0];
    if (fault_ && j == 0) w0 = -w0 + 0.5;
    if (d == 1) {
      grid[ix[0]] += w0 * v;
      for (std::size_t t = 1; t < w; ++t) grid[ix[t]] += wt[t] * v;
    } else if (d == 2) {
      for (std::size_t t0 = 0; t0 < w; ++t0) {
        const Complex v0 = (t0 == 0 ? w0 : wt[t0]) * v;
        for (std::size_t t1 = 0; t1 < w; ++t1) grid[ix[t0] + ix[w + t1]] += wt[w + t1] * v0;
      }
    } else {
      for (std::size_t t0 = 0; t0 < w; ++t0) {
        const Complex v0 = (t0 == 0 ? w0 : wt[t0]) * v;
        for (std::size_t t1 = 0; t1 < w; ++t1) {
          const Complex v1 = wt[w + t1] * v0;
          const std::size_t base = ix[t0] + ix[w + t1];
          for (std::size_t t2 = 0; t2 < w; ++t2) grid[base + ix[2 * w + t2]] += wt[2 * w + t2] * v1;
        }
      }
    }
  }
}

void SpreadTable::gather(std::span<const Complex> grid, std::span<Complex> out) const {
  if (out.size() != count_) throw ShapeError("gather: output count does not match point count");
  if (grid.size() != numel(shape_)) throw ShapeError("gather: grid size mismatch");
  const std::size_t w = width_;
  const std::size_t d = shape_.size();
  const auto n = static_cast<long>(count_);
#pragma omp parallel for schedule(static)
  for (long jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const std::size_t* ix = &index_[tap_offset(j, 0)];
    const double* wt = &weight_[tap_offset(j, 0)];
    Complex acc{};
    if (d == 1) {
      for (std::size_t t = 0; t < w; ++t) acc += wt[t] * grid[ix[t]];
    } else if (d == 2) {
      for (std::size_t t0 = 0; t0 < w; ++t0) {
        Complex row{};
        for (std::size_t t1 = 0; t1 < w; ++t1) row += wt[w + t1] * grid[ix[t0] + ix[w + t1]];
        acc += wt[t0] * row;
      }
    } else {
      for (std::size_t t0 = 0; t0 < w; ++t0) {
        Complex plane{};
        for (std::size_t t1 = 0; t1 < w; ++t1) {
          Complex row{};
          const std::size_t base = ix[t0] + ix[w + t1];
          for (std::size_t t2 = 0; t2 < w; ++t2) row += wt[2 * w + t2] * grid[base + ix[2 * w + t2]];
          plane += wt[w + t1] * row;
        }
        acc += wt[t0] * plane;
      }
    }
    out[j] = acc;
  }
}

std::vector<double> to_oversampled_positions(std::span<const double> centred, const Shape& grid_shape,
                                             const Shape& oversampled_shape) {
  const std::size_t d = grid_shape.size();
  if (centred.size() % d != 0) throw ShapeError("coordinate list is not a multiple of the grid rank");
  std::vector<double> out(centred.size());
  for (std::size_t i = 0; i < centred.size(); ++i) {
    const std::size_t a = i % d;
    const double s = static_cast<double>(oversampled_shape[a]) / static_cast<double>(grid_shape[a]);
    out[i] = s * centred[i] + 0.5 * static_cast<double>(oversampled_shape[a]);
  }
  return out;
}

}  // namespace isgrid
