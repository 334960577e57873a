#include "isgrid/kgrid.hpp"

#include <cmath>

#include "isgrid/fft.hpp"

namespace isgrid {

KSpaceGridder::KSpaceGridder(GriddingPlan plan, std::vector<double> trajectory, std::vector<double> weights)
    : plan_(std::move(plan)), trajectory_(std::move(trajectory)), weights_(std::move(weights)) {
  const std::size_t d = plan_.ndim();
  if (trajectory_.size() % d != 0) throw ShapeError("trajectory length is not a multiple of the grid rank");
  if (weights_.size() != trajectory_.size() / d)
    throw ShapeError("density weight count " + std::to_string(weights_.size()) + " != trajectory count " +
                     std::to_string(trajectory_.size() / d));
  for (double w : weights_)
    if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("density weights must be finite and >= 0");
  table_ = SpreadTable(plan_.kernel, plan_.oversampled_shape,
                       to_oversampled_positions(trajectory_, plan_.grid_shape, plan_.oversampled_shape));
}

KSpaceGridder::KSpaceGridder(GriddingPlan plan, std::vector<double> trajectory)
    : KSpaceGridder(plan, trajectory, std::vector<double>(trajectory.size() / std::max<std::size_t>(plan.ndim(), 1), 1.0)) {}

ComplexGrid KSpaceGridder::project_core(std::span<const Complex> samples) const {
  if (samples.size() != count())
    throw ShapeError("sample count " + std::to_string(samples.size()) + " != trajectory count " +
                     std::to_string(count()));
  std::vector<Complex> weighted(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) weighted[j] = weights_[j] * samples[j];
  ComplexGrid grid(plan_.oversampled_shape, SpaceTag::kspace);
  table_.scatter(weighted, grid.data());
  return grid;
}

std::vector<Complex> KSpaceGridder::backproject_core(const ComplexGrid& oversampled) const {
  if (oversampled.shape() != plan_.oversampled_shape)
    throw ShapeError("backprojection grid " + to_string(oversampled.shape()) + " != oversampled shape " +
                     to_string(plan_.oversampled_shape));
  std::vector<Complex> out(count());
  table_.gather(oversampled.data(), out);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= weights_[j];
  return out;
}

ComplexGrid KSpaceGridder::forward(std::span<const Complex> samples) const {
  ComplexGrid grid = project_core(samples);
  fft_unitary_inplace(grid.data(), grid.shape(), FftDirection::inverse);
  grid.set_space_tag(SpaceTag::image);
  ComplexGrid image = crop_center(grid, plan_.grid_shape);
  for (std::size_t i = 0; i < image.size(); ++i) image[i] *= plan_.scale * plan_.deapod_image[i];
  return image;
}

std::vector<Complex> KSpaceGridder::inverse(const ComplexGrid& image) const {
  if (image.shape() != plan_.grid_shape)
    throw ShapeError("image " + to_string(image.shape()) + " != gridder shape " + to_string(plan_.grid_shape));
  ComplexGrid weighted = image;
  // Real weights: the conjugate deapodization equals the deapodization itself.
  for (std::size_t i = 0; i < weighted.size(); ++i) weighted[i] *= plan_.scale * plan_.deapod_image[i];
  ComplexGrid grid = zero_pad(weighted, plan_.oversampled_shape);
  fft_unitary_inplace(grid.data(), grid.shape(), FftDirection::forward);
  grid.set_space_tag(SpaceTag::kspace);
  return backproject_core(grid);
}

}  // namespace isgrid
