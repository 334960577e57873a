#include "isgrid/igrid.hpp"

#include <algorithm>
#include <cmath>

#include "isgrid/fft.hpp"

namespace isgrid {

DisplacementField::DisplacementField(Shape shape_, std::vector<double> offsets_)
    : shape(std::move(shape_)), offsets(std::move(offsets_)) {
  validate();
}

DisplacementField DisplacementField::zeros(const Shape& shape) {
  return DisplacementField(shape, std::vector<double>(numel(shape) * shape.size(), 0.0));
}

bool DisplacementField::is_zero() const {
  return std::all_of(offsets.begin(), offsets.end(), [](double v) { return v == 0.0; });
}

double DisplacementField::max_abs() const {
  double m = 0;
  for (double v : offsets) m = std::max(m, std::abs(v));
  return m;
}

DisplacementField DisplacementField::negated() const {
  DisplacementField out = *this;
  for (double& v : out.offsets) v = -v;
  return out;
}

void DisplacementField::validate() const {
  validate_shape(shape, false);
  if (offsets.size() != numel(shape) * shape.size())
    throw ShapeError("displacement field has " + std::to_string(offsets.size()) + " entries, expected " +
                     std::to_string(numel(shape) * shape.size()) + " for shape " + to_string(shape));
  for (double v : offsets)
    if (!std::isfinite(v)) throw std::invalid_argument("displacement field contains a non-finite entry");
}

namespace {

std::vector<double> warped_centred_coords(const DisplacementField& field) {
  const std::size_t d = field.ndim();
  const auto st = strides(field.shape);
  std::vector<double> out(field.offsets.size());
  for (std::size_t v = 0; v < field.voxels(); ++v) {
    for (std::size_t a = 0; a < d; ++a) {
      const auto idx = static_cast<double>((v / st[a]) % field.shape[a]);
      out[v * d + a] = idx - 0.5 * static_cast<double>(field.shape[a]) + field.offsets[v * d + a];
    }
  }
  return out;
}

}  // namespace

ImageGridder::ImageGridder(GriddingPlan plan, DisplacementField field)
    : plan_(std::move(plan)), field_(std::move(field)) {
  field_.validate();
  if (field_.shape != plan_.grid_shape)
    throw ShapeError("field shape " + to_string(field_.shape) + " != plan grid " + to_string(plan_.grid_shape));
  warped_ = to_oversampled_positions(warped_centred_coords(field_), plan_.grid_shape, plan_.oversampled_shape);
  table_ = SpreadTable(plan_.kernel, plan_.oversampled_shape, warped_);
}

ImageGridder::ImageGridder(const KernelSpec& kernel, DisplacementField field)
    : ImageGridder(make_plan(Shape(field.shape), kernel), DisplacementField(field)) {}

ComplexGrid ImageGridder::forward(const ComplexGrid& image) const {
  if (image.shape() != plan_.grid_shape)
    throw ShapeError("image " + to_string(image.shape()) + " != field shape " + to_string(plan_.grid_shape));
  ComplexGrid spectrum = fft_unitary(image, FftDirection::forward);
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= plan_.scale * plan_.deapod_kspace[i];
  ComplexGrid os = zero_pad(spectrum, plan_.oversampled_shape);
  fft_unitary_inplace(os.data(), os.shape(), FftDirection::inverse);
  ComplexGrid out(plan_.grid_shape, SpaceTag::image);
  table_.gather(os.data(), out.data());
  return out;
}

ComplexGrid ImageGridder::adjoint(const ComplexGrid& warped) const {
  if (warped.shape() != plan_.grid_shape)
    throw ShapeError("image " + to_string(warped.shape()) + " != field shape " + to_string(plan_.grid_shape));
  ComplexGrid os(plan_.oversampled_shape, SpaceTag::image);
  table_.scatter(warped.data(), os.data());
  fft_unitary_inplace(os.data(), os.shape(), FftDirection::forward);
  ComplexGrid spectrum = crop_center(os, plan_.grid_shape);
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= plan_.scale * plan_.deapod_kspace[i];
  fft_unitary_inplace(spectrum.data(), spectrum.shape(), FftDirection::inverse);
  spectrum.set_space_tag(SpaceTag::image);
  return spectrum;
}

ComplexGrid warp_oracle(const ComplexGrid& image, const DisplacementField& field, InterpMethod method) {
  if (image.shape() != field.shape)
    throw ShapeError("image " + to_string(image.shape()) + " != field shape " + to_string(field.shape));
  const Shape& shape = image.shape();
  const std::size_t d = shape.size();
  const auto st = strides(shape);
  ComplexGrid out(shape, image.space_tag());

  auto wrap = [](long i, long n) { return static_cast<std::size_t>(((i % n) + n) % n); };

  for (std::size_t v = 0; v < image.size(); ++v) {
    std::vector<double> pos(d);
    for (std::size_t a = 0; a < d; ++a)
      pos[a] = static_cast<double>((v / st[a]) % shape[a]) + field.offsets[v * d + a];

    if (method == InterpMethod::nearest) {
      std::size_t flat = 0;
      for (std::size_t a = 0; a < d; ++a)
        flat += wrap(std::lround(pos[a]), static_cast<long>(shape[a])) * st[a];
      out[v] = image[flat];
      continue;
    }

    std::vector<long> base(d);
    std::vector<double> frac(d);
    for (std::size_t a = 0; a < d; ++a) {
      const double f = std::floor(pos[a]);
      base[a] = static_cast<long>(f);
      frac[a] = pos[a] - f;
    }
    Complex acc{};
    for (std::size_t corner = 0; corner < (1u << d); ++corner) {
      double w = 1.0;
      std::size_t flat = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const bool up = (corner >> a) & 1u;
        w *= up ? frac[a] : 1.0 - frac[a];
        flat += wrap(base[a] + (up ? 1 : 0), static_cast<long>(shape[a])) * st[a];
      }
      if (w != 0.0) acc += w * image[flat];
    }
    out[v] = acc;
  }
  return out;
}

}  // namespace isgrid
