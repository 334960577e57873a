#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isgrid {

using Complex = std::complex<double>;

/// Per-axis sample counts, slowest axis first (row-major).
using Shape = std::vector<std::size_t>;

enum class SpaceTag { image, kspace };

/// Thrown for shape/size disagreements between operands.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);
std::string to_string(SpaceTag tag);
SpaceTag space_tag_from_string(const std::string& s);

/// Checks 1..3 axes, every count >= 1, and (when require_even) every count even.
void validate_shape(const Shape& shape, bool require_even);

/// Complex samples on a Cartesian grid, row-major, centre of each axis at N/2.
class ComplexGrid {
public:
  ComplexGrid() = default;
  ComplexGrid(Shape shape, SpaceTag tag = SpaceTag::image);
  ComplexGrid(Shape shape, std::vector<Complex> data, SpaceTag tag = SpaceTag::image);

  const Shape& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  SpaceTag space_tag() const { return tag_; }
  void set_space_tag(SpaceTag tag) { tag_ = tag; }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }
  std::vector<Complex>& values() { return data_; }
  const std::vector<Complex>& values() const { return data_; }

  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }

  bool operator==(const ComplexGrid&) const = default;

private:
  Shape shape_;
  std::vector<Complex> data_;
  SpaceTag tag_ = SpaceTag::image;
};

/// Coordinates (flattened, `dim` reals per sample) paired with complex values.
/// Coordinates are in Cartesian grid units with the grid centre at the origin.
struct NonCartesianSet {
  std::size_t dim = 0;
  std::vector<double> coords;
  std::vector<Complex> values;

  std::size_t count() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> coord(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  void validate() const;
};

// Vector helpers over raw complex spans.
Complex inner(std::span<const Complex> a, std::span<const Complex> b);  // sum conj(a) * b
double norm2(std::span<const Complex> a);
double max_abs(std::span<const Complex> a);
/// ||x - ref|| / ||ref||; returns ||x|| when ref is zero.
double nrmse(std::span<const Complex> x, std::span<const Complex> ref);
double max_rel_error(std::span<const Complex> x, std::span<const Complex> ref);

void axpy(Complex alpha, std::span<const Complex> x, std::span<Complex> y);
void scale(std::span<Complex> x, Complex alpha);

/// Row-major strides for `shape`.
std::vector<std::size_t> strides(const Shape& shape);

}  // namespace isgrid
