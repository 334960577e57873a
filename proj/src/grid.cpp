#include "isgrid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isgrid {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return shape.empty() ? 0 : n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

std::string to_string(SpaceTag tag) { return tag == SpaceTag::image ? "image" : "kspace"; }

SpaceTag space_tag_from_string(const std::string& s) {
  if (s == "image") return SpaceTag::image;
  if (s == "kspace") return SpaceTag::kspace;
  throw std::invalid_argument("unknown space tag '" + s + "'");
}

void validate_shape(const Shape& shape, bool require_even) {
  if (shape.empty() || shape.size() > 3)
    throw ShapeError("grid must have 1 to 3 axes, got " + std::to_string(shape.size()));
  for (auto s : shape) {
    if (s < 1) throw ShapeError("grid axes must be >= 1: " + to_string(shape));
    if (require_even && s % 2 != 0)
      throw ShapeError("FFT-bearing grid axes must be even: " + to_string(shape));
  }
}

ComplexGrid::ComplexGrid(Shape shape, SpaceTag tag)
    : shape_(std::move(shape)), data_(numel(shape_)), tag_(tag) {
  validate_shape(shape_, false);
}

ComplexGrid::ComplexGrid(Shape shape, std::vector<Complex> data, SpaceTag tag)
    : shape_(std::move(shape)), data_(std::move(data)), tag_(tag) {
  validate_shape(shape_, false);
  if (data_.size() != numel(shape_))
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     to_string(shape_));
}

void NonCartesianSet::validate() const {
  if (dim == 0 || dim > 3) throw ShapeError("non-Cartesian set must have 1 to 3 coordinate axes");
  if (coords.size() % dim != 0) throw ShapeError("coordinate list is not a multiple of dim");
  if (values.size() != count())
    throw ShapeError("coordinate count " + std::to_string(count()) + " != value count " +
                     std::to_string(values.size()));
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw ShapeError("inner product of unequal lengths");
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2(std::span<const Complex> a) {
  double s = 0;
  for (const auto& v : a) s += std::norm(v);
  return std::sqrt(s);
}

double max_abs(std::span<const Complex> a) {
  double m = 0;
  for (const auto& v : a) m = std::max(m, std::abs(v));
  return m;
}

double nrmse(std::span<const Complex> x, std::span<const Complex> ref) {
  if (x.size() != ref.size()) throw ShapeError("nrmse of unequal lengths");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += std::norm(x[i] - ref[i]);
    den += std::norm(ref[i]);
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

double max_rel_error(std::span<const Complex> x, std::span<const Complex> ref) {
  if (x.size() != ref.size()) throw ShapeError("error of unequal lengths");
  double num = 0;
  for (std::size_t i = 0; i < x.size(); ++i) num = std::max(num, std::abs(x[i] - ref[i]));
  const double den = max_abs(ref);
  return den > 0 ? num / den : num;
}

void axpy(Complex alpha, std::span<const Complex> x, std::span<Complex> y) {
  if (x.size() != y.size()) throw ShapeError("axpy of unequal lengths");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<Complex> x, Complex alpha) {
  for (auto& v : x) v *= alpha;
}

std::vector<std::size_t> strides(const Shape& shape) {
  std::vector<std::size_t> st(shape.size(), 1);
  for (std::size_t a = shape.size(); a-- > 1;) st[a - 1] = st[a] * shape[a];
  return st;
}

}  // namespace isgrid
