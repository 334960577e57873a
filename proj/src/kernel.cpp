#include "isgrid/kernel.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace isgrid {

double beatty_beta(int width, double oversampling) {
  const double w = width, s = oversampling;
  const double arg = (w * w) / (s * s) * (s - 0.5) * (s - 0.5) - 0.8;
  if (!(arg > 0))
    throw std::invalid_argument("no positive Kaiser-Bessel beta for width " + std::to_string(width) +
                                " and oversampling " + std::to_string(oversampling));
  return std::numbers::pi * std::sqrt(arg);
}

KernelSpec KernelSpec::make(int width, double oversampling) {
  KernelSpec k;
  k.width = width;
  k.oversampling = oversampling;
  k.beta = beatty_beta(width, oversampling);
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (width < 2) throw std::invalid_argument("kernel width must be >= 2");
  if (!(oversampling >= 1.0)) throw std::invalid_argument("oversampling must be >= 1");
  if (!(beta > 0) || !std::isfinite(beta)) throw std::invalid_argument("kernel beta must be > 0");
}

double kernel_eval(const KernelSpec& spec, double distance) {
  const double half = 0.5 * spec.width;
  const double t = std::abs(distance) / half;
  if (t >= 1.0) return 0.0;
  const double arg = spec.beta * std::sqrt(1.0 - t * t);
  return (std::cyl_bessel_i(0.0, arg) - 1.0) / (std::cyl_bessel_i(0.0, spec.beta) - 1.0);
}

double kernel_transform(const KernelSpec& spec, double nu) {
  // Even integrand: 2 * int_0^{W/2} k(u) cos(2 pi u nu) du. The window is an entire
  // function of u^2 inside the support, so 30 nodes converge to rounding.
  const double half = 0.5 * spec.width;
  auto f = [&](double u) { return kernel_eval(spec, u) * std::cos(2.0 * std::numbers::pi * u * nu); };
  return 2.0 * boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, half);
}

GriddingPlan make_plan(const Shape& grid_shape, const KernelSpec& kernel) {
  validate_shape(grid_shape, true);
  kernel.validate();

  GriddingPlan plan;
  plan.kernel = kernel;
  plan.grid_shape = grid_shape;
  plan.oversampled_shape.resize(grid_shape.size());
  double g_total = 1, n_total = 1;
  std::vector<std::vector<double>> axis_weights(grid_shape.size());
  for (std::size_t a = 0; a < grid_shape.size(); ++a) {
    auto g = static_cast<std::size_t>(std::lround(kernel.oversampling * grid_shape[a]));
    if (g % 2) ++g;
    plan.oversampled_shape[a] = g;
    g_total *= static_cast<double>(g);
    n_total *= static_cast<double>(grid_shape[a]);

    const auto n = static_cast<long>(grid_shape[a]);
    axis_weights[a].resize(grid_shape[a]);
    for (long i = 0; i < n; ++i) {
      const double nu = static_cast<double>(i - n / 2) / static_cast<double>(g);
      const double c = kernel_transform(kernel, nu);
      if (!(std::abs(c) >= 1e-12) || !std::isfinite(c))
        throw std::domain_error("deapodization denominator vanishes; kernel too narrow for grid " +
                                to_string(grid_shape));
      axis_weights[a][i] = 1.0 / c;
    }
  }
  plan.scale = std::sqrt(g_total / n_total);

  const std::size_t total = numel(grid_shape);
  const auto st = strides(grid_shape);
  plan.deapod_image.assign(total, 1.0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    double w = 1.0;
    for (std::size_t a = 0; a < grid_shape.size(); ++a) w *= axis_weights[a][(idx / st[a]) % grid_shape[a]];
    if (!(w > 0) || !std::isfinite(w))
      throw std::domain_error("deapodization weight is not positive and finite");
    plan.deapod_image[idx] = w;
  }
  plan.deapod_kspace = plan.deapod_image;
  return plan;
}

}  // namespace isgrid
