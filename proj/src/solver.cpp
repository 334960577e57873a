#include "isgrid/solver.hpp"

#include <cmath>
#include <random>

#include "isgrid/wavelet.hpp"

namespace isgrid {

LinearOperator make_operator(const StackedSenseModel& model) {
  model.validate();
  auto shared = std::make_shared<StackedSenseModel>(model);
  LinearOperator op;
  op.domain = model.shape();
  op.apply = [shared](const ComplexGrid& x) { return flatten(stacked_forward(*shared, x)); };
  op.apply_adjoint = [shared](std::span<const Complex> y) { return stacked_adjoint(*shared, unflatten(*shared, y)); };
  return op;
}

LinearOperator make_operator(std::shared_ptr<const ImageGridder> warp) {
  LinearOperator op;
  op.domain = warp->shape();
  op.apply = [warp](const ComplexGrid& x) { return warp->forward(x).values(); };
  op.apply_adjoint = [warp](std::span<const Complex> y) {
    return warp->adjoint(ComplexGrid(warp->shape(), std::vector<Complex>(y.begin(), y.end())));
  };
  return op;
}

LinearOperator identity_operator(const Shape& shape) {
  LinearOperator op;
  op.domain = shape;
  op.apply = [](const ComplexGrid& x) { return x.values(); };
  op.apply_adjoint = [shape](std::span<const Complex> y) {
    return ComplexGrid(shape, std::vector<Complex>(y.begin(), y.end()));
  };
  return op;
}

void SolverConfig::validate(const Shape& shape) const {
  if (!(lambda >= 0)) throw std::invalid_argument("lambda must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (step_size && !(*step_size > 0)) throw std::invalid_argument("explicit step size must be > 0");
  if (tol && !(*tol >= 0)) throw std::invalid_argument("tol must be >= 0");
  if (power_iters < 30) throw std::invalid_argument("power iteration needs >= 30 iterations");
  check_wavelet_levels(shape, wavelet_levels);
}

Complex soft_threshold(Complex v, double t) {
  const double mag = std::abs(v);
  if (mag <= t) return {0.0, 0.0};
  return v * ((mag - t) / mag);
}

void soft_threshold(std::span<Complex> coeffs, double t) {
  if (t < 0) throw std::invalid_argument("threshold must be >= 0");
  for (auto& c : coeffs) c = soft_threshold(c, t);
}

double estimate_normal_norm(const LinearOperator& op, int iterations) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  ComplexGrid x(op.domain);
  for (auto& v : x.values()) v = {gauss(rng), gauss(rng)};
  scale(x.data(), 1.0 / norm2(x.data()));
  double estimate = 0;
  for (int i = 0; i < iterations; ++i) {
    ComplexGrid next = op.apply_adjoint(op.apply(x));
    estimate = norm2(next.data());
    if (!(estimate > 0)) return 0.0;
    scale(next.data(), 1.0 / estimate);
    x = std::move(next);
  }
  return estimate;
}

namespace {

double l1(const ComplexGrid& x, int levels) {
  const ComplexGrid w = wavelet_forward(x, levels);
  double s = 0;
  for (const auto& v : w.values()) s += std::abs(v);
  return s;
}

double residual_sq(std::span<const Complex> ax, std::span<const Complex> y) {
  double s = 0;
  for (std::size_t i = 0; i < ax.size(); ++i) s += std::norm(y[i] - ax[i]);
  return s;
}

}  // namespace

SolveResult fista_solve(const LinearOperator& op, std::span<const Complex> y, const SolverConfig& config,
                        const ComplexGrid* initial) {
  config.validate(op.domain);
  SolveReport report;
  if (config.step_size) {
    report.step_size = *config.step_size;
  } else {
    const double l = estimate_normal_norm(op, config.power_iters);
    report.step_size = l > 0 ? 0.9 / l : 1.0;
  }
  const double tau = report.step_size;
  const double threshold = 0.5 * config.lambda * tau;

  ComplexGrid x = initial ? *initial : ComplexGrid(op.domain);
  if (x.shape() != op.domain) throw ShapeError("initial image does not match operator domain");
  std::vector<Complex> ax = op.apply(x);
  if (ax.size() != y.size())
    throw ShapeError("data has " + std::to_string(y.size()) + " samples, operator produces " + std::to_string(ax.size()));
  ComplexGrid z = x;
  std::vector<Complex> az = ax;
  double t = 1.0;

  for (int k = 0; k < config.max_iters; ++k) {
    std::vector<Complex> r(az.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = az[i] - y[i];
    const ComplexGrid grad = op.apply_adjoint(r);

    ComplexGrid v = z;
    axpy(-tau, grad.data(), v.data());
    ComplexGrid x_new = v;
    if (threshold > 0) {
      ComplexGrid w = wavelet_forward(v, config.wavelet_levels);
      soft_threshold(w.data(), threshold);
      x_new = wavelet_adjoint(w, config.wavelet_levels);
    }
    std::vector<Complex> ax_new = op.apply(x_new);

    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_new;

    double diff = 0;
    for (std::size_t i = 0; i < x_new.size(); ++i) diff += std::norm(x_new[i] - x[i]);
    const double xn = norm2(x_new.data());
    report.final_relative_change = xn > 0 ? std::sqrt(diff) / xn : std::sqrt(diff);

    const double objective =
        residual_sq(ax_new, y) + (config.lambda > 0 ? config.lambda * l1(x_new, config.wavelet_levels) : 0.0);
    report.objective_trace.push_back(objective);
    report.iterations_run = k + 1;
    if (!std::isfinite(objective))
      throw SolverDivergence("FISTA objective became non-finite at iteration " + std::to_string(k + 1), report);

    for (std::size_t i = 0; i < z.size(); ++i) z[i] = x_new[i] + beta * (x_new[i] - x[i]);
    for (std::size_t i = 0; i < az.size(); ++i) az[i] = ax_new[i] + beta * (ax_new[i] - ax[i]);
    x = std::move(x_new);
    ax = std::move(ax_new);
    t = t_new;

    if (config.tol && report.final_relative_change < *config.tol) break;
  }
  return {std::move(x), std::move(report)};
}

SolveResult fista_solve(const StackedSenseModel& model, const SolverConfig& config) {
  const LinearOperator op = make_operator(model);
  const std::vector<Complex> y = flatten(model.data);
  return fista_solve(op, y, config);
}

}  // namespace isgrid
