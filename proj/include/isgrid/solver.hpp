#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "isgrid/grid.hpp"
#include "isgrid/sense.hpp"

namespace isgrid {

/// A forward/adjoint pair from images on `domain` to flat complex data.
struct LinearOperator {
  Shape domain;
  std::function<std::vector<Complex>(const ComplexGrid&)> apply;
  std::function<ComplexGrid(std::span<const Complex>)> apply_adjoint;
};

LinearOperator make_operator(const StackedSenseModel& model);
LinearOperator make_operator(std::shared_ptr<const ImageGridder> warp);
LinearOperator identity_operator(const Shape& shape);

struct SolverConfig {
  double lambda = 0.0;
  int max_iters = 400;
  std::optional<double> step_size;  // empty: 0.9 / power-iteration estimate of ||A||^2
  int wavelet_levels = 3;
  std::optional<double> tol;        // stop when ||x_k - x_{k-1}|| / ||x_k|| < tol
  int power_iters = 30;

  void validate(const Shape& shape) const;
};

struct SolveReport {
  std::vector<double> objective_trace;  // ||y - A x||^2 + lambda ||W x||_1 per iteration
  int iterations_run = 0;
  double final_relative_change = 0.0;
  double step_size = 0.0;
};

/// FISTA diverged (non-finite objective); carries the trace up to the failure.
class SolverDivergence : public std::runtime_error {
public:
  SolverDivergence(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

private:
  SolveReport report_;
};

/// Complex soft threshold: |v| shrunk by t and clipped at zero, phase kept.
Complex soft_threshold(Complex v, double t);
void soft_threshold(std::span<Complex> coeffs, double t);

/// Largest eigenvalue of A^H A by power iteration from a fixed pseudo-random start.
double estimate_normal_norm(const LinearOperator& op, int iterations);

struct SolveResult {
  ComplexGrid image;
  SolveReport report;
};

/// Plain FISTA (no restart) for argmin ||y - A x||^2 + lambda ||W x||_1, W orthonormal Haar.
/// Steps on the halved objective: gradient A^H(Ax - y), threshold step * lambda / 2.
SolveResult fista_solve(const LinearOperator& op, std::span<const Complex> y, const SolverConfig& config,
                        const ComplexGrid* initial = nullptr);
SolveResult fista_solve(const StackedSenseModel& model, const SolverConfig& config);

}  // namespace isgrid
