#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "isgrid/grid.hpp"
#include "isgrid/igrid.hpp"

namespace isgrid {

struct CheckResult {
  std::string name;
  double worst = 0.0;      // largest discrepancy seen over all trials
  double tolerance = 0.0;
  int trials = 0;
  bool passed() const { return worst < tolerance; }
};

struct SelftestOptions {
  int trials = 3;
  std::uint64_t seed = 7;
  bool inject_fault = false;  // perturbs one spreading tap in every k-space gridder
};

std::vector<CheckResult> run_selftest(const SelftestOptions& options);
/// One line per check; returns true iff all passed.
bool print_report(const std::vector<CheckResult>& checks, std::ostream& os);

// Shared random inputs and measures.
ComplexGrid random_grid(const Shape& shape, std::mt19937_64& rng);
std::vector<Complex> random_vector(std::size_t n, std::mt19937_64& rng);
/// Uniform coordinates covering the centred k-space extent of `shape`.
std::vector<double> random_trajectory(const Shape& shape, std::size_t count, std::mt19937_64& rng);
/// Independent uniform offsets in [-max_abs, max_abs] per voxel and axis.
DisplacementField random_field(const Shape& shape, double max_abs, std::mt19937_64& rng);

/// |<A x, y> - <x, A^H y>| / (||A x|| ||y||).
double adjoint_discrepancy(Complex lhs, Complex rhs, double norm_ax, double norm_y);

/// Direct centred NDFT: y_j = prod(N)^(-1/2) sum_n m[n] exp(-2 pi i k_j . (n - N/2) / N).
std::vector<Complex> direct_ndft(const ComplexGrid& image, std::span<const double> coords);
/// Its adjoint.
ComplexGrid direct_ndft_adjoint(const Shape& shape, std::span<const double> coords, std::span<const Complex> samples);

}  // namespace isgrid
