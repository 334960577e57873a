#include "doctest.h"
#include "isgrid/fft.hpp"
#include "isgrid/kernel.hpp"
#include "isgrid/selftest.hpp"
#include "oracles.hpp"

using namespace isgrid;

TEST_CASE("kernel is zero outside its support and even") {
  const KernelSpec k = KernelSpec::make(4, 2.0);
  CHECK(kernel_eval(k, 2.5) == 0.0);
  CHECK(kernel_eval(k, -2.5) == 0.0);
  CHECK(kernel_eval(k, 0.7) == kernel_eval(k, -0.7));
  CHECK(kernel_eval(k, 2.0) == 0.0);
  // Continuous at the edge.
  CHECK(kernel_eval(k, 2.0 - 1e-9) < 1e-6);
}

TEST_CASE("kernel at zero matches the Bessel series") {
  const KernelSpec k = KernelSpec::make(4, 2.0);
  CHECK(k.beta == doctest::Approx(8.99615).epsilon(1e-5));
  for (double u : {0.0, 0.3, 1.1, 1.9}) {
    const double ref = oracle::kb_direct(k, u);
    CHECK(std::abs(kernel_eval(k, u) - ref) <= 1e-14 * std::max(1.0, ref));
  }
}

TEST_CASE("kernel spec validation") {
  KernelSpec k = KernelSpec::make();
  k.width = 1;
  CHECK_THROWS(k.validate());
  CHECK_THROWS(KernelSpec::make(4, 0.5));
}

TEST_CASE("plan deapodization weights are positive, finite and deterministic") {
  const auto a = make_plan({32, 32});
  const auto b = make_plan({32, 32});
  CHECK(a.oversampled_shape == Shape{64, 64});
  for (double w : a.deapod_image) {
    CHECK(w > 0);
    CHECK(std::isfinite(w));
  }
  CHECK(a.deapod_image == b.deapod_image);
  CHECK(a.deapod_kspace == b.deapod_kspace);
  CHECK(a.deapod_kspace == a.deapod_image);
}

TEST_CASE("deapodization matches the analytic Kaiser-Bessel transform") {
  const KernelSpec k = KernelSpec::make(4, 2.0);
  const auto plan = make_plan({32, 32}, k);
  const long double c0 = oracle::kb_transform_analytic(k, 0.0L);
  const double centre = plan.deapod_image[16 * 32 + 16];
  const double expected = static_cast<double>(1.0L / (c0 * c0));
  CHECK(std::abs(centre - expected) / expected < 1e-9);

  // Away from the centre too: index i sits at frequency (i - N/2) / G.
  for (long i : {0L, 5L, 27L}) {
    const long double ci = oracle::kb_transform_analytic(k, static_cast<long double>(i - 16) / 64.0L);
    const double w = plan.deapod_image[static_cast<std::size_t>(i) * 32 + 16];
    const double e = static_cast<double>(1.0L / (ci * c0));
    CHECK(std::abs(w - e) / e < 1e-9);
  }
}

TEST_CASE("plan rejects odd grids and kernels that are too narrow") {
  CHECK_THROWS_AS(make_plan({31, 32}), ShapeError);
  // A wide, nearly parabolic window has a transform zero inside the band.
  KernelSpec k = KernelSpec::make(8, 1.0);
  k.beta = 0.5;
  CHECK_THROWS_AS(make_plan({64}, k), std::domain_error);
}

TEST_CASE("fft of a centred delta is flat") {
  ComplexGrid g({8, 8});
  g[4 * 8 + 4] = 1.0;
  const auto f = fft_unitary(g, FftDirection::forward);
  CHECK(f.space_tag() == SpaceTag::kspace);
  for (const auto& v : f.values()) CHECK(std::abs(std::abs(v) - 1.0 / 8.0) < 1e-15);
  // Centred: DC of the delta has zero phase.
  CHECK(std::abs(f[4 * 8 + 4] - Complex(1.0 / 8.0)) < 1e-15);
}

TEST_CASE("fft is unitary") {
  std::mt19937_64 rng(3);
  for (const Shape& s : {Shape{64}, Shape{16, 32}, Shape{8, 16, 8}, Shape{64, 64, 64}}) {
    const auto x = random_grid(s, rng);
    const auto y = random_grid(s, rng);
    const auto fx = fft_unitary(x, FftDirection::forward);
    const auto fy = fft_unitary(y, FftDirection::forward);
    CHECK(nrmse(fft_unitary(fx, FftDirection::inverse).data(), x.data()) < 1e-13);
    CHECK(std::abs(norm2(fx.data()) - norm2(x.data())) / norm2(x.data()) < 1e-13);
    CHECK(std::abs(inner(fx.data(), fy.data()) - inner(x.data(), y.data())) / (norm2(x.data()) * norm2(y.data())) <
          1e-13);
  }
}

TEST_CASE("fft matches a direct centred DFT") {
  std::mt19937_64 rng(4);
  const auto x = random_grid({8, 6}, rng);
  const auto f = fft_unitary(x, FftDirection::forward);
  // Cartesian coordinates k - N/2 give the same sums as the NDFT oracle.
  std::vector<double> coords;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 6; ++b) {
      coords.push_back(a - 4);
      coords.push_back(b - 3);
    }
  CHECK(max_rel_error(f.data(), direct_ndft(x, coords)) < 1e-14);
}

TEST_CASE("zero pad and crop") {
  std::mt19937_64 rng(5);
  const auto x = random_grid({8, 8}, rng);
  const auto p = zero_pad(x, {16, 16});
  CHECK(crop_center(p, {8, 8}) == x);
  CHECK(p[4 * 16 + 4] == x[0]);
  CHECK(norm2(zero_pad(ComplexGrid({8, 8}), {16, 16}).data()) == 0.0);

  const auto y = random_grid({16, 16}, rng);
  const Complex lhs = inner(p.data(), y.data());
  const Complex rhs = inner(x.data(), crop_center(y, {8, 8}).data());
  CHECK(std::abs(lhs - rhs) / std::abs(lhs) < 1e-14);

  CHECK_THROWS_AS(zero_pad(x, {6, 8}), ShapeError);
  CHECK_THROWS_AS(crop_center(x, {16, 8}), ShapeError);
  CHECK_THROWS_AS(zero_pad(x, {8}), ShapeError);
}

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(ComplexGrid({4, 4}, std::vector<Complex>(15)), ShapeError);
  CHECK_THROWS_AS(validate_shape({0, 4}, false), ShapeError);
  CHECK_THROWS_AS(validate_shape({3, 4}, true), ShapeError);
  CHECK_THROWS_AS(validate_shape({2, 2, 2, 2}, false), ShapeError);
  CHECK_NOTHROW(validate_shape({3, 5}, false));
  CHECK(space_tag_from_string(to_string(SpaceTag::kspace)) == SpaceTag::kspace);

  NonCartesianSet s;
  s.dim = 2;
  s.coords = {0, 0, 1};
  s.values = {1.0};
  CHECK_THROWS(s.validate());
}
