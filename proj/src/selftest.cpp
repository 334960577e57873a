#include "isgrid/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "isgrid/fft.hpp"
#include "isgrid/kgrid.hpp"
#include "isgrid/sense.hpp"
#include "isgrid/sim.hpp"
#include "isgrid/wavelet.hpp"

namespace isgrid {

ComplexGrid random_grid(const Shape& shape, std::mt19937_64& rng) {
  return ComplexGrid(shape, random_vector(numel(shape), rng));
}

std::vector<Complex> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<Complex> v(n);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v;
}

std::vector<double> random_trajectory(const Shape& shape, std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> c(count * shape.size());
  for (std::size_t j = 0; j < count; ++j)
    for (std::size_t a = 0; a < shape.size(); ++a) c[j * shape.size() + a] = u(rng) * static_cast<double>(shape[a]);
  return c;
}

DisplacementField random_field(const Shape& shape, double max_abs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-max_abs, max_abs);
  DisplacementField f = DisplacementField::zeros(shape);
  for (auto& o : f.offsets) o = u(rng);
  return f;
}

double adjoint_discrepancy(Complex lhs, Complex rhs, double norm_ax, double norm_y) {
  const double denom = norm_ax * norm_y;
  return denom > 0 ? std::abs(lhs - rhs) / denom : std::abs(lhs - rhs);
}

std::vector<Complex> direct_ndft(const ComplexGrid& image, std::span<const double> coords) {
  const Shape& shape = image.shape();
  const std::size_t d = shape.size();
  const auto st = strides(shape);
  const std::size_t count = coords.size() / d;
  const double norm = 1.0 / std::sqrt(static_cast<double>(image.size()));
  std::vector<Complex> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    Complex acc = 0;
    for (std::size_t v = 0; v < image.size(); ++v) {
      double ph = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const double n = static_cast<double>((v / st[a]) % shape[a]) - 0.5 * static_cast<double>(shape[a]);
        ph += coords[j * d + a] * n / static_cast<double>(shape[a]);
      }
      acc += image[v] * std::polar(1.0, -2.0 * std::numbers::pi * ph);
    }
    out[j] = norm * acc;
  }
  return out;
}

ComplexGrid direct_ndft_adjoint(const Shape& shape, std::span<const double> coords, std::span<const Complex> samples) {
  const std::size_t d = shape.size();
  const auto st = strides(shape);
  ComplexGrid out(shape);
  const double norm = 1.0 / std::sqrt(static_cast<double>(out.size()));
  for (std::size_t v = 0; v < out.size(); ++v) {
    Complex acc = 0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      double ph = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const double n = static_cast<double>((v / st[a]) % shape[a]) - 0.5 * static_cast<double>(shape[a]);
        ph += coords[j * d + a] * n / static_cast<double>(shape[a]);
      }
      acc += samples[j] * std::polar(1.0, 2.0 * std::numbers::pi * ph);
    }
    out[v] = norm * acc;
  }
  return out;
}

namespace {

const std::vector<Shape> kAdjointShapes = {{64}, {32, 32}, {16, 16, 16}};

std::shared_ptr<const KSpaceGridder> make_gridder(const Shape& shape, std::size_t count, bool fault,
                                                  std::mt19937_64& rng) {
  auto g = std::make_shared<KSpaceGridder>(make_plan(shape), random_trajectory(shape, count, rng));
  g->inject_fault_for_testing(fault);
  return g;
}

std::shared_ptr<const CoilSet> random_coils(const Shape& shape, std::size_t count, std::mt19937_64& rng) {
  auto c = std::make_shared<CoilSet>();
  for (std::size_t i = 0; i < count; ++i) c->maps.push_back(random_grid(shape, rng));
  return c;
}

CheckResult check_fft(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"fft_unitarity", 0.0, 1e-13, 0};
  for (const Shape& shape : {Shape{64}, Shape{32, 32}, Shape{16, 16, 16}}) {
    for (int t = 0; t < o.trials; ++t, ++r.trials) {
      const auto x = random_grid(shape, rng), y = random_grid(shape, rng);
      const auto fx = fft_unitary(x, FftDirection::forward), fy = fft_unitary(y, FftDirection::forward);
      const auto back = fft_unitary(fx, FftDirection::inverse);
      r.worst = std::max(r.worst, nrmse(back.data(), x.data()));
      r.worst = std::max(r.worst, std::abs(norm2(fx.data()) - norm2(x.data())) / norm2(x.data()));
      r.worst = std::max(r.worst, std::abs(inner(fx.data(), fy.data()) - inner(x.data(), y.data())) /
                                      (norm2(x.data()) * norm2(y.data())));
    }
  }
  return r;
}

CheckResult check_pad_crop(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"pad_crop_adjoint", 0.0, 1e-14, 0};
  for (int t = 0; t < o.trials; ++t, ++r.trials) {
    const auto x = random_grid({16, 16}, rng), y = random_grid({32, 32}, rng);
    const auto px = zero_pad(x, {32, 32});
    const auto cy = crop_center(y, {16, 16});
    r.worst = std::max(r.worst, adjoint_discrepancy(inner(px.data(), y.data()), inner(x.data(), cy.data()),
                                                    norm2(px.data()), norm2(y.data())));
    if (crop_center(px, {16, 16}) != x) r.worst = std::max(r.worst, 1.0);
  }
  return r;
}

CheckResult check_kgrid_core(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"kgrid_core_adjoint", 0.0, 1e-12, 0};
  for (const auto& shape : kAdjointShapes) {
    for (int t = 0; t < o.trials; ++t, ++r.trials) {
      const auto g = make_gridder(shape, 100, o.inject_fault, rng);
      const auto s = random_vector(g->count(), rng);
      const auto grid = random_grid(g->plan().oversampled_shape, rng);
      const auto ps = g->project_core(s);
      const auto bg = g->backproject_core(grid);
      r.worst = std::max(r.worst, adjoint_discrepancy(inner(ps.data(), grid.data()), inner(s, bg), norm2(ps.data()),
                                                      norm2(grid.data())));
    }
  }
  return r;
}

CheckResult check_kgrid(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"kgrid_adjoint", 0.0, 1e-12, 0};
  for (const auto& shape : kAdjointShapes) {
    for (int t = 0; t < o.trials; ++t, ++r.trials) {
      const auto g = make_gridder(shape, 100, o.inject_fault, rng);
      const auto x = random_grid(shape, rng);
      const auto y = random_vector(g->count(), rng);
      const auto ax = g->inverse(x);
      const auto ahy = g->forward(y);
      r.worst = std::max(r.worst, adjoint_discrepancy(inner(ax, y), inner(x.data(), ahy.data()), norm2(ax), norm2(y)));
    }
  }
  return r;
}

CheckResult check_ndft(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"kgrid_ndft_accuracy", 0.0, 1e-3, 0};
  const Shape shape{32, 32};
  for (int t = 0; t < o.trials; ++t, ++r.trials) {
    const auto g = make_gridder(shape, 200, o.inject_fault, rng);
    const auto x = random_grid(shape, rng);
    const auto y = random_vector(g->count(), rng);
    r.worst = std::max(r.worst, max_rel_error(g->inverse(x), direct_ndft(x, g->trajectory())));
    r.worst = std::max(r.worst,
                       max_rel_error(g->forward(y).data(), direct_ndft_adjoint(shape, g->trajectory(), y).data()));
  }
  return r;
}

CheckResult check_igrid(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"igrid_adjoint", 0.0, 1e-12, 0};
  for (const Shape& shape : {Shape{64}, Shape{32, 32}, Shape{16, 16, 16}}) {
    for (int t = 0; t < o.trials; ++t, ++r.trials) {
      const ImageGridder g(KernelSpec::make(), random_field(shape, 4.0, rng));
      const auto x = random_grid(shape, rng), y = random_grid(shape, rng);
      const auto ax = g.forward(x), ahy = g.adjoint(y);
      r.worst = std::max(r.worst, adjoint_discrepancy(inner(ax.data(), y.data()), inner(x.data(), ahy.data()),
                                                      norm2(ax.data()), norm2(y.data())));
    }
  }
  return r;
}

CheckResult check_sense(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"sense_adjoint", 0.0, 1e-12, 0};
  for (const Shape& shape : {Shape{64}, Shape{32, 32}, Shape{16, 16, 16}}) {
    for (int t = 0; t < o.trials; ++t, ++r.trials) {
      auto warp = std::make_shared<const ImageGridder>(KernelSpec::make(), random_field(shape, 4.0, rng));
      const NonrigidSenseOp op(warp, random_coils(shape, 3, rng), make_gridder(shape, 100, o.inject_fault, rng));
      const auto x = random_grid(shape, rng);
      CoilData y;
      for (std::size_t c = 0; c < op.coil_count(); ++c) y.push_back(random_vector(op.sample_count(), rng));
      const auto ax = op.forward(x);
      const auto ahy = op.adjoint(y);
      const auto fax = flatten({ax}), fy = flatten({y});
      r.worst = std::max(r.worst, adjoint_discrepancy(inner(fax, fy), inner(x.data(), ahy.data()), norm2(fax), norm2(fy)));
    }
  }
  return r;
}

CheckResult check_stacked(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"stacked_adjoint", 0.0, 1e-12, 0};
  for (const Shape& shape : {Shape{64}, Shape{32, 32}, Shape{16, 16, 16}}) {
    for (int t = 0; t < o.trials; ++t, ++r.trials) {
      const auto coils = random_coils(shape, 2, rng);
      StackedSenseModel model;
      for (int s = 0; s < 3; ++s) {
        std::shared_ptr<const ImageGridder> warp;
        if (s > 0) warp = std::make_shared<const ImageGridder>(KernelSpec::make(), random_field(shape, 4.0, rng));
        model.states.emplace_back(warp, coils, make_gridder(shape, 60 + 20 * static_cast<std::size_t>(s), o.inject_fault, rng));
        CoilData y;
        for (std::size_t c = 0; c < coils->count(); ++c) y.push_back(random_vector(model.states.back().sample_count(), rng));
        model.data.push_back(std::move(y));
      }
      const auto x = random_grid(shape, rng);
      const auto ax = flatten(stacked_forward(model, x));
      const auto fy = flatten(model.data);
      const auto ahy = stacked_adjoint(model, model.data);
      r.worst = std::max(r.worst, adjoint_discrepancy(inner(ax, fy), inner(x.data(), ahy.data()), norm2(ax), norm2(fy)));
    }
  }
  return r;
}

CheckResult check_wavelet_roundtrip(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"wavelet_roundtrip", 0.0, 1e-13, 0};
  for (const Shape& shape : {Shape{64}, Shape{32, 32}, Shape{16, 16, 16}}) {
    for (int t = 0; t < o.trials; ++t, ++r.trials) {
      const auto x = random_grid(shape, rng);
      r.worst = std::max(r.worst, nrmse(wavelet_adjoint(wavelet_forward(x, 3), 3).data(), x.data()));
    }
  }
  return r;
}

CheckResult check_wavelet_parseval(const SelftestOptions& o, std::mt19937_64& rng) {
  CheckResult r{"wavelet_parseval", 0.0, 1e-13, 0};
  for (const Shape& shape : {Shape{64}, Shape{32, 32}, Shape{16, 16, 16}}) {
    for (int t = 0; t < o.trials; ++t, ++r.trials) {
      const auto x = random_grid(shape, rng);
      const double n = norm2(x.data());
      r.worst = std::max(r.worst, std::abs(norm2(wavelet_forward(x, 3).data()) - n) / n);
    }
  }
  return r;
}

}  // namespace

std::vector<CheckResult> run_selftest(const SelftestOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::vector<CheckResult> out;
  out.push_back(check_fft(options, rng));
  out.push_back(check_pad_crop(options, rng));
  out.push_back(check_kgrid_core(options, rng));
  out.push_back(check_kgrid(options, rng));
  out.push_back(check_ndft(options, rng));
  out.push_back(check_igrid(options, rng));
  out.push_back(check_sense(options, rng));
  out.push_back(check_stacked(options, rng));
  out.push_back(check_wavelet_roundtrip(options, rng));
  out.push_back(check_wavelet_parseval(options, rng));
  return out;
}

bool print_report(const std::vector<CheckResult>& checks, std::ostream& os) {
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed();
    os << (c.passed() ? "PASS " : "FAIL ") << std::left << std::setw(22) << c.name << " worst=" << std::scientific
       << std::setprecision(3) << c.worst << " tol=" << c.tolerance << " trials=" << c.trials << '\n';
  }
  os << (all ? "selftest: all checks passed" : "selftest: FAILED") << '\n';
  os.unsetf(std::ios::floatfield);
  return all;
}

}  // namespace isgrid
