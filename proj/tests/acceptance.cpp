// One PASS/FAIL line per acceptance criterion; exit code is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "isgrid/experiments.hpp"
#include "isgrid/selftest.hpp"
#include "isgrid/sense.hpp"
#include "isgrid/sim.hpp"
#include "oracles.hpp"

using namespace isgrid;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

const std::vector<Shape> kShapes{{64}, {32, 32}, {16, 16, 16}};

std::shared_ptr<const CoilSet> random_coils(const Shape& shape, std::size_t n, std::mt19937_64& rng) {
  auto coils = std::make_shared<CoilSet>();
  for (std::size_t c = 0; c < n; ++c) coils->maps.push_back(random_grid(shape, rng));
  return coils;
}

std::shared_ptr<const KSpaceGridder> random_gridder(const Shape& shape, std::size_t m, std::mt19937_64& rng) {
  return std::make_shared<KSpaceGridder>(make_plan(shape), random_trajectory(shape, m, rng));
}

std::shared_ptr<const ImageGridder> random_warp(const Shape& shape, std::mt19937_64& rng) {
  return std::make_shared<ImageGridder>(KernelSpec::make(), random_field(shape, 3.0, rng));
}

CoilData coil_noise(std::size_t coils, std::size_t samples, std::mt19937_64& rng) {
  CoilData y;
  for (std::size_t c = 0; c < coils; ++c) y.push_back(random_vector(samples, rng));
  return y;
}

double discrepancy(std::span<const Complex> ax, std::span<const Complex> y, const ComplexGrid& x, const ComplexGrid& ahy) {
  return adjoint_discrepancy(inner(ax, y), inner(x.data(), ahy.data()), norm2(ax), norm2(y));
}

Outcome adjoint_suite() {
  constexpr int trials = 20;
  std::mt19937_64 rng(1001);
  double worst_k = 0, worst_i = 0, worst_s = 0, worst_m = 0;
  for (const auto& shape : kShapes) {
    for (int t = 0; t < trials; ++t) {
      const auto g = random_gridder(shape, 300, rng);
      const auto x = random_grid(shape, rng);
      const auto y = random_vector(300, rng);
      worst_k = std::max(worst_k, discrepancy(g->inverse(x), y, x, g->forward(y)));

      const auto w = random_warp(shape, rng);
      const auto z = random_grid(shape, rng);
      worst_i = std::max(worst_i, discrepancy(w->forward(x).data(), z.data(), x, w->adjoint(z)));

      const auto coils = random_coils(shape, 3, rng);
      const NonrigidSenseOp op(w, coils, g);
      const auto yc = coil_noise(3, 300, rng);
      const auto ax = flatten(std::vector<CoilData>{op.forward(x)});
      const auto fy = flatten(std::vector<CoilData>{yc});
      worst_s = std::max(worst_s, discrepancy(ax, fy, x, op.adjoint(yc)));

      StackedSenseModel model;
      for (std::size_t j = 0; j < 3; ++j) {
        model.states.emplace_back(random_warp(shape, rng), coils, random_gridder(shape, 150, rng));
        model.data.push_back(coil_noise(3, 150, rng));
      }
      const auto mx = flatten(stacked_forward(model, x));
      const auto my = flatten(model.data);
      worst_m = std::max(worst_m, discrepancy(mx, my, x, stacked_adjoint(model, model.data)));
    }
  }
  std::ostringstream os;
  os << "trials=" << trials << "x3 kgrid=" << worst_k << " igrid=" << worst_i << " sense=" << worst_s
     << " stacked=" << worst_m;
  return {std::max({worst_k, worst_i, worst_s, worst_m}) < 1e-12, os.str()};
}

Outcome nufft_accuracy() {
  std::mt19937_64 rng(1002);
  const Shape shape{32, 32};
  const auto coords = random_trajectory(shape, 200, rng);
  const KSpaceGridder g(make_plan(shape, KernelSpec::make(4, 2.0)), coords);
  const auto x = random_grid(shape, rng);
  const auto y = random_vector(200, rng);
  const double inv = max_rel_error(g.inverse(x), direct_ndft(x, coords));
  const double fwd = max_rel_error(g.forward(y).data(), direct_ndft_adjoint(shape, coords, y).data());
  std::ostringstream os;
  os << "inverse=" << inv << " forward=" << fwd;
  return {std::max(inv, fwd) < 1e-3, os.str()};
}

Outcome dense_equivalence() {
  std::mt19937_64 rng(1003);
  const Shape shape{8, 8};
  const auto t = random_warp(shape, rng);
  const auto coils = random_coils(shape, 2, rng);
  const auto g = random_gridder(shape, 40, rng);
  const NonrigidSenseOp op(t, coils, g);

  const auto tm = oracle::materialize(64, [&](const std::vector<Complex>& v) { return t->forward(ComplexGrid(shape, v)).values(); });
  const auto tam = oracle::materialize(64, [&](const std::vector<Complex>& v) { return t->adjoint(ComplexGrid(shape, v)).values(); });
  const auto am = oracle::materialize(64, [&](const std::vector<Complex>& v) { return flatten(std::vector<CoilData>{op.forward(ComplexGrid(shape, v))}); });
  const auto aam = oracle::materialize(80, [&](const std::vector<Complex>& v) {
    CoilData y{std::vector<Complex>(v.begin(), v.begin() + 40), std::vector<Complex>(v.begin() + 40, v.end())};
    return op.adjoint(y).values();
  });
  const auto gm = oracle::materialize(64, [&](const std::vector<Complex>& v) { return g->inverse(ComplexGrid(shape, v)); });

  // Explicit product G S_c T, stacked over coils.
  oracle::Matrix ref(80, 64);
  for (std::size_t c = 0; c < 2; ++c)
    ref.middleRows(static_cast<Eigen::Index>(40 * c), 40) =
        gm * oracle::to_eigen(coils->maps[c].values()).asDiagonal() * tm;

  const double ti = (tam - tm.adjoint()).norm() / tm.norm();
  const double sf = (am - ref).norm() / ref.norm();
  const double sa = (aam - ref.adjoint()).norm() / ref.norm();
  std::ostringstream os;
  os << "igrid_adjoint=" << ti << " sense_forward=" << sf << " sense_adjoint=" << sa;
  return {std::max({ti, sf, sa}) < 1e-10, os.str()};
}

Outcome invert_warp() {
  constexpr double margin = 2.0;
  Outcome out;
  std::ostringstream os;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto cfg = default_invert_warp_config();
    cfg.seed = seed;
    const auto r = run_invert_warp(cfg);
    const double ratio = r.nrmse_naive / r.nrmse_iterative;
    out.ok = out.ok && r.nrmse_iterative < r.nrmse_naive && ratio >= margin;
    os << "seed" << seed << " naive=" << r.nrmse_naive << " fista=" << r.nrmse_iterative << " ratio=" << ratio << "; ";
  }
  out.detail = os.str();
  return out;
}

Outcome recon_ordering() {
  Outcome out;
  std::ostringstream os;
  for (double noise : {0.0, AcquisitionSpec{}.noise_sigma}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      auto cfg = default_recon_config();
      cfg.seed = seed;
      cfg.acquisition.noise_sigma = noise;
      const auto r = run_recon(cfg);
      out.ok = out.ok && r.nrmse_nonrigid < r.nrmse_translational && r.nrmse_translational < r.nrmse_uncorrected;
      os << "noise=" << noise << " seed" << seed << " " << r.nrmse_nonrigid << "<" << r.nrmse_translational << "<"
         << r.nrmse_uncorrected << "; ";
    }
  }
  out.detail = os.str();
  return out;
}

Outcome translation_estimation() {
  std::mt19937_64 rng(1006);
  PhantomSpec spec = PhantomSpec::shepp_logan({32, 32}, 0.6);
  spec.smoothing_sigma = 1.0;
  const auto ref = make_phantom(spec);
  std::uniform_int_distribution<int> step(-6, 6);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  bool integer_exact = true;
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const ShiftVector s{static_cast<double>(step(rng)), static_cast<double>(step(rng))};
    integer_exact = integer_exact && estimate_translation(ref, fourier_shift(ref, s)) == s;
    const double th = angle(rng);
    const ShiftVector f{1.5 * std::cos(th), 1.5 * std::sin(th)};
    const auto e = estimate_translation(ref, fourier_shift(ref, f));
    worst = std::max({worst, std::abs(e[0] - f[0]), std::abs(e[1] - f[1])});
  }
  std::ostringstream os;
  os << "integer_exact=" << (integer_exact ? "yes" : "no") << " fractional_worst=" << worst;
  return {integer_exact && worst < 0.1, os.str()};
}

Outcome binning() {
  std::mt19937_64 rng(1007);
  std::normal_distribution<double> spread(0.0, 0.1);
  const std::vector<ShiftVector> centres{{0, 0}, {2, 1}, {4, 2}, {6, 3}};
  MotionEstimate est;
  std::vector<std::size_t> truth;
  for (std::size_t h = 0; h < 40; ++h) {
    const std::size_t c = (h * 3 + h / 5) % 4;
    truth.push_back(c);
    est.shifts.push_back({centres[c][0] + spread(rng), centres[c][1] + spread(rng)});
  }
  const auto bins = kmeans_bin(est, 4, 7);
  std::vector<long> forward(4, -1), backward(4, -1);
  bool exact = true;
  for (std::size_t h = 0; h < truth.size(); ++h) {
    const auto l = static_cast<long>(bins.labels[h]);
    const auto c = static_cast<long>(truth[h]);
    if (forward[truth[h]] < 0) forward[truth[h]] = l;
    if (backward[bins.labels[h]] < 0) backward[bins.labels[h]] = c;
    exact = exact && forward[truth[h]] == l && backward[bins.labels[h]] == c;
  }
  return {exact, exact ? "labels match up to permutation" : "labels disagree"};
}

Outcome selftest() {
  const auto checks = run_selftest(SelftestOptions{});
  Outcome out;
  std::ostringstream os;
  for (const auto& c : checks) {
    out.ok = out.ok && c.passed();
    if (c.name == "wavelet_roundtrip" || c.name == "wavelet_parseval" || c.name == "fft_unitarity") {
      out.ok = out.ok && c.tolerance <= 1e-13;
      os << c.name << "=" << c.worst << " ";
    }
  }
  os << "checks=" << checks.size();
  out.detail = os.str();
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "exact adjoints", 30, adjoint_suite},
      {2, "NUFFT vs direct NDFT", 10, nufft_accuracy},
      {3, "dense 8x8 equivalence", 10, dense_equivalence},
      {4, "warp inversion beats negated field", 180, invert_warp},
      {5, "motion-corrected recon ordering", 300, recon_ordering},
      {6, "translation estimation", 10, translation_estimation},
      {7, "k-means binning", 5, binning},
      {8, "selftest property suite", 60, selftest},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.ok && secs < c.budget_s;
    failures += ok ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.1fs, budget %.0fs]\n", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
