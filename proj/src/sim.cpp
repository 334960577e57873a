#include "isgrid/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "isgrid/fft.hpp"

namespace isgrid {

namespace {

constexpr double kPi = std::numbers::pi;

// Centred coordinate of voxel `flat` along each axis.
std::vector<double> centred_position(std::size_t flat, const Shape& shape, const std::vector<std::size_t>& st) {
  std::vector<double> p(shape.size());
  for (std::size_t a = 0; a < shape.size(); ++a)
    p[a] = static_cast<double>((flat / st[a]) % shape[a]) - 0.5 * static_cast<double>(shape[a]);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Phantoms

void PhantomSpec::validate() const {
  validate_shape(shape, true);
  if (smoothing_sigma < 0) throw std::invalid_argument("phantom smoothing must be >= 0");
  for (const auto& e : ellipses) {
    if (e.center.size() != shape.size() || e.semi_axes.size() != shape.size())
      throw std::invalid_argument("ellipse rank does not match phantom grid " + to_string(shape));
    for (double s : e.semi_axes)
      if (!(s > 0)) throw std::invalid_argument("ellipse semi-axes must be > 0");
  }
}

PhantomSpec PhantomSpec::shepp_logan(const Shape& shape, double scale) {
  // Modified Shepp-Logan: x0, y0, a, b, theta, intensity.
  static constexpr double table[10][6] = {
      {0, 0, 0.69, 0.92, 0, 1.0},          {0, -0.0184, 0.6624, 0.874, 0, -0.8},
      {0.22, 0, 0.11, 0.31, -18, -0.2},    {-0.22, 0, 0.16, 0.41, 18, -0.2},
      {0, 0.35, 0.21, 0.25, 0, 0.1},       {0, 0.1, 0.046, 0.046, 0, 0.1},
      {0, -0.1, 0.046, 0.046, 0, 0.1},     {-0.08, -0.605, 0.046, 0.023, 0, 0.1},
      {0, -0.605, 0.023, 0.023, 0, 0.1},   {0.06, -0.605, 0.023, 0.046, 0, 0.1},
  };
  PhantomSpec spec;
  spec.shape = shape;
  for (const auto& r : table) {
    Ellipse e;
    e.rotation_deg = r[4];
    e.intensity = r[5];
    if (shape.size() == 1) {
      e.center = {scale * r[1]};
      e.semi_axes = {scale * r[3]};
    } else if (shape.size() == 2) {
      e.center = {scale * r[1], scale * r[0]};
      e.semi_axes = {scale * r[3], scale * r[2]};
    } else {
      e.center = {0.0, scale * r[1], scale * r[0]};
      e.semi_axes = {scale * std::min(r[2], r[3]), scale * r[3], scale * r[2]};
    }
    spec.ellipses.push_back(e);
  }
  return spec;
}

ComplexGrid make_phantom(const PhantomSpec& spec) {
  spec.validate();
  const Shape& shape = spec.shape;
  const std::size_t d = shape.size();
  const auto st = strides(shape);
  ComplexGrid img(shape);
  for (std::size_t v = 0; v < img.size(); ++v) {
    auto p = centred_position(v, shape, st);
    for (std::size_t a = 0; a < d; ++a) p[a] /= 0.5 * static_cast<double>(shape[a]);
    double value = 0;
    for (const auto& e : spec.ellipses) {
      std::vector<double> q(d);
      for (std::size_t a = 0; a < d; ++a) q[a] = p[a] - e.center[a];
      if (d >= 2 && e.rotation_deg != 0.0) {
        const double th = e.rotation_deg * kPi / 180.0;
        const double y = q[d - 2], x = q[d - 1];
        q[d - 1] = x * std::cos(th) + y * std::sin(th);
        q[d - 2] = -x * std::sin(th) + y * std::cos(th);
      }
      double r2 = 0;
      for (std::size_t a = 0; a < d; ++a) r2 += (q[a] / e.semi_axes[a]) * (q[a] / e.semi_axes[a]);
      if (r2 <= 1.0) value += e.intensity;
    }
    img[v] = value;
  }
  if (spec.smoothing_sigma > 0) {
    img = gaussian_smooth(img, spec.smoothing_sigma);
    for (auto& v : img.values()) v = v.real();
  }
  for (const auto& v : img.values())
    if (std::abs(v) > 1.2 + 1e-12) throw std::invalid_argument("phantom intensity exceeds 1.2");
  return img;
}

std::size_t support_margin(const ComplexGrid& image, double rel_threshold) {
  const double thr = rel_threshold * max_abs(image.data());
  const auto st = strides(image.shape());
  std::size_t margin = *std::max_element(image.shape().begin(), image.shape().end());
  for (std::size_t v = 0; v < image.size(); ++v) {
    if (std::abs(image[v]) <= thr) continue;
    for (std::size_t a = 0; a < image.ndim(); ++a) {
      const std::size_t i = (v / st[a]) % image.shape()[a];
      margin = std::min({margin, i, image.shape()[a] - 1 - i});
    }
  }
  return margin;
}

// ---------------------------------------------------------------------------
// Displacement fields

void FieldSpec::validate() const {
  validate_shape(shape, false);
  for (const auto& b : bumps) {
    if (b.center.size() != shape.size() || b.amplitude.size() != shape.size())
      throw std::invalid_argument("bump rank does not match field grid " + to_string(shape));
    if (!(b.radius > 0)) throw std::invalid_argument("bump radius must be > 0");
  }
}

std::vector<double> FieldSpec::max_amplitude() const {
  std::vector<double> m(shape.size(), 0.0);
  for (const auto& b : bumps)
    for (std::size_t a = 0; a < m.size(); ++a) m[a] = std::max(m[a], std::abs(b.amplitude[a]));
  return m;
}

FieldSpec FieldSpec::scaled(double factor) const {
  FieldSpec out = *this;
  for (auto& b : out.bumps)
    for (auto& v : b.amplitude) v *= factor;
  return out;
}

DisplacementField make_field(const FieldSpec& spec) {
  spec.validate();
  const Shape& shape = spec.shape;
  const std::size_t d = shape.size();
  const auto st = strides(shape);
  DisplacementField field = DisplacementField::zeros(shape);
  for (std::size_t v = 0; v < field.voxels(); ++v) {
    const auto p = centred_position(v, shape, st);
    for (const auto& b : spec.bumps) {
      double r2 = 0;
      for (std::size_t a = 0; a < d; ++a) r2 += (p[a] - b.center[a]) * (p[a] - b.center[a]);
      const double rho2 = r2 / (b.radius * b.radius);
      if (rho2 >= 9.0) continue;
      const double taper = (1.0 - rho2 / 9.0) * (1.0 - rho2 / 9.0);
      const double g = std::exp(-0.5 * rho2) * taper;
      for (std::size_t a = 0; a < d; ++a) field.offsets[v * d + a] += b.amplitude[a] * g;
    }
  }
  const auto bound = spec.max_amplitude();
  double factor = 1.0;
  for (std::size_t a = 0; a < d; ++a) {
    double m = 0;
    for (std::size_t v = 0; v < field.voxels(); ++v) m = std::max(m, std::abs(field.offsets[v * d + a]));
    if (m > bound[a] && m > 0) factor = std::min(factor, bound[a] / m);
  }
  if (factor < 1.0)
    for (auto& o : field.offsets) o *= factor;
  return field;
}

// ---------------------------------------------------------------------------
// Coils

CoilSet make_coils(const Shape& shape, std::size_t count, double smoothness, std::uint64_t seed) {
  validate_shape(shape, false);
  if (count < 1) throw std::invalid_argument("need at least one coil");
  if (!(smoothness > 0)) throw std::invalid_argument("coil smoothness must be > 0");
  const std::size_t d = shape.size();
  const auto st = strides(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  CoilSet coils;
  for (std::size_t c = 0; c < count; ++c) {
    const double angle = 2.0 * kPi * static_cast<double>(c) / static_cast<double>(count) + 0.2 * unit(rng);
    std::vector<double> center(d, 0.0);
    if (d == 1) {
      center[0] = (c % 2 ? 0.4 : -0.4) * static_cast<double>(shape[0]);
    } else {
      center[d - 2] = 0.4 * static_cast<double>(shape[d - 2]) * std::sin(angle);
      center[d - 1] = 0.4 * static_cast<double>(shape[d - 1]) * std::cos(angle);
    }
    std::vector<double> ramp(d);
    for (auto& g : ramp) g = 0.5 * unit(rng);
    const double phase0 = kPi * unit(rng);

    ComplexGrid map(shape);
    for (std::size_t v = 0; v < map.size(); ++v) {
      const auto p = centred_position(v, shape, st);
      double r2 = 0, ph = phase0;
      for (std::size_t a = 0; a < d; ++a) {
        const double width = smoothness * static_cast<double>(shape[a]);
        r2 += (p[a] - center[a]) * (p[a] - center[a]) / (width * width);
        ph += 2.0 * kPi * ramp[a] * p[a] / static_cast<double>(shape[a]);
      }
      map[v] = std::polar(std::exp(-0.5 * r2), ph);
    }
    coils.maps.push_back(std::move(map));
  }
  const auto rss = coils.rss();
  const double peak = *std::max_element(rss.begin(), rss.end());
  for (auto& m : coils.maps) scale(m.data(), 1.0 / peak);
  return coils;
}

// ---------------------------------------------------------------------------
// Trajectories

std::vector<double> Trajectory::gather_coords(std::span<const std::size_t> samples) const {
  std::vector<double> out;
  out.reserve(samples.size() * dim);
  for (auto s : samples) out.insert(out.end(), coords.begin() + static_cast<long>(s * dim),
                                    coords.begin() + static_cast<long>((s + 1) * dim));
  return out;
}

std::string to_string(TrajectoryKind k) { return k == TrajectoryKind::radial2d ? "radial2d" : "radial3d"; }

TrajectoryKind trajectory_kind_from_string(const std::string& s) {
  if (s == "radial2d") return TrajectoryKind::radial2d;
  if (s == "radial3d") return TrajectoryKind::radial3d;
  throw std::invalid_argument("unknown trajectory kind '" + s + "'");
}

namespace {

Trajectory spokes_along(const std::vector<std::vector<double>>& directions, std::size_t samples, double kmax) {
  if (samples < 2) throw std::invalid_argument("spokes need at least 2 samples");
  if (directions.empty()) throw std::invalid_argument("trajectory needs at least one spoke");
  const std::size_t d = directions.front().size();
  const double spacing = 2.0 * kmax / static_cast<double>(samples);
  const double p = static_cast<double>(directions.size());
  Trajectory t;
  t.dim = d;
  for (const auto& dir : directions) {
    const std::size_t begin = t.count();
    for (std::size_t s = 0; s < samples; ++s) {
      const double k = (static_cast<double>(s) - 0.5 * static_cast<double>(samples)) * spacing;
      for (std::size_t a = 0; a < d; ++a) t.coords.push_back(k * dir[a]);
      const double r = std::abs(k);
      double w;
      if (d == 2)
        w = r > 0 ? kPi * r * spacing / p : kPi * spacing * spacing / (4.0 * p);
      else
        w = r > 0 ? 2.0 * kPi * r * r * spacing / p : kPi * spacing * spacing * spacing / (6.0 * p);
      t.density.push_back(w);
    }
    t.interleaves.emplace_back(begin, t.count());
  }
  return t;
}

}  // namespace

Trajectory radial2d_from_angles(std::span<const double> angles, std::size_t samples_per_spoke, double kmax) {
  // Round-off below 1e-15 is dropped so axis-aligned spokes sit exactly on the axes.
  auto snap = [](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; };
  std::vector<std::vector<double>> dirs;
  for (double th : angles) dirs.push_back({snap(std::sin(th)), snap(std::cos(th))});
  return spokes_along(dirs, samples_per_spoke, kmax);
}

Trajectory radial_trajectory(TrajectoryKind kind, std::size_t spokes, std::size_t samples_per_spoke, double kmax) {
  std::vector<std::vector<double>> dirs;
  if (kind == TrajectoryKind::radial2d) {
    const double golden = kPi * (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t i = 0; i < spokes; ++i) {
      const double th = std::fmod(static_cast<double>(i) * golden, kPi);
      dirs.push_back({std::sin(th), std::cos(th)});
    }
  } else {
    // 2D golden means over the hemisphere.
    constexpr double phi1 = 0.4656, phi2 = 0.6823;
    for (std::size_t i = 0; i < spokes; ++i) {
      const double z = std::fmod(static_cast<double>(i) * phi1, 1.0);
      const double az = 2.0 * kPi * std::fmod(static_cast<double>(i) * phi2, 1.0);
      const double r = std::sqrt(1.0 - z * z);
      dirs.push_back({z, r * std::sin(az), r * std::cos(az)});
    }
  }
  return spokes_along(dirs, samples_per_spoke, kmax);
}

// ---------------------------------------------------------------------------
// Image helpers

ComplexGrid fourier_shift(const ComplexGrid& image, std::span<const double> shift) {
  if (shift.size() != image.ndim()) throw ShapeError("shift rank does not match image");
  if (std::all_of(shift.begin(), shift.end(), [](double s) { return s == 0.0; })) return image;
  ComplexGrid spec = fft_unitary(image, FftDirection::forward);
  const auto st = strides(spec.shape());
  for (std::size_t v = 0; v < spec.size(); ++v) {
    const auto k = centred_position(v, spec.shape(), st);
    double ph = 0;
    for (std::size_t a = 0; a < k.size(); ++a) ph += k[a] * shift[a] / static_cast<double>(spec.shape()[a]);
    spec[v] *= std::polar(1.0, -2.0 * kPi * ph);
  }
  return fft_unitary(spec, FftDirection::inverse);
}

ComplexGrid gaussian_smooth(const ComplexGrid& image, double sigma) {
  ComplexGrid spec = fft_unitary(image, FftDirection::forward);
  const auto st = strides(spec.shape());
  for (std::size_t v = 0; v < spec.size(); ++v) {
    const auto k = centred_position(v, spec.shape(), st);
    double e = 0;
    for (std::size_t a = 0; a < k.size(); ++a) {
      const double f = k[a] / static_cast<double>(spec.shape()[a]);
      e += 2.0 * kPi * kPi * sigma * sigma * f * f;
    }
    spec[v] *= std::exp(-e);
  }
  return fft_unitary(spec, FftDirection::inverse);
}

ComplexGrid lowres(const ComplexGrid& image, const Shape& shape) {
  ComplexGrid spec = fft_unitary(image, FftDirection::forward);
  return fft_unitary(crop_center(spec, shape), FftDirection::inverse);
}

// ---------------------------------------------------------------------------
// Acquisition

void AcquisitionSpec::validate(const Shape& shape) const {
  validate_shape(shape, true);
  if (bins < 1) throw std::invalid_argument("need at least one respiratory bin");
  if (heartbeats < bins) throw std::invalid_argument("fewer heartbeats than bins");
  if (interleaves_per_heartbeat < 1) throw std::invalid_argument("need at least one interleave per heartbeat");
  if ((trajectory == TrajectoryKind::radial2d) != (shape.size() == 2) &&
      !(trajectory == TrajectoryKind::radial3d && shape.size() == 3))
    throw std::invalid_argument(to_string(trajectory) + " trajectory does not match a " +
                                std::to_string(shape.size()) + "D grid");
  for (auto n : shape)
    if (n != shape.front()) throw std::invalid_argument("radial acquisition needs an isotropic grid");
  if (nav_factor < 1) throw std::invalid_argument("nav_factor must be >= 1");
  for (auto n : shape)
    if (n % nav_factor != 0 || (n / nav_factor) % 2 != 0)
      throw std::invalid_argument("grid " + to_string(shape) + " does not give an even navigator grid at factor " +
                                  std::to_string(nav_factor));
  if (bin_shift_step.size() > shape.size()) throw std::invalid_argument("bin_shift_step has too many axes");
  if (shift_jitter < 0 || reference_jitter_fraction < 0) throw std::invalid_argument("jitter must be >= 0");
  if (!(respiratory_period > 0)) throw std::invalid_argument("respiratory period must be > 0");
  if (!field.shape.empty() && field.shape != shape) throw ShapeError("field spec shape does not match the grid");
  if (!field.shape.empty()) field.validate();
  if (noise_sigma < 0) throw std::invalid_argument("noise sigma must be >= 0");
  if (coils < 1) throw std::invalid_argument("need at least one coil");
  if (!(coil_smoothness > 0)) throw std::invalid_argument("coil smoothness must be > 0");
}

ComplexGrid moved_object(const ComplexGrid& phantom, const DisplacementField& field, std::span<const double> shift,
                         const KernelSpec& kernel) {
  ComplexGrid warped = field.is_zero() ? phantom : ImageGridder(kernel, field).forward(phantom);
  return fourier_shift(warped, shift);
}

SimulatedAcquisition simulate_acquisition(const ComplexGrid& phantom, const AcquisitionSpec& spec,
                                          const KernelSpec& kernel, std::uint64_t seed) {
  return simulate_acquisition(phantom, spec, kernel, seed, nullptr);
}

SimulatedAcquisition simulate_acquisition(const ComplexGrid& phantom, const AcquisitionSpec& spec,
                                          const KernelSpec& kernel, std::uint64_t seed,
                                          std::shared_ptr<const CoilSet> coils) {
  const Shape& shape = phantom.shape();
  spec.validate(shape);
  const std::size_t d = shape.size();
  const std::size_t k_bins = spec.bins;

  SimulatedAcquisition sim;
  sim.shape = shape;
  for (auto n : shape) sim.nav_shape.push_back(n / spec.nav_factor);

  // Ground-truth motion.
  FieldSpec fspec = spec.field;
  if (fspec.shape.empty()) fspec.shape = shape;
  sim.truth.fields.reference_bin = 0;
  for (std::size_t b = 0; b < k_bins; ++b) {
    const double frac = k_bins > 1 ? static_cast<double>(b) / static_cast<double>(k_bins - 1) : 0.0;
    sim.truth.fields.fields.push_back(b == 0 ? DisplacementField::zeros(shape) : make_field(fspec.scaled(frac)));
  }

  std::mt19937_64 rng(seed);
  const double resp_phase = std::uniform_real_distribution<double>(0.0, kPi)(rng);
  std::vector<double> step(d, 0.0);
  std::copy(spec.bin_shift_step.begin(), spec.bin_shift_step.end(), step.begin());
  for (std::size_t h = 0; h < spec.heartbeats; ++h) {
    const double s = std::sin(kPi * static_cast<double>(h) / spec.respiratory_period + resp_phase);
    const auto bin = std::min(k_bins - 1, static_cast<std::size_t>(std::floor(static_cast<double>(k_bins) * s * s)));
    sim.truth.bins.push_back(bin);
    std::seed_seq seq{seed, static_cast<std::uint64_t>(h), std::uint64_t{1}};
    std::mt19937_64 hrng(seq);
    std::normal_distribution<double> gauss;
    const double jitter = spec.shift_jitter * (bin == 0 ? spec.reference_jitter_fraction : 1.0);
    ShiftVector shift(d);
    for (std::size_t a = 0; a < d; ++a) shift[a] = step[a] * static_cast<double>(bin) + jitter * gauss(hrng);
    sim.truth.shifts.push_back(shift);
  }
  for (std::size_t b = 0; b < k_bins; ++b)
    if (std::find(sim.truth.bins.begin(), sim.truth.bins.end(), b) == sim.truth.bins.end())
      throw std::invalid_argument("acquisition leaves respiratory bin " + std::to_string(b) + " empty");

  // Periodic-boundary safety: the support must clear kernel width plus motion.
  double max_motion = 0;
  for (const auto& f : sim.truth.fields.fields) max_motion = std::max(max_motion, f.max_abs());
  double max_shift = 0;
  for (const auto& s : sim.truth.shifts)
    for (double v : s) max_shift = std::max(max_shift, std::abs(v));
  const double needed = kernel.width + max_motion + max_shift;
  if (static_cast<double>(support_margin(phantom)) < needed)
    throw std::invalid_argument("phantom support is closer than " + std::to_string(needed) + " voxels to the grid edge");

  // Trajectory: heartbeat h owns spokes h, h + H, h + 2H, ...
  const std::size_t spokes = spec.heartbeats * spec.interleaves_per_heartbeat;
  const std::size_t samples = spec.samples_per_spoke ? spec.samples_per_spoke : shape.front();
  sim.trajectory = radial_trajectory(spec.trajectory, spokes, samples, 0.5 * static_cast<double>(shape.front()));

  if (!coils) {
    coils = std::make_shared<CoilSet>(make_coils(shape, spec.coils, spec.coil_smoothness, seed ^ 0xc011u));
  } else {
    coils->validate();
    if (coils->shape() != shape) throw ShapeError("coil maps " + to_string(coils->shape()) + " do not match the grid");
  }
  {
    const auto rss = coils->rss();
    const double thr = 1e-3 * max_abs(phantom.data());
    for (std::size_t v = 0; v < rss.size(); ++v)
      if (std::abs(phantom[v]) > thr && rss[v] < 0.1)
        throw std::invalid_argument("coil root-sum-of-squares falls below 0.1 inside the phantom");
  }
  sim.coils = coils;

  const double dc = std::abs(std::accumulate(phantom.values().begin(), phantom.values().end(), Complex{})) /
                    std::sqrt(static_cast<double>(phantom.size()));
  sim.noise_std = spec.noise_sigma * dc;
  const double nav_noise_std =
      spec.noise_sigma * dc * std::sqrt(static_cast<double>(numel(sim.nav_shape)) / static_cast<double>(phantom.size()));

  const GriddingPlan plan = make_plan(shape, kernel);
  std::vector<ComplexGrid> warped(k_bins);
  for (std::size_t b = 0; b < k_bins; ++b) {
    const auto& f = sim.truth.fields.fields[b];
    warped[b] = f.is_zero() ? phantom : ImageGridder(plan, f).forward(phantom);
  }

  for (std::size_t h = 0; h < spec.heartbeats; ++h) {
    HeartbeatData hb;
    for (std::size_t l = 0; l < spec.interleaves_per_heartbeat; ++l) {
      const std::size_t spoke = h + l * spec.heartbeats;
      hb.interleaves.push_back(spoke);
      const auto [b, e] = sim.trajectory.interleaves[spoke];
      for (std::size_t s = b; s < e; ++s) hb.samples.push_back(s);
    }
    const ComplexGrid moved = fourier_shift(warped[sim.truth.bins[h]], sim.truth.shifts[h]);
    auto gridder = std::make_shared<KSpaceGridder>(plan, sim.trajectory.gather_coords(hb.samples));
    const NonrigidSenseOp op(nullptr, coils, gridder);
    hb.data = op.forward(moved);

    std::seed_seq seq{seed, static_cast<std::uint64_t>(h), std::uint64_t{2}};
    std::mt19937_64 hrng(seq);
    std::normal_distribution<double> gauss;
    if (sim.noise_std > 0) {
      const double s = sim.noise_std / std::numbers::sqrt2;
      for (auto& coil : hb.data)
        for (auto& v : coil) v += Complex(s * gauss(hrng), s * gauss(hrng));
    }

    ComplexGrid nav_spec = crop_center(fft_unitary(moved, FftDirection::forward), sim.nav_shape);
    if (nav_noise_std > 0) {
      const double s = nav_noise_std / std::numbers::sqrt2;
      for (auto& v : nav_spec.values()) v += Complex(s * gauss(hrng), s * gauss(hrng));
    }
    hb.nav = fft_unitary(nav_spec, FftDirection::inverse);
    sim.heartbeats.push_back(std::move(hb));
  }
  return sim;
}

}  // namespace isgrid
