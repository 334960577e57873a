#include "isgrid/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "isgrid/fft.hpp"
#include "isgrid/io.hpp"

namespace isgrid {

ShiftVector estimate_translation(const ComplexGrid& reference_nav, const ComplexGrid& nav) {
  if (reference_nav.shape() != nav.shape())
    throw ShapeError("navigator shapes differ: " + to_string(reference_nav.shape()) + " vs " + to_string(nav.shape()));
  const Shape& shape = nav.shape();
  const std::size_t d = shape.size();

  ComplexGrid a(shape), b(shape);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = std::abs(reference_nav[i]);
    b[i] = std::abs(nav[i]);
  }
  ComplexGrid fa = fft_unitary(a, FftDirection::forward);
  ComplexGrid fb = fft_unitary(b, FftDirection::forward);
  for (std::size_t i = 0; i < fb.size(); ++i) fb[i] *= std::conj(fa[i]);
  // Centred transforms put zero lag at index N/2 on each axis.
  const ComplexGrid xc = fft_unitary(fb, FftDirection::inverse);

  std::size_t best = 0;
  double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xc.size(); ++i) {
    const double v = xc[i].real();
    if (v > hi) {
      hi = v;
      best = i;
    }
    lo = std::min(lo, v);
  }
  ShiftVector shift(d, 0.0);
  if (!(hi - lo > 1e-14 * std::max(1.0, std::abs(hi)))) return shift;

  const auto st = strides(shape);
  for (std::size_t ax = 0; ax < d; ++ax) {
    const auto n = static_cast<long>(shape[ax]);
    const auto p = static_cast<long>((best / st[ax]) % shape[ax]);
    auto at = [&](long q) {
      const long w = ((q % n) + n) % n;
      return xc[best + static_cast<std::size_t>(w - p) * st[ax]].real();
    };
    const double cm = at(p - 1), c0 = at(p), cp = at(p + 1);
    const double denom = cm - 2.0 * c0 + cp;
    double delta = denom < 0 ? 0.5 * (cm - cp) / denom : 0.0;
    // Exact integer shifts leave only FFT round-off in the neighbour asymmetry.
    if (std::abs(delta) < 1e-9) delta = 0.0;
    double s = static_cast<double>(p - n / 2) + delta;
    const double half = 0.5 * static_cast<double>(n);
    if (s >= half) s -= static_cast<double>(n);
    if (s < -half) s += static_cast<double>(n);
    shift[ax] = s;
  }
  return shift;
}

MotionEstimate estimate_motion(std::span<const ComplexGrid> navs, std::size_t reference_index) {
  if (navs.empty()) throw std::invalid_argument("no navigators to estimate motion from");
  if (reference_index >= navs.size()) throw std::out_of_range("reference navigator index out of range");
  MotionEstimate est;
  est.reference_index = reference_index;
  est.shifts.reserve(navs.size());
  for (std::size_t h = 0; h < navs.size(); ++h) {
    if (h == reference_index)
      est.shifts.emplace_back(navs[h].ndim(), 0.0);
    else
      est.shifts.push_back(estimate_translation(navs[reference_index], navs[h]));
  }
  return est;
}

std::vector<Complex> apply_phase_shift(std::span<const double> coords, std::span<const Complex> values,
                                       const Shape& grid_shape, std::span<const double> shift) {
  const std::size_t d = grid_shape.size();
  if (shift.size() != d) throw ShapeError("shift has " + std::to_string(shift.size()) + " axes, grid has " + std::to_string(d));
  if (coords.size() != values.size() * d) throw ShapeError("coordinate and value counts disagree");
  std::vector<Complex> out(values.begin(), values.end());
  if (std::all_of(shift.begin(), shift.end(), [](double s) { return s == 0.0; })) return out;
  for (std::size_t j = 0; j < out.size(); ++j) {
    double phase = 0;
    for (std::size_t a = 0; a < d; ++a) phase += coords[j * d + a] * shift[a] / static_cast<double>(grid_shape[a]);
    out[j] *= std::polar(1.0, -2.0 * std::numbers::pi * phase);
  }
  return out;
}

std::vector<std::size_t> RespiratoryBins::members(std::size_t bin) const {
  std::vector<std::size_t> out;
  for (std::size_t h = 0; h < labels.size(); ++h)
    if (labels[h] == bin) out.push_back(h);
  return out;
}

namespace {

double dist2(const ShiftVector& a, const ShiftVector& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

std::size_t nearest(const ShiftVector& p, const std::vector<ShiftVector>& centroids) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double dd = dist2(p, centroids[c]);
    if (dd < bd) {
      bd = dd;
      best = c;
    }
  }
  return best;
}

}  // namespace

RespiratoryBins kmeans_bin(const MotionEstimate& estimates, std::size_t k, std::uint64_t seed) {
  const auto& pts = estimates.shifts;
  if (k < 1) throw std::invalid_argument("k-means needs at least one bin");
  if (k > pts.size()) throw std::invalid_argument("more bins than heartbeats");
  const std::set<ShiftVector> distinct(pts.begin(), pts.end());
  if (k > distinct.size())
    throw std::invalid_argument("k-means: " + std::to_string(k) + " bins but only " + std::to_string(distinct.size()) +
                                " distinct shift vectors");
  const std::size_t d = estimates.ndim();

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  std::vector<ShiftVector> centroids;
  centroids.push_back(pts[std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng)]);
  while (centroids.size() < k) {
    std::vector<double> w(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) w[i] = dist2(pts[i], centroids[nearest(pts[i], centroids)]);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    centroids.push_back(pts[pick(rng)]);
  }

  std::vector<std::size_t> labels(pts.size(), k);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t c = nearest(pts[i], centroids);
      if (c != labels[i]) {
        labels[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<ShiftVector> sums(k, ShiftVector(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t a = 0; a < d; ++a) sums[labels[i]][a] += pts[i][a];
      ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t a = 0; a < d; ++a) centroids[c][a] = sums[c][a] / static_cast<double>(counts[c]);
  }

  // Canonical labelling by centroid order.
  std::vector<std::size_t> order(k);
  for (std::size_t c = 0; c < k; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return centroids[x] < centroids[y]; });
  std::vector<std::size_t> relabel(k);
  for (std::size_t c = 0; c < k; ++c) relabel[order[c]] = c;

  RespiratoryBins bins;
  bins.bins = k;
  bins.labels.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) bins.labels[i] = relabel[labels[i]];
  bins.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c) bins.centroids[relabel[c]] = centroids[c];

  bins.variances.assign(k, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bins.variances[bins.labels[i]] += dist2(pts[i], bins.centroids[bins.labels[i]]);
    ++counts[bins.labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c) bins.variances[c] = counts[c] ? bins.variances[c] / static_cast<double>(counts[c]) : 0.0;

  std::size_t ref = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (counts[c] == 0) continue;
    if (counts[ref] == 0 || bins.variances[c] < bins.variances[ref] ||
        (bins.variances[c] == bins.variances[ref] && counts[c] > counts[ref]))
      ref = c;
  }
  bins.reference_bin = ref;
  return bins;
}

void validate_field_set(const FieldSet& set, const Shape& grid_shape, std::size_t bins) {
  if (set.fields.size() != bins)
    throw std::invalid_argument("field set has " + std::to_string(set.fields.size()) + " bins, model has " +
                                std::to_string(bins));
  if (set.reference_bin >= bins) throw std::invalid_argument("field set reference bin out of range");
  for (std::size_t b = 0; b < bins; ++b) {
    set.fields[b].validate();
    if (set.fields[b].shape != grid_shape)
      throw ShapeError("field for bin " + std::to_string(b) + " has shape " + to_string(set.fields[b].shape) +
                       ", model grid is " + to_string(grid_shape));
  }
  if (!set.fields[set.reference_bin].is_zero())
    throw std::invalid_argument("reference bin " + std::to_string(set.reference_bin) +
                                " has a non-zero displacement field");
}

FieldSet ingest_displacement_fields(const std::filesystem::path& path, const Shape& grid_shape, std::size_t bins) {
  FieldSet set = read_field_set(path);
  validate_field_set(set, grid_shape, bins);
  return set;
}

}  // namespace isgrid
