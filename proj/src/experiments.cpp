#include "isgrid/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "isgrid/io.hpp"
#include "isgrid/sim.hpp"

namespace isgrid {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_trace(const fs::path& path, const SolveReport& r) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "iteration,objective\n";
  for (std::size_t i = 0; i < r.objective_trace.size(); ++i) os << i << ',' << format_double(r.objective_trace[i]) << '\n';
}

void add_report(Metrics& m, const std::string& prefix, const SolveReport& r) {
  m.emplace_back(prefix + "iterations", std::to_string(r.iterations_run));
  m.emplace_back(prefix + "step_size", format_double(r.step_size));
  m.emplace_back(prefix + "final_objective", format_double(r.objective_trace.empty() ? 0.0 : r.objective_trace.back()));
  m.emplace_back(prefix + "final_relative_change", format_double(r.final_relative_change));
}

}  // namespace

// ---------------------------------------------------------------------------
// Warp inversion

Metrics InvertWarpResult::metrics() const {
  Metrics m;
  m.emplace_back("nrmse_warp_vs_oracle", format_double(nrmse_warp_vs_oracle));
  m.emplace_back("nrmse_naive", format_double(nrmse_naive));
  m.emplace_back("nrmse_iterative", format_double(nrmse_iterative));
  m.emplace_back("improvement_ratio", format_double(nrmse_iterative > 0 ? nrmse_naive / nrmse_iterative : 0.0));
  m.emplace_back("max_displacement", format_double(field.max_abs()));
  add_report(m, "solver_", report);
  return m;
}

InvertWarpResult run_invert_warp(const ExperimentConfig& config) {
  config.validate();
  InvertWarpResult r;
  r.phantom = make_phantom(config.resolved_phantom());
  r.field = make_field(config.resolved_field());
  const double margin_needed = config.kernel.width + r.field.max_abs();
  if (static_cast<double>(support_margin(r.phantom)) < margin_needed)
    throw std::invalid_argument("phantom support is closer than " + format_double(margin_needed) +
                                " voxels to the grid edge");

  // A zero field is the identity warp, as in the SENSE operators.
  const bool identity = r.field.is_zero();
  const GriddingPlan plan = make_plan(config.shape, config.kernel);
  std::shared_ptr<const ImageGridder> warp;
  if (!identity) warp = std::make_shared<const ImageGridder>(plan, r.field);
  r.warped = identity ? r.phantom : warp->forward(r.phantom);
  r.warped_oracle = warp_oracle(r.phantom, r.field, InterpMethod::linear);
  r.nrmse_warp_vs_oracle = nrmse(r.warped_oracle.data(), r.warped.data());

  r.naive = identity ? r.warped : ImageGridder(plan, r.field.negated()).forward(r.warped);
  r.nrmse_naive = nrmse(r.naive.data(), r.phantom.data());

  const LinearOperator op = identity ? identity_operator(config.shape) : make_operator(warp);
  SolveResult solved = fista_solve(op, r.warped.data(), config.solver);
  r.iterative = std::move(solved.image);
  r.report = std::move(solved.report);
  r.nrmse_iterative = nrmse(r.iterative.data(), r.phantom.data());
  return r;
}

void write_outputs(const InvertWarpResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  write_pgm(dir / "phantom.pgm", r.phantom);
  write_pgm(dir / "warped.pgm", r.warped);
  write_pgm(dir / "warped_oracle.pgm", r.warped_oracle);
  write_pgm(dir / "naive.pgm", r.naive);
  write_pgm(dir / "iterative.pgm", r.iterative);
  write_grid(dir / "iterative.json", r.iterative);
  write_field(dir / "field.json", r.field);
  write_trace(dir / "objective_trace.csv", r.report);
  write_metrics(dir / "metrics.txt", r.metrics());
}

// ---------------------------------------------------------------------------
// Motion-corrected reconstruction

Metrics ReconResult::metrics() const {
  Metrics m;
  m.emplace_back("nrmse_uncorrected", format_double(nrmse_uncorrected));
  m.emplace_back("nrmse_translational", format_double(nrmse_translational));
  m.emplace_back("nrmse_nonrigid", format_double(nrmse_nonrigid));
  m.emplace_back("bins", std::to_string(bins.bins));
  m.emplace_back("reference_bin", std::to_string(bins.reference_bin));
  m.emplace_back("bin_agreement", std::to_string(bin_agreement) + "/" + std::to_string(true_bins.size()));
  add_report(m, "uncorrected_", report_uncorrected);
  add_report(m, "translational_", report_translational);
  add_report(m, "nonrigid_", report_nonrigid);
  return m;
}

namespace {

// Pull field of the translation-corrected frame: a heartbeat left with residual
// translation e sees p(r - e + d(r - e)); expressed against a target frame already
// offset by o, that is x(r + o - e + d(r - e)).
DisplacementField corrected_frame_field(const DisplacementField& d, std::span<const double> e,
                                        std::span<const double> o) {
  const std::size_t nd = d.ndim();
  DisplacementField out = DisplacementField::zeros(d.shape);
  DisplacementField back = DisplacementField::zeros(d.shape);
  for (std::size_t v = 0; v < back.voxels(); ++v)
    for (std::size_t a = 0; a < nd; ++a) back.offsets[v * nd + a] = -e[a];
  for (std::size_t a = 0; a < nd; ++a) {
    ComplexGrid comp(d.shape);
    for (std::size_t v = 0; v < comp.size(); ++v) comp[v] = d.offsets[v * nd + a];
    const ComplexGrid moved = warp_oracle(comp, back, InterpMethod::linear);
    for (std::size_t v = 0; v < comp.size(); ++v) out.offsets[v * nd + a] = o[a] - e[a] + moved[v].real();
  }
  return out;
}

}  // namespace

ReconResult run_recon(const ExperimentConfig& config) {
  config.validate();
  const Shape& shape = config.shape;
  const std::size_t nd = shape.size();

  AcquisitionSpec acq = config.acquisition;
  acq.field = config.resolved_field();
  for (auto& s : acq.bin_shift_step) s *= config.motion_scale;
  acq.shift_jitter *= config.motion_scale;

  ReconResult r;
  r.phantom = make_phantom(config.resolved_phantom());
  const SimulatedAcquisition sim = simulate_acquisition(r.phantom, acq, config.kernel, config.seed);
  r.true_bins = sim.truth.bins;
  const std::size_t hb_count = sim.heartbeats.size();

  // Translations from the navigators, in main-grid voxels.
  std::vector<ComplexGrid> navs;
  for (const auto& hb : sim.heartbeats) navs.push_back(hb.nav);
  MotionEstimate est = estimate_motion(navs, 0);
  for (auto& s : est.shifts)
    for (auto& v : s) v *= static_cast<double>(acq.nav_factor);

  const std::set<ShiftVector> distinct(est.shifts.begin(), est.shifts.end());
  const std::size_t k = std::min(acq.bins, distinct.size());
  r.bins = kmeans_bin(est, k, config.seed);
  const ShiftVector centre = r.bins.centroids[r.bins.reference_bin];
  for (auto& s : est.shifts)
    for (std::size_t a = 0; a < nd; ++a) s[a] -= centre[a];
  r.motion = est;

  // Density-weighted samples: sqrt(D) in the operator and on the data.
  const GriddingPlan plan = make_plan(shape, config.kernel);
  std::vector<std::vector<double>> coords(hb_count), weights(hb_count);
  std::vector<CoilData> raw(hb_count), corrected(hb_count);
  for (std::size_t h = 0; h < hb_count; ++h) {
    const auto& hb = sim.heartbeats[h];
    coords[h] = sim.trajectory.gather_coords(hb.samples);
    for (auto s : hb.samples) weights[h].push_back(std::sqrt(sim.trajectory.density[s]));
    ShiftVector undo(nd);
    for (std::size_t a = 0; a < nd; ++a) undo[a] = -est.shifts[h][a];
    for (const auto& coil : hb.data) {
      std::vector<Complex> w(coil.size());
      for (std::size_t j = 0; j < coil.size(); ++j) w[j] = weights[h][j] * coil[j];
      corrected[h].push_back(apply_phase_shift(coords[h], w, shape, undo));
      raw[h].push_back(std::move(w));
    }
  }

  auto state_for = [&](const std::vector<std::size_t>& members, const std::vector<CoilData>& data,
                       std::shared_ptr<const ImageGridder> warp) {
    std::vector<double> c, w;
    CoilData y(sim.coils->count());
    for (auto h : members) {
      c.insert(c.end(), coords[h].begin(), coords[h].end());
      w.insert(w.end(), weights[h].begin(), weights[h].end());
      for (std::size_t ci = 0; ci < y.size(); ++ci) y[ci].insert(y[ci].end(), data[h][ci].begin(), data[h][ci].end());
    }
    auto gridder = std::make_shared<const KSpaceGridder>(plan, std::move(c), std::move(w));
    return std::make_pair(NonrigidSenseOp(std::move(warp), sim.coils, gridder), std::move(y));
  };

  std::vector<std::size_t> all(hb_count);
  for (std::size_t h = 0; h < hb_count; ++h) all[h] = h;

  auto solve_single = [&](const std::vector<CoilData>& data, SolveReport& report) {
    StackedSenseModel model;
    auto [op, y] = state_for(all, data, nullptr);
    model.states.push_back(std::move(op));
    model.data.push_back(std::move(y));
    SolveResult s = fista_solve(model, config.solver);
    report = std::move(s.report);
    return std::move(s.image);
  };
  r.uncorrected = solve_single(raw, r.report_uncorrected);
  r.translational = solve_single(corrected, r.report_translational);

  // Per-bin fields: ingested as given, or ground truth carried into the corrected frame.
  const std::size_t kb = r.bins.bins;
  std::vector<std::size_t> truth_of(kb, 0);
  std::vector<ShiftVector> residual(kb, ShiftVector(nd, 0.0));
  for (std::size_t b = 0; b < kb; ++b) {
    const auto members = r.bins.members(b);
    std::map<std::size_t, std::size_t> votes;
    for (auto h : members) {
      ++votes[sim.truth.bins[h]];
      for (std::size_t a = 0; a < nd; ++a)
        residual[b][a] += (sim.truth.shifts[h][a] - est.shifts[h][a]) / static_cast<double>(members.size());
    }
    truth_of[b] = std::max_element(votes.begin(), votes.end(), [](auto& x, auto& y) { return x.second < y.second; })->first;
  }
  for (std::size_t h = 0; h < hb_count; ++h)
    if (truth_of[r.bins.labels[h]] == sim.truth.bins[h]) ++r.bin_agreement;

  if (config.fields_file) {
    r.model_fields = ingest_displacement_fields(*config.fields_file, shape, kb);
    if (r.model_fields.reference_bin != r.bins.reference_bin)
      throw std::invalid_argument("ingested fields name reference bin " + std::to_string(r.model_fields.reference_bin) +
                                  " but binning chose " + std::to_string(r.bins.reference_bin));
  } else {
    const std::size_t ref = r.bins.reference_bin;
    const bool ref_static = sim.truth.fields.fields[truth_of[ref]].is_zero();
    const ShiftVector offset = ref_static ? residual[ref] : ShiftVector(nd, 0.0);
    r.model_fields.reference_bin = ref;
    for (std::size_t b = 0; b < kb; ++b) {
      const auto& truth = sim.truth.fields.fields[truth_of[b]];
      if (b == ref && ref_static)
        r.model_fields.fields.push_back(DisplacementField::zeros(shape));
      else if (truth.is_zero() && residual[b] == offset)
        r.model_fields.fields.push_back(DisplacementField::zeros(shape));
      else
        r.model_fields.fields.push_back(corrected_frame_field(truth, residual[b], offset));
    }
  }

  StackedSenseModel model;
  for (std::size_t b = 0; b < kb; ++b) {
    const auto& f = r.model_fields.fields[b];
    std::shared_ptr<const ImageGridder> warp;
    if (!f.is_zero()) warp = std::make_shared<const ImageGridder>(plan, f);
    auto [op, y] = state_for(r.bins.members(b), corrected, std::move(warp));
    model.states.push_back(std::move(op));
    model.data.push_back(std::move(y));
  }
  SolveResult nr = fista_solve(model, config.solver);
  r.nonrigid = std::move(nr.image);
  r.report_nonrigid = std::move(nr.report);

  r.nrmse_uncorrected = nrmse(r.uncorrected.data(), r.phantom.data());
  r.nrmse_translational = nrmse(r.translational.data(), r.phantom.data());
  r.nrmse_nonrigid = nrmse(r.nonrigid.data(), r.phantom.data());
  return r;
}

void write_outputs(const ReconResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  write_pgm(dir / "phantom.pgm", r.phantom);
  write_pgm(dir / "uncorrected.pgm", r.uncorrected);
  write_pgm(dir / "translational.pgm", r.translational);
  write_pgm(dir / "nonrigid.pgm", r.nonrigid);
  write_grid(dir / "nonrigid.json", r.nonrigid);
  write_field_set(dir / "model_fields.json", r.model_fields);
  write_motion_csv(dir / "motion.csv", r.motion, &r.bins);
  write_trace(dir / "trace_uncorrected.csv", r.report_uncorrected);
  write_trace(dir / "trace_translational.csv", r.report_translational);
  write_trace(dir / "trace_nonrigid.csv", r.report_nonrigid);
  write_metrics(dir / "metrics.txt", r.metrics());
}

}  // namespace isgrid
