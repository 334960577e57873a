#include "isgrid/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace isgrid {

using nlohmann::json;

FieldSpec random_field_spec(const Shape& shape, const RandomBumps& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xf1e1dull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  FieldSpec out;
  out.shape = shape;
  const std::size_t d = shape.size();
  for (std::size_t i = 0; i < spec.count; ++i) {
    Bump b;
    b.radius = spec.radius;
    for (std::size_t a = 0; a < d; ++a) b.center.push_back(unit(rng) * spec.extent * static_cast<double>(shape[a]));
    // Random direction with the configured magnitude.
    std::vector<double> dir(d);
    double norm = 0;
    do {
      norm = 0;
      for (auto& v : dir) {
        v = unit(rng);
        norm += v * v;
      }
    } while (norm < 1e-2 || norm > 1.0);
    for (auto v : dir) b.amplitude.push_back(spec.amplitude * v / std::sqrt(norm));
    out.bumps.push_back(b);
  }
  return out;
}

PhantomSpec ExperimentConfig::resolved_phantom() const {
  PhantomSpec p;
  if (phantom_kind == "shepp_logan") {
    p = PhantomSpec::shepp_logan(shape, phantom_scale);
  } else {
    p.shape = shape;
    p.ellipses = ellipses;
  }
  p.smoothing_sigma = smoothing_sigma;
  return p;
}

FieldSpec ExperimentConfig::resolved_field() const {
  FieldSpec f = field ? *field : random_field_spec(shape, random_field, seed);
  f.shape = shape;
  return f.scaled(motion_scale);
}

void ExperimentConfig::validate() const {
  validate_shape(shape, true);
  if (phantom_kind != "shepp_logan" && phantom_kind != "ellipses")
    throw ConfigError("phantom.kind must be 'shepp_logan' or 'ellipses', got '" + phantom_kind + "'");
  if (phantom_kind == "ellipses" && ellipses.empty()) throw ConfigError("phantom.ellipses is empty");
  if (!(phantom_scale > 0)) throw ConfigError("phantom.scale must be > 0");
  resolved_phantom().validate();
  if (motion_scale < 0) throw ConfigError("motion_scale must be >= 0");
  if (!field) {
    if (random_field.amplitude < 0 || !(random_field.radius > 0) || random_field.extent < 0)
      throw ConfigError("field.random needs amplitude >= 0, radius > 0, extent >= 0");
  }
  resolved_field().validate();
  kernel.validate();
  solver.validate(shape);
  if (fields_file && !std::filesystem::exists(*fields_file))
    throw ConfigError("acquisition.fields_file '" + fields_file->string() + "' does not exist");
}

ExperimentConfig default_invert_warp_config() {
  ExperimentConfig c;
  c.output_dir = "out/invert-warp";
  c.shape = {128, 128};
  c.phantom_scale = 0.7;
  c.smoothing_sigma = 1.0;
  c.random_field = RandomBumps{3, 4.0, 12.0, 0.2};
  c.solver.lambda = 1e-6;
  c.solver.max_iters = 400;
  c.solver.wavelet_levels = 3;
  return c;
}

ExperimentConfig default_recon_config() {
  ExperimentConfig c;
  c.output_dir = "out/recon";
  c.shape = {64, 64};
  c.phantom_scale = 0.55;
  c.smoothing_sigma = 1.0;
  c.acquisition.bin_shift_step = {1.5};
  c.random_field = RandomBumps{2, 2.0, 7.0, 0.15};
  c.solver.lambda = 1e-4;
  c.solver.max_iters = 60;
  c.solver.wavelet_levels = 3;
  c.acquisition.noise_sigma = 0.0;
  return c;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::vector<double> get_vec(const json& j, const std::string& key, const std::string& where) {
  return get<std::vector<double>>(j, key, where);
}

void parse_phantom(const json& j, ExperimentConfig& c) {
  check_keys(j, {"kind", "scale", "smoothing_sigma", "ellipses"}, "phantom");
  if (j.contains("kind")) c.phantom_kind = get<std::string>(j, "kind", "phantom");
  if (j.contains("scale")) c.phantom_scale = get<double>(j, "scale", "phantom");
  if (j.contains("smoothing_sigma")) c.smoothing_sigma = get<double>(j, "smoothing_sigma", "phantom");
  if (j.contains("ellipses")) {
    c.ellipses.clear();
    for (const auto& e : j.at("ellipses")) {
      check_keys(e, {"center", "semi_axes", "rotation_deg", "intensity"}, "phantom.ellipses[]");
      Ellipse el;
      el.center = get_vec(e, "center", "ellipse");
      el.semi_axes = get_vec(e, "semi_axes", "ellipse");
      if (e.contains("rotation_deg")) el.rotation_deg = get<double>(e, "rotation_deg", "ellipse");
      if (e.contains("intensity")) el.intensity = get<double>(e, "intensity", "ellipse");
      c.ellipses.push_back(el);
    }
  }
}

void parse_field(const json& j, ExperimentConfig& c) {
  check_keys(j, {"bumps", "random"}, "field");
  if (j.contains("bumps") && j.contains("random")) throw ConfigError("field: give either 'bumps' or 'random'");
  if (j.contains("bumps")) {
    FieldSpec f;
    for (const auto& b : j.at("bumps")) {
      check_keys(b, {"center", "amplitude", "radius"}, "field.bumps[]");
      Bump bump;
      bump.center = get_vec(b, "center", "bump");
      bump.amplitude = get_vec(b, "amplitude", "bump");
      if (b.contains("radius")) bump.radius = get<double>(b, "radius", "bump");
      f.bumps.push_back(bump);
    }
    c.field = f;
  }
  if (j.contains("random")) {
    const auto& r = j.at("random");
    check_keys(r, {"count", "amplitude", "radius", "extent"}, "field.random");
    if (r.contains("count")) c.random_field.count = get<std::size_t>(r, "count", "field.random");
    if (r.contains("amplitude")) c.random_field.amplitude = get<double>(r, "amplitude", "field.random");
    if (r.contains("radius")) c.random_field.radius = get<double>(r, "radius", "field.random");
    if (r.contains("extent")) c.random_field.extent = get<double>(r, "extent", "field.random");
    c.field.reset();
  }
}

void parse_kernel(const json& j, ExperimentConfig& c) {
  check_keys(j, {"width", "oversampling", "beta"}, "kernel");
  const int w = j.contains("width") ? get<int>(j, "width", "kernel") : c.kernel.width;
  const double os = j.contains("oversampling") ? get<double>(j, "oversampling", "kernel") : c.kernel.oversampling;
  if (w < 2) throw ConfigError("kernel.width must be >= 2");
  if (!(os >= 1.0)) throw ConfigError("kernel.oversampling must be >= 1");
  try {
    c.kernel = KernelSpec::make(w, os);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  if (j.contains("beta")) c.kernel.beta = get<double>(j, "beta", "kernel");
}

void parse_solver(const json& j, SolverConfig& s) {
  check_keys(j, {"lambda", "max_iters", "step_size", "wavelet_levels", "tol", "power_iters"}, "solver");
  if (j.contains("lambda")) s.lambda = get<double>(j, "lambda", "solver");
  if (j.contains("max_iters")) s.max_iters = get<int>(j, "max_iters", "solver");
  if (j.contains("step_size")) {
    const auto& v = j.at("step_size");
    if (v.is_string() && v.get<std::string>() == "auto")
      s.step_size.reset();
    else
      s.step_size = get<double>(j, "step_size", "solver");
  }
  if (j.contains("wavelet_levels")) s.wavelet_levels = get<int>(j, "wavelet_levels", "solver");
  if (j.contains("tol")) {
    if (j.at("tol").is_null())
      s.tol.reset();
    else
      s.tol = get<double>(j, "tol", "solver");
  }
  if (j.contains("power_iters")) s.power_iters = get<int>(j, "power_iters", "solver");
}

void parse_acquisition(const json& j, ExperimentConfig& c, const std::filesystem::path& base_dir) {
  check_keys(j,
             {"heartbeats", "interleaves_per_heartbeat", "trajectory", "samples_per_spoke", "nav_factor", "bins",
              "bin_shift_step", "shift_jitter", "reference_jitter_fraction", "respiratory_period", "noise_sigma",
              "coils", "coil_smoothness", "fields_file"},
             "acquisition");
  auto& a = c.acquisition;
  const std::string w = "acquisition";
  if (j.contains("heartbeats")) a.heartbeats = get<std::size_t>(j, "heartbeats", w);
  if (j.contains("interleaves_per_heartbeat")) a.interleaves_per_heartbeat = get<std::size_t>(j, "interleaves_per_heartbeat", w);
  if (j.contains("trajectory")) {
    try {
      a.trajectory = trajectory_kind_from_string(get<std::string>(j, "trajectory", w));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("acquisition.trajectory: ") + e.what());
    }
  }
  if (j.contains("samples_per_spoke")) a.samples_per_spoke = get<std::size_t>(j, "samples_per_spoke", w);
  if (j.contains("nav_factor")) a.nav_factor = get<std::size_t>(j, "nav_factor", w);
  if (j.contains("bins")) a.bins = get<std::size_t>(j, "bins", w);
  if (j.contains("bin_shift_step")) a.bin_shift_step = get_vec(j, "bin_shift_step", w);
  if (j.contains("shift_jitter")) a.shift_jitter = get<double>(j, "shift_jitter", w);
  if (j.contains("reference_jitter_fraction")) a.reference_jitter_fraction = get<double>(j, "reference_jitter_fraction", w);
  if (j.contains("respiratory_period")) a.respiratory_period = get<double>(j, "respiratory_period", w);
  if (j.contains("noise_sigma")) a.noise_sigma = get<double>(j, "noise_sigma", w);
  if (j.contains("coils")) a.coils = get<std::size_t>(j, "coils", w);
  if (j.contains("coil_smoothness")) a.coil_smoothness = get<double>(j, "coil_smoothness", w);
  if (j.contains("fields_file")) {
    std::filesystem::path p = get<std::string>(j, "fields_file", w);
    if (p.is_relative()) p = base_dir / p;
    c.fields_file = p;
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, ExperimentConfig c, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"seed", "output_dir", "shape", "phantom", "field", "motion_scale", "kernel", "solver", "acquisition"},
             "config");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", "config");
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", "config");
  if (j.contains("shape")) c.shape = get<Shape>(j, "shape", "config");
  if (j.contains("phantom")) parse_phantom(j.at("phantom"), c);
  if (j.contains("field")) parse_field(j.at("field"), c);
  if (j.contains("motion_scale")) c.motion_scale = get<double>(j, "motion_scale", "config");
  if (j.contains("kernel")) parse_kernel(j.at("kernel"), c);
  if (j.contains("solver")) parse_solver(j.at("solver"), c.solver);
  if (j.contains("acquisition")) parse_acquisition(j.at("acquisition"), c, base_dir);
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base), path.parent_path());
}

}  // namespace isgrid
