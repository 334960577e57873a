#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "isgrid/config.hpp"
#include "isgrid/experiments.hpp"
#include "isgrid/io.hpp"
#include "isgrid/kgrid.hpp"
#include "isgrid/selftest.hpp"

using namespace isgrid;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNumerical = 2;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (experiments) or file (operators)");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--threads", c.threads, "worker threads (overrides ISGRID_THREADS)")->check(CLI::PositiveNumber);
}

void set_threads(const Common& c) {
  int n = 0;
  if (c.threads) {
    n = *c.threads;
  } else if (const char* env = std::getenv("ISGRID_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("ISGRID_THREADS is not an integer: '") + env + "'");
    }
    if (n < 1) throw std::invalid_argument("ISGRID_THREADS must be >= 1");
  }
  if (n > 0) omp_set_num_threads(n);
}

ExperimentConfig resolve_config(const Common& c, ExperimentConfig base) {
  ExperimentConfig cfg = c.config.empty() ? base : load_config(c.config, std::move(base));
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

void print_metrics(const Metrics& m) {
  for (const auto& [k, v] : m) std::cout << k << '=' << v << '\n';
}

Shape parse_shape(const std::string& s) {
  Shape shape;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      shape.push_back(static_cast<std::size_t>(std::stoul(tok)));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad shape '" + s + "'");
    }
  }
  validate_shape(shape, true);
  return shape;
}

KernelSpec kernel_from(int width, double os) {
  KernelSpec k = KernelSpec::make(width, os);
  k.validate();
  return k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-space gridding, nonrigid SENSE and motion-corrected reconstruction"};
  app.require_subcommand(1);

  Common selftest_opts, invert_opts, recon_opts, warp_opts, grid_opts, png_opts;

  auto* selftest = app.add_subcommand("selftest", "run adjoint, oracle and orthonormality checks");
  add_common(selftest, selftest_opts);
  bool inject_fault = false;
  int trials = 3;
  selftest->add_flag("--inject-fault", inject_fault, "perturb one spreading tap (the suite must then fail)");
  selftest->add_option("--trials", trials, "random trials per check and shape")->check(CLI::PositiveNumber);

  auto* invert = app.add_subcommand("invert-warp", "invert a nonrigid warp naively and iteratively");
  add_common(invert, invert_opts);

  auto* recon = app.add_subcommand("recon", "simulate and reconstruct motion-corrupted multi-coil data");
  add_common(recon, recon_opts);

  auto* warp = app.add_subcommand("warp", "apply image-space gridding to an image file");
  add_common(warp, warp_opts);
  std::string warp_input, warp_field;
  bool warp_adjoint = false;
  int warp_width = 4;
  double warp_os = 2.0;
  warp->add_option("--input", warp_input, "image array (.json)")->required()->check(CLI::ExistingFile);
  warp->add_option("--field", warp_field, "displacement field array (.json)")->required()->check(CLI::ExistingFile);
  warp->add_flag("--adjoint", warp_adjoint, "apply the adjoint instead of the forward warp");
  warp->add_option("--kernel-width", warp_width);
  warp->add_option("--oversampling", warp_os);

  auto* grid = app.add_subcommand("grid", "k-space gridding between samples and an image");
  add_common(grid, grid_opts);
  std::string grid_samples, grid_input, grid_shape;
  bool grid_inverse = false;
  int grid_width = 4;
  double grid_os = 2.0;
  grid->add_option("--samples", grid_samples, "sample stem (<stem>_coords.json, <stem>_values.json)")->required();
  grid->add_option("--shape", grid_shape, "image shape, e.g. 32,32 (gridding direction)");
  grid->add_flag("--inverse", grid_inverse, "image -> samples at the coordinates of --samples");
  grid->add_option("--input", grid_input, "image array for --inverse")->check(CLI::ExistingFile);
  grid->add_option("--kernel-width", grid_width);
  grid->add_option("--oversampling", grid_os);

  auto* png = app.add_subcommand("export-png", "write an array's magnitude as 8-bit grayscale PNG");
  add_common(png, png_opts);
  std::string png_input;
  png->add_option("--input", png_input, "array (.json)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*selftest) {
      set_threads(selftest_opts);
      SelftestOptions o;
      o.trials = trials;
      o.inject_fault = inject_fault;
      if (selftest_opts.seed) o.seed = *selftest_opts.seed;
      const bool ok = print_report(run_selftest(o), std::cout);
      return ok ? kOk : kNumerical;
    }
    if (*invert) {
      set_threads(invert_opts);
      const auto cfg = resolve_config(invert_opts, default_invert_warp_config());
      const auto result = run_invert_warp(cfg);
      write_outputs(result, cfg.output_dir);
      print_metrics(result.metrics());
      return kOk;
    }
    if (*recon) {
      set_threads(recon_opts);
      const auto cfg = resolve_config(recon_opts, default_recon_config());
      const auto result = run_recon(cfg);
      write_outputs(result, cfg.output_dir);
      print_metrics(result.metrics());
      return kOk;
    }
    if (*warp) {
      set_threads(warp_opts);
      if (warp_opts.out.empty()) throw std::invalid_argument("warp needs --out FILE.json");
      const ComplexGrid image = read_grid(warp_input);
      DisplacementField field = read_field(warp_field);
      if (field.shape != image.shape())
        throw ShapeError("field shape " + to_string(field.shape) + " does not match image shape " + to_string(image.shape()));
      const ImageGridder g(kernel_from(warp_width, warp_os), std::move(field));
      write_grid(warp_opts.out, warp_adjoint ? g.adjoint(image) : g.forward(image));
      return kOk;
    }
    if (*grid) {
      set_threads(grid_opts);
      if (grid_opts.out.empty()) throw std::invalid_argument("grid needs --out");
      NonCartesianSet samples = read_samples(grid_samples);
      if (grid_inverse) {
        if (grid_input.empty()) throw std::invalid_argument("grid --inverse needs --input IMAGE.json");
        const ComplexGrid image = read_grid(grid_input);
        if (samples.dim != image.ndim()) throw ShapeError("sample coordinates and image have different rank");
        const KSpaceGridder g(make_plan(image.shape(), kernel_from(grid_width, grid_os)), samples.coords);
        samples.values = g.inverse(image);
        write_samples(grid_opts.out, samples);
      } else {
        if (grid_shape.empty()) throw std::invalid_argument("grid needs --shape");
        const Shape shape = parse_shape(grid_shape);
        if (samples.dim != shape.size()) throw ShapeError("sample coordinates and --shape have different rank");
        const KSpaceGridder g(make_plan(shape, kernel_from(grid_width, grid_os)), samples.coords);
        write_grid(grid_opts.out, g.forward(samples.values));
      }
      return kOk;
    }
    if (*png) {
      set_threads(png_opts);
      if (png_opts.out.empty()) throw std::invalid_argument("export-png needs --out FILE.png");
      write_png(png_opts.out, read_grid(png_input));
      return kOk;
    }
  } catch (const SolverDivergence& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
