#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "isgrid/kernel.hpp"
#include "isgrid/sim.hpp"
#include "isgrid/solver.hpp"

namespace isgrid {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Seeded random displacement bumps, used when a config gives no explicit bump list.
struct RandomBumps {
  std::size_t count = 3;
  double amplitude = 4.0;  // displacement magnitude of each bump (voxels)
  double radius = 12.0;
  double extent = 0.25;    // centres drawn uniformly within +-extent * N per axis
};

FieldSpec random_field_spec(const Shape& shape, const RandomBumps& spec, std::uint64_t seed);

/// Everything one experiment run needs. Parsed from JSON on top of per-experiment
/// defaults; unknown keys are rejected at every level.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  Shape shape;
  std::string phantom_kind = "shepp_logan";  // or "ellipses"
  double phantom_scale = 0.7;
  double smoothing_sigma = 0.0;
  std::vector<Ellipse> ellipses;             // phantom_kind == "ellipses"
  std::optional<FieldSpec> field;    // explicit bumps
  RandomBumps random_field;          // used when `field` is empty
  AcquisitionSpec acquisition;       // recon only
  std::optional<std::filesystem::path> fields_file;
  KernelSpec kernel = KernelSpec::make();
  SolverConfig solver;
  double motion_scale = 1.0;         // scales every shift and field amplitude (0: static)

  PhantomSpec resolved_phantom() const;
  /// Field spec after resolving the random default with `seed`.
  FieldSpec resolved_field() const;
  void validate() const;
};

ExperimentConfig default_invert_warp_config();
ExperimentConfig default_recon_config();

/// Overlays the JSON document at `path` onto `base`.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base);
ExperimentConfig parse_config(const std::string& json_text, ExperimentConfig base,
                              const std::filesystem::path& base_dir = ".");

}  // namespace isgrid
