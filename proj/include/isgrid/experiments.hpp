#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "isgrid/config.hpp"
#include "isgrid/motion.hpp"
#include "isgrid/solver.hpp"

namespace isgrid {

using Metrics = std::vector<std::pair<std::string, std::string>>;

/// Warp a phantom with a smooth field, then try to undo it two ways:
/// warping back with the negated field, and solving the regularised inverse problem.
struct InvertWarpResult {
  ComplexGrid phantom;
  DisplacementField field;
  ComplexGrid warped;         // image-space gridding forward
  ComplexGrid warped_oracle;  // direct linear interpolation
  ComplexGrid naive;          // forward with -d
  ComplexGrid iterative;      // FISTA
  double nrmse_warp_vs_oracle = 0;
  double nrmse_naive = 0;
  double nrmse_iterative = 0;
  SolveReport report;

  Metrics metrics() const;
};

InvertWarpResult run_invert_warp(const ExperimentConfig& config);
void write_outputs(const InvertWarpResult& result, const std::filesystem::path& dir);

struct ReconResult {
  ComplexGrid phantom;
  ComplexGrid uncorrected;
  ComplexGrid translational;
  ComplexGrid nonrigid;
  double nrmse_uncorrected = 0;
  double nrmse_translational = 0;
  double nrmse_nonrigid = 0;
  MotionEstimate motion;  // in main-grid voxels, relative to the reference bin
  RespiratoryBins bins;
  std::vector<std::size_t> true_bins;
  std::size_t bin_agreement = 0;  // heartbeats whose bin maps back to their true bin
  FieldSet model_fields;          // per estimated bin, as used by the nonrigid model
  SolveReport report_uncorrected, report_translational, report_nonrigid;

  Metrics metrics() const;
};

ReconResult run_recon(const ExperimentConfig& config);
void write_outputs(const ReconResult& result, const std::filesystem::path& dir);

std::string format_double(double v);

}  // namespace isgrid
