#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bronchopt/bvh.hpp"
#include "bronchopt/camera.hpp"
#include "bronchopt/depth_map.hpp"
#include "bronchopt/losses.hpp"
#include "bronchopt/mesh.hpp"
#include "bronchopt/se3.hpp"

namespace bronchopt {

/// Nested-loop depth-consistency refinement parameters. Step sizes are the
/// per-iteration displacement magnitudes applied along the normalized
/// finite-difference gradient direction of each tangent block.
struct RefinerConfig {
  int inner_iters = 3;
  int outer_iters = 3;
  double trans_step = 0.5;   // mm per iteration
  double rot_step = 0.02;    // rad per iteration
  double trans_eps = 0.05;   // central-difference probe [mm]
  double rot_eps = 0.002;    // central-difference probe [rad]
  double momentum = 0.9;     // heavy-ball coefficient
  int multi_start = 1;       // extra starts sampled around init when > 1
  double conv_tol = 1e-5;    // minimum loss decrease counted as progress
  uint64_t seed = 0;         // only used by multi-start sampling

  void validate() const;

  /// Flat key=value text, '#' comments. Unknown keys are rejected.
  static RefinerConfig from_file(const std::filesystem::path& path);
  bool apply_key_value(const std::string& key, const std::string& value);
};

struct TraceEntry {
  int iteration = 0;
  double render_loss = 0.0;
  double sdf_loss = 0.0;
  double total = 0.0;
  Pose pose;  // iterate the losses were evaluated at
};

struct RefineResult {
  Pose final_pose;
  std::vector<TraceEntry> loss_trace;
  bool converged = false;
  int evaluations = 0;  // depth renders performed

  void write_trace_csv(const std::filesystem::path& path) const;
};

/// Iterative registration of `init` against an observed depth map by
/// minimizing lambda_r * (1 - MS-SSIM) + lambda_s * sdf_loss over se(3).
/// Gradients come from central differences along the 6 tangent axes (each
/// probe re-renders); updates are heavy-ball momentum steps with halving
/// after 3 consecutive non-improvements. Steps whose candidate camera center
/// leaves the lumen are rejected. Returns the pose of the lowest total loss
/// ever evaluated.
RefineResult refine(const AirwayMesh& mesh, const Bvh& bvh,
                    const DepthMap& observed, const CameraIntrinsics& K,
                    const Pose& init, const RefinerConfig& cfg = {},
                    const RefineLossWeights& w = {},
                    const SdfLossParams& sdf_p = {});

/// Same loop for a scale-ambiguous pseudo depth map: the observation is
/// median-ratio matched to the rendered map at the start of every outer
/// iteration before loss evaluation.
RefineResult refine_with_pseudo_depth(const AirwayMesh& mesh, const Bvh& bvh,
                                      const DepthMap& pseudo,
                                      const CameraIntrinsics& K,
                                      const Pose& init,
                                      const RefinerConfig& cfg = {},
                                      const RefineLossWeights& w = {},
                                      const SdfLossParams& sdf_p = {});

}  // namespace bronchopt
