#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bronchopt/bvh.hpp"
#include "bronchopt/camera.hpp"
#include "bronchopt/centerline.hpp"
#include "bronchopt/depth_map.hpp"
#include "bronchopt/losses.hpp"
#include "bronchopt/mesh.hpp"
#include "bronchopt/se3.hpp"

namespace bronchopt {

/// Uniform per-axis perturbation bounds for initial poses.
struct PerturbationSpec {
  double max_trans_mm = 5.0;
  double max_rot_rad = 25.0 * M_PI / 180.0;

  static PerturbationSpec train() { return {10.0, 0.44}; }
  static PerturbationSpec bench() { return {5.0, 25.0 * M_PI / 180.0}; }
};

/// One registration problem: ground-truth view, perturbed starting pose, and
/// the difficulty bucket implied by their pose loss.
struct BenchmarkPair {
  std::string case_id;
  int frame_id = 0;
  Pose gt_pose;
  Pose init_pose;
  std::string depth_path;       // GT render, relative to the dataset root
  std::string init_depth_path;  // render from the init pose
  std::string difficulty;       // easy / medium / hard
  double pose_loss_value = 0.0;
};

/// Difficulty stratification by pose loss; loss >= 1.6 is out of range.
const char* difficulty_for_loss(double loss);

/// Decomposes R = Rx(a) * Ry(b) * Rz(c); valid away from |b| = pi/2. This is
/// the composition convention used for rotation perturbations.
Eigen::Vector3d euler_xyz(const Eigen::Matrix3d& R);

struct GenerateOptions {
  double spacing_mm = 5.0;
  int pairs_per_pose = 1;
  double min_overlap = 0.3;   // co-visibility gate on warped GT depth
  double max_loss = 1.6;      // pairs at or above are rejected
  int max_attempts = 20;      // perturbation redraws per slot
  PoseLossWeights weights;
};

struct GeneratedCase {
  std::string case_id;
  uint64_t seed = 0;
  GenerateOptions options;
  PerturbationSpec spec;
  std::vector<BenchmarkPair> pairs;
  std::vector<DepthMap> gt_depths;    // parallel to pairs
  std::vector<DepthMap> init_depths;  // parallel to pairs
  CameraIntrinsics intrinsics;
};

/// Samples GT poses along the centerline, perturbs each within the spec
/// bounds, and keeps pairs that stay in-lumen, keep >= min_overlap
/// co-visibility, and score below max_loss. The random stream is split per
/// (pose, slot) from the master seed, so results do not depend on evaluation
/// order. Throws NoValidPairs when nothing survives.
GeneratedCase generate_case(const AirwayMesh& mesh, const Bvh& bvh,
                            const Centerline& cl, const PerturbationSpec& spec,
                            const GenerateOptions& opts,
                            const CameraIntrinsics& K, uint64_t seed,
                            const std::string& case_id);

struct DatasetManifest {
  std::string case_id;
  uint64_t seed = 0;
  double spacing_mm = 5.0;
  PerturbationSpec perturbation;
  std::string convention = "per_axis_uniform_xyz";
  int easy = 0, medium = 0, hard = 0;
  PoseLossWeights weights;
  int pair_count = 0;
};

/// On-disk layout:
///   root/mesh.stl, root/centerline.json, root/intrinsics.json
///   root/<case_id>/{depths/*.pfm, init_depths/*.pfm,
///                   poses.txt, init_poses.txt, meta.json}
DatasetManifest write_case(const std::filesystem::path& root,
                           const GeneratedCase& generated);

struct Dataset {
  std::filesystem::path root;
  CameraIntrinsics intrinsics;
  std::vector<DatasetManifest> manifests;
  std::vector<BenchmarkPair> pairs;
  std::filesystem::path mesh_path;        // empty when absent
  std::filesystem::path centerline_path;  // empty when absent
};

/// Loads and validates a dataset directory. Throws ManifestMismatch when
/// files are missing or counts disagree with meta.json.
Dataset read_dataset(const std::filesystem::path& root);

}  // namespace bronchopt
