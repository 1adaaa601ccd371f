#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bronchopt/bvh.hpp"
#include "bronchopt/camera.hpp"
#include "bronchopt/depth_map.hpp"
#include "bronchopt/mesh.hpp"
#include "bronchopt/se3.hpp"

namespace bronchopt {

/// Depth similarity: both maps MAD-normalized over the joint valid mask,
/// then cosine similarity of the flattened vectors. Affine-invariant in
/// either argument. Throws DegenerateMap for constant maps (MAD < 1e-12) or
/// fewer than 100 joint pixels.
double metric_ds(const DepthMap& pred, const DepthMap& ref);

/// Normal consistency: mean cosine similarity between surface normals
/// computed from central differences of the back-projected point grids,
/// over jointly valid interior pixels.
double metric_nc(const DepthMap& pred, const DepthMap& ref,
                 const CameraIntrinsics& K);

/// Scale-invariant log-depth error (Eigen-style):
/// (1/n) sum z_i^2 - (1/n^2) (sum z_i)^2 with z = log(pred) - log(ref).
double metric_si(const DepthMap& pred, const DepthMap& ref);

struct PoseErrors {
  double trans_mm = 0.0;
  double rot_rad = 0.0;
};

PoseErrors pose_errors(const Pose& pred, const Pose& gt);

/// True when the camera center lies strictly inside the airway lumen.
bool success(const AirwayMesh& mesh, const Bvh& bvh, const Pose& pred);

/// Per-pair evaluation row.
struct PairMetrics {
  std::string case_id;
  int frame_id = 0;
  std::string difficulty;  // easy / medium / hard
  double ds = 0.0;
  double nc = 0.0;
  double si = 0.0;
  double trans_err_mm = 0.0;
  double rot_err_rad = 0.0;
  bool success = false;
  double init_trans_err_mm = 0.0;
  double init_rot_err_rad = 0.0;
};

struct MetricStats {
  int n = 0;          // pairs in the level
  int n_success = 0;  // pairs counted into the means
  double ds_mean = 0.0, ds_std = 0.0;
  double nc_mean = 0.0, nc_std = 0.0;
  double si_mean = 0.0, si_std = 0.0;
  double trans_mean = 0.0, trans_std = 0.0;
  double rot_mean = 0.0, rot_std = 0.0;
  double success_rate = 0.0;  // percent
};

/// Per-pair rows plus Table-style aggregation (metric means over successful
/// cases only; success rate over all cases).
struct MetricsReport {
  std::vector<PairMetrics> pairs;

  /// Keyed easy/medium/hard plus "average" over all pairs. Levels with no
  /// pairs are omitted. Rows are sorted by (case_id, frame_id) first so the
  /// aggregates do not depend on input order.
  std::map<std::string, MetricStats> aggregate() const;

  void write_csv(const std::filesystem::path& path) const;
  static MetricsReport read_csv(const std::filesystem::path& path);
  void write_summary_json(const std::filesystem::path& path) const;
  std::string format_table() const;
};

}  // namespace bronchopt
