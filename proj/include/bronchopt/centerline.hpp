#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "bronchopt/se3.hpp"

namespace bronchopt {

struct CenterlineBranch {
  std::vector<Eigen::Vector3d> points;  // ordered along the branch [mm]
  int parent = -1;                      // index of the parent branch, -1 for root
};

struct Centerline {
  std::vector<CenterlineBranch> branches;

  static Centerline load_json(const std::filesystem::path& path);
  void save_json(const std::filesystem::path& path) const;
};

/// Arc-length resampling of one branch at `spacing` mm. A branch shorter than
/// the spacing collapses to its midpoint.
std::vector<Eigen::Vector3d> resample_branch(const CenterlineBranch& branch,
                                             double spacing);

/// Camera poses along the centerline: positions from arc-length resampling,
/// +z along the local tangent (central differences), up vector carried by
/// parallel transport along each branch to avoid roll flips.
std::vector<Pose> sample_centerline_poses(const Centerline& cl, double spacing);

}  // namespace bronchopt
