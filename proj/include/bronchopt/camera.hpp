#pragma once

#include <Eigen/Core>
#include <filesystem>

namespace bronchopt {

/// Pinhole intrinsics. Integer pixel coordinates address pixel centers, so
/// the ray of pixel (u, v) passes through continuous image point (u, v).
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w,
                   int h)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {}

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
           cx < width && cy >= 0.0 && cy < height;
  }

  static CameraIntrinsics load_json(const std::filesystem::path& path);
  void save_json(const std::filesystem::path& path) const;
};

/// pi: camera-frame point [mm] to pixel coordinates. Throws NonPositiveDepth
/// when p.z <= 0.
Eigen::Vector2d project(const Eigen::Vector3d& p, const CameraIntrinsics& K);

/// pi^-1: pixel coordinates + z-depth [mm] to a camera-frame point. Throws
/// NonPositiveDepth when depth <= 0.
Eigen::Vector3d back_project(const Eigen::Vector2d& pix, double depth,
                             const CameraIntrinsics& K);

}  // namespace bronchopt
