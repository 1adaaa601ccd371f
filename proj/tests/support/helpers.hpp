#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "bronchopt/camera.hpp"
#include "bronchopt/depth_map.hpp"
#include "bronchopt/mesh.hpp"
#include "bronchopt/se3.hpp"

namespace bronchopt::testing {

/// Axis-aligned cube [-half, half]^3, outward-oriented, 8 vertices and 12
/// triangles.
inline AirwayMesh cube_mesh(double half = 1.0) {
  AirwayMesh mesh;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.emplace_back((i & 1) ? half : -half, (i & 2) ? half : -half,
                               (i & 4) ? half : -half);
  }
  const int faces[12][3] = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6},
                            {0, 1, 5}, {0, 5, 4}, {2, 6, 7}, {2, 7, 3},
                            {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  for (const auto& f : faces) mesh.triangles.emplace_back(f[0], f[1], f[2]);
  mesh.compute_normals();
  mesh.watertight = check_watertight(mesh);
  return mesh;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("bronchopt_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline CameraIntrinsics test_intrinsics(int size = 224) {
  return CameraIntrinsics(0.5 * size, 0.5 * size, 0.5 * (size - 1),
                          0.5 * (size - 1), size, size);
}

/// Smoothly textured synthetic depth map (plane plus ripples), fully valid.
inline DepthMap textured_depth(int w, int h, double base = 100.0,
                               double amplitude = 10.0, double freq = 0.11) {
  DepthMap d(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double z = base + amplitude * (std::sin(freq * u) +
                                           std::cos(freq * 0.8 * v + 0.3));
      d.set(u, v, static_cast<float>(z));
    }
  }
  return d;
}

inline Pose random_pose(std::mt19937_64& rng, double max_trans = 50.0,
                        double max_angle = 2.5) {
  std::uniform_real_distribution<double> ut(-max_trans, max_trans);
  std::uniform_real_distribution<double> ua(-1.0, 1.0);
  std::uniform_real_distribution<double> uang(0.01, max_angle);
  Eigen::Vector3d axis(ua(rng), ua(rng), ua(rng));
  while (axis.norm() < 1e-6) axis = Eigen::Vector3d(ua(rng), ua(rng), ua(rng));
  axis.normalize();
  const Eigen::AngleAxisd aa(uang(rng), axis);
  return Pose(aa.toRotationMatrix(),
              Eigen::Vector3d(ut(rng), ut(rng), ut(rng)));
}

inline TangentVector random_tangent(std::mt19937_64& rng,
                                    double max_trans = 50.0,
                                    double max_angle = M_PI - 0.1) {
  std::uniform_real_distribution<double> ut(-max_trans, max_trans);
  std::uniform_real_distribution<double> ua(-1.0, 1.0);
  std::uniform_real_distribution<double> uang(1e-4, max_angle);
  Eigen::Vector3d axis(ua(rng), ua(rng), ua(rng));
  while (axis.norm() < 1e-6) axis = Eigen::Vector3d(ua(rng), ua(rng), ua(rng));
  axis.normalize();
  return TangentVector(Eigen::Vector3d(ut(rng), ut(rng), ut(rng)),
                       uang(rng) * axis);
}

}  // namespace bronchopt::testing
