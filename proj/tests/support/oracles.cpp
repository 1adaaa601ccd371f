#include "oracles.hpp"

#include <cmath>
#include <limits>

#include "bronchopt/intersect.hpp"

namespace bronchopt::testing {

DepthMap render_depth_brute(const AirwayMesh& mesh,
                            const Pose& camera_to_world,
                            const CameraIntrinsics& K) {
  DepthMap map(K.width, K.height);
  const Eigen::Vector3d origin = camera_to_world.camera_center();

  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      const Eigen::Vector3d dir =
          camera_to_world.rotation *
          Eigen::Vector3d((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
      double best = std::numeric_limits<double>::infinity();
      bool hit = false;
      for (const auto& tri : mesh.triangles) {
        const Eigen::Vector3d& a = mesh.vertices[tri[0]];
        const Eigen::Vector3d e1 = mesh.vertices[tri[1]] - a;
        const Eigen::Vector3d e2 = mesh.vertices[tri[2]] - a;
        double t;
        if (intersect_triangle(origin, dir, a, e1, e2, 1e-9, best, t)) {
          best = t;
          hit = true;
        }
      }
      if (hit) map.set(u, v, static_cast<float>(best));
    }
  }
  return map;
}

double winding_number(const AirwayMesh& mesh, const Eigen::Vector3d& p) {
  // Van Oosterom & Strackee solid angle per triangle.
  double total = 0.0;
  for (const auto& tri : mesh.triangles) {
    const Eigen::Vector3d a = mesh.vertices[tri[0]] - p;
    const Eigen::Vector3d b = mesh.vertices[tri[1]] - p;
    const Eigen::Vector3d c = mesh.vertices[tri[2]] - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double numer = a.dot(b.cross(c));
    const double denom =
        la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(numer, denom);
  }
  return total / (4.0 * M_PI);
}

bool inside_by_winding(const AirwayMesh& mesh, const Eigen::Vector3d& p) {
  return std::abs(winding_number(mesh, p)) > 0.5;
}

namespace {

double seg_dist2(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                 const Eigen::Vector3d& b) {
  const Eigen::Vector3d d = b - a;
  const double len2 = d.squaredNorm();
  const double h = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + h * d)).squaredNorm();
}

// Plane projection + barycentric inside test; otherwise minimum over edges.
double tri_dist2(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                 const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d n = (b - a).cross(c - a);
  const double n2 = n.squaredNorm();
  if (n2 > 0.0) {
    const double dist_plane = (p - a).dot(n) / std::sqrt(n2);
    const Eigen::Vector3d q = p - dist_plane * n / std::sqrt(n2);
    // barycentric coordinates of q
    const Eigen::Vector3d v0 = b - a, v1 = c - a, v2 = q - a;
    const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
    const double d20 = v2.dot(v0), d21 = v2.dot(v1);
    const double denom = d00 * d11 - d01 * d01;
    if (denom > 0.0) {
      const double beta = (d11 * d20 - d01 * d21) / denom;
      const double gamma = (d00 * d21 - d01 * d20) / denom;
      if (beta >= 0.0 && gamma >= 0.0 && beta + gamma <= 1.0) {
        return dist_plane * dist_plane;
      }
    }
  }
  return std::min({seg_dist2(p, a, b), seg_dist2(p, b, c), seg_dist2(p, c, a)});
}

}  // namespace

double distance_brute(const AirwayMesh& mesh, const Eigen::Vector3d& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tri : mesh.triangles) {
    best = std::min(best, tri_dist2(p, mesh.vertices[tri[0]],
                                    mesh.vertices[tri[1]],
                                    mesh.vertices[tri[2]]));
  }
  return std::sqrt(best);
}

}  // namespace bronchopt::testing
