#include "bronchopt/sdf.hpp"

#include <cmath>

#include "bronchopt/errors.hpp"

namespace bronchopt {

namespace {

// Fixed directions with irrational-ish components so that edge-grazing rays
// are vanishingly unlikely on any reasonable mesh.
const Eigen::Vector3d kParityDirs[3] = {
    Eigen::Vector3d(0.5772156649, 0.3141592653, 0.7548776662).normalized(),
    Eigen::Vector3d(-0.6931471805, 0.4142135624, 0.5671432904).normalized(),
    Eigen::Vector3d(0.2614972128, -0.8414709848, 0.4669201609).normalized(),
};

}  // namespace

bool point_inside(const Bvh& bvh, const Eigen::Vector3d& p) {
  int votes = 0;
  for (const auto& dir : kParityDirs) {
    votes += bvh.count_intersections(p, dir) % 2;
  }
  return votes >= 2;
}

SdfSample sdf(const AirwayMesh& mesh, const Bvh& bvh,
              const Eigen::Vector3d& p) {
  if (!mesh.watertight) {
    throw NotWatertight("sdf: sign undefined on a non-watertight mesh");
  }

  const Bvh::Closest closest = bvh.closest_point(p);
  const double dist = std::sqrt(closest.dist2);
  const bool inside = point_inside(bvh, p);

  SdfSample sample;
  sample.value = inside ? -dist : dist;
  if (dist > 1e-12) {
    // Gradient of s: away from the surface outside, toward it inside.
    sample.gradient = (inside ? (closest.point - p) : (p - closest.point)) / dist;
  } else {
    sample.gradient =
        closest.triangle >= 0 ? mesh.normals[closest.triangle] : Eigen::Vector3d::UnitZ();
  }
  return sample;
}

}  // namespace bronchopt
