#pragma once

#include <Eigen/Core>

#include "bronchopt/bvh.hpp"
#include "bronchopt/mesh.hpp"

namespace bronchopt {

/// Signed distance sample: negative inside the airway lumen, positive
/// outside. Gradient points in the direction of increasing distance.
struct SdfSample {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::UnitZ();
};

/// Inside/outside classification by crossing parity, majority vote over three
/// fixed ray directions. Only meaningful on watertight meshes.
bool point_inside(const Bvh& bvh, const Eigen::Vector3d& p);

/// Exact point-to-surface distance via the BVH with ray-parity sign. Throws
/// NotWatertight when the mesh is not watertight, since the sign would be
/// meaningless.
SdfSample sdf(const AirwayMesh& mesh, const Bvh& bvh, const Eigen::Vector3d& p);

}  // namespace bronchopt
