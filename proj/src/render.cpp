#include "bronchopt/render.hpp"

namespace bronchopt {

DepthMap render_depth(const Bvh& bvh, const Pose& camera_to_world,
                      const CameraIntrinsics& K) {
  DepthMap map(K.width, K.height);
  const Eigen::Vector3d origin = camera_to_world.camera_center();
  const Eigen::Matrix3d& R = camera_to_world.rotation;

  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      // dir has z = 1 in the camera frame, so the ray parameter of a hit is
      // its z-depth directly.
      const Eigen::Vector3d dir_cam((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
      const Bvh::Hit hit = bvh.intersect(origin, R * dir_cam);
      if (hit.valid()) {
        map.set(u, v, static_cast<float>(hit.t));
      }
    }
  }
  return map;
}

}  // namespace bronchopt
