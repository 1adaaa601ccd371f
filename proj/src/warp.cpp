#include "bronchopt/warp.hpp"

#include <cmath>

#include "bronchopt/errors.hpp"

namespace bronchopt {

WarpResult warp_depth(const DepthMap& source, const Pose& rel,
                      const CameraIntrinsics& K) {
  int n_valid = 0;
  int n_overlap = 0;

  WarpResult result;
  result.depth = DepthMap(source.width, source.height);

  for (int v = 0; v < source.height; ++v) {
    for (int u = 0; u < source.width; ++u) {
      if (!source.is_valid(u, v)) continue;
      ++n_valid;

      const Eigen::Vector3d p =
          back_project({static_cast<double>(u), static_cast<double>(v)},
                       source.value(u, v), K);
      const Eigen::Vector3d q = rel.apply(p);
      if (!(q.z() > 0.0)) continue;

      const Eigen::Vector2d pix(K.fx * q.x() / q.z() + K.cx,
                                K.fy * q.y() / q.z() + K.cy);
      const long tu = std::lround(pix.x());
      const long tv = std::lround(pix.y());
      if (tu < 0 || tu >= source.width || tv < 0 || tv >= source.height) {
        continue;
      }
      ++n_overlap;

      const int iu = static_cast<int>(tu);
      const int iv = static_cast<int>(tv);
      const float z = static_cast<float>(q.z());
      if (!result.depth.is_valid(iu, iv) || z < result.depth.value(iu, iv)) {
        result.depth.set(iu, iv, z);
      }
    }
  }

  if (n_valid == 0) {
    throw EmptyDepth("warp_depth: source map has no valid pixels");
  }
  result.overlap_fraction = static_cast<double>(n_overlap) / n_valid;
  return result;
}

}  // namespace bronchopt
