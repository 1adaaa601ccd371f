#pragma once

#include "bronchopt/bvh.hpp"
#include "bronchopt/camera.hpp"
#include "bronchopt/depth_map.hpp"
#include "bronchopt/se3.hpp"

namespace bronchopt {

/// Ray-casts one depth map: a ray from the camera center through every pixel
/// center, nearest front-or-back-face hit. Depth is the z-component of the
/// hit point in the camera frame; misses leave the pixel invalid.
/// Deterministic: identical inputs produce bit-identical maps.
DepthMap render_depth(const Bvh& bvh, const Pose& camera_to_world,
                      const CameraIntrinsics& K);

}  // namespace bronchopt
