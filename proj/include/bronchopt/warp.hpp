#pragma once

#include "bronchopt/camera.hpp"
#include "bronchopt/depth_map.hpp"
#include "bronchopt/se3.hpp"

namespace bronchopt {

struct WarpResult {
  DepthMap depth;
  /// Fraction of valid source pixels that land inside the target frame with
  /// positive depth.
  double overlap_fraction = 0.0;
};

/// Projective depth warp: every valid source pixel is back-projected with its
/// depth, moved by `rel` (source-camera frame to target-camera frame), and
/// re-projected. Target pixels receive the transformed z via nearest-pixel
/// z-buffer splatting. Throws EmptyDepth when the source has no valid pixels.
WarpResult warp_depth(const DepthMap& source, const Pose& rel,
                      const CameraIntrinsics& K);

}  // namespace bronchopt
