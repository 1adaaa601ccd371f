#pragma once

#include "bronchopt/depth_map.hpp"
#include "bronchopt/sdf.hpp"
#include "bronchopt/se3.hpp"

namespace bronchopt {

struct PoseLossWeights {
  double lambda_t = 1.0;
  double lambda_rot = 1.0;
  double lambda_tm = 100.0;
};

struct PoseLossBreakdown {
  double direction = 0.0;  // arccos of the translation-direction cosine
  double geodesic = 0.0;   // rotation geodesic distance [rad]
  double magnitude = 0.0;  // |  ||t_pred|| - ||t_gt||  | in meters
  double total = 0.0;      // weighted sum
};

/// Weighted pose discrepancy: translation direction + rotation geodesic +
/// translation magnitude. Translations are converted mm -> meters for this
/// computation so the magnitude term at lambda_tm = 100 stays comparable to
/// the angular terms. If either translation is shorter than 1e-6 m the
/// direction term is defined as 0.
PoseLossBreakdown pose_loss(const Pose& pred, const Pose& gt,
                            const PoseLossWeights& w = {});

struct SdfLossParams {
  double w_in = 1.0;
  double w_near = 1.0;
  double w_out = 1.0;
  double tau = 1.0;    // safety margin [mm]
  double gamma = 1.0;  // boundary sharpness [1/mm]
};

/// Wall-proximity penalty on a signed distance value: squared softplus ramp
/// approaching the wall, log barrier inside the tau boundary layer, and a
/// quadratic penalty outside the lumen. The interior clearance is
/// s_neg = max(-s, 1e-6).
double sdf_loss(double s, const SdfLossParams& p = {});
inline double sdf_loss(const SdfSample& s, const SdfLossParams& p = {}) {
  return sdf_loss(s.value, p);
}

/// 5-scale MS-SSIM between two masked depth maps: 11x11 Gaussian window
/// (sigma 1.5), scale weights (0.0448, 0.2856, 0.3001, 0.2363, 0.1333), data
/// range = max - min over the union of valid pixels. Invalid pixels are
/// filled with the map's mean over the joint valid mask before filtering;
/// statistics are averaged only where the joint mask (downsampled with a
/// >50% majority at coarser scales) is set. Throws TooSmall when a pyramid
/// level drops below the window or loses all valid pixels.
double msssim(const DepthMap& a, const DepthMap& b);

inline double render_loss(const DepthMap& a, const DepthMap& b) {
  return 1.0 - msssim(a, b);
}

struct RefineLossWeights {
  double lambda_r = 1.0;
  double lambda_s = 0.1;
};

}  // namespace bronchopt
