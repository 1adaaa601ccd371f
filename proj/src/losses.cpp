#include "bronchopt/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "bronchopt/errors.hpp"

namespace bronchopt {

PoseLossBreakdown pose_loss(const Pose& pred, const Pose& gt,
                            const PoseLossWeights& w) {
  PoseLossBreakdown out;

  const Eigen::Vector3d t_pred = pred.translation * 1e-3;  // mm -> m
  const Eigen::Vector3d t_gt = gt.translation * 1e-3;
  const double n_pred = t_pred.norm();
  const double n_gt = t_gt.norm();

  if (n_pred >= 1e-6 && n_gt >= 1e-6) {
    const double cosine =
        std::clamp(t_pred.dot(t_gt) / (n_pred * n_gt), -1.0, 1.0);
    out.direction = std::acos(cosine);
  }
  out.geodesic = geodesic_distance(pred.rotation, gt.rotation);
  out.magnitude = std::abs(n_pred - n_gt);
  out.total = w.lambda_t * out.direction + w.lambda_rot * out.geodesic +
              w.lambda_tm * out.magnitude;
  return out;
}

double sdf_loss(double s, const SdfLossParams& p) {
  const double in_arg = p.gamma * (s + p.tau);
  // softplus with an overflow-safe branch
  const double sp =
      in_arg > 30.0 ? in_arg : std::log1p(std::exp(in_arg));

  const double s_neg = std::max(-s, 1e-6);
  const double barrier = std::max(-std::log(s_neg / p.tau), 0.0);

  const double out = std::max(s, 0.0);
  return p.w_in * sp * sp + p.w_near * barrier + p.w_out * out * out;
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr int kScales = 5;
constexpr std::array<double, kScales> kScaleWeights = {0.0448, 0.2856, 0.3001,
                                                       0.2363, 0.1333};

struct Grid {
  int w = 0, h = 0;
  std::vector<double> data;
  Grid() = default;
  Grid(int w_, int h_) : w(w_), h(h_), data(static_cast<size_t>(w_) * h_, 0.0) {}
  double& at(int x, int y) { return data[static_cast<size_t>(y) * w + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * w + x]; }
};

struct Mask {
  int w = 0, h = 0;
  std::vector<uint8_t> data;
  Mask() = default;
  Mask(int w_, int h_) : w(w_), h(h_), data(static_cast<size_t>(w_) * h_, 0) {}
  uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * w + x]; }
  void set(int x, int y, uint8_t v) { data[static_cast<size_t>(y) * w + x] = v; }
};

std::array<double, kWindow> gaussian_kernel() {
  std::array<double, kWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double r = i - (kWindow - 1) / 2.0;
    k[i] = std::exp(-r * r / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable 11x11 Gaussian, 'valid' mode: output is (w-10) x (h-10).
Grid filter_valid(const Grid& in) {
  static const std::array<double, kWindow> kernel = gaussian_kernel();
  const int ow = in.w - kWindow + 1;
  const int oh = in.h - kWindow + 1;
  Grid rows(ow, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += kernel[k] * in.at(x + k, y);
      rows.at(x, y) = acc;
    }
  }
  Grid out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += kernel[k] * rows.at(x, y + k);
      out.at(x, y) = acc;
    }
  }
  return out;
}

Grid downsample2(const Grid& in) {
  Grid out(in.w / 2, in.h / 2);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      out.at(x, y) = 0.25 * (in.at(2 * x, 2 * y) + in.at(2 * x + 1, 2 * y) +
                             in.at(2 * x, 2 * y + 1) + in.at(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

Mask downsample2(const Mask& in) {
  Mask out(in.w / 2, in.h / 2);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      const int n = in.at(2 * x, 2 * y) + in.at(2 * x + 1, 2 * y) +
                    in.at(2 * x, 2 * y + 1) + in.at(2 * x + 1, 2 * y + 1);
      out.set(x, y, n >= 3 ? 1 : 0);  // strict majority of the 2x2 block
    }
  }
  return out;
}

}  // namespace

double msssim(const DepthMap& a, const DepthMap& b) {
  if (!a.same_shape(b)) throw SizeMismatch("msssim: map dimensions differ");

  // Data range over the union of valid pixels of both maps.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a.valid[i]) {
      lo = std::min(lo, static_cast<double>(a.values[i]));
      hi = std::max(hi, static_cast<double>(a.values[i]));
    }
    if (b.valid[i]) {
      lo = std::min(lo, static_cast<double>(b.values[i]));
      hi = std::max(hi, static_cast<double>(b.values[i]));
    }
  }
  if (!(hi > -std::numeric_limits<double>::infinity())) {
    throw TooSmall("msssim: no valid pixels in either map");
  }
  const double range = std::max(hi - lo, 1e-12);
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);

  // Joint mask and mean-filled copies at full resolution.
  Mask mask(a.width, a.height);
  double mean_a = 0.0, mean_b = 0.0;
  int n_joint = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      const size_t i = a.index(x, y);
      if (a.valid[i] && b.valid[i]) {
        mask.set(x, y, 1);
        mean_a += a.values[i];
        mean_b += b.values[i];
        ++n_joint;
      }
    }
  }
  if (n_joint < 16 * 16) {
    throw TooSmall("msssim: fewer than 256 jointly valid pixels");
  }
  mean_a /= n_joint;
  mean_b /= n_joint;

  Grid ga(a.width, a.height), gb(a.width, a.height);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      const size_t i = a.index(x, y);
      ga.at(x, y) = mask.at(x, y) ? a.values[i] : mean_a;
      gb.at(x, y) = mask.at(x, y) ? b.values[i] : mean_b;
      if (mask.at(x, y) == 0) {
        // Pixels valid in only one map still get that map's own value.
        if (a.valid[i]) ga.at(x, y) = a.values[i];
        if (b.valid[i]) gb.at(x, y) = b.values[i];
      }
    }
  }

  double result = 1.0;
  for (int scale = 0; scale < kScales; ++scale) {
    if (ga.w < kWindow || ga.h < kWindow) {
      throw TooSmall("msssim: pyramid level smaller than the filter window");
    }

    Grid mu_a = filter_valid(ga);
    Grid mu_b = filter_valid(gb);

    Grid aa(ga.w, ga.h), bb(ga.w, ga.h), ab(ga.w, ga.h);
    for (size_t i = 0; i < ga.data.size(); ++i) {
      aa.data[i] = ga.data[i] * ga.data[i];
      bb.data[i] = gb.data[i] * gb.data[i];
      ab.data[i] = ga.data[i] * gb.data[i];
    }
    Grid m_aa = filter_valid(aa);
    Grid m_bb = filter_valid(bb);
    Grid m_ab = filter_valid(ab);

    const int off = (kWindow - 1) / 2;
    double cs_sum = 0.0, l_sum = 0.0;
    int n = 0;
    for (int y = 0; y < mu_a.h; ++y) {
      for (int x = 0; x < mu_a.w; ++x) {
        if (!mask.at(x + off, y + off)) continue;
        const double ma = mu_a.at(x, y);
        const double mb = mu_b.at(x, y);
        const double va = std::max(m_aa.at(x, y) - ma * ma, 0.0);
        const double vb = std::max(m_bb.at(x, y) - mb * mb, 0.0);
        const double cov = m_ab.at(x, y) - ma * mb;
        cs_sum += (2.0 * cov + c2) / (va + vb + c2);
        l_sum += (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        ++n;
      }
    }
    if (n == 0) {
      throw TooSmall("msssim: pyramid level has no jointly valid pixels");
    }

    const double cs = std::max(cs_sum / n, 0.0);
    result *= std::pow(cs, kScaleWeights[scale]);
    if (scale == kScales - 1) {
      const double lum = std::max(l_sum / n, 0.0);
      result *= std::pow(lum, kScaleWeights[scale]);
    }

    if (scale + 1 < kScales) {
      ga = downsample2(ga);
      gb = downsample2(gb);
      mask = downsample2(mask);
    }
  }

  return std::clamp(result, 0.0, 1.0);
}

}  // namespace bronchopt
