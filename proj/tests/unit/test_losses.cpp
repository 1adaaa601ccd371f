#include <doctest.h>

#include <random>

#include "bronchopt/errors.hpp"
#include "bronchopt/losses.hpp"
#include "support/helpers.hpp"
#include "support/reference_msssim.hpp"

using namespace bronchopt;

TEST_CASE("pose_loss vanishes at the ground truth") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const Pose T = testing::random_pose(rng);
    const PoseLossBreakdown b = pose_loss(T, T);
    CHECK(b.total == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.direction >= 0.0);
    CHECK(b.geodesic >= 0.0);
    CHECK(b.magnitude >= 0.0);
  }
}

TEST_CASE("pose_loss geodesic term equals the rotation angle") {
  std::mt19937_64 rng(2);
  const Pose gt = testing::random_pose(rng);
  const Pose pred(gt.rotation * Eigen::AngleAxisd(0.3, Eigen::Vector3d(0, 1, 0))
                                    .toRotationMatrix(),
                  gt.translation);
  const PoseLossBreakdown b = pose_loss(pred, gt);
  CHECK(b.direction == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.geodesic == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(b.magnitude == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.total == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("pose_loss orthogonal equal-length translations") {
  // 0.010 m vs 0.010 m at 90 degrees: direction pi/2, magnitude 0.
  const Pose gt(Eigen::Matrix3d::Identity(), {10, 0, 0});    // mm
  const Pose pred(Eigen::Matrix3d::Identity(), {0, 10, 0});  // mm
  const PoseLossBreakdown b = pose_loss(pred, gt);
  CHECK(b.direction == doctest::Approx(M_PI / 2).epsilon(1e-12));
  CHECK(b.magnitude == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.total == doctest::Approx(1.5707963).epsilon(1e-6));
}

TEST_CASE("pose_loss magnitude term works in meters") {
  const Pose gt(Eigen::Matrix3d::Identity(), {100, 0, 0});
  const Pose pred(Eigen::Matrix3d::Identity(), {105, 0, 0});
  const PoseLossBreakdown b = pose_loss(pred, gt);
  // 5 mm = 0.005 m, lambda_tm = 100
  CHECK(b.magnitude == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(b.total == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("pose_loss zero-translation rule") {
  const Pose gt(Eigen::Matrix3d::Identity(), {0, 0, 0});
  const Pose pred(Eigen::Matrix3d::Identity(), {3, 0, 0});
  const PoseLossBreakdown b = pose_loss(pred, gt);
  CHECK(b.direction == 0.0);
  CHECK(b.magnitude == doctest::Approx(0.003).epsilon(1e-12));
}

TEST_CASE("pose_loss depends only on the stated quantities") {
  std::mt19937_64 rng(3);
  const Pose pred = testing::random_pose(rng);
  const Pose gt = testing::random_pose(rng);
  const PoseLossBreakdown b = pose_loss(pred, gt);

  // Recompute from (R_pred^T R_gt, t_pred, t_gt) exactly as written.
  const double geo = rotation_angle(pred.rotation.transpose() * gt.rotation);
  const Eigen::Vector3d tp = pred.translation * 1e-3;
  const Eigen::Vector3d tg = gt.translation * 1e-3;
  const double dir =
      std::acos(std::clamp(tp.dot(tg) / (tp.norm() * tg.norm()), -1.0, 1.0));
  const double mag = std::abs(tp.norm() - tg.norm());
  CHECK(b.total == doctest::Approx(dir + geo + 100.0 * mag).epsilon(1e-12));
}

TEST_CASE("sdf_loss deep inside the lumen is negligible") {
  SdfLossParams p;  // tau = 1, gamma = 1, unit weights
  const double loss = sdf_loss(-10.0, p);
  CHECK(loss > 0.0);
  CHECK(loss < 1e-7);  // softplus(-9)^2 ~ 1.5e-8, barrier and out terms 0
}

TEST_CASE("sdf_loss diverges at the wall") {
  const double loss = sdf_loss(0.0, {});
  // softplus(1)^2 + (-log(1e-6)) = 1.7246563 + 13.8155106
  CHECK(loss == doctest::Approx(1.7246562599 + 13.8155105580).epsilon(1e-8));
  CHECK(loss > 1.0);
}

TEST_CASE("sdf_loss outside the lumen includes the quadratic term") {
  const double loss = sdf_loss(2.0, {});
  // softplus(3)^2 + (-log(1e-6)) + 2^2
  CHECK(loss == doctest::Approx(9.2938848402 + 13.8155105580 + 4.0).epsilon(1e-8));
}

TEST_CASE("sdf_loss is non-increasing going deeper inside beyond tau") {
  SdfLossParams p;
  p.tau = 1.5;
  double prev = sdf_loss(-p.tau, p);
  for (double s = -p.tau; s >= -30.0; s -= 0.25) {
    const double cur = sdf_loss(s, p);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("msssim of a map with itself is 1") {
  const DepthMap d = testing::textured_depth(224, 224);
  CHECK(msssim(d, d) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("msssim against a constant map is low") {
  const DepthMap d = testing::textured_depth(224, 224);
  DepthMap flat(224, 224);
  for (int v = 0; v < 224; ++v) {
    for (int u = 0; u < 224; ++u) flat.set(u, v, 100.0f);
  }
  CHECK(msssim(d, flat) < 0.5);
}

TEST_CASE("msssim decreases monotonically with noise level") {
  const DepthMap d = testing::textured_depth(224, 224);
  const double range = 2.0 * 10.0;  // amplitude of the texture

  auto noisy = [&](double sigma_frac, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma_frac * range);
    DepthMap out = d;
    for (auto& v : out.values) v = static_cast<float>(v + gauss(rng));
    return out;
  };

  const double s1 = msssim(d, noisy(0.01, 5));
  const double s5 = msssim(d, noisy(0.05, 5));
  const double s10 = msssim(d, noisy(0.10, 5));
  CHECK(s1 > s5);
  CHECK(s5 > s10);
  CHECK(s1 < 1.0);
  CHECK(s10 > 0.0);
}

TEST_CASE("msssim is symmetric") {
  std::mt19937_64 rng(8);
  const DepthMap a = testing::textured_depth(224, 224, 100, 12, 0.13);
  DepthMap b = testing::textured_depth(224, 224, 90, 9, 0.07);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : b.values) v = static_cast<float>(v + gauss(rng));
  CHECK(std::abs(msssim(a, b) - msssim(b, a)) < 1e-9);
}

TEST_CASE("msssim agrees with the independent reference implementation") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ubase(50.0, 150.0);
  std::uniform_real_distribution<double> uamp(2.0, 20.0);
  std::uniform_real_distribution<double> ufreq(0.03, 0.3);
  std::normal_distribution<double> gauss(0.0, 2.0);

  for (int trial = 0; trial < 4; ++trial) {
    DepthMap a =
        testing::textured_depth(224, 224, ubase(rng), uamp(rng), ufreq(rng));
    DepthMap b =
        testing::textured_depth(224, 224, ubase(rng), uamp(rng), ufreq(rng));
    for (auto& v : b.values) v = static_cast<float>(v + gauss(rng));
    // Carve some invalid regions into both maps.
    for (int v = 40; v < 80; ++v) {
      for (int u = 100; u < 170; ++u) a.clear(u, v);
    }
    for (int v = 150; v < 200; ++v) {
      for (int u = 10; u < 60; ++u) b.clear(u, v);
    }
    const double mine = msssim(a, b);
    const double ref = testing::reference_msssim(a, b);
    CHECK(mine == doctest::Approx(ref).epsilon(1e-4));
  }
}

TEST_CASE("msssim rejects maps too small for the pyramid") {
  const DepthMap d = testing::textured_depth(64, 64);
  CHECK_THROWS_AS(msssim(d, d), TooSmall);
}

TEST_CASE("render_loss complements msssim") {
  const DepthMap d = testing::textured_depth(224, 224);
  CHECK(render_loss(d, d) == doctest::Approx(0.0).epsilon(1e-6));
}
