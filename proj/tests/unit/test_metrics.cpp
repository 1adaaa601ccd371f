#include <doctest.h>

#include <random>

#include "bronchopt/errors.hpp"
#include "bronchopt/metrics.hpp"
#include "bronchopt/phantom.hpp"
#include "bronchopt/render.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace bronchopt;

TEST_CASE("metric_ds identity, affine invariance, and negation") {
  const DepthMap d = testing::textured_depth(128, 128);
  CHECK(metric_ds(d, d) == doctest::Approx(1.0).epsilon(1e-12));

  DepthMap affine = d;
  for (auto& v : affine.values) v = 3.25f * v + 40.0f;
  CHECK(metric_ds(d, affine) == doctest::Approx(1.0).epsilon(1e-9));

  DepthMap negated = d;
  for (auto& v : negated.values) v = -v;
  negated.valid = d.valid;  // keep the mask despite non-positive values
  CHECK(metric_ds(negated, d) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("metric_ds rejects constant maps and tiny masks") {
  DepthMap flat(128, 128);
  for (int v = 0; v < 128; ++v) {
    for (int u = 0; u < 128; ++u) flat.set(u, v, 55.0f);
  }
  const DepthMap d = testing::textured_depth(128, 128);
  CHECK_THROWS_AS(metric_ds(d, flat), DegenerateMap);

  DepthMap sparse(128, 128);
  for (int u = 0; u < 50; ++u) sparse.set(u, 0, 10.0f + u);
  CHECK_THROWS_AS(metric_ds(sparse, sparse), DegenerateMap);
}

namespace {

DepthMap plane_map(const CameraIntrinsics& K, double z0) {
  DepthMap d(K.width, K.height);
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) d.set(u, v, static_cast<float>(z0));
  }
  return d;
}

// Plane tilted by `theta` about the camera x-axis: z(1 - tan(theta) (v-cy)/fy) = z0.
DepthMap tilted_plane_map(const CameraIntrinsics& K, double z0, double theta) {
  DepthMap d(K.width, K.height);
  const double t = std::tan(theta);
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      const double denom = 1.0 - t * (v - K.cy) / K.fy;
      if (denom > 0.05) d.set(u, v, static_cast<float>(z0 / denom));
    }
  }
  return d;
}

}  // namespace

TEST_CASE("metric_nc identity and analytic tilted plane") {
  const CameraIntrinsics K = testing::test_intrinsics(224);
  const DepthMap flat = plane_map(K, 100.0);
  CHECK(metric_nc(flat, flat, K) == doctest::Approx(1.0).epsilon(1e-9));

  const double theta = 30.0 * M_PI / 180.0;
  const DepthMap tilted = tilted_plane_map(K, 100.0, theta);
  CHECK(metric_nc(tilted, flat, K) ==
        doctest::Approx(std::cos(theta)).epsilon(1e-3));
}

TEST_CASE("metric_nc under uniform depth scaling on a curved surface") {
  // Scaling a plane leaves normals identical; a curved map does not.
  const CameraIntrinsics K = testing::test_intrinsics(224);
  const DepthMap flat = plane_map(K, 100.0);
  DepthMap flat_scaled = flat;
  for (auto& v : flat_scaled.values) v *= 1.5f;
  CHECK(metric_nc(flat_scaled, flat, K) == doctest::Approx(1.0).epsilon(1e-9));

  PhantomParams params;
  params.origin = Eigen::Vector3d::Zero();
  const Phantom cyl = make_phantom("cylinder", params);
  const Bvh bvh(cyl.mesh);
  const Pose cam(Eigen::Matrix3d::Identity(), {0, 0, 40});
  const DepthMap rendered = render_depth(bvh, cam, K);
  DepthMap scaled = rendered;
  for (auto& v : scaled.values) v *= 1.5f;

  const double nc = metric_nc(scaled, rendered, K);
  CHECK(nc < 1.0);
  // Regression pin from the first verified run on this fixed configuration.
  CHECK(nc == doctest::Approx(0.97377).epsilon(2e-4));
}

TEST_CASE("metric_si identity and exact scale invariance") {
  const DepthMap d = testing::textured_depth(128, 128);
  CHECK(metric_si(d, d) == doctest::Approx(0.0).epsilon(1e-12));

  DepthMap scaled = d;
  for (auto& v : scaled.values) v *= 7.5f;
  CHECK(metric_si(scaled, d) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(metric_si(scaled, d) - metric_si(d, d)) < 1e-9);
}

TEST_CASE("metric_si estimates the log-noise variance") {
  const DepthMap d = testing::textured_depth(128, 128);  // 16384 pixels
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss(0.0, 0.1);
  DepthMap noisy = d;
  for (auto& v : noisy.values) {
    v = static_cast<float>(v * std::exp(gauss(rng)));
  }
  const double si = metric_si(noisy, d);
  CHECK(si == doctest::Approx(0.01).epsilon(0.2));
}

TEST_CASE("metric_si skips non-positive pixels") {
  DepthMap a = testing::textured_depth(128, 128);
  DepthMap b = a;
  for (int u = 0; u < 128; ++u) {
    a.values[a.index(u, 3)] = -1.0f;  // invalid contents, mask left on
  }
  CHECK(metric_si(a, b) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pose_errors hand cases") {
  std::mt19937_64 rng(4);
  const Pose gt = testing::random_pose(rng);
  CHECK(pose_errors(gt, gt).trans_mm == 0.0);
  CHECK(pose_errors(gt, gt).rot_rad == 0.0);

  Pose shifted = gt;
  shifted.translation += Eigen::Vector3d(3, 4, 0);
  CHECK(pose_errors(shifted, gt).trans_mm == doctest::Approx(5.0).epsilon(1e-12));

  const Pose rotated(gt.rotation * Eigen::AngleAxisd(0.19, Eigen::Vector3d(1, 1, 1).normalized())
                                       .toRotationMatrix(),
                     gt.translation);
  CHECK(pose_errors(rotated, gt).rot_rad == doctest::Approx(0.19).epsilon(1e-9));
}

TEST_CASE("success tracks the lumen boundary") {
  PhantomParams params;  // radius 8
  const Phantom cyl = make_phantom("cylinder", params);
  const Bvh bvh(cyl.mesh);

  const std::vector<Pose> poses = sample_centerline_poses(cyl.centerline, 5.0);
  REQUIRE(!poses.empty());
  for (const Pose& pose : poses) CHECK(success(cyl.mesh, bvh, pose));

  Pose outside = poses[poses.size() / 2];
  outside.translation += Eigen::Vector3d(2.0 * params.radius, 0, 0);
  CHECK_FALSE(success(cyl.mesh, bvh, outside));

  // Exactly on the surface: strict inequality fails.
  Pose on_surface = poses[0];
  on_surface.translation = cyl.mesh.vertices[0];
  CHECK_FALSE(success(cyl.mesh, bvh, on_surface));
}

TEST_CASE("success agrees with the winding-number oracle on random poses") {
  const AirwayMesh cube = testing::cube_mesh(5.0);
  const Bvh bvh(cube);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int i = 0; i < 1000; ++i) {
    const Pose pose(Eigen::Matrix3d::Identity(),
                    Eigen::Vector3d(u(rng), u(rng), u(rng)));
    CHECK(success(cube, bvh, pose) ==
          testing::inside_by_winding(cube, pose.camera_center()));
  }
}
