#include <doctest.h>

#include "bronchopt/errors.hpp"
#include "bronchopt/phantom.hpp"
#include "bronchopt/sdf.hpp"
#include "support/helpers.hpp"

using namespace bronchopt;

TEST_CASE("cylinder phantom is watertight with the analytic inradius") {
  PhantomParams params;
  params.radius = 8.0;
  params.length = 100.0;
  params.segments = 64;
  const Phantom phantom = make_phantom("cylinder", params);
  REQUIRE(phantom.mesh.watertight);

  const Bvh bvh(phantom.mesh);
  const Eigen::Vector3d mid = params.origin + Eigen::Vector3d(0, 0, 50.0);
  const SdfSample s = sdf(phantom.mesh, bvh, mid);
  CHECK(s.value == doctest::Approx(-8.0).epsilon(0.01));  // chord error < 1%

  REQUIRE(phantom.centerline.branches.size() == 1);
  for (const auto& p : phantom.centerline.branches[0].points) {
    CHECK(sdf(phantom.mesh, bvh, p).value < 0.0);
  }
}

TEST_CASE("y_branch phantom has two children attached to the trunk") {
  PhantomParams params;
  params.branch_angle_deg = 30.0;
  params.voxel = 1.2;
  const Phantom phantom = make_phantom("y_branch", params);

  REQUIRE(phantom.mesh.watertight);
  REQUIRE(phantom.centerline.branches.size() == 3);
  CHECK(phantom.centerline.branches[0].parent == -1);
  CHECK(phantom.centerline.branches[1].parent == 0);
  CHECK(phantom.centerline.branches[2].parent == 0);

  // Children leave the junction at the requested half-angle from the trunk.
  const auto& left = phantom.centerline.branches[1].points;
  const Eigen::Vector3d dir = (left.back() - left.front()).normalized();
  CHECK(std::acos(dir.dot(Eigen::Vector3d::UnitZ())) ==
        doctest::Approx(30.0 * M_PI / 180.0).epsilon(1e-9));

  // Every centerline point sits strictly inside the lumen.
  const Bvh bvh(phantom.mesh);
  for (const auto& branch : phantom.centerline.branches) {
    for (const auto& p : branch.points) {
      CHECK(sdf(phantom.mesh, bvh, p).value < 0.0);
    }
  }
}

TEST_CASE("y_branch interior clearance approximates the tube radii") {
  PhantomParams params;
  const Phantom phantom = make_phantom("y_branch", params);
  const Bvh bvh(phantom.mesh);

  const auto& trunk = phantom.centerline.branches[0].points;
  const Eigen::Vector3d trunk_mid = trunk[trunk.size() / 2];
  CHECK(sdf(phantom.mesh, bvh, trunk_mid).value ==
        doctest::Approx(-params.radius).epsilon(0.05));

  const auto& child = phantom.centerline.branches[1].points;
  const Eigen::Vector3d child_mid = child[child.size() / 2];
  CHECK(sdf(phantom.mesh, bvh, child_mid).value ==
        doctest::Approx(-params.branch_radius).epsilon(0.05));
}

TEST_CASE("degenerate phantom parameters are rejected") {
  PhantomParams bad;
  bad.radius = 0.0;
  CHECK_THROWS_AS(make_phantom("cylinder", bad), InvalidParams);
  CHECK_THROWS_AS(make_phantom("y_branch", bad), InvalidParams);
  CHECK_THROWS_AS(make_phantom("torus", {}), InvalidParams);
}

TEST_CASE("phantom generation is deterministic") {
  const Phantom a = make_phantom("y_branch", {});
  const Phantom b = make_phantom("y_branch", {});
  REQUIRE(a.mesh.vertices.size() == b.mesh.vertices.size());
  REQUIRE(a.mesh.triangles.size() == b.mesh.triangles.size());
  for (size_t i = 0; i < a.mesh.vertices.size(); ++i) {
    CHECK(a.mesh.vertices[i] == b.mesh.vertices[i]);
  }
}
