#include <doctest.h>

#include <fstream>

#include "bronchopt/batch.hpp"
#include "bronchopt/benchmark.hpp"
#include "bronchopt/errors.hpp"
#include "bronchopt/phantom.hpp"
#include "support/helpers.hpp"

using namespace bronchopt;

namespace {

struct GenScene {
  Phantom phantom;
  Bvh bvh;
  CameraIntrinsics K;

  GenScene()
      : phantom(make_phantom("cylinder",
                             [] {
                               PhantomParams p;
                               p.length = 120.0;
                               return p;
                             }())),
        bvh(phantom.mesh),
        K(testing::test_intrinsics(224)) {}
};

GenScene& gen_scene() {
  static GenScene s;
  return s;
}

}  // namespace

TEST_CASE("difficulty thresholds follow the benchmark stratification") {
  CHECK(std::string(difficulty_for_loss(0.0)) == "easy");
  CHECK(std::string(difficulty_for_loss(0.39)) == "easy");
  CHECK(std::string(difficulty_for_loss(0.4)) == "medium");
  CHECK(std::string(difficulty_for_loss(0.55)) == "medium");
  CHECK(std::string(difficulty_for_loss(0.8)) == "hard");
  CHECK(std::string(difficulty_for_loss(1.59)) == "hard");
  CHECK_THROWS_AS(difficulty_for_loss(1.6), InvalidParams);
}

TEST_CASE("zero perturbation generates easy pairs with zero loss") {
  GenScene& s = gen_scene();
  const PerturbationSpec zero{0.0, 0.0};
  GenerateOptions opts;
  opts.spacing_mm = 10.0;
  const GeneratedCase out = generate_case(s.phantom.mesh, s.bvh,
                                          s.phantom.centerline, zero, opts,
                                          s.K, 1, "case_01");
  REQUIRE(!out.pairs.empty());
  for (const auto& p : out.pairs) {
    CHECK(p.difficulty == "easy");
    CHECK(p.pose_loss_value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((p.init_pose.translation - p.gt_pose.translation).norm() < 1e-12);
  }
}

TEST_CASE("bench preset respects bounds, lumen and difficulty consistency") {
  GenScene& s = gen_scene();
  const PerturbationSpec spec = PerturbationSpec::bench();
  GenerateOptions opts;
  opts.spacing_mm = 5.0;
  opts.pairs_per_pose = 3;
  const GeneratedCase out = generate_case(s.phantom.mesh, s.bvh,
                                          s.phantom.centerline, spec, opts,
                                          s.K, 42, "case_01");
  REQUIRE(out.pairs.size() > 20);

  for (const auto& p : out.pairs) {
    // Recover the camera-frame perturbation and check the draw bounds.
    const Pose delta = compose(inverse(p.gt_pose), p.init_pose);
    for (int a = 0; a < 3; ++a) {
      CHECK(std::abs(delta.translation[a]) <= spec.max_trans_mm + 1e-9);
    }
    const Eigen::Vector3d angles = euler_xyz(delta.rotation);
    for (int a = 0; a < 3; ++a) {
      CHECK(std::abs(angles[a]) <= spec.max_rot_rad + 1e-9);
    }

    // In-lumen on both ends, difficulty consistent with the stored loss.
    CHECK(success(s.phantom.mesh, s.bvh, p.gt_pose));
    CHECK(success(s.phantom.mesh, s.bvh, p.init_pose));
    CHECK(p.pose_loss_value < 1.6);
    CHECK(std::string(difficulty_for_loss(p.pose_loss_value)) == p.difficulty);

    // Losses recompute from the stored poses.
    const double recomputed =
        pose_loss(p.init_pose, p.gt_pose, opts.weights).total;
    CHECK(recomputed == doctest::Approx(p.pose_loss_value).epsilon(1e-12));
  }
}

TEST_CASE("generation is reproducible for a fixed seed") {
  GenScene& s = gen_scene();
  GenerateOptions opts;
  opts.spacing_mm = 10.0;
  const GeneratedCase a =
      generate_case(s.phantom.mesh, s.bvh, s.phantom.centerline,
                    PerturbationSpec::bench(), opts, s.K, 42, "case_01");
  const GeneratedCase b =
      generate_case(s.phantom.mesh, s.bvh, s.phantom.centerline,
                    PerturbationSpec::bench(), opts, s.K, 42, "case_01");
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].init_pose.translation ==
          b.pairs[i].init_pose.translation);  // bitwise
    CHECK(a.pairs[i].pose_loss_value == b.pairs[i].pose_loss_value);
  }

  const GeneratedCase c =
      generate_case(s.phantom.mesh, s.bvh, s.phantom.centerline,
                    PerturbationSpec::bench(), opts, s.K, 43, "case_01");
  bool any_differs = c.pairs.size() != a.pairs.size();
  for (size_t i = 0; !any_differs && i < c.pairs.size(); ++i) {
    any_differs = a.pairs[i].init_pose.translation !=
                  c.pairs[i].init_pose.translation;
  }
  CHECK(any_differs);
}

TEST_CASE("impossible gates raise NoValidPairs") {
  GenScene& s = gen_scene();
  GenerateOptions opts;
  opts.spacing_mm = 10.0;
  opts.min_overlap = 1.1;  // cannot be met
  CHECK_THROWS_AS(
      generate_case(s.phantom.mesh, s.bvh, s.phantom.centerline,
                    PerturbationSpec::bench(), opts, s.K, 1, "case_01"),
      NoValidPairs);
}

TEST_CASE("dataset write/read roundtrip is bit-exact") {
  GenScene& s = gen_scene();
  testing::TempDir dir("dataset");
  GenerateOptions opts;
  opts.spacing_mm = 10.0;
  const GeneratedCase out =
      generate_case(s.phantom.mesh, s.bvh, s.phantom.centerline,
                    PerturbationSpec::bench(), opts, s.K, 42, "case_01");

  const DatasetManifest manifest = write_case(dir.path(), out);
  CHECK(manifest.easy + manifest.medium + manifest.hard ==
        static_cast<int>(out.pairs.size()));
  save_stl(s.phantom.mesh, dir.path() / "mesh.stl");
  s.phantom.centerline.save_json(dir.path() / "centerline.json");

  const Dataset ds = read_dataset(dir.path());
  REQUIRE(ds.pairs.size() == out.pairs.size());
  CHECK(ds.intrinsics.fx == s.K.fx);
  CHECK(!ds.mesh_path.empty());

  for (size_t i = 0; i < ds.pairs.size(); ++i) {
    CHECK(ds.pairs[i].gt_pose.rotation == out.pairs[i].gt_pose.rotation);
    CHECK(ds.pairs[i].gt_pose.translation == out.pairs[i].gt_pose.translation);
    CHECK(ds.pairs[i].init_pose.translation ==
          out.pairs[i].init_pose.translation);
    CHECK(ds.pairs[i].difficulty == out.pairs[i].difficulty);
    CHECK(ds.pairs[i].pose_loss_value == out.pairs[i].pose_loss_value);

    const DepthMap depth = read_pfm(dir.path() / ds.pairs[i].depth_path);
    CHECK(depth.values == out.gt_depths[i].values);
    const DepthMap init_depth =
        read_pfm(dir.path() / ds.pairs[i].init_depth_path);
    CHECK(init_depth.values == out.init_depths[i].values);
  }
}

TEST_CASE("missing files are manifest mismatches") {
  GenScene& s = gen_scene();
  testing::TempDir dir("dataset_bad");
  GenerateOptions opts;
  opts.spacing_mm = 20.0;
  const GeneratedCase out =
      generate_case(s.phantom.mesh, s.bvh, s.phantom.centerline,
                    PerturbationSpec::bench(), opts, s.K, 7, "case_01");
  write_case(dir.path(), out);

  std::filesystem::remove(dir.path() / "case_01" / "poses.txt");
  CHECK_THROWS_AS(read_dataset(dir.path()), ManifestMismatch);

  CHECK_THROWS_AS(read_dataset(dir.path() / "does_not_exist"),
                  ManifestMismatch);
}

TEST_CASE("batch refine over a small generated dataset") {
  GenScene& s = gen_scene();
  testing::TempDir dir("batch");
  GenerateOptions opts;
  opts.spacing_mm = 30.0;  // few poses keeps this test quick
  const GeneratedCase out =
      generate_case(s.phantom.mesh, s.bvh, s.phantom.centerline,
                    PerturbationSpec::bench(), opts, s.K, 11, "case_01");
  write_case(dir.path(), out);
  const Dataset ds = read_dataset(dir.path());

  BatchOptions bopts;
  bopts.cfg.inner_iters = 2;
  bopts.cfg.outer_iters = 2;
  const BatchOutcome outcome = batch_refine(s.phantom.mesh, s.bvh, ds, bopts);
  REQUIRE(outcome.items.size() == ds.pairs.size());
  for (const auto& item : outcome.items) {
    CHECK_FALSE(item.failed);
    CHECK(item.metrics.success);
  }
  CHECK(outcome.report.pairs.size() == ds.pairs.size());

  // Two threads give the same metrics as one.
  BatchOptions bopts2 = bopts;
  bopts2.threads = 2;
  const BatchOutcome outcome2 = batch_refine(s.phantom.mesh, s.bvh, ds, bopts2);
  REQUIRE(outcome2.items.size() == outcome.items.size());
  for (size_t i = 0; i < outcome.items.size(); ++i) {
    CHECK(outcome.items[i].metrics.trans_err_mm ==
          outcome2.items[i].metrics.trans_err_mm);
  }

  const MetricsReport empty_report = batch_refine(
      s.phantom.mesh, s.bvh, Dataset{ds.root, ds.intrinsics, {}, {}, {}, {}},
      bopts).report;
  CHECK(empty_report.pairs.empty());
}
