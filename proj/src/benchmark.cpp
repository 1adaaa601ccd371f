#include "bronchopt/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "bronchopt/errors.hpp"
#include "bronchopt/metrics.hpp"
#include "bronchopt/pose_io.hpp"
#include "bronchopt/render.hpp"
#include "bronchopt/sdf.hpp"
#include "bronchopt/warp.hpp"

namespace bronchopt {

const char* difficulty_for_loss(double loss) {
  if (loss < 0.4) return "easy";
  if (loss < 0.8) return "medium";
  if (loss < 1.6) return "hard";
  throw InvalidParams("difficulty_for_loss: loss out of the benchmark range");
}

Eigen::Vector3d euler_xyz(const Eigen::Matrix3d& R) {
  const double b = std::asin(std::clamp(R(0, 2), -1.0, 1.0));
  const double a = std::atan2(-R(1, 2), R(2, 2));
  const double c = std::atan2(-R(0, 1), R(0, 0));
  return {a, b, c};
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Eigen::Matrix3d rot_x(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
Eigen::Matrix3d rot_y(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix();
}
Eigen::Matrix3d rot_z(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

std::string frame_name(int frame_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.pfm", frame_id);
  return buf;
}

}  // namespace

GeneratedCase generate_case(const AirwayMesh& mesh, const Bvh& bvh,
                            const Centerline& cl, const PerturbationSpec& spec,
                            const GenerateOptions& opts,
                            const CameraIntrinsics& K, uint64_t seed,
                            const std::string& case_id) {
  if (opts.spacing_mm <= 0.0 || opts.pairs_per_pose < 1) {
    throw InvalidParams("generate_case: bad spacing or pairs_per_pose");
  }

  GeneratedCase out;
  out.case_id = case_id;
  out.seed = seed;
  out.options = opts;
  out.spec = spec;
  out.intrinsics = K;

  const std::vector<Pose> gt_poses = sample_centerline_poses(cl, opts.spacing_mm);

  for (size_t pose_idx = 0; pose_idx < gt_poses.size(); ++pose_idx) {
    const Pose& gt = gt_poses[pose_idx];
    if (!success(mesh, bvh, gt)) continue;

    const DepthMap gt_depth = render_depth(bvh, gt, K);
    if (gt_depth.valid_count() < 100) continue;

    for (int slot = 0; slot < opts.pairs_per_pose; ++slot) {
      std::mt19937_64 rng(
          splitmix64(seed ^ splitmix64(pose_idx * 1000003ull + slot)));
      std::uniform_real_distribution<double> ut(-spec.max_trans_mm,
                                                spec.max_trans_mm);
      std::uniform_real_distribution<double> ur(-spec.max_rot_rad,
                                                spec.max_rot_rad);

      for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        const Eigen::Vector3d dt(ut(rng), ut(rng), ut(rng));
        const double rx = ur(rng), ry = ur(rng), rz = ur(rng);
        const Pose delta(rot_x(rx) * rot_y(ry) * rot_z(rz), dt);
        const Pose init = compose(gt, delta);

        if (!success(mesh, bvh, init)) continue;

        const double loss = pose_loss(init, gt, opts.weights).total;
        if (!(loss < opts.max_loss)) continue;

        const Pose rel = compose(inverse(init), gt);
        if (warp_depth(gt_depth, rel, K).overlap_fraction < opts.min_overlap) {
          continue;
        }

        BenchmarkPair pair;
        pair.case_id = case_id;
        pair.frame_id = static_cast<int>(out.pairs.size());
        pair.gt_pose = gt;
        pair.init_pose = init;
        pair.difficulty = difficulty_for_loss(loss);
        pair.pose_loss_value = loss;
        pair.depth_path = case_id + "/depths/" + frame_name(pair.frame_id);
        pair.init_depth_path =
            case_id + "/init_depths/" + frame_name(pair.frame_id);

        out.pairs.push_back(pair);
        out.gt_depths.push_back(gt_depth);
        out.init_depths.push_back(render_depth(bvh, init, K));
        break;
      }
    }
  }

  if (out.pairs.empty()) {
    throw NoValidPairs("generate_case: no pairs survived the rejection gates");
  }
  return out;
}

DatasetManifest write_case(const std::filesystem::path& root,
                           const GeneratedCase& generated) {
  namespace fs = std::filesystem;
  const fs::path case_dir = root / generated.case_id;
  fs::create_directories(case_dir / "depths");
  fs::create_directories(case_dir / "init_depths");

  DatasetManifest manifest;
  manifest.case_id = generated.case_id;
  manifest.seed = generated.seed;
  manifest.spacing_mm = generated.options.spacing_mm;
  manifest.perturbation = generated.spec;
  manifest.weights = generated.options.weights;
  manifest.pair_count = static_cast<int>(generated.pairs.size());

  std::vector<Pose> gt_poses, init_poses;
  nlohmann::json jpairs = nlohmann::json::array();
  for (size_t i = 0; i < generated.pairs.size(); ++i) {
    const BenchmarkPair& p = generated.pairs[i];
    gt_poses.push_back(p.gt_pose);
    init_poses.push_back(p.init_pose);
    write_pfm(generated.gt_depths[i], root / p.depth_path);
    write_pfm(generated.init_depths[i], root / p.init_depth_path);
    jpairs.push_back({{"frame_id", p.frame_id},
                      {"difficulty", p.difficulty},
                      {"pose_loss", p.pose_loss_value}});
    if (p.difficulty == "easy") ++manifest.easy;
    else if (p.difficulty == "medium") ++manifest.medium;
    else ++manifest.hard;
  }

  write_poses(gt_poses, case_dir / "poses.txt");
  write_poses(init_poses, case_dir / "init_poses.txt");

  const nlohmann::json meta = {
      {"case_id", manifest.case_id},
      {"seed", manifest.seed},
      {"spacing_mm", manifest.spacing_mm},
      {"perturbation",
       {{"max_trans_mm", manifest.perturbation.max_trans_mm},
        {"max_rot_rad", manifest.perturbation.max_rot_rad},
        {"convention", manifest.convention}}},
      {"counts",
       {{"easy", manifest.easy}, {"medium", manifest.medium}, {"hard", manifest.hard}}},
      {"pose_loss_weights",
       {{"lambda_t", manifest.weights.lambda_t},
        {"lambda_rot", manifest.weights.lambda_rot},
        {"lambda_tm", manifest.weights.lambda_tm}}},
      {"pairs", jpairs},
  };
  std::ofstream out(case_dir / "meta.json");
  if (!out) throw IoError("cannot write meta.json in " + case_dir.string());
  out << meta.dump(2) << "\n";

  generated.intrinsics.save_json(root / "intrinsics.json");
  return manifest;
}

Dataset read_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw ManifestMismatch("dataset root is not a directory: " + root.string());
  }
  if (!fs::exists(root / "intrinsics.json")) {
    throw ManifestMismatch("missing intrinsics.json in " + root.string());
  }

  Dataset ds;
  ds.root = root;
  ds.intrinsics = CameraIntrinsics::load_json(root / "intrinsics.json");
  if (fs::exists(root / "mesh.stl")) ds.mesh_path = root / "mesh.stl";
  if (fs::exists(root / "centerline.json")) {
    ds.centerline_path = root / "centerline.json";
  }

  std::vector<fs::path> case_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() &&
        entry.path().filename().string().rfind("case_", 0) == 0) {
      case_dirs.push_back(entry.path());
    }
  }
  std::sort(case_dirs.begin(), case_dirs.end());
  if (case_dirs.empty()) {
    throw ManifestMismatch("no case directories under " + root.string());
  }

  for (const fs::path& case_dir : case_dirs) {
    const std::string case_id = case_dir.filename().string();
    for (const char* required : {"meta.json", "poses.txt", "init_poses.txt"}) {
      if (!fs::exists(case_dir / required)) {
        throw ManifestMismatch("missing " + std::string(required) + " in " +
                               case_dir.string());
      }
    }

    nlohmann::json meta;
    {
      std::ifstream in(case_dir / "meta.json");
      try {
        in >> meta;
      } catch (const nlohmann::json::exception& e) {
        throw ManifestMismatch("bad meta.json in " + case_dir.string() + ": " +
                               e.what());
      }
    }

    DatasetManifest manifest;
    try {
      manifest.case_id = meta.at("case_id").get<std::string>();
      manifest.seed = meta.at("seed").get<uint64_t>();
      manifest.spacing_mm = meta.at("spacing_mm").get<double>();
      manifest.perturbation.max_trans_mm =
          meta.at("perturbation").at("max_trans_mm").get<double>();
      manifest.perturbation.max_rot_rad =
          meta.at("perturbation").at("max_rot_rad").get<double>();
      manifest.convention =
          meta.at("perturbation").at("convention").get<std::string>();
      manifest.easy = meta.at("counts").at("easy").get<int>();
      manifest.medium = meta.at("counts").at("medium").get<int>();
      manifest.hard = meta.at("counts").at("hard").get<int>();
      manifest.weights.lambda_t =
          meta.at("pose_loss_weights").at("lambda_t").get<double>();
      manifest.weights.lambda_rot =
          meta.at("pose_loss_weights").at("lambda_rot").get<double>();
      manifest.weights.lambda_tm =
          meta.at("pose_loss_weights").at("lambda_tm").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ManifestMismatch("meta.json missing keys in " + case_dir.string() +
                             ": " + e.what());
    }

    const std::vector<Pose> gt_poses = read_poses(case_dir / "poses.txt");
    const std::vector<Pose> init_poses = read_poses(case_dir / "init_poses.txt");
    const auto& jpairs = meta.at("pairs");
    manifest.pair_count = static_cast<int>(jpairs.size());

    if (gt_poses.size() != init_poses.size() ||
        gt_poses.size() != jpairs.size()) {
      throw ManifestMismatch("pose/pair counts disagree in " +
                             case_dir.string());
    }
    if (manifest.easy + manifest.medium + manifest.hard !=
        manifest.pair_count) {
      throw ManifestMismatch("difficulty counts do not sum to pair count in " +
                             case_dir.string());
    }

    for (size_t i = 0; i < gt_poses.size(); ++i) {
      BenchmarkPair pair;
      pair.case_id = case_id;
      pair.frame_id = jpairs[i].at("frame_id").get<int>();
      pair.gt_pose = gt_poses[i];
      pair.init_pose = init_poses[i];
      pair.difficulty = jpairs[i].at("difficulty").get<std::string>();
      pair.pose_loss_value = jpairs[i].at("pose_loss").get<double>();
      pair.depth_path = case_id + "/depths/" + frame_name(pair.frame_id);
      pair.init_depth_path =
          case_id + "/init_depths/" + frame_name(pair.frame_id);
      for (const auto& rel : {pair.depth_path, pair.init_depth_path}) {
        if (!fs::exists(root / rel)) {
          throw ManifestMismatch("missing depth file " + rel);
        }
      }
      ds.pairs.push_back(std::move(pair));
    }
    ds.manifests.push_back(std::move(manifest));
  }
  return ds;
}

}  // namespace bronchopt
