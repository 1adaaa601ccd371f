// bronchopt command line tool: benchmark generation, registration runs,
// metric evaluation, reports, and error-map images.
//
// Exit codes: 0 success, 2 usage/input error, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>

#include "bronchopt/batch.hpp"
#include "bronchopt/benchmark.hpp"
#include "bronchopt/errors.hpp"
#include "bronchopt/metrics.hpp"
#include "bronchopt/phantom.hpp"
#include "bronchopt/pose_io.hpp"
#include "bronchopt/refiner.hpp"
#include "bronchopt/render.hpp"
#include "bronchopt/viz.hpp"

namespace fs = std::filesystem;
using namespace bronchopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int thread_count(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("BRONCHOPT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

void atomic_write_text(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct CommonRefinerFlags {
  std::string config_path;
  std::optional<int> inner, outer, multi_start;
  std::optional<double> trans_step, rot_step, momentum, conv_tol;
  std::optional<double> lambda_r, lambda_s, sdf_tau, sdf_gamma;
  std::optional<uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "key=value refiner config file (flags override it)");
    cmd->add_option("--inner-iters", inner, "inner iterations per outer loop");
    cmd->add_option("--outer-iters", outer, "outer loop restarts");
    cmd->add_option("--trans-step", trans_step, "translation step [mm]");
    cmd->add_option("--rot-step", rot_step, "rotation step [rad]");
    cmd->add_option("--momentum", momentum, "heavy-ball coefficient");
    cmd->add_option("--multi-start", multi_start, "number of starts");
    cmd->add_option("--conv-tol", conv_tol, "convergence tolerance");
    cmd->add_option("--lambda-r", lambda_r, "rendering loss weight");
    cmd->add_option("--lambda-s", lambda_s, "sdf loss weight");
    cmd->add_option("--sdf-tau", sdf_tau, "sdf safety margin [mm]");
    cmd->add_option("--sdf-gamma", sdf_gamma, "sdf boundary sharpness [1/mm]");
    cmd->add_option("--seed", seed, "seed for stochastic refiner options");
  }

  void resolve(RefinerConfig& cfg, RefineLossWeights& w,
               SdfLossParams& sdf_p) const {
    if (!config_path.empty()) cfg = RefinerConfig::from_file(config_path);
    if (inner) cfg.inner_iters = *inner;
    if (outer) cfg.outer_iters = *outer;
    if (trans_step) cfg.trans_step = *trans_step;
    if (rot_step) cfg.rot_step = *rot_step;
    if (momentum) cfg.momentum = *momentum;
    if (multi_start) cfg.multi_start = *multi_start;
    if (conv_tol) cfg.conv_tol = *conv_tol;
    if (seed) cfg.seed = *seed;
    if (lambda_r) w.lambda_r = *lambda_r;
    if (lambda_s) w.lambda_s = *lambda_s;
    if (sdf_tau) sdf_p.tau = *sdf_tau;
    if (sdf_gamma) sdf_p.gamma = *sdf_gamma;
    cfg.validate();
  }
};

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string phantom_kind;
  std::string mesh_path;
  std::string centerline_path;
  std::string intrinsics_path;
  std::string preset = "bench";
  std::string out_dir;
  std::string case_id = "case_01";
  double spacing = 5.0;
  int pairs_per_pose = 1;
  double min_overlap = 0.3;
  uint64_t seed = 0;
  double max_trans = -1.0;  // overrides preset when >= 0
  double max_rot = -1.0;
  PhantomParams phantom_params;
};

int run_generate(const GenerateArgs& args) {
  AirwayMesh mesh;
  Centerline centerline;
  if (!args.phantom_kind.empty()) {
    Phantom phantom = make_phantom(args.phantom_kind, args.phantom_params);
    mesh = std::move(phantom.mesh);
    centerline = std::move(phantom.centerline);
  } else {
    if (!fs::exists(args.mesh_path)) {
      std::cerr << "error: mesh path does not exist: " << args.mesh_path
                << "\n";
      return kExitUsage;
    }
    if (!fs::exists(args.centerline_path)) {
      std::cerr << "error: centerline path does not exist: "
                << args.centerline_path << "\n";
      return kExitUsage;
    }
    mesh = load_mesh(args.mesh_path);
    centerline = Centerline::load_json(args.centerline_path);
  }
  if (!mesh.watertight) {
    std::cerr << "error: benchmark generation needs a watertight mesh\n";
    return kExitUsage;
  }

  CameraIntrinsics K(110.0, 110.0, 111.5, 111.5, 224, 224);
  if (!args.intrinsics_path.empty()) {
    K = CameraIntrinsics::load_json(args.intrinsics_path);
  }

  PerturbationSpec spec =
      args.preset == "train" ? PerturbationSpec::train() : PerturbationSpec::bench();
  if (args.max_trans >= 0.0) spec.max_trans_mm = args.max_trans;
  if (args.max_rot >= 0.0) spec.max_rot_rad = args.max_rot;

  GenerateOptions opts;
  opts.spacing_mm = args.spacing;
  opts.pairs_per_pose = args.pairs_per_pose;
  opts.min_overlap = args.min_overlap;

  const Bvh bvh(mesh);
  const GeneratedCase generated = generate_case(
      mesh, bvh, centerline, spec, opts, K, args.seed, args.case_id);

  fs::create_directories(args.out_dir);
  const DatasetManifest manifest = write_case(args.out_dir, generated);
  save_stl(mesh, fs::path(args.out_dir) / "mesh.stl");
  centerline.save_json(fs::path(args.out_dir) / "centerline.json");

  std::cout << "wrote " << manifest.pair_count << " pairs (easy "
            << manifest.easy << ", medium " << manifest.medium << ", hard "
            << manifest.hard << ") to " << args.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// refine / evaluate
// ---------------------------------------------------------------------------

struct RefineArgs {
  std::string data_dir;
  std::string out_dir;
  std::string mesh_path;  // defaults to dataset mesh.stl
  bool pseudo = false;
  int threads = 0;
  CommonRefinerFlags refiner;
};

std::string pose_line(const Pose& T) {
  char buf[64];
  std::string line;
  const Eigen::Matrix<double, 3, 4> m = T.matrix34();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      line += buf;
      line += (r == 2 && c == 3) ? "\n" : " ";
    }
  }
  return line;
}

int run_refine(const RefineArgs& args) {
  const Dataset dataset = read_dataset(args.data_dir);
  if (dataset.pairs.empty()) {
    std::cerr << "error: dataset has no pairs: " << args.data_dir << "\n";
    return kExitUsage;
  }

  const fs::path mesh_path =
      args.mesh_path.empty() ? dataset.mesh_path : fs::path(args.mesh_path);
  if (mesh_path.empty() || !fs::exists(mesh_path)) {
    std::cerr << "error: mesh file not found: " << mesh_path.string() << "\n";
    return kExitUsage;
  }
  const AirwayMesh mesh = load_mesh(mesh_path);
  const Bvh bvh(mesh);

  BatchOptions opts;
  args.refiner.resolve(opts.cfg, opts.weights, opts.sdf_params);
  opts.pseudo = args.pseudo;
  opts.threads = thread_count(args.threads);

  const fs::path out_dir(args.out_dir);
  const fs::path traces_dir = out_dir / "traces";
  const fs::path parts_dir = out_dir / "parts";
  fs::create_directories(traces_dir);
  fs::create_directories(parts_dir);

  auto part_path = [&](const BenchmarkPair& pair) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_frame_%04d.txt", pair.case_id.c_str(),
                  pair.frame_id);
    return parts_dir / buf;
  };
  auto trace_path = [&](const BenchmarkPair& pair) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_frame_%04d.csv", pair.case_id.c_str(),
                  pair.frame_id);
    return traces_dir / buf;
  };

  // Resume: pairs with a completed part file are skipped and reloaded.
  opts.skip = [&](const BenchmarkPair& pair) {
    return fs::exists(part_path(pair));
  };

  const BatchOutcome outcome = batch_refine(mesh, bvh, dataset, opts);

  int failures = 0;
  for (const BatchItem& item : outcome.items) {
    const BenchmarkPair& pair = dataset.pairs[item.pair_index];
    if (item.failed) {
      ++failures;
      std::cerr << "pair " << pair.case_id << "/" << pair.frame_id
                << " failed: " << item.error << "\n";
      continue;
    }
    item.result.write_trace_csv(trace_path(pair));
    // Part file: one pose line, then the metrics row.
    MetricsReport single;
    single.pairs.push_back(item.metrics);
    const fs::path csv_tmp = part_path(pair).string() + ".csv";
    single.write_csv(csv_tmp);
    std::string body = pose_line(item.result.final_pose) + slurp(csv_tmp);
    fs::remove(csv_tmp);
    atomic_write_text(part_path(pair), body);
  }

  // Assemble outputs from all part files, including previously completed ones.
  MetricsReport report;
  std::vector<Pose> refined;
  int resumed = 0;
  for (const BenchmarkPair& pair : dataset.pairs) {
    const fs::path part = part_path(pair);
    if (!fs::exists(part)) continue;
    const std::string content = slurp(part);
    const size_t eol = content.find('\n');
    if (eol == std::string::npos) {
      std::cerr << "corrupt part file: " << part << "\n";
      return kExitRuntime;
    }
    // Pose line
    {
      const fs::path tmp = part.string() + ".pose";
      atomic_write_text(tmp, content.substr(0, eol + 1));
      refined.push_back(read_poses(tmp).at(0));
      fs::remove(tmp);
    }
    // Metrics row
    {
      const fs::path tmp = part.string() + ".row";
      atomic_write_text(tmp, content.substr(eol + 1));
      const MetricsReport one = MetricsReport::read_csv(tmp);
      fs::remove(tmp);
      if (one.pairs.size() != 1) {
        std::cerr << "corrupt part file: " << part << "\n";
        return kExitRuntime;
      }
      report.pairs.push_back(one.pairs[0]);
      ++resumed;
    }
  }

  write_poses(refined, out_dir / "refined_poses.txt");
  {
    const fs::path tmp = out_dir / "metrics.csv.tmp_dir";
    report.write_csv(out_dir / "metrics.csv.tmp");
    fs::rename(out_dir / "metrics.csv.tmp", out_dir / "metrics.csv");
  }
  report.write_summary_json(out_dir / "summary.json");

  std::cout << report.format_table();
  std::cout << "refined " << report.pairs.size() << " pairs (" << failures
            << " failures) -> " << out_dir.string() << "\n";
  return report.pairs.empty() ? kExitRuntime : kExitOk;
}

struct EvaluateArgs {
  std::string data_dir;
  std::string out_csv = "metrics.csv";
  std::string mesh_path;
};

int run_evaluate(const EvaluateArgs& args) {
  const Dataset dataset = read_dataset(args.data_dir);
  const fs::path mesh_path =
      args.mesh_path.empty() ? dataset.mesh_path : fs::path(args.mesh_path);
  if (mesh_path.empty() || !fs::exists(mesh_path)) {
    std::cerr << "error: mesh file not found: " << mesh_path.string() << "\n";
    return kExitUsage;
  }
  const AirwayMesh mesh = load_mesh(mesh_path);
  const Bvh bvh(mesh);

  MetricsReport report;
  for (const BenchmarkPair& pair : dataset.pairs) {
    try {
      const DepthMap observed = read_pfm(dataset.root / pair.depth_path);
      const DepthMap init_render =
          read_pfm(dataset.root / pair.init_depth_path);
      report.pairs.push_back(evaluate_pair(mesh, bvh, pair, pair.init_pose,
                                           observed, init_render,
                                           dataset.intrinsics));
    } catch (const Error& e) {
      std::cerr << "pair " << pair.case_id << "/" << pair.frame_id
                << " failed: " << e.what() << "\n";
    }
  }
  if (report.pairs.empty()) {
    std::cerr << "error: no pair could be evaluated\n";
    return kExitRuntime;
  }

  report.write_csv(args.out_csv);
  std::cout << report.format_table();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report / errormap / phantom
// ---------------------------------------------------------------------------

int run_report(const std::string& csv_path, const std::string& summary_path) {
  const MetricsReport report = MetricsReport::read_csv(csv_path);
  std::cout << report.format_table();
  if (!summary_path.empty()) report.write_summary_json(summary_path);
  return kExitOk;
}

int run_errormap(const std::string& pred_path, const std::string& ref_path,
                 const std::string& out_path, double max_error) {
  const DepthMap pred = read_pfm(pred_path);
  const DepthMap ref = read_pfm(ref_path);
  const RgbImage image = colorize_error_map(pred, ref, max_error);
  const fs::path tmp = out_path + ".tmp";
  write_png(image, tmp);
  fs::rename(tmp, out_path);
  return kExitOk;
}

struct PhantomArgs {
  std::string kind = "cylinder";
  std::string out_dir;
  PhantomParams params;
};

int run_phantom(const PhantomArgs& args) {
  const Phantom phantom = make_phantom(args.kind, args.params);
  fs::create_directories(args.out_dir);
  save_stl(phantom.mesh, fs::path(args.out_dir) / "mesh.stl");
  phantom.centerline.save_json(fs::path(args.out_dir) / "centerline.json");
  std::cout << "wrote " << args.kind << " phantom ("
            << phantom.mesh.triangles.size() << " triangles, watertight="
            << (phantom.mesh.watertight ? "yes" : "no") << ") to "
            << args.out_dir << "\n";
  return kExitOk;
}

void attach_phantom_params(CLI::App* cmd, PhantomParams& p) {
  cmd->add_option("--radius", p.radius, "tube radius [mm]");
  cmd->add_option("--length", p.length, "cylinder length [mm]");
  cmd->add_option("--segments", p.segments, "cylinder tessellation segments");
  cmd->add_option("--trunk-length", p.trunk_length, "y_branch trunk [mm]");
  cmd->add_option("--branch-length", p.branch_length, "y_branch children [mm]");
  cmd->add_option("--branch-radius", p.branch_radius, "child radius [mm]");
  cmd->add_option("--branch-angle", p.branch_angle_deg,
                  "child angle from the trunk axis [deg]");
  cmd->add_option("--voxel", p.voxel, "y_branch extraction voxel [mm]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-wise 2D-3D registration of endoscope poses against "
               "airway meshes, with a synthetic benchmark toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cmd_generate =
      app.add_subcommand("generate", "Generate a synthetic benchmark dataset");
  cmd_generate->add_option("--phantom", gen.phantom_kind,
                           "phantom kind (cylinder | y_branch)");
  cmd_generate->add_option("--mesh", gen.mesh_path, "airway mesh (STL/OBJ)");
  cmd_generate->add_option("--centerline", gen.centerline_path,
                           "centerline json");
  cmd_generate->add_option("--intrinsics", gen.intrinsics_path,
                           "camera intrinsics json");
  cmd_generate->add_option("--preset", gen.preset,
                           "perturbation preset: bench (±5mm/±25°) or train "
                           "(±10mm/±0.44rad)")
      ->check(CLI::IsMember({"bench", "train"}));
  cmd_generate->add_option("--max-trans", gen.max_trans,
                           "override per-axis translation bound [mm]");
  cmd_generate->add_option("--max-rot", gen.max_rot,
                           "override per-axis rotation bound [rad]");
  cmd_generate->add_option("--spacing", gen.spacing,
                           "centerline sampling interval [mm]");
  cmd_generate->add_option("--pairs-per-pose", gen.pairs_per_pose,
                           "perturbation draws per GT pose");
  cmd_generate->add_option("--min-overlap", gen.min_overlap,
                           "co-visibility threshold");
  cmd_generate->add_option("--seed", gen.seed, "generator seed");
  cmd_generate->add_option("--case-id", gen.case_id, "case directory name");
  cmd_generate->add_option("--out", gen.out_dir, "output dataset directory")
      ->required();
  attach_phantom_params(cmd_generate, gen.phantom_params);

  RefineArgs ref;
  CLI::App* cmd_refine =
      app.add_subcommand("refine", "Refine every pair of a dataset");
  cmd_refine->add_option("--data", ref.data_dir, "dataset directory")
      ->required();
  cmd_refine->add_option("--out", ref.out_dir, "output directory")->required();
  cmd_refine->add_option("--mesh", ref.mesh_path,
                         "mesh override (defaults to dataset mesh.stl)");
  cmd_refine->add_flag("--pseudo", ref.pseudo,
                       "treat observed depths as scale-ambiguous pseudo depth");
  cmd_refine->add_option("--threads", ref.threads,
                         "worker threads (default BRONCHOPT_THREADS or 1)");
  ref.refiner.attach(cmd_refine);

  EvaluateArgs eval;
  CLI::App* cmd_evaluate = app.add_subcommand(
      "evaluate", "Score the stored init poses without refinement");
  cmd_evaluate->add_option("--data", eval.data_dir, "dataset directory")
      ->required();
  cmd_evaluate->add_option("--out", eval.out_csv, "metrics csv path");
  cmd_evaluate->add_option("--mesh", eval.mesh_path, "mesh override");

  std::string report_csv, report_summary;
  CLI::App* cmd_report =
      app.add_subcommand("report", "Aggregate a metrics csv into a table");
  cmd_report->add_option("csv", report_csv, "metrics csv")->required();
  cmd_report->add_option("--summary", report_summary, "summary json path");

  std::string em_pred, em_ref, em_out;
  double em_max_error = 0.5;
  CLI::App* cmd_errormap = app.add_subcommand(
      "errormap", "Scale-invariant depth error map as a png");
  cmd_errormap->add_option("--pred", em_pred, "predicted depth pfm")->required();
  cmd_errormap->add_option("--ref", em_ref, "reference depth pfm")->required();
  cmd_errormap->add_option("--out", em_out, "output png")->required();
  cmd_errormap->add_option("--max-error", em_max_error,
                           "error clamp in log-depth units");

  PhantomArgs phantom;
  CLI::App* cmd_phantom = app.add_subcommand(
      "phantom", "Write a phantom mesh and centerline to a directory");
  cmd_phantom->add_option("--kind", phantom.kind, "cylinder | y_branch");
  cmd_phantom->add_option("--out", phantom.out_dir, "output directory")
      ->required();
  attach_phantom_params(cmd_phantom, phantom.params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_generate) return run_generate(gen);
    if (*cmd_refine) return run_refine(ref);
    if (*cmd_evaluate) return run_evaluate(eval);
    if (*cmd_report) return run_report(report_csv, report_summary);
    if (*cmd_errormap) return run_errormap(em_pred, em_ref, em_out, em_max_error);
    if (*cmd_phantom) return run_phantom(phantom);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ManifestMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MalformedCsv& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SizeMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
