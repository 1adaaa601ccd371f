#include "bronchopt/refiner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "bronchopt/errors.hpp"
#include "bronchopt/render.hpp"
#include "bronchopt/sdf.hpp"

namespace bronchopt {

void RefinerConfig::validate() const {
  if (inner_iters < 1 || outer_iters < 1) {
    throw InvalidParams("refiner: inner_iters and outer_iters must be >= 1");
  }
  if (trans_step <= 0.0 || rot_step <= 0.0 || trans_eps <= 0.0 ||
      rot_eps <= 0.0 || conv_tol <= 0.0 || multi_start < 1 ||
      momentum < 0.0 || momentum >= 1.0) {
    throw InvalidParams("refiner: config values out of range");
  }
}

bool RefinerConfig::apply_key_value(const std::string& key,
                                    const std::string& value) {
  auto as_int = [&] { return std::stoi(value); };
  auto as_double = [&] { return std::stod(value); };
  if (key == "inner_iters") inner_iters = as_int();
  else if (key == "outer_iters") outer_iters = as_int();
  else if (key == "trans_step") trans_step = as_double();
  else if (key == "rot_step") rot_step = as_double();
  else if (key == "trans_eps") trans_eps = as_double();
  else if (key == "rot_eps") rot_eps = as_double();
  else if (key == "momentum") momentum = as_double();
  else if (key == "multi_start") multi_start = as_int();
  else if (key == "conv_tol") conv_tol = as_double();
  else if (key == "seed") seed = std::stoull(value);
  else return false;
  return true;
}

RefinerConfig RefinerConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open refiner config: " + path.string());
  RefinerConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (!cfg.apply_key_value(key, value)) {
        throw ParseError("config line " + std::to_string(lineno) +
                         ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("config line " + std::to_string(lineno) +
                       ": bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void RefineResult::write_trace_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace csv: " + path.string());
  out << "iteration,render_loss,sdf_loss,total\n";
  char buf[256];
  for (const auto& e : loss_trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", e.iteration,
                  e.render_loss, e.sdf_loss, e.total);
    out << buf;
  }
}

namespace {

struct LossParts {
  double render = 0.0;
  double sdf = 0.0;
  double total = 0.0;
};

class Objective {
 public:
  Objective(const AirwayMesh& mesh, const Bvh& bvh, const CameraIntrinsics& K,
            const RefineLossWeights& w, const SdfLossParams& sdf_p)
      : mesh_(mesh), bvh_(bvh), K_(K), w_(w), sdf_p_(sdf_p) {}

  void set_observation(DepthMap observed) { observed_ = std::move(observed); }
  const DepthMap& observation() const { return observed_; }

  DepthMap render(const Pose& T) {
    ++renders_;
    return render_depth(bvh_, T, K_);
  }

  LossParts evaluate(const Pose& T) {
    const DepthMap rendered = render(T);
    LossParts parts;
    parts.render = render_term(rendered);
    parts.sdf = sdf_loss(sdf(mesh_, bvh_, T.camera_center()).value, sdf_p_);
    parts.total = w_.lambda_r * parts.render + w_.lambda_s * parts.sdf;
    return parts;
  }

  bool in_lumen(const Pose& T) const {
    return sdf(mesh_, bvh_, T.camera_center()).value < 0.0;
  }

  int renders() const { return renders_; }

 private:
  // Similarity failure (no overlap, constant map) scores as the worst
  // rendering loss so probes outside the usable region are repelled, not
  // fatal.
  double render_term(const DepthMap& rendered) const {
    try {
      return 1.0 - msssim(observed_, rendered);
    } catch (const Error&) {
      return 1.0;
    }
  }

  const AirwayMesh& mesh_;
  const Bvh& bvh_;
  const CameraIntrinsics& K_;
  RefineLossWeights w_;
  SdfLossParams sdf_p_;
  DepthMap observed_;
  int renders_ = 0;
};

using Tangent6 = Eigen::Matrix<double, 6, 1>;

// Median of rendered/pseudo depth ratios over the joint valid mask; 1.0 when
// the mask is too small to be meaningful.
double median_depth_ratio(const DepthMap& rendered, const DepthMap& pseudo) {
  std::vector<double> ratios;
  ratios.reserve(pseudo.size());
  for (size_t i = 0; i < pseudo.size(); ++i) {
    if (rendered.valid[i] && pseudo.valid[i] && pseudo.values[i] > 0.0f) {
      ratios.push_back(static_cast<double>(rendered.values[i]) /
                       static_cast<double>(pseudo.values[i]));
    }
  }
  if (ratios.size() < 32) return 1.0;
  const size_t mid = ratios.size() / 2;
  std::nth_element(ratios.begin(), ratios.begin() + mid, ratios.end());
  return ratios[mid];
}

DepthMap scale_depth(const DepthMap& map, double factor) {
  DepthMap out = map;
  for (size_t i = 0; i < out.size(); ++i) {
    if (out.valid[i]) out.values[i] = static_cast<float>(out.values[i] * factor);
  }
  return out;
}

RefineResult refine_single(Objective& obj, const DepthMap& observed,
                           const Pose& init, const RefinerConfig& cfg,
                           bool rescale_pseudo) {
  RefineResult result;

  Pose current = init;
  double trans_step = cfg.trans_step;
  double rot_step = cfg.rot_step;
  int iteration = 0;

  if (rescale_pseudo) {
    const DepthMap rendered = obj.render(current);
    obj.set_observation(scale_depth(observed, median_depth_ratio(rendered, observed)));
  } else {
    obj.set_observation(observed);
  }

  auto record = [&](const LossParts& parts, const Pose& pose) {
    if (!std::isfinite(parts.total)) {
      throw NonFiniteLoss("refine: non-finite loss at iteration " +
                          std::to_string(iteration) + " after " +
                          std::to_string(result.loss_trace.size()) +
                          " trace entries");
    }
    result.loss_trace.push_back(
        {iteration, parts.render, parts.sdf, parts.total, pose});
  };

  LossParts parts = obj.evaluate(current);
  record(parts, current);
  Pose best_pose = current;
  double best_total = parts.total;

  for (int outer = 0; outer < cfg.outer_iters; ++outer) {
    current = best_pose;
    Tangent6 velocity = Tangent6::Zero();
    int stall = 0;
    const double best_at_outer_start = best_total;

    if (rescale_pseudo && outer > 0) {
      const DepthMap rendered = obj.render(current);
      obj.set_observation(
          scale_depth(observed, median_depth_ratio(rendered, observed)));
      ++iteration;
      parts = obj.evaluate(current);
      record(parts, current);
      if (parts.total < best_total) {
        best_total = parts.total;
        best_pose = current;
      }
    }

    for (int inner = 0; inner < cfg.inner_iters; ++inner) {
      ++iteration;

      // Central-difference gradient over the 6 tangent axes.
      Tangent6 grad = Tangent6::Zero();
      for (int axis = 0; axis < 6; ++axis) {
        const double eps = axis < 3 ? cfg.trans_eps : cfg.rot_eps;
        Tangent6 d = Tangent6::Zero();
        d[axis] = eps;
        const double hi =
            obj.evaluate(compose(current, exp_map(TangentVector::from_vector(d)))).total;
        d[axis] = -eps;
        const double lo =
            obj.evaluate(compose(current, exp_map(TangentVector::from_vector(d)))).total;
        if (std::isfinite(hi) && std::isfinite(lo)) {
          grad[axis] = (hi - lo) / (2.0 * eps);
        }
      }

      // Normalized per block so the configured steps are real displacements.
      Tangent6 step = Tangent6::Zero();
      const double tn = grad.head<3>().norm();
      const double rn = grad.tail<3>().norm();
      if (tn > 0.0) step.head<3>() = -trans_step * grad.head<3>() / tn;
      if (rn > 0.0) step.tail<3>() = -rot_step * grad.tail<3>() / rn;

      velocity = cfg.momentum * velocity + step;
      const Pose candidate =
          compose(current, exp_map(TangentVector::from_vector(velocity)));

      if (!obj.in_lumen(candidate)) {
        // Wall collision: drop the momentum and treat as a failed step.
        velocity = Tangent6::Zero();
        ++stall;
        if (stall >= 3) {
          trans_step *= 0.5;
          rot_step *= 0.5;
          stall = 0;
        }
        continue;
      }

      current = candidate;
      parts = obj.evaluate(current);
      record(parts, current);

      if (parts.total < best_total - cfg.conv_tol) {
        best_total = parts.total;
        best_pose = current;
        stall = 0;
      } else {
        if (parts.total < best_total) {
          best_total = parts.total;
          best_pose = current;
        }
        ++stall;
        if (stall >= 3) {
          trans_step *= 0.5;
          rot_step *= 0.5;
          stall = 0;
        }
      }
    }

    result.converged = best_at_outer_start - best_total < cfg.conv_tol;
  }

  result.final_pose = best_pose;
  return result;
}

RefineResult refine_impl(const AirwayMesh& mesh, const Bvh& bvh,
                         const DepthMap& observed, const CameraIntrinsics& K,
                         const Pose& init, const RefinerConfig& cfg,
                         const RefineLossWeights& w,
                         const SdfLossParams& sdf_p, bool rescale_pseudo) {
  cfg.validate();
  if (observed.width != K.width || observed.height != K.height) {
    throw SizeMismatch("refine: observed map does not match intrinsics");
  }
  if (observed.valid_count() < 100) {
    throw EmptyObservation("refine: observed map has fewer than 100 valid pixels");
  }
  if (!init.translation.allFinite() || !init.rotation.allFinite()) {
    throw InvalidParams("refine: init pose is not finite");
  }

  Objective obj(mesh, bvh, K, w, sdf_p);

  std::vector<Pose> starts{init};
  if (cfg.multi_start > 1) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ut(-2.0, 2.0);    // mm
    std::uniform_real_distribution<double> ur(-0.1, 0.1);    // rad
    for (int s = 1; s < cfg.multi_start; ++s) {
      TangentVector xi;
      xi.rho = Eigen::Vector3d(ut(rng), ut(rng), ut(rng));
      xi.phi = Eigen::Vector3d(ur(rng), ur(rng), ur(rng));
      starts.push_back(compose(init, exp_map(xi)));
    }
  }

  RefineResult best;
  double best_total = std::numeric_limits<double>::infinity();
  int total_renders = 0;
  for (const Pose& start : starts) {
    RefineResult r = refine_single(obj, observed, start, cfg, rescale_pseudo);
    double final_total = std::numeric_limits<double>::infinity();
    for (const auto& e : r.loss_trace) final_total = std::min(final_total, e.total);
    if (final_total < best_total) {
      best_total = final_total;
      best = std::move(r);
    }
    total_renders = obj.renders();
  }
  best.evaluations = total_renders;
  return best;
}

}  // namespace

RefineResult refine(const AirwayMesh& mesh, const Bvh& bvh,
                    const DepthMap& observed, const CameraIntrinsics& K,
                    const Pose& init, const RefinerConfig& cfg,
                    const RefineLossWeights& w, const SdfLossParams& sdf_p) {
  return refine_impl(mesh, bvh, observed, K, init, cfg, w, sdf_p, false);
}

RefineResult refine_with_pseudo_depth(const AirwayMesh& mesh, const Bvh& bvh,
                                      const DepthMap& pseudo,
                                      const CameraIntrinsics& K,
                                      const Pose& init,
                                      const RefinerConfig& cfg,
                                      const RefineLossWeights& w,
                                      const SdfLossParams& sdf_p) {
  return refine_impl(mesh, bvh, pseudo, K, init, cfg, w, sdf_p, true);
}

}  // namespace bronchopt
