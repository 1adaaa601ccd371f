#include "bronchopt/centerline.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "bronchopt/errors.hpp"

namespace bronchopt {

Centerline Centerline::load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open centerline file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad centerline json: " + std::string(e.what()));
  }

  Centerline cl;
  try {
    for (const auto& jb : j.at("branches")) {
      CenterlineBranch branch;
      branch.parent = jb.value("parent", -1);
      for (const auto& jp : jb.at("points")) {
        branch.points.emplace_back(jp.at(0).get<double>(),
                                   jp.at(1).get<double>(),
                                   jp.at(2).get<double>());
      }
      cl.branches.push_back(std::move(branch));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("centerline json structure: " + std::string(e.what()));
  }
  return cl;
}

void Centerline::save_json(const std::filesystem::path& path) const {
  nlohmann::json jb = nlohmann::json::array();
  for (const auto& branch : branches) {
    nlohmann::json jp = nlohmann::json::array();
    for (const auto& p : branch.points) {
      jp.push_back({p.x(), p.y(), p.z()});
    }
    jb.push_back({{"parent", branch.parent}, {"points", jp}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write centerline file: " + path.string());
  out << nlohmann::json{{"branches", jb}}.dump(2) << "\n";
}

std::vector<Eigen::Vector3d> resample_branch(const CenterlineBranch& branch,
                                             double spacing) {
  if (spacing <= 0.0) throw InvalidParams("resample_branch: spacing <= 0");
  const auto& pts = branch.points;
  if (pts.size() < 2) {
    return pts.empty() ? std::vector<Eigen::Vector3d>{} : pts;
  }

  std::vector<double> cum(pts.size(), 0.0);
  for (size_t i = 1; i < pts.size(); ++i) {
    cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  }
  const double length = cum.back();

  auto point_at = [&](double s) {
    size_t i = 1;
    while (i + 1 < cum.size() && cum[i] < s) ++i;
    const double seg = cum[i] - cum[i - 1];
    const double w = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
    return Eigen::Vector3d(pts[i - 1] + w * (pts[i] - pts[i - 1]));
  };

  if (length < spacing) {
    // Degenerate branch: midpoint only.
    return {point_at(0.5 * length)};
  }

  std::vector<Eigen::Vector3d> out;
  const int n = static_cast<int>(std::floor(length / spacing + 1e-9));
  out.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    out.push_back(point_at(std::min(k * spacing, length)));
  }
  return out;
}

namespace {

Eigen::Matrix3d frame_from_tangent(const Eigen::Vector3d& tangent) {
  const Eigen::Vector3d z = tangent.normalized();
  Eigen::Vector3d ref = Eigen::Vector3d::UnitY();
  if (std::abs(z.dot(ref)) > 0.9) ref = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d x = ref.cross(z).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return R;
}

// Minimal rotation taking a onto b; identity when already aligned.
Eigen::Matrix3d align_rotation(const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b) {
  const Eigen::Vector3d axis = a.cross(b);
  const double s = axis.norm();
  const double c = std::clamp(a.dot(b), -1.0, 1.0);
  if (s < 1e-12) {
    return c > 0.0 ? Eigen::Matrix3d::Identity()
                   : Eigen::Matrix3d(Eigen::AngleAxisd(
                         M_PI, a.unitOrthogonal()));
  }
  return Eigen::Matrix3d(Eigen::AngleAxisd(std::atan2(s, c), axis / s));
}

}  // namespace

std::vector<Pose> sample_centerline_poses(const Centerline& cl,
                                          double spacing) {
  std::vector<Pose> poses;
  for (const auto& branch : cl.branches) {
    const std::vector<Eigen::Vector3d> pts = resample_branch(branch, spacing);
    if (pts.empty()) continue;

    if (pts.size() == 1) {
      // Midpoint-only branch: tangent from the raw polyline ends.
      const Eigen::Vector3d t = branch.points.back() - branch.points.front();
      if (t.squaredNorm() < 1e-18) continue;
      poses.emplace_back(frame_from_tangent(t), pts[0]);
      continue;
    }

    std::vector<Eigen::Vector3d> tangents(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
      const size_t lo = i == 0 ? 0 : i - 1;
      const size_t hi = i + 1 == pts.size() ? i : i + 1;
      tangents[i] = (pts[hi] - pts[lo]).normalized();
    }

    Eigen::Matrix3d R = frame_from_tangent(tangents[0]);
    poses.emplace_back(R, pts[0]);
    for (size_t i = 1; i < pts.size(); ++i) {
      R = align_rotation(tangents[i - 1], tangents[i]) * R;
      R = orthonormalized(Pose(R, Eigen::Vector3d::Zero())).rotation;
      poses.emplace_back(R, pts[i]);
    }
  }
  return poses;
}

}  // namespace bronchopt
