#include "bronchopt/camera.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "bronchopt/errors.hpp"

namespace bronchopt {

Eigen::Vector2d project(const Eigen::Vector3d& p, const CameraIntrinsics& K) {
  if (!(p.z() > 0.0)) {
    throw NonPositiveDepth("project: point has non-positive z");
  }
  return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

Eigen::Vector3d back_project(const Eigen::Vector2d& pix, double depth,
                             const CameraIntrinsics& K) {
  if (!(depth > 0.0)) {
    throw NonPositiveDepth("back_project: non-positive depth");
  }
  return {depth * (pix.x() - K.cx) / K.fx, depth * (pix.y() - K.cy) / K.fy,
          depth};
}

CameraIntrinsics CameraIntrinsics::load_json(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open intrinsics file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad intrinsics json: " + std::string(e.what()));
  }
  CameraIntrinsics K;
  try {
    K.fx = j.at("fx").get<double>();
    K.fy = j.at("fy").get<double>();
    K.cx = j.at("cx").get<double>();
    K.cy = j.at("cy").get<double>();
    K.width = j.at("width").get<int>();
    K.height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("intrinsics json missing key: " + std::string(e.what()));
  }
  if (!K.valid()) {
    throw ParseError("intrinsics out of range: " + path.string());
  }
  return K;
}

void CameraIntrinsics::save_json(const std::filesystem::path& path) const {
  nlohmann::json j{{"fx", fx},     {"fy", fy},       {"cx", cx},
                   {"cy", cy},     {"width", width}, {"height", height}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write intrinsics file: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace bronchopt
