#include "bronchopt/pose_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bronchopt/errors.hpp"

namespace bronchopt {

void write_poses(const std::vector<Pose>& poses,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write poses file: " + path.string());
  char buf[64];
  for (const Pose& T : poses) {
    const Eigen::Matrix<double, 3, 4> m = T.matrix34();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
        out << buf << (r == 2 && c == 3 ? "\n" : " ");
      }
    }
  }
  if (!out) throw IoError("short write on poses file: " + path.string());
}

std::vector<Pose> read_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open poses file: " + path.string());

  std::vector<Pose> poses;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ls >> v[i])) {
        throw ParseError("poses line " + std::to_string(lineno) +
                         ": expected 12 floats");
      }
    }
    Pose T;
    T.rotation << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    T.translation << v[3], v[7], v[11];
    if (!T.is_rigid(1e-6)) {
      throw ParseError("poses line " + std::to_string(lineno) +
                       ": rotation is not orthonormal");
    }
    poses.push_back(T);
  }
  return poses;
}

}  // namespace bronchopt
