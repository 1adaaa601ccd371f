#pragma once

#include <filesystem>
#include <vector>

#include "bronchopt/se3.hpp"

namespace bronchopt {

/// poses.txt format: one pose per line, 12 whitespace-separated floats =
/// row-major 3x4 [R|t], translation in millimeters. Doubles are written with
/// enough digits to round-trip exactly.
void write_poses(const std::vector<Pose>& poses,
                 const std::filesystem::path& path);
std::vector<Pose> read_poses(const std::filesystem::path& path);

}  // namespace bronchopt
