#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace bronchopt {

/// H x W grid of z-depth values [mm] plus a validity mask. Invalid pixels
/// carry the value 0, which is also how they are encoded on disk (PFM).
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;   // row-major, height*width
  std::vector<uint8_t> valid;  // 1 where a surface was hit

  DepthMap() = default;
  DepthMap(int w, int h)
      : width(w),
        height(h),
        values(static_cast<size_t>(w) * h, 0.0f),
        valid(static_cast<size_t>(w) * h, 0) {}

  size_t index(int u, int v) const {
    return static_cast<size_t>(v) * width + u;
  }
  float value(int u, int v) const { return values[index(u, v)]; }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
  void set(int u, int v, float d) {
    values[index(u, v)] = d;
    valid[index(u, v)] = 1;
  }
  void clear(int u, int v) {
    values[index(u, v)] = 0.0f;
    valid[index(u, v)] = 0;
  }

  size_t size() const { return values.size(); }
  int valid_count() const;
  bool same_shape(const DepthMap& other) const {
    return width == other.width && height == other.height;
  }
};

/// Portable float map, little-endian float32, scale header -1.0, rows stored
/// bottom-to-top per the format. Invalid pixels are written as 0.0.
void write_pfm(const DepthMap& map, const std::filesystem::path& path);
DepthMap read_pfm(const std::filesystem::path& path);

}  // namespace bronchopt
