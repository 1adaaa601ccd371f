#include "bronchopt/depth_map.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bronchopt/errors.hpp"

namespace bronchopt {

int DepthMap::valid_count() const {
  int n = 0;
  for (uint8_t v : valid) n += v != 0;
  return n;
}

void write_pfm(const DepthMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write pfm: " + path.string());
  out << "Pf\n" << map.width << " " << map.height << "\n-1.0\n";
  // Bottom-to-top scanlines.
  for (int v = map.height - 1; v >= 0; --v) {
    const float* row = map.values.data() + map.index(0, v);
    out.write(reinterpret_cast<const char*>(row),
              static_cast<std::streamsize>(map.width) * sizeof(float));
  }
  if (!out) throw IoError("short write on pfm: " + path.string());
}

DepthMap read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open pfm: " + path.string());

  std::string magic;
  in >> magic;
  if (magic != "Pf") {
    throw ParseError("not a grayscale pfm: " + path.string());
  }
  int width = 0, height = 0;
  double scale = 0.0;
  in >> width >> height >> scale;
  if (!in || width <= 0 || height <= 0) {
    throw ParseError("bad pfm header: " + path.string());
  }
  if (scale >= 0.0) {
    throw ParseError("big-endian pfm unsupported: " + path.string());
  }
  in.get();  // single whitespace after the scale line

  DepthMap map(width, height);
  for (int v = height - 1; v >= 0; --v) {
    float* row = map.values.data() + map.index(0, v);
    in.read(reinterpret_cast<char*>(row),
            static_cast<std::streamsize>(width) * sizeof(float));
  }
  if (!in) throw ParseError("truncated pfm payload: " + path.string());

  for (size_t i = 0; i < map.size(); ++i) {
    map.valid[i] = (map.values[i] > 0.0f && std::isfinite(map.values[i])) ? 1 : 0;
  }
  return map;
}

}  // namespace bronchopt
