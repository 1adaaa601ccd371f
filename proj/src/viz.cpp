#include "bronchopt/viz.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "bronchopt/errors.hpp"

namespace bronchopt {

namespace {

void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4],
               const std::vector<uint8_t>& payload) {
  put_u32_be(out, static_cast<uint32_t>(payload.size()));
  const size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const uint32_t crc = crc32(
      0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_u32_be(out, crc);
}

}  // namespace

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  if (image.width <= 0 || image.height <= 0) {
    throw InvalidParams("write_png: empty image");
  }

  // Filter type 0 on every scanline.
  std::vector<uint8_t> raw;
  raw.reserve(static_cast<size_t>(image.height) * (image.width * 3 + 1));
  for (int y = 0; y < image.height; ++y) {
    raw.push_back(0);
    const uint8_t* row = image.pixels.data() + static_cast<size_t>(y) * image.width * 3;
    raw.insert(raw.end(), row, row + image.width * 3);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw IoError("write_png: deflate failed");
  }
  compressed.resize(bound);

  std::vector<uint8_t> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  std::vector<uint8_t> ihdr;
  put_u32_be(ihdr, static_cast<uint32_t>(image.width));
  put_u32_be(ihdr, static_cast<uint32_t>(image.height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", compressed);
  put_chunk(png, "IEND", {});

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write png: " + path.string());
  out.write(reinterpret_cast<const char*>(png.data()),
            static_cast<std::streamsize>(png.size()));
  if (!out) throw IoError("short write on png: " + path.string());
}

std::vector<double> si_error_map(const DepthMap& pred, const DepthMap& ref) {
  if (!pred.same_shape(ref)) {
    throw SizeMismatch("si_error_map: map dimensions differ");
  }

  std::vector<double> logdiff(pred.size(),
                              std::numeric_limits<double>::quiet_NaN());
  double mean = 0.0;
  long n = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred.valid[i] && ref.valid[i] && pred.values[i] > 0.0f &&
        ref.values[i] > 0.0f) {
      logdiff[i] = std::log(static_cast<double>(pred.values[i])) -
                   std::log(static_cast<double>(ref.values[i]));
      mean += logdiff[i];
      ++n;
    }
  }
  if (n == 0) return logdiff;
  mean /= static_cast<double>(n);
  for (double& v : logdiff) {
    if (!std::isnan(v)) v = std::abs(v - mean);
  }
  return logdiff;
}

std::array<uint8_t, 3> colormap_blue_red(double t) {
  // 9 anchors, cool blue to warm red.
  static constexpr uint8_t stops[9][3] = {
      {59, 76, 192},   {98, 130, 234},  {141, 176, 254},
      {184, 208, 249}, {221, 221, 221}, {245, 196, 173},
      {244, 154, 123}, {222, 96, 77},   {180, 4, 38}};
  t = std::clamp(t, 0.0, 1.0);
  const double x = t * 8.0;
  const int lo = std::min(static_cast<int>(x), 7);
  const double w = x - lo;
  std::array<uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<uint8_t>(
        std::lround((1.0 - w) * stops[lo][c] + w * stops[lo + 1][c]));
  }
  return rgb;
}

RgbImage colorize_error_map(const DepthMap& pred, const DepthMap& ref,
                            double max_error) {
  if (max_error <= 0.0) throw InvalidParams("colorize_error_map: max_error <= 0");
  const std::vector<double> err = si_error_map(pred, ref);

  RgbImage image(pred.width, pred.height);
  for (size_t i = 0; i < err.size(); ++i) {
    if (std::isnan(err[i])) continue;  // invalid stays black
    const auto rgb = colormap_blue_red(err[i] / max_error);
    image.pixels[i * 3 + 0] = rgb[0];
    image.pixels[i * 3 + 1] = rgb[1];
    image.pixels[i * 3 + 2] = rgb[2];
  }
  return image;
}

}  // namespace bronchopt
