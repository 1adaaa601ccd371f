#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "bronchopt/depth_map.hpp"

namespace bronchopt {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major RGB

  RgbImage() = default;
  RgbImage(int w, int h)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 0) {}
};

/// Deterministic PNG encoder (8-bit RGB, zlib level fixed); byte-identical
/// output for identical input on the same platform.
void write_png(const RgbImage& image, const std::filesystem::path& path);

/// Scale-invariant depth discrepancy per pixel:
/// |log(pred) - log(ref) - mean(log(pred) - log(ref))|, mean taken over the
/// jointly valid mask. Invalid pixels are NaN.
std::vector<double> si_error_map(const DepthMap& pred, const DepthMap& ref);

/// Renders an SI error map through the fixed blue-to-red lookup table.
/// Errors are clamped at `max_error` log units; invalid pixels are black.
RgbImage colorize_error_map(const DepthMap& pred, const DepthMap& ref,
                            double max_error = 0.5);

/// The 9-stop blue-to-red colormap (cool = low error); t in [0, 1].
std::array<uint8_t, 3> colormap_blue_red(double t);

}  // namespace bronchopt
