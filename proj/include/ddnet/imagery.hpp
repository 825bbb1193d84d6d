#pragma once

#include <cstddef>
#include <vector>

#include "ddnet/tensor.hpp"

namespace ddnet {

/// Row-major grid of non-negative intensities.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  Raster() = default;
  Raster(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), pixels(w * h, fill) {}
  Raster(std::size_t w, std::size_t h, std::vector<double> px);

  std::size_t size() const noexcept { return pixels.size(); }
  double& operator()(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
  double operator()(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
  double max_value() const;

  friend bool operator==(const Raster&, const Raster&) = default;
};

/// Normalized per-pixel dissimilarity in [0, 1].
struct DifferenceImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  /// 16-bit quantization for inspection (value 1 -> 65535).
  Raster to_raster() const;
};

struct Pixel {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Two co-located r x r windows, channel 0 from the first acquisition.
struct Patch {
  Pixel center;
  std::size_t r = 0;
  Tensor data;  // [2 x r x r]
};

/// Throws InputError unless both rasters have the same width and height.
void require_same_geometry(const Raster& a, const Raster& b);

/// |ln(a+1) - ln(b+1)| per pixel, min-max normalized to [0, 1].
/// A constant raw difference normalizes to all zeros.
DifferenceImage log_ratio(const Raster& i1, const Raster& i2);

/// Mean over a window x window neighborhood with edge replication
/// (multilook averaging). Window must be odd; 1 returns the input unchanged.
Raster box_mean(const Raster& raster, std::size_t window);

/// Log-ratio of the box-averaged intensities. With window == 1 this is
/// exactly log_ratio.
DifferenceImage smoothed_log_ratio(const Raster& i1, const Raster& i2, std::size_t window);

/// Cuts patches from a fixed image pair. Each channel is divided by the
/// maximum of its whole image (a zero maximum yields zeros); positions
/// outside the raster replicate the nearest edge pixel.
class PatchExtractor {
 public:
  PatchExtractor(const Raster& i1, const Raster& i2);

  Patch extract(Pixel center, std::size_t r) const;
  const Raster& first() const noexcept { return *i1_; }
  const Raster& second() const noexcept { return *i2_; }

 private:
  const Raster* i1_;
  const Raster* i2_;
  double max1_;
  double max2_;
};

/// One-shot form of PatchExtractor::extract. r must be odd.
Patch extract_patch(const Raster& i1, const Raster& i2, Pixel center, std::size_t r);

}  // namespace ddnet
