#include "ddnet/imagery.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddnet/errors.hpp"

namespace ddnet {

Raster::Raster(std::size_t w, std::size_t h, std::vector<double> px) : width(w), height(h), pixels(std::move(px)) {
  if (pixels.size() != width * height)
    throw InputError("raster " + std::to_string(width) + "x" + std::to_string(height) + " needs " +
                     std::to_string(width * height) + " pixels, got " + std::to_string(pixels.size()));
}

double Raster::max_value() const {
  return pixels.empty() ? 0.0 : *std::max_element(pixels.begin(), pixels.end());
}

Raster DifferenceImage::to_raster() const {
  Raster out(width, height);
  for (std::size_t i = 0; i < values.size(); ++i) out.pixels[i] = std::round(values[i] * 65535.0);
  return out;
}

void require_same_geometry(const Raster& a, const Raster& b) {
  if (a.width != b.width || a.height != b.height)
    throw InputError("image geometry mismatch: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                     " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
}

DifferenceImage log_ratio(const Raster& i1, const Raster& i2) {
  require_same_geometry(i1, i2);
  DifferenceImage di{i1.width, i1.height, std::vector<double>(i1.size())};
  for (std::size_t i = 0; i < i1.size(); ++i)
    di.values[i] = std::abs(std::log(i1.pixels[i] + 1.0) - std::log(i2.pixels[i] + 1.0));
  const auto [lo, hi] = std::minmax_element(di.values.begin(), di.values.end());
  const double min = *lo, span = *hi - *lo;
  for (double& v : di.values) v = span > 0.0 ? (v - min) / span : 0.0;
  return di;
}

Raster box_mean(const Raster& raster, std::size_t window) {
  if (window % 2 == 0) throw InputError("box_mean window must be odd, got " + std::to_string(window));
  if (window == 1) return raster;
  const long half = static_cast<long>(window / 2);
  const long w = static_cast<long>(raster.width), h = static_cast<long>(raster.height);
  Raster out(raster.width, raster.height);
  const double norm = 1.0 / static_cast<double>(window * window);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double s = 0.0;
      for (long dy = -half; dy <= half; ++dy) {
        const long yy = std::clamp(y + dy, 0L, h - 1);
        for (long dx = -half; dx <= half; ++dx) s += raster.pixels[yy * w + std::clamp(x + dx, 0L, w - 1)];
      }
      out.pixels[y * w + x] = s * norm;
    }
  }
  return out;
}

DifferenceImage smoothed_log_ratio(const Raster& i1, const Raster& i2, std::size_t window) {
  require_same_geometry(i1, i2);
  return log_ratio(box_mean(i1, window), box_mean(i2, window));
}

PatchExtractor::PatchExtractor(const Raster& i1, const Raster& i2) : i1_(&i1), i2_(&i2) {
  require_same_geometry(i1, i2);
  max1_ = i1.max_value();
  max2_ = i2.max_value();
}

Patch PatchExtractor::extract(Pixel center, std::size_t r) const {
  if (r % 2 == 0) throw InputError("patch size must be odd, got " + std::to_string(r));
  const Raster& a = *i1_;
  const Raster& b = *i2_;
  if (center.row >= a.height || center.col >= a.width)
    throw InputError("patch center (" + std::to_string(center.row) + ", " + std::to_string(center.col) +
                     ") lies outside the " + std::to_string(a.width) + "x" + std::to_string(a.height) + " raster");
  const long half = static_cast<long>(r / 2);
  const long h = static_cast<long>(a.height), w = static_cast<long>(a.width);
  Patch patch{center, r, Tensor({2, r, r})};
  for (long i = 0; i < static_cast<long>(r); ++i) {
    const long y = std::clamp(static_cast<long>(center.row) + i - half, 0L, h - 1);
    for (long j = 0; j < static_cast<long>(r); ++j) {
      const long x = std::clamp(static_cast<long>(center.col) + j - half, 0L, w - 1);
      patch.data.at(0, i, j) = max1_ > 0.0 ? a.pixels[y * w + x] / max1_ : 0.0;
      patch.data.at(1, i, j) = max2_ > 0.0 ? b.pixels[y * w + x] / max2_ : 0.0;
    }
  }
  return patch;
}

Patch extract_patch(const Raster& i1, const Raster& i2, Pixel center, std::size_t r) {
  return PatchExtractor(i1, i2).extract(center, r);
}

}  // namespace ddnet
