#include "ddnet/frequency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "ddnet/errors.hpp"

namespace ddnet {

namespace {

using Basis = std::array<std::array<double, kDctSize>, kDctSize>;

// basis[u][x] = alpha(u) cos((2x + 1) u pi / 16)
const Basis& dct_basis() {
  static const Basis basis = [] {
    Basis b{};
    const double n = static_cast<double>(kDctSize);
    for (std::size_t u = 0; u < kDctSize; ++u) {
      const double alpha = std::sqrt((u == 0 ? 1.0 : 2.0) / n);
      for (std::size_t x = 0; x < kDctSize; ++x)
        b[u][x] = alpha * std::cos((2.0 * static_cast<double>(x) + 1.0) * static_cast<double>(u) * std::numbers::pi /
                                   (2.0 * n));
    }
    return b;
  }();
  return basis;
}

}  // namespace

Tensor bilinear_resize(const Tensor& patch) {
  if (patch.rank() != 3) throw DimensionError("bilinear_resize: patch must be [C x r x r], got " + shape_string(patch.shape()));
  const std::size_t channels = patch.dim(0), r = patch.dim(1);
  if (patch.dim(2) != r) throw DimensionError("bilinear_resize: axes 1 and 2 must be equal");
  if (r < 2) throw DimensionError("bilinear_resize: patch side must be at least 2, got " + std::to_string(r));

  const double ratio = static_cast<double>(r) / static_cast<double>(kDctSize);
  const double last = static_cast<double>(r - 1);
  std::array<std::size_t, kDctSize> i0{}, i1{};
  std::array<double, kDctSize> frac{};
  for (std::size_t d = 0; d < kDctSize; ++d) {
    const double src = std::clamp((static_cast<double>(d) + 0.5) * ratio - 0.5, 0.0, last);
    i0[d] = static_cast<std::size_t>(std::floor(src));
    i1[d] = std::min(i0[d] + 1, r - 1);
    frac[d] = src - static_cast<double>(i0[d]);
  }

  Tensor out({channels, kDctSize, kDctSize});
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < kDctSize; ++y) {
      const double fy = frac[y];
      for (std::size_t x = 0; x < kDctSize; ++x) {
        const double fx = frac[x];
        const double top = (1.0 - fx) * patch.at(c, i0[y], i0[x]) + fx * patch.at(c, i0[y], i1[x]);
        const double bottom = (1.0 - fx) * patch.at(c, i1[y], i0[x]) + fx * patch.at(c, i1[y], i1[x]);
        out.at(c, y, x) = (1.0 - fy) * top + fy * bottom;
      }
    }
  return out;
}

Tensor dct2_8x8(const Tensor& block) {
  if (block.rank() != 2 || block.dim(0) != kDctSize || block.dim(1) != kDctSize)
    throw DimensionError("dct2_8x8: block must be [8 x 8], got " + shape_string(block.shape()));
  const Basis& b = dct_basis();
  // Separable: rows first (tmp = f B^T), then columns (C = B tmp).
  std::array<std::array<double, kDctSize>, kDctSize> tmp{};
  for (std::size_t x = 0; x < kDctSize; ++x)
    for (std::size_t v = 0; v < kDctSize; ++v) {
      double s = 0.0;
      for (std::size_t y = 0; y < kDctSize; ++y) s += block.at(x, y) * b[v][y];
      tmp[x][v] = s;
    }
  Tensor out({kDctSize, kDctSize});
  for (std::size_t u = 0; u < kDctSize; ++u)
    for (std::size_t v = 0; v < kDctSize; ++v) {
      double s = 0.0;
      for (std::size_t x = 0; x < kDctSize; ++x) s += b[u][x] * tmp[x][v];
      out.at(u, v) = s;
    }
  return out;
}

Tensor patch_to_dct(const Tensor& patch) {
  const Tensor resized = bilinear_resize(patch);
  const std::size_t channels = resized.dim(0);
  const std::size_t plane = kDctSize * kDctSize;
  Tensor out({channels * plane});
  for (std::size_t c = 0; c < channels; ++c) {
    const auto first = resized.values().begin() + static_cast<long>(c * plane);
    const Tensor coeffs = dct2_8x8(Tensor({kDctSize, kDctSize}, std::vector<double>(first, first + static_cast<long>(plane))));
    std::copy(coeffs.values().begin(), coeffs.values().end(), out.data().begin() + static_cast<long>(c * plane));
  }
  return out;
}

}  // namespace ddnet
