#pragma once

#include "ddnet/tensor.hpp"

namespace ddnet {

inline constexpr std::size_t kDctSize = 8;
inline constexpr std::size_t kDctLength = 2 * kDctSize * kDctSize;  // 128

/// Bilinear resize of every channel of a [C x r x r] tensor to [C x 8 x 8].
/// Sample centers are aligned (src = (dst + 0.5) * r / 8 - 0.5, clamped to
/// [0, r - 1]), so r == 8 is the identity and constants are preserved.
Tensor bilinear_resize(const Tensor& patch);

/// Orthonormal type-II 2-D DCT of an [8 x 8] block. Axis 0 is u, axis 1 is v.
Tensor dct2_8x8(const Tensor& block);

/// Resize, transform each channel and concatenate row-major coefficients,
/// channel 0 first. Always returns a [128] tensor for a 2-channel patch.
Tensor patch_to_dct(const Tensor& patch);

}  // namespace ddnet
