#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ddnet/imagery.hpp"

namespace ddnet {

/// Reads a binary (P5) PGM. Samples keep their stored integer values; no
/// rescaling by maxval. 16-bit samples are big-endian as the format requires.
Raster load_pgm(const std::filesystem::path& path);
Raster decode_pgm(std::span<const unsigned char> bytes);

/// Writes a binary PGM with maxval 255 when every sample fits in a byte and
/// 65535 otherwise. Samples are rounded to the nearest integer and must lie
/// in [0, 65535].
void save_pgm(const Raster& raster, const std::filesystem::path& path);
std::vector<unsigned char> encode_pgm(const Raster& raster);

}  // namespace ddnet
