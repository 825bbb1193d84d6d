#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ddnet/network.hpp"

namespace ddnet {

// Layout, all integers little-endian:
//   8 bytes  magic "DDNETCKP"
//   u32      format version (1)
//   u32      r
//   u32      mode (Mode enumerator value)
//   u32      mask width
//   u64      number of parameter values
//   f64[]    values in ModelParams::tensors() order

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<unsigned char> encode_checkpoint(const ModelParams& params);
ModelParams decode_checkpoint(std::span<const unsigned char> bytes);
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace ddnet
