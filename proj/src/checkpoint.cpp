#include "ddnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "ddnet/errors.hpp"

namespace ddnet {

namespace {

constexpr char kMagic[8] = {'D', 'D', 'N', 'E', 'T', 'C', 'K', 'P'};
constexpr std::size_t kHeaderSize = 8 + 4 * 4 + 8;

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(value >> (8 * i)));
}

template <typename T>
T get_le(std::span<const unsigned char> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[offset + i]) << (8 * i);
  return value;
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const ModelParams& params) {
  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.arch.r));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.arch.mode));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.arch.mask_width));
  put_le<std::uint64_t>(out, params.parameter_count());
  for (const Tensor* t : params.tensors())
    for (double v : t->data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

ModelParams decode_checkpoint(std::span<const unsigned char> bytes) {
  if (bytes.size() < kHeaderSize) throw ParseError("checkpoint shorter than its header", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw ParseError("not a checkpoint (bad magic)", 0);
  const auto version = get_le<std::uint32_t>(bytes, 8);
  if (version != kCheckpointVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 8);
  Architecture arch;
  arch.r = get_le<std::uint32_t>(bytes, 12);
  const auto mode = get_le<std::uint32_t>(bytes, 16);
  if (mode > static_cast<std::uint32_t>(Mode::PlainCnn)) throw ParseError("unknown mode " + std::to_string(mode), 16);
  arch.mode = static_cast<Mode>(mode);
  arch.mask_width = get_le<std::uint32_t>(bytes, 20);
  const auto count = get_le<std::uint64_t>(bytes, 24);

  ModelParams params = [&] {
    try {
      return zero_params(arch);
    } catch (const InputError& e) {
      throw ParseError(std::string("invalid architecture in checkpoint: ") + e.what(), 12);
    }
  }();
  if (count != params.parameter_count())
    throw ParseError("checkpoint declares " + std::to_string(count) + " values but the architecture needs " +
                         std::to_string(params.parameter_count()),
                     24);
  if (bytes.size() != kHeaderSize + 8 * count)
    throw ParseError("checkpoint length " + std::to_string(bytes.size()) + " does not match " +
                         std::to_string(kHeaderSize + 8 * count) + " expected bytes",
                     std::min<std::size_t>(bytes.size(), kHeaderSize + 8 * count));
  std::size_t offset = kHeaderSize;
  for (Tensor* t : params.tensors())
    for (double& v : t->data()) {
      v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
      offset += 8;
    }
  return params;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw IoError("write failed for " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.offset());
  }
}

}  // namespace ddnet
