#include "ddnet/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "ddnet/errors.hpp"

namespace ddnet {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000UL) throw ParseError(std::string("PGM ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("PGM header: expected ") + what, start);
    return value;
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance() noexcept { ++pos_; }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Raster decode_pgm(std::span<const unsigned char> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("not a PGM file (bad magic)", 0);
  if (bytes[1] != '5')
    throw ParseError(std::string("unsupported PNM format P") + static_cast<char>(bytes[1]) +
                         ", only binary P5 is accepted",
                     1);
  HeaderReader in(bytes.subspan(2));
  const unsigned long width = in.number("width");
  const unsigned long height = in.number("height");
  const unsigned long maxval = in.number("maxval");
  const std::size_t maxval_end = in.pos() + 2;
  if (width == 0 || height == 0) throw ParseError("PGM dimensions must be positive", 2);
  if (maxval == 0 || maxval > 65535) throw ParseError("PGM maxval must be in [1, 65535]", maxval_end);
  if (maxval_end >= bytes.size() || !std::isspace(bytes[maxval_end]))
    throw ParseError("PGM header: expected whitespace after maxval", maxval_end);
  const std::size_t offset = maxval_end + 1;
  const std::size_t depth = maxval < 256 ? 1 : 2;
  const std::size_t need = width * height * depth;
  if (bytes.size() - offset < need)
    throw ParseError("truncated PGM payload: need " + std::to_string(need) + " bytes, have " +
                         std::to_string(bytes.size() - offset),
                     bytes.size());

  Raster raster(width, height);
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const unsigned long v =
        depth == 1 ? bytes[offset + i] : (static_cast<unsigned long>(bytes[offset + 2 * i]) << 8) | bytes[offset + 2 * i + 1];
    if (v > maxval) throw ParseError("PGM sample exceeds maxval", offset + depth * i);
    raster.pixels[i] = static_cast<double>(v);
  }
  return raster;
}

Raster load_pgm(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.offset());
  }
}

std::vector<unsigned char> encode_pgm(const Raster& raster) {
  if (raster.width == 0 || raster.height == 0 || raster.size() != raster.width * raster.height)
    throw ContractError("encode_pgm: raster geometry is inconsistent");
  std::vector<unsigned long> samples(raster.size());
  unsigned long peak = 0;
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double v = std::round(raster.pixels[i]);
    if (!(v >= 0.0 && v <= 65535.0)) throw ContractError("encode_pgm: sample outside [0, 65535]");
    samples[i] = static_cast<unsigned long>(v);
    peak = std::max(peak, samples[i]);
  }
  const unsigned long maxval = peak <= 255 ? 255 : 65535;
  const std::string header =
      "P5\n" + std::to_string(raster.width) + " " + std::to_string(raster.height) + "\n" + std::to_string(maxval) + "\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + samples.size() * (maxval == 255 ? 1 : 2));
  for (unsigned long s : samples) {
    if (maxval == 255) {
      out.push_back(static_cast<unsigned char>(s));
    } else {
      out.push_back(static_cast<unsigned char>(s >> 8));
      out.push_back(static_cast<unsigned char>(s & 0xff));
    }
  }
  return out;
}

void save_pgm(const Raster& raster, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(raster);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw IoError("write failed for " + path.string());
}

}  // namespace ddnet
