#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "ddnet/errors.hpp"
#include "ddnet/imagery.hpp"
#include "ddnet/pgm.hpp"
#include "ddnet/rng.hpp"

using namespace ddnet;

namespace {

std::vector<unsigned char> bytes_of(const std::string& header, std::vector<unsigned char> payload) {
  std::vector<unsigned char> out(header.begin(), header.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Raster random_raster(std::size_t w, std::size_t h, Rng& rng, double hi) {
  Raster r(w, h);
  for (double& p : r.pixels) p = std::floor(rng.uniform(0.0, hi + 1.0));
  return r;
}

}  // namespace

TEST_CASE("pgm decode of a 2x2 8-bit file") {
  const Raster r = decode_pgm(bytes_of("P5\n2 2\n255\n", {0, 128, 255, 7}));
  CHECK(r.width == 2);
  CHECK(r.height == 2);
  CHECK(r.pixels == std::vector<double>{0, 128, 255, 7});
}

TEST_CASE("pgm header comments and 16-bit big-endian samples") {
  const Raster r = decode_pgm(bytes_of("P5 # c\n# line\n1 2 65535\n", {0x01, 0x02, 0xff, 0xfe}));
  CHECK(r.pixels == std::vector<double>{258, 65534});
}

TEST_CASE("pgm round trip of a random 16-bit raster") {
  Rng rng(17);
  const Raster r = random_raster(13, 7, rng, 65535);
  const auto path = std::filesystem::temp_directory_path() / "ddnet_test_roundtrip.pgm";
  save_pgm(r, path);
  CHECK(load_pgm(path) == r);
  std::filesystem::remove(path);
  const Raster small = random_raster(5, 4, rng, 255);
  CHECK(decode_pgm(encode_pgm(small)) == small);
}

TEST_CASE("pgm malformed inputs are parse errors with offsets") {
  SUBCASE("ascii P2 is unsupported") {
    try {
      decode_pgm(bytes_of("P2\n2 1\n255\n0 1\n", {}));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("unsupported") != std::string::npos);
    }
  }
  SUBCASE("truncated payload") {
    try {
      decode_pgm(bytes_of("P5\n2 2\n255\n", {1, 2, 3}));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() >= 11);
    }
  }
  CHECK_THROWS_AS(decode_pgm(bytes_of("P5\n2 x\n255\n", {1, 2})), ParseError);
  CHECK_THROWS_AS(decode_pgm(bytes_of("P5\n1 1\n0\n", {0})), ParseError);
  CHECK_THROWS_AS(decode_pgm(bytes_of("P5\n1 1\n70000\n", {0, 0})), ParseError);
  CHECK_THROWS_AS(decode_pgm(bytes_of("P5\n1 1\n100\n", {200})), ParseError);
  CHECK_THROWS_AS(load_pgm("/nonexistent/dir/x.pgm"), InputError);
}

TEST_CASE("log_ratio examples") {
  SUBCASE("identical images give zeros") {
    Rng rng(1);
    const Raster a = random_raster(6, 5, rng, 255);
    const DifferenceImage di = log_ratio(a, a);
    for (double v : di.values) CHECK(v == 0.0);
  }
  SUBCASE("ln(1) and ln(e)") {
    const Raster a(2, 1, {0.0, 0.0});
    const Raster b(2, 1, {0.0, std::exp(1.0) - 1.0});
    const DifferenceImage di = log_ratio(a, b);
    CHECK(di.values[0] == 0.0);
    CHECK(std::abs(di.values[1] - 1.0) < 1e-15);
  }
  SUBCASE("closed-form oracle on a random pair") {
    Rng rng(2);
    const Raster a = random_raster(8, 8, rng, 1000), b = random_raster(8, 8, rng, 1000);
    std::vector<double> raw(64);
    for (std::size_t i = 0; i < 64; ++i) raw[i] = std::abs(std::log(a.pixels[i] + 1.0) - std::log(b.pixels[i] + 1.0));
    const double lo = *std::min_element(raw.begin(), raw.end());
    const double hi = *std::max_element(raw.begin(), raw.end());
    const DifferenceImage di = log_ratio(a, b);
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(di.values[i] - (raw[i] - lo) / (hi - lo)) < 1e-12);
  }
  CHECK_THROWS_AS(log_ratio(Raster(2, 3), Raster(3, 2)), InputError);
}

TEST_CASE("log_ratio properties") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Raster a = random_raster(9, 7, rng, 500), b = random_raster(9, 7, rng, 500);
    const DifferenceImage ab = log_ratio(a, b), ba = log_ratio(b, a);
    CHECK(ab.values == ba.values);
    for (std::size_t i = 0; i < ab.values.size(); ++i) {
      CHECK(ab.values[i] >= 0.0);
      CHECK(ab.values[i] <= 1.0);
      const double ri = std::abs(std::log1p(a.pixels[i]) - std::log1p(b.pixels[i]));
      for (std::size_t j = 0; j < ab.values.size(); ++j) {
        const double rj = std::abs(std::log1p(a.pixels[j]) - std::log1p(b.pixels[j]));
        if (ri < rj - 1e-12) CHECK(ab.values[i] <= ab.values[j]);
      }
    }
  }
}

TEST_CASE("box_mean and smoothed log-ratio") {
  const Raster r(3, 1, {0.0, 3.0, 6.0});
  const Raster m = box_mean(r, 3);
  // Edge replication: row pads with itself, columns with 0 and 6.
  CHECK(std::abs(m.pixels[0] - 1.0) < 1e-12);
  CHECK(std::abs(m.pixels[1] - 3.0) < 1e-12);
  CHECK(std::abs(m.pixels[2] - 5.0) < 1e-12);
  CHECK(box_mean(r, 1) == r);
  CHECK_THROWS_AS(box_mean(r, 2), InputError);
  Rng rng(4);
  const Raster a = random_raster(6, 6, rng, 100), b = random_raster(6, 6, rng, 100);
  CHECK(smoothed_log_ratio(a, b, 1).values == log_ratio(a, b).values);
}

TEST_CASE("extract_patch examples") {
  SUBCASE("constant image scales to one") {
    const Raster c(5, 4, 37.0);
    const Patch p = extract_patch(c, c, {2, 3}, 5);
    for (double v : p.data.values()) CHECK(v == 1.0);
  }
  SUBCASE("corner uses edge replication") {
    const Raster a(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Raster b(3, 3, 0.0);
    const Patch p = extract_patch(a, b, {0, 0}, 3);
    const double expect[3][3] = {{1, 1, 2}, {1, 1, 2}, {4, 4, 5}};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(p.data.at(0, i, j) == doctest::Approx(expect[i][j] / 9.0).epsilon(1e-15));
        CHECK(p.data.at(1, i, j) == 0.0);
      }
  }
  SUBCASE("interior slice oracle") {
    Rng rng(5);
    const Raster a = random_raster(12, 10, rng, 900), b = random_raster(12, 10, rng, 900);
    const Pixel c{5, 6};
    const std::size_t r = 7;
    const Patch p = extract_patch(a, b, c, r);
    CHECK(p.center == c);
    CHECK(p.data.shape() == Shape{2, r, r});
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) {
        CHECK(p.data.at(0, i, j) == a(c.row - 3 + i, c.col - 3 + j) / a.max_value());
        CHECK(p.data.at(1, i, j) == b(c.row - 3 + i, c.col - 3 + j) / b.max_value());
      }
    const Patch one = extract_patch(a, b, c, 1);
    CHECK(one.data[0] == a(5, 6) / a.max_value());
    CHECK(one.data[1] == b(5, 6) / b.max_value());
  }
  SUBCASE("zero image gives zeros") {
    const Patch p = extract_patch(Raster(4, 4, 0.0), Raster(4, 4, 2.0), {1, 1}, 3);
    for (std::size_t k = 0; k < 9; ++k) CHECK(p.data[k] == 0.0);
  }
  CHECK_THROWS_AS(extract_patch(Raster(4, 4), Raster(4, 4), {4, 0}, 3), InputError);
  CHECK_THROWS(extract_patch(Raster(4, 4), Raster(4, 4), {1, 1}, 4));
}
