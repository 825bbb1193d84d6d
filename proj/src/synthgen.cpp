#include "ddnet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddnet/errors.hpp"

namespace ddnet {

Region Region::rect(long row, long col, long height, long width, double level) {
  Region r;
  r.kind = Kind::Rect;
  r.row = row;
  r.col = col;
  r.height = height;
  r.width = width;
  r.level = level;
  return r;
}

Region Region::disk(long row, long col, long radius, double level) {
  Region r;
  r.kind = Kind::Disk;
  r.row = row;
  r.col = col;
  r.radius = radius;
  r.level = level;
  return r;
}

bool Region::contains(long r, long c) const {
  if (kind == Kind::Rect) return r >= row && r < row + height && c >= col && c < col + width;
  const long dr = r - row, dc = c - col;
  return dr * dr + dc * dc <= radius * radius;
}

void SceneSpec::validate() const {
  if (width == 0 || height == 0) throw InputError("scene dimensions must be positive");
  if (!(background_level > 0.0) || !(object_level > 0.0)) throw InputError("scene levels must be positive");
  if (looks == 0) throw InputError("number of looks must be positive");
  const long w = static_cast<long>(width), h = static_cast<long>(height);
  auto check = [&](const Region& s, bool needs_level) {
    bool inside;
    if (s.kind == Region::Kind::Rect)
      inside = s.height > 0 && s.width > 0 && s.row >= 0 && s.col >= 0 && s.row + s.height <= h && s.col + s.width <= w;
    else
      inside = s.radius >= 0 && s.row - s.radius >= 0 && s.col - s.radius >= 0 && s.row + s.radius < h &&
               s.col + s.radius < w;
    if (!inside) throw InputError("scene region lies outside the " + std::to_string(width) + "x" + std::to_string(height) + " frame");
    if (needs_level && !(s.level > 0.0)) throw InputError("change region level must be positive");
  };
  for (const Region& s : static_objects) check(s, false);
  for (const Region& s : changes) check(s, true);
}

SceneSpec SceneSpec::default_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.static_objects = {Region::rect(12, 80, 28, 36, 0.0), Region::rect(90, 84, 28, 32, 0.0)};
  spec.changes = {
      Region::rect(20, 16, 24, 32, spec.object_level),     // new object
      Region::rect(96, 90, 16, 20, spec.background_level),  // part of a static object removed
      Region::disk(88, 40, 8, spec.object_level),           // new object
  };
  return spec;
}

double speckle(Rng& rng, unsigned looks) {
  double s = 0.0;
  for (unsigned k = 0; k < looks; ++k) s += rng.exponential();
  return s / static_cast<double>(looks);
}

Scene generate(const SceneSpec& spec) {
  spec.validate();
  Scene scene;
  scene.reflectivity1 = Raster(spec.width, spec.height, spec.background_level);
  for (std::size_t y = 0; y < spec.height; ++y)
    for (std::size_t x = 0; x < spec.width; ++x)
      for (const Region& s : spec.static_objects)
        if (s.contains(static_cast<long>(y), static_cast<long>(x))) scene.reflectivity1(y, x) = spec.object_level;
  scene.reflectivity2 = scene.reflectivity1;
  for (const Region& s : spec.changes)
    for (std::size_t y = 0; y < spec.height; ++y)
      for (std::size_t x = 0; x < spec.width; ++x)
        if (s.contains(static_cast<long>(y), static_cast<long>(x))) scene.reflectivity2(y, x) = s.level;

  const Rng root(spec.seed);
  auto observe = [&](const Raster& reflectivity, Rng rng) {
    Raster out(spec.width, spec.height);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double v = reflectivity.pixels[i] * speckle(rng, spec.looks);
      out.pixels[i] = spec.quantize ? std::min(std::round(v), 65535.0) : v;
    }
    return out;
  };
  scene.i1 = observe(scene.reflectivity1, root.derive("speckle-1"));
  scene.i2 = observe(scene.reflectivity2, root.derive("speckle-2"));

  scene.truth = ChangeMap(spec.width, spec.height);
  for (std::size_t i = 0; i < scene.truth.size(); ++i)
    scene.truth.bits[i] = scene.reflectivity1.pixels[i] != scene.reflectivity2.pixels[i] ? 1 : 0;
  return scene;
}

}  // namespace ddnet
