#pragma once

#include <cstdint>
#include <vector>

#include "ddnet/evalmap.hpp"
#include "ddnet/imagery.hpp"
#include "ddnet/rng.hpp"

namespace ddnet {

/// Axis-aligned rectangle or disk painted with a reflectivity level.
struct Region {
  enum class Kind { Rect, Disk };
  Kind kind = Kind::Rect;
  // Rect: top-left corner and size. Disk: center and radius.
  long row = 0, col = 0;
  long height = 0, width = 0;
  long radius = 0;
  double level = 0.0;

  static Region rect(long row, long col, long height, long width, double level);
  static Region disk(long row, long col, long radius, double level);
  bool contains(long r, long c) const;
};

struct SceneSpec {
  std::size_t width = 128;
  std::size_t height = 128;
  double background_level = 30.0;
  double object_level = 120.0;
  /// Painted at object_level into both acquisitions (level field ignored).
  std::vector<Region> static_objects;
  /// Painted, in order, into the second acquisition only.
  std::vector<Region> changes;
  unsigned looks = 4;
  std::uint64_t seed = 42;
  /// Round intensities to integers so the scene survives a PGM round trip.
  bool quantize = true;

  void validate() const;
  /// 128x128, two static objects, one appearing and one vanishing rectangle
  /// plus an appearing disk (about 8% changed pixels), 4 looks.
  static SceneSpec default_scene(std::uint64_t seed = 42);
};

struct Scene {
  Raster i1, i2;
  ChangeMap truth;
  Raster reflectivity1, reflectivity2;
};

/// Mean of `looks` unit-mean exponential draws: gamma speckle with mean 1 and
/// variance 1 / looks.
double speckle(Rng& rng, unsigned looks);

/// Multiplicative speckle on both reflectivity maps, independent per image.
/// truth marks pixels whose reflectivity differs between acquisitions.
Scene generate(const SceneSpec& spec);

}  // namespace ddnet
