#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ddnet/imagery.hpp"

namespace ddnet {

/// Binary decision grid, 1 = changed.
struct ChangeMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;

  ChangeMap() = default;
  ChangeMap(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), bits(w * h, fill) {}

  std::size_t size() const noexcept { return bits.size(); }
  std::size_t count_changed() const;
  /// 0 / 255 gray levels.
  Raster to_raster() const;
  /// Gray level >= 128 reads as changed.
  static ChangeMap from_raster(const Raster& raster);

  friend bool operator==(const ChangeMap&, const ChangeMap&) = default;
};

struct MetricsReport {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t oe = 0;  // fp + fn
  double pcc = 0.0;    // percent correct
  double kc = 0.0;     // Cohen's kappa, percent

  std::size_t total() const noexcept { return tp + tn + fp + fn; }

  static MetricsReport from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn);

  /// "key = value" lines.
  std::string to_key_value() const;
  /// "FP FN OE PCC KC" on one line.
  std::string to_line() const;
};

MetricsReport score(const ChangeMap& map, const ChangeMap& truth);

void write_map(const ChangeMap& map, const std::filesystem::path& path);

/// Visual comparison: TP 255, TN 0, FP 170, FN 85.
Raster diff_overlay(const ChangeMap& map, const ChangeMap& truth);

}  // namespace ddnet
