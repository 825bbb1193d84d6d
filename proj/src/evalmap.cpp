#include "ddnet/evalmap.hpp"

#include <algorithm>
#include <cstdio>

#include "ddnet/errors.hpp"
#include "ddnet/pgm.hpp"

namespace ddnet {

std::size_t ChangeMap::count_changed() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

Raster ChangeMap::to_raster() const {
  Raster out(width, height);
  for (std::size_t i = 0; i < bits.size(); ++i) out.pixels[i] = bits[i] ? 255.0 : 0.0;
  return out;
}

ChangeMap ChangeMap::from_raster(const Raster& raster) {
  ChangeMap map(raster.width, raster.height);
  for (std::size_t i = 0; i < raster.size(); ++i) map.bits[i] = raster.pixels[i] >= 128.0 ? 1 : 0;
  return map;
}

MetricsReport MetricsReport::from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  MetricsReport m;
  m.tp = tp;
  m.tn = tn;
  m.fp = fp;
  m.fn = fn;
  m.oe = fp + fn;
  const double n = static_cast<double>(m.total());
  if (n == 0.0) return m;
  const double po = static_cast<double>(tp + tn) / n;
  const double pre = (static_cast<double>(tp + fp) * static_cast<double>(tp + fn) +
                      static_cast<double>(fn + tn) * static_cast<double>(fp + tn)) /
                     (n * n);
  m.pcc = 100.0 * po;
  // A single-class map and truth agree by chance alone; kappa is undefined there.
  m.kc = pre == 1.0 ? 0.0 : 100.0 * (po - pre) / (1.0 - pre);
  return m;
}

std::string MetricsReport::to_key_value() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "TP = %zu\nTN = %zu\nFP = %zu\nFN = %zu\nOE = %zu\nPCC = %.4f\nKC = %.4f\n", tp, tn,
                fp, fn, oe, pcc, kc);
  return buf;
}

std::string MetricsReport::to_line() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu %zu %zu %.2f %.2f", fp, fn, oe, pcc, kc);
  return buf;
}

MetricsReport score(const ChangeMap& map, const ChangeMap& truth) {
  if (map.width != truth.width || map.height != truth.height)
    throw InputError("change map is " + std::to_string(map.width) + "x" + std::to_string(map.height) +
                     " but ground truth is " + std::to_string(truth.width) + "x" + std::to_string(truth.height));
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map.bits[i]) (truth.bits[i] ? tp : fp)++;
    else (truth.bits[i] ? fn : tn)++;
  }
  return MetricsReport::from_counts(tp, tn, fp, fn);
}

void write_map(const ChangeMap& map, const std::filesystem::path& path) { save_pgm(map.to_raster(), path); }

Raster diff_overlay(const ChangeMap& map, const ChangeMap& truth) {
  if (map.width != truth.width || map.height != truth.height)
    throw InputError("diff_overlay: change map and ground truth differ in geometry");
  Raster out(map.width, map.height);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const bool p = map.bits[i], t = truth.bits[i];
    out.pixels[i] = p ? (t ? 255.0 : 170.0) : (t ? 85.0 : 0.0);
  }
  return out;
}

}  // namespace ddnet
