#include "ddnet/preclassify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ddnet/errors.hpp"

namespace ddnet {

std::size_t FcmResult::hard_label(std::size_t point) const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < clusters; ++k)
    if (membership(point, k) > membership(point, best)) best = k;
  return best;
}

std::vector<double> fcm_memberships(std::span<const double> values, std::span<const double> centers,
                                    double fuzzifier) {
  const std::size_t c = centers.size();
  const double power = 2.0 / (fuzzifier - 1.0);
  std::vector<double> u(values.size() * c, 0.0);
  std::vector<double> dist(c);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double* row = &u[i * c];
    std::size_t zero_at = c;
    for (std::size_t k = 0; k < c; ++k) {
      dist[k] = std::abs(values[i] - centers[k]);
      if (dist[k] == 0.0 && zero_at == c) zero_at = k;
    }
    if (zero_at != c) {
      row[zero_at] = 1.0;
      continue;
    }
    for (std::size_t k = 0; k < c; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        const double ratio = dist[k] / dist[j];
        s += power == 2.0 ? ratio * ratio : std::pow(ratio, power);
      }
      row[k] = 1.0 / s;
    }
  }
  return u;
}

namespace {

double pow_m(double u, double m) { return m == 2.0 ? u * u : std::pow(u, m); }

std::vector<double> initial_centers(std::span<const double> values, std::size_t c) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n1 = static_cast<double>(sorted.size() - 1);
  std::vector<double> centers(c);
  for (std::size_t k = 0; k < c; ++k) {
    const double pos = (static_cast<double>(k) + 0.5) / static_cast<double>(c) * n1;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    centers[k] = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }
  // Heavily tied data can put two quantiles on one value; FCM cannot split
  // identical centers, so fall back to evenly spaced points over the range.
  if (std::adjacent_find(centers.begin(), centers.end(), std::greater_equal<>()) != centers.end()) {
    const double lo = sorted.front(), span = sorted.back() - sorted.front();
    for (std::size_t k = 0; k < c; ++k)
      centers[k] = lo + span * (static_cast<double>(k) + 0.5) / static_cast<double>(c);
  }
  return centers;
}

}  // namespace

std::vector<double> fcm_centers(std::span<const double> values, std::span<const double> memberships,
                                std::size_t clusters, double fuzzifier) {
  std::vector<double> num(clusters, 0.0), den(clusters, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t k = 0; k < clusters; ++k) {
      const double w = pow_m(memberships[i * clusters + k], fuzzifier);
      num[k] += w * values[i];
      den[k] += w;
    }
  }
  std::vector<double> centers(clusters);
  for (std::size_t k = 0; k < clusters; ++k) centers[k] = den[k] > 0.0 ? num[k] / den[k] : 0.0;
  return centers;
}

double fcm_objective(std::span<const double> values, std::span<const double> memberships,
                     std::span<const double> centers, double fuzzifier) {
  const std::size_t c = centers.size();
  double j = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t k = 0; k < c; ++k) {
      const double d = values[i] - centers[k];
      j += pow_m(memberships[i * c + k], fuzzifier) * d * d;
    }
  return j;
}

FcmResult fcm(std::span<const double> values, const FcmOptions& options) {
  const std::size_t c = options.clusters;
  const double m = options.fuzzifier;
  if (c < 2) throw ContractError("fcm needs at least 2 clusters");
  if (!(m > 1.0)) throw ContractError("fcm fuzzifier must exceed 1");
  if (values.empty()) throw ContractError("fcm needs at least one value");

  FcmResult result;
  result.clusters = c;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    result.degenerate = true;
    result.converged = true;
    result.centers.assign(c, *lo);
    result.memberships.assign(values.size() * c, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) result.memberships[i * c] = 1.0;
    result.objective_trace.push_back(0.0);
    return result;
  }

  std::vector<double> centers = initial_centers(values, c);
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    const std::vector<double> u = fcm_memberships(values, centers, m);
    std::vector<double> next = fcm_centers(values, u, c, m);
    result.objective_trace.push_back(fcm_objective(values, u, next, m));
    double shift = 0.0;
    for (std::size_t k = 0; k < c; ++k) shift = std::max(shift, std::abs(next[k] - centers[k]));
    centers = std::move(next);
    result.iterations = it + 1;
    if (shift < options.tol) {
      result.converged = true;
      break;
    }
  }

  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });
  for (std::size_t k = 0; k < c; ++k) result.centers.push_back(centers[order[k]]);
  result.memberships = fcm_memberships(values, result.centers, m);
  return result;
}

std::size_t TriMap::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Raster TriMap::to_raster() const {
  Raster out(width, height);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (labels[i]) {
      case Label::Unchanged: out.pixels[i] = 0.0; break;
      case Label::Intermediate: out.pixels[i] = 128.0; break;
      case Label::Changed: out.pixels[i] = 255.0; break;
    }
  }
  return out;
}

TriMap TriMap::from_raster(const Raster& raster) {
  TriMap map{raster.width, raster.height, std::vector<Label>(raster.size())};
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double v = raster.pixels[i];
    if (v == 0.0) map.labels[i] = Label::Unchanged;
    else if (v == 128.0) map.labels[i] = Label::Intermediate;
    else if (v == 255.0) map.labels[i] = Label::Changed;
    else throw InputError("trimap pixel " + std::to_string(i) + " has gray level " + std::to_string(v) +
                          "; expected 0, 128 or 255");
  }
  return map;
}

TriMap hierarchical_trimap(const DifferenceImage& di, const FcmOptions& options) {
  FcmOptions opts = options;
  opts.clusters = 3;
  TriMap map{di.width, di.height, std::vector<Label>(di.values.size(), Label::Unchanged)};
  if (di.values.empty()) return map;

  const FcmResult stage1 = fcm(di.values, opts);
  if (stage1.degenerate) return map;

  std::vector<std::size_t> middle;
  std::vector<double> middle_values;
  for (std::size_t i = 0; i < di.values.size(); ++i) {
    switch (stage1.hard_label(i)) {
      case 0: map.labels[i] = Label::Unchanged; break;
      case 2: map.labels[i] = Label::Changed; break;
      default:
        map.labels[i] = Label::Intermediate;
        middle.push_back(i);
        middle_values.push_back(di.values[i]);
    }
  }
  if (middle.empty()) return map;

  const FcmResult stage2 = fcm(middle_values, opts);
  if (stage2.degenerate) return map;
  const double low = stage1.centers.front(), high = stage1.centers.back();
  for (std::size_t j = 0; j < middle.size(); ++j) {
    const double center = stage2.centers[stage2.hard_label(j)];
    if (center >= high) map.labels[middle[j]] = Label::Changed;
    else if (center <= low) map.labels[middle[j]] = Label::Unchanged;
  }
  return map;
}

namespace {

std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

SampleSet draw_samples(const TriMap& trimap, const Raster& i1, const Raster& i2, std::size_t r, double fraction,
                       std::uint64_t seed) {
  require_same_geometry(i1, i2);
  if (trimap.width != i1.width || trimap.height != i1.height)
    throw InputError("trimap geometry does not match the image pair");
  std::vector<std::size_t> changed, unchanged;
  for (std::size_t i = 0; i < trimap.labels.size(); ++i) {
    if (trimap.labels[i] == Label::Changed) changed.push_back(i);
    else if (trimap.labels[i] == Label::Unchanged) unchanged.push_back(i);
  }
  if (changed.empty() || unchanged.empty())
    throw PreclassifyError(std::string("preclassification found no ") + (changed.empty() ? "changed" : "unchanged") +
                           " pixels; the image pair may be unchanged or the difference image uninformative. "
                           "Review the inputs and the di_window setting");
  // The epsilon absorbs products such as 0.1 * 30 landing just under an integer.
  const auto k = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(std::min(changed.size(), unchanged.size())) + 1e-9));
  if (k == 0)
    throw PreclassifyError("sample fraction " + std::to_string(fraction) + " of " +
                           std::to_string(std::min(changed.size(), unchanged.size())) +
                           " reliable pixels selects no training samples; raise sample_fraction");

  Rng rng(seed);
  const auto positives = choose(std::move(changed), k, rng);
  const auto negatives = choose(std::move(unchanged), k, rng);
  const PatchExtractor cutter(i1, i2);
  SampleSet set;
  set.seed = seed;
  for (const auto* group : {&positives, &negatives}) {
    const int label = group == &positives ? 1 : 0;
    for (std::size_t idx : *group) {
      set.patches.push_back(cutter.extract({idx / i1.width, idx % i1.width}, r));
      set.labels.push_back(label);
    }
  }
  return set;
}

}  // namespace ddnet
