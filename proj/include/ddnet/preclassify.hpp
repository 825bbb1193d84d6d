#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ddnet/imagery.hpp"
#include "ddnet/rng.hpp"

namespace ddnet {

struct FcmOptions {
  std::size_t clusters = 3;
  double fuzzifier = 2.0;  // m
  std::size_t max_iter = 100;
  double tol = 1e-6;  // on the largest center shift
};

struct FcmResult {
  std::size_t clusters = 0;
  /// Ascending. Strictly increasing unless `degenerate`.
  std::vector<double> centers;
  /// n x clusters, row-major, rows sum to 1. Consistent with `centers`
  /// (recomputed from the final centers).
  std::vector<double> memberships;
  /// J = sum u^m d^2 after each center update.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  bool converged = false;
  /// All inputs equal: every point is assigned wholly to cluster 0.
  bool degenerate = false;

  double membership(std::size_t point, std::size_t cluster) const {
    return memberships[point * clusters + cluster];
  }
  /// Index of the largest membership (lowest index on ties).
  std::size_t hard_label(std::size_t point) const;
};

/// Fuzzy c-means on scalar data. Centers start at the (k + 0.5) / c
/// quantiles of the data; a point that coincides with a center belongs
/// wholly to it.
FcmResult fcm(std::span<const double> values, const FcmOptions& options = {});

/// Membership update for fixed centers (the u-step of fcm).
std::vector<double> fcm_memberships(std::span<const double> values, std::span<const double> centers,
                                    double fuzzifier);
/// Center update for fixed memberships (the v-step of fcm).
std::vector<double> fcm_centers(std::span<const double> values, std::span<const double> memberships,
                                std::size_t clusters, double fuzzifier);
double fcm_objective(std::span<const double> values, std::span<const double> memberships,
                     std::span<const double> centers, double fuzzifier);

enum class Label : std::uint8_t { Unchanged = 0, Changed = 1, Intermediate = 2 };

struct TriMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Label> labels;

  std::size_t count(Label label) const;
  /// 0 = unchanged, 128 = intermediate, 255 = changed.
  Raster to_raster() const;
  /// Inverse of to_raster; any other gray level is an InputError.
  static TriMap from_raster(const Raster& raster);

  friend bool operator==(const TriMap&, const TriMap&) = default;
};

/// Two-stage FCM split of the difference image.
///
/// Stage 1 clusters all values into three groups and hard-assigns the top
/// group to Changed, the bottom one to Unchanged and the middle one to
/// Intermediate. Stage 2 re-clusters the intermediate values into three
/// subgroups; a subgroup whose center reaches the stage-1 top center is
/// promoted to Changed, one whose center is at or below the stage-1 bottom
/// center is demoted to Unchanged, and the rest stay Intermediate.
/// A constant difference image is all Unchanged.
TriMap hierarchical_trimap(const DifferenceImage& di, const FcmOptions& options = {});

/// Balanced pseudo-labelled training set. Positives (label 1) come first.
struct SampleSet {
  std::vector<Patch> patches;
  std::vector<int> labels;  // 1 = changed, 0 = unchanged
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return patches.size(); }
};

/// Draws k = floor(fraction * min(|changed|, |unchanged|)) pixels uniformly
/// without replacement from each reliable class and cuts r x r patches
/// around them. Throws PreclassifyError when either class is empty or k == 0.
SampleSet draw_samples(const TriMap& trimap, const Raster& i1, const Raster& i2, std::size_t r, double fraction,
                       std::uint64_t seed);

}  // namespace ddnet
