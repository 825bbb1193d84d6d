#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ddnet/evalmap.hpp"
#include "ddnet/network.hpp"
#include "ddnet/preclassify.hpp"

namespace ddnet {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 42;
  std::size_t r = 7;
  Mode mode = Mode::Both;
  std::size_t mask_width = 2;
  double sample_fraction = 0.10;

  Architecture arch() const { return {r, mode, mask_width}; }
  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;      // mean cross-entropy over the whole sample set
  double accuracy = 0.0;  // fraction of pseudo-labels reproduced
};

struct TrainReport {
  EpochStats initial;  // before the first update
  std::vector<EpochStats> epochs;
  double wall_seconds = 0.0;

  /// "epoch loss accuracy" per line, epoch 0 being the initial state.
  /// Wall time is left out so the text is reproducible.
  std::string to_text() const;
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

/// The initial weights train() starts from.
ModelParams initial_params(const TrainConfig& cfg);

/// Seeded minibatch Adam on softmax cross-entropy. Deterministic given
/// (samples, cfg). Throws TrainingError on a non-finite loss.
TrainResult train(const SampleSet& samples, const TrainConfig& cfg);

/// Mean loss and accuracy of `params` over a sample set.
EpochStats evaluate(const SampleSet& samples, const ModelParams& params);

/// Reliable pixels keep their preclassification; intermediate pixels take
/// the network's argmax, with exactly equal logits resolved to unchanged.
ChangeMap infer_map(const Raster& i1, const Raster& i2, const TriMap& trimap, const ModelParams& params);

}  // namespace ddnet
