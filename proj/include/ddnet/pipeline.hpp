#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddnet/evalmap.hpp"
#include "ddnet/imagery.hpp"
#include "ddnet/preclassify.hpp"
#include "ddnet/trainer.hpp"

namespace ddnet {

/// Everything one invocation needs. Precedence when assembled by the CLI:
/// flags, then config file, then these defaults.
struct RunConfig {
  std::filesystem::path image1, image2, ground_truth;
  std::filesystem::path trimap, model, map;  // stage-wise inputs
  std::filesystem::path out = ".";
  TrainConfig train;
  /// Box-mean window applied to both intensity images before the log-ratio.
  std::size_t di_window = 3;
  unsigned looks = 4;  // synth only
  std::vector<std::size_t> r_list = {5, 7, 9, 11, 13, 15};
  int verbosity = 0;

  void validate() const;
  /// Effective configuration in config-file syntax.
  std::string to_text() const;
};

/// Applies "key = value" lines onto `base`. '#' starts a comment.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Seed for the pseudo-label draw, derived from the root seed.
std::uint64_t sample_seed(std::uint64_t root);

DifferenceImage difference_image(const Raster& i1, const Raster& i2, const RunConfig& cfg);

struct PipelineResult {
  DifferenceImage di;
  TriMap trimap;
  TrainResult training;
  ChangeMap map;
  std::optional<MetricsReport> metrics;
};

/// In-memory run: difference image, preclassification, sampling, training,
/// inference and (with a truth map) scoring.
PipelineResult run_pipeline(const Raster& i1, const Raster& i2, const ChangeMap* truth, const RunConfig& cfg);

}  // namespace ddnet
