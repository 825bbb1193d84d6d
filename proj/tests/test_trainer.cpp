#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ddnet/checkpoint.hpp"
#include "ddnet/errors.hpp"
#include "ddnet/rng.hpp"
#include "ddnet/trainer.hpp"

using namespace ddnet;

namespace {

// Constant-0 patches labelled unchanged, constant-1 patches labelled changed.
SampleSet separable_set(std::size_t r) {
  SampleSet s;
  for (std::size_t k = 0; k < 20; ++k) {
    const int label = k % 2 == 0 ? 1 : 0;
    s.patches.push_back({{k, 0}, r, Tensor({2, r, r}, static_cast<double>(label))});
    s.labels.push_back(label);
  }
  return s;
}

TrainConfig small_config(Mode mode = Mode::Both) {
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 4;
  cfg.lr = 1e-2;
  cfg.seed = 3;
  cfg.mode = mode;
  return cfg;
}

}  // namespace

TEST_CASE("separable toy set is learned within 10 epochs") {
  for (Mode m : {Mode::Both, Mode::SpatialOnly, Mode::FreqOnly, Mode::PlainCnn}) {
    const TrainResult res = train(separable_set(7), small_config(m));
    REQUIRE(res.report.epochs.size() == 10);
    INFO(mode_name(m));
    CHECK(res.report.epochs.back().accuracy == 1.0);
    CHECK(res.report.epochs.back().loss < res.report.initial.loss);
    for (const EpochStats& e : res.report.epochs) CHECK(std::isfinite(e.loss));
  }
}

TEST_CASE("zero epochs returns the initialization") {
  TrainConfig cfg = small_config();
  cfg.epochs = 0;
  const TrainResult res = train(separable_set(7), cfg);
  CHECK(res.params == initial_params(cfg));
  CHECK(res.report.epochs.empty());
}

TEST_CASE("training is deterministic") {
  const TrainConfig cfg = small_config();
  const TrainResult a = train(separable_set(7), cfg);
  const TrainResult b = train(separable_set(7), cfg);
  CHECK(encode_checkpoint(a.params) == encode_checkpoint(b.params));
  CHECK(a.report.to_text() == b.report.to_text());
  TrainConfig other = cfg;
  other.seed = 4;
  CHECK(!(train(separable_set(7), other).params == a.params));
}

TEST_CASE("report text is line oriented") {
  const TrainResult res = train(separable_set(7), small_config());
  const std::string text = res.report.to_text();
  CHECK(text.rfind("# epoch loss accuracy\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 1 + 1 + 10);
}

TEST_CASE("training failures and preconditions") {
  TrainConfig cfg = small_config();
  cfg.lr = 1e300;
  try {
    train(separable_set(7), cfg);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    CHECK(what.find("epoch") != std::string::npos);
    CHECK(what.find("lr") != std::string::npos);
  }
  CHECK_THROWS(train(SampleSet{}, small_config()));
  TrainConfig bad = small_config();
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = small_config();
  bad.r = 8;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("infer_map rules") {
  Rng rng(5);
  Raster i1(9, 6), i2(9, 6);
  for (double& p : i1.pixels) p = rng.uniform(0, 200);
  for (double& p : i2.pixels) p = rng.uniform(0, 200);
  TriMap t{9, 6, std::vector<Label>(54, Label::Unchanged)};

  SUBCASE("no intermediate pixels binarizes the trimap") {
    for (std::size_t i = 0; i < 54; i += 3) t.labels[i] = Label::Changed;
    // Mismatched patch size would throw if the network were ever called.
    const ModelParams p = zero_params({.r = 5});
    const ChangeMap m = infer_map(i1, i2, t, p);
    for (std::size_t i = 0; i < 54; ++i) CHECK(m.bits[i] == (i % 3 == 0 ? 1 : 0));
  }
  SUBCASE("zero model ties go to unchanged") {
    t.labels.assign(54, Label::Intermediate);
    CHECK(infer_map(i1, i2, t, zero_params({})).count_changed() == 0);
  }
  SUBCASE("bias toward changed flips only intermediate pixels") {
    for (std::size_t i = 0; i < 54; ++i) t.labels[i] = static_cast<Label>(rng.below(3));
    ModelParams p = zero_params({});
    p.fc_bias[1] = 1.0;
    const ChangeMap m = infer_map(i1, i2, t, p);
    for (std::size_t i = 0; i < 54; ++i) CHECK(m.bits[i] == (t.labels[i] == Label::Unchanged ? 0 : 1));
  }
  SUBCASE("random model never flips reliable labels") {
    for (int trial = 0; trial < 5; ++trial) {
      for (std::size_t i = 0; i < 54; ++i) t.labels[i] = static_cast<Label>(rng.below(3));
      Rng init(100 + trial);
      const ChangeMap m = infer_map(i1, i2, t, init_params({}, init));
      for (std::size_t i = 0; i < 54; ++i) {
        if (t.labels[i] == Label::Changed) CHECK(m.bits[i] == 1);
        if (t.labels[i] == Label::Unchanged) CHECK(m.bits[i] == 0);
      }
    }
  }
  CHECK_THROWS_AS(infer_map(i1, Raster(6, 9), t, zero_params({})), InputError);
}
