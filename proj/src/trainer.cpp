#include "ddnet/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>

#include "ddnet/adam.hpp"
#include "ddnet/errors.hpp"
#include "ddnet/frequency.hpp"

namespace ddnet {

void TrainConfig::validate() const {
  if (batch_size == 0) throw InputError("batch size must be positive");
  if (!(lr > 0.0)) throw InputError("learning rate must be positive");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) throw InputError("sample fraction must lie in (0, 1]");
  arch().validate();
}

std::string TrainReport::to_text() const {
  std::string out = "# epoch loss accuracy\n";
  char buf[96];
  auto line = [&](const EpochStats& s) {
    std::snprintf(buf, sizeof buf, "%zu %.10f %.6f\n", s.epoch, s.loss, s.accuracy);
    out += buf;
  };
  line(initial);
  for (const EpochStats& s : epochs) line(s);
  return out;
}

namespace {

std::size_t predicted_class(const Tensor& logits) { return logits[1] > logits[0] ? 1 : 0; }

std::vector<Tensor> dct_cache(const SampleSet& samples, const Architecture& arch) {
  std::vector<Tensor> out;
  if (!arch.has_frequency()) return out;
  out.reserve(samples.size());
  for (const Patch& p : samples.patches) out.push_back(patch_to_dct(p.data));
  return out;
}

EpochStats evaluate_cached(const SampleSet& samples, const std::vector<Tensor>& dcts, const ModelParams& params) {
  Tape tape;
  const BoundModel model(tape, params, false);
  const std::size_t mark = tape.size();
  EpochStats stats;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Var logits = model.logits(samples.patches[i].data, dcts.empty() ? nullptr : &dcts[i]);
    const auto label = static_cast<std::size_t>(samples.labels[i]);
    stats.loss += softmax_cross_entropy(logits, label).value()[0];
    correct += predicted_class(logits.value()) == label ? 1 : 0;
    tape.truncate(mark);
  }
  stats.loss /= static_cast<double>(samples.size());
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return stats;
}

}  // namespace

ModelParams initial_params(const TrainConfig& cfg) {
  Rng rng = Rng(cfg.seed).derive("init");
  return init_params(cfg.arch(), rng);
}

EpochStats evaluate(const SampleSet& samples, const ModelParams& params) {
  if (samples.size() == 0) throw ContractError("evaluate: empty sample set");
  return evaluate_cached(samples, dct_cache(samples, params.arch), params);
}

TrainResult train(const SampleSet& samples, const TrainConfig& cfg) {
  cfg.validate();
  if (samples.size() == 0) throw ContractError("train: empty sample set");
  if (samples.labels.size() != samples.size()) throw ContractError("train: labels and patches differ in count");
  const auto start = std::chrono::steady_clock::now();

  TrainResult result{initial_params(cfg), {}};
  ModelParams& params = result.params;
  const std::vector<Tensor> dcts = dct_cache(samples, params.arch);
  result.report.initial = evaluate_cached(samples, dcts, params);

  Adam adam(AdamConfig{cfg.lr});
  Rng shuffle_rng = Rng(cfg.seed).derive("shuffle");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::vector<Tensor*> targets = params.tensors();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.below(i))]);

    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      Tape tape;
      const BoundModel model(tape, params, true);
      std::vector<Var> losses;
      losses.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t s = order[k];
        const Var logits = model.logits(samples.patches[s].data, dcts.empty() ? nullptr : &dcts[s]);
        losses.push_back(softmax_cross_entropy(logits, static_cast<std::size_t>(samples.labels[s])));
      }
      const Var loss = scale(sum(losses), 1.0 / static_cast<double>(end - begin));
      if (!std::isfinite(loss.value()[0])) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "non-finite training loss at epoch %zu, batch %zu (lr %g)", epoch, batch_index,
                      cfg.lr);
        throw TrainingError(buf);
      }
      tape.backward(loss);
      std::vector<const Tensor*> grads;
      grads.reserve(model.leaves().size());
      for (Var leaf : model.leaves()) grads.push_back(&leaf.grad());
      adam.step(targets, grads);
    }

    EpochStats stats = evaluate_cached(samples, dcts, params);
    stats.epoch = epoch;
    if (!std::isfinite(stats.loss)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "non-finite loss after epoch %zu (lr %g)", epoch, cfg.lr);
      throw TrainingError(buf);
    }
    result.report.epochs.push_back(stats);
  }
  result.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ChangeMap infer_map(const Raster& i1, const Raster& i2, const TriMap& trimap, const ModelParams& params) {
  require_same_geometry(i1, i2);
  if (trimap.width != i1.width || trimap.height != i1.height)
    throw InputError("trimap geometry does not match the image pair");
  ChangeMap map(trimap.width, trimap.height);
  const PatchExtractor cutter(i1, i2);
  Tape tape;
  std::size_t mark = 0;
  std::optional<BoundModel> model;
  for (std::size_t i = 0; i < trimap.labels.size(); ++i) {
    switch (trimap.labels[i]) {
      case Label::Changed: map.bits[i] = 1; break;
      case Label::Unchanged: map.bits[i] = 0; break;
      case Label::Intermediate: {
        if (!model) {
          model.emplace(tape, params, false);
          mark = tape.size();
        }
        const Patch patch = cutter.extract({i / trimap.width, i % trimap.width}, params.arch.r);
        map.bits[i] = static_cast<std::uint8_t>(predicted_class(model->logits(patch.data).value()));
        tape.truncate(mark);
        break;
      }
    }
  }
  return map;
}

}  // namespace ddnet
