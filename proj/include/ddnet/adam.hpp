#pragma once

#include <span>
#include <vector>

#include "ddnet/tensor.hpp"

namespace ddnet {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam. Moment buffers are matched to parameters by position,
/// so callers must pass parameters in the same order on every step.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<Tensor* const> params, std::span<const Tensor* const> grads);

  long steps_taken() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// One update of a single parameter at step index t (t >= 1), given its
/// moment buffers. Exposed so the update rule can be tested in isolation.
void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, const AdamConfig& config,
                 long t);

}  // namespace ddnet
