#include "ddnet/network.hpp"

#include <cmath>
#include <string>

#include "ddnet/errors.hpp"
#include "ddnet/frequency.hpp"

namespace ddnet {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::Both: return "both";
    case Mode::SpatialOnly: return "no-dct";
    case Mode::FreqOnly: return "no-mrc";
    case Mode::PlainCnn: return "plain-cnn";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::Both, Mode::SpatialOnly, Mode::FreqOnly, Mode::PlainCnn})
    if (mode_name(m) == name) return m;
  throw InputError("unknown mode '" + std::string(name) + "' (expected both, no-dct, no-mrc or plain-cnn)");
}

std::size_t Architecture::head_width() const noexcept {
  switch (mode) {
    case Mode::Both: return spatial_width() + kDctLength;
    case Mode::FreqOnly: return kDctLength;
    case Mode::SpatialOnly:
    case Mode::PlainCnn: return spatial_width();
  }
  return 0;
}

void Architecture::validate() const {
  if (r % 2 == 0 || r < 3) throw InputError("patch size r must be odd and at least 3, got " + std::to_string(r));
  if ((mode == Mode::Both || mode == Mode::SpatialOnly) && r <= 2 * mask_width)
    throw InputError("patch size r=" + std::to_string(r) + " leaves no center region with mask width " +
                     std::to_string(mask_width) + "; need r >= " + std::to_string(2 * mask_width + 1));
}

namespace {

ConvParams conv_shape(std::size_t cout, std::size_t cin, std::size_t k) {
  return {Tensor({cout, cin, k, k}), Tensor({cout})};
}

template <typename Params, typename Tensors>
void collect(Params& p, Tensors& out) {
  auto conv = [&](auto& c) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  };
  for (auto& block : p.mrc) {
    conv(block.lift);
    conv(block.global);
    conv(block.horizontal);
    conv(block.vertical);
  }
  for (auto& layer : p.plain) conv(layer);
  if (p.gate) {
    out.push_back(&p.gate->wi);
    out.push_back(&p.gate->bi);
    out.push_back(&p.gate->wg);
    out.push_back(&p.gate->bg);
  }
  out.push_back(&p.fc_weight);
  out.push_back(&p.fc_bias);
}

}  // namespace

std::vector<Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out;
  collect(*this, out);
  return out;
}

std::vector<const Tensor*> ModelParams::tensors() const {
  std::vector<const Tensor*> out;
  collect(*this, out);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : tensors()) n += t->size();
  return n;
}

ModelParams zero_params(const Architecture& arch) {
  arch.validate();
  ModelParams p;
  p.arch = arch;
  if (arch.mode == Mode::Both || arch.mode == Mode::SpatialOnly) {
    for (std::size_t b = 0; b < kSpatialBlocks; ++b) {
      const std::size_t cin = b == 0 ? 2 : kGroupChannels;
      p.mrc.push_back({conv_shape(kLiftChannels, cin, 1), conv_shape(kGroupChannels, kGroupChannels, 3),
                       conv_shape(kGroupChannels, kGroupChannels, 3), conv_shape(kGroupChannels, kGroupChannels, 3)});
    }
  }
  if (arch.mode == Mode::PlainCnn) {
    for (std::size_t b = 0; b < kSpatialBlocks; ++b)
      p.plain.push_back(conv_shape(kGroupChannels, b == 0 ? 2 : kGroupChannels, 3));
  }
  if (arch.has_frequency()) {
    p.gate = GateParams{Tensor({kDctLength, kDctLength}), Tensor({kDctLength}), Tensor({kDctLength, kDctLength}),
                        Tensor({kDctLength})};
  }
  p.fc_weight = Tensor({2, arch.head_width()});
  p.fc_bias = Tensor({2});
  return p;
}

ModelParams init_params(const Architecture& arch, Rng& rng) {
  ModelParams p = zero_params(arch);
  for (Tensor* t : p.tensors()) {
    if (t->rank() < 2) continue;
    const double fan_in = static_cast<double>(t->size() / t->dim(0));
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& v : t->data()) v = rng.uniform(-bound, bound);
  }
  return p;
}

std::size_t parameter_count(const Architecture& arch) { return zero_params(arch).parameter_count(); }

Tensor row_mask(std::size_t channels, std::size_t r, std::size_t width) {
  Tensor m({channels, r, r}, 1.0);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t i = 0; i < r; ++i)
      if (i < width || i + width >= r)
        for (std::size_t j = 0; j < r; ++j) m.at(c, i, j) = 0.0;
  return m;
}

Tensor col_mask(std::size_t channels, std::size_t r, std::size_t width) {
  Tensor m({channels, r, r}, 1.0);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        if (j < width || j + width >= r) m.at(c, i, j) = 0.0;
  return m;
}

Var mrc_block(Var x, Var lift_w, Var lift_b, const std::array<Var, 3>& group_w, const std::array<Var, 3>& group_b,
              Var rows, Var cols) {
  const Var lifted = relu(conv2d(x, lift_w, lift_b, 0));
  const Var global = slice_channels(lifted, 0, kGroupChannels);
  const Var horizontal = mul(slice_channels(lifted, kGroupChannels, kGroupChannels), rows);
  const Var vertical = mul(slice_channels(lifted, 2 * kGroupChannels, kGroupChannels), cols);
  const Var fused[] = {conv2d(global, group_w[0], group_b[0], 1), conv2d(horizontal, group_w[1], group_b[1], 1),
                       conv2d(vertical, group_w[2], group_b[2], 1)};
  return relu(sum(fused));
}

BoundModel::Conv BoundModel::bind(const ConvParams& p) {
  Conv c{tape_->leaf(p.weight, requires_grad_), tape_->leaf(p.bias, requires_grad_)};
  leaves_.push_back(c.weight);
  leaves_.push_back(c.bias);
  return c;
}

BoundModel::BoundModel(Tape& tape, const ModelParams& params, bool requires_grad)
    : tape_(&tape), arch_(params.arch), requires_grad_(requires_grad) {
  // Binding order must match ModelParams::tensors().
  for (const MrcParams& block : params.mrc)
    mrc_.push_back({bind(block.lift), bind(block.global), bind(block.horizontal), bind(block.vertical)});
  for (const ConvParams& layer : params.plain) plain_.push_back(bind(layer));
  if (params.gate) {
    gate_i_ = bind({params.gate->wi, params.gate->bi});
    gate_g_ = bind({params.gate->wg, params.gate->bg});
  }
  fc_ = bind({params.fc_weight, params.fc_bias});
  if (!mrc_.empty()) {
    row_mask_ = tape.leaf(row_mask(kGroupChannels, arch_.r, arch_.mask_width));
    col_mask_ = tape.leaf(col_mask(kGroupChannels, arch_.r, arch_.mask_width));
  }
}

Var BoundModel::spatial(Var x) const {
  if (arch_.mode == Mode::PlainCnn) {
    for (const Conv& layer : plain_) x = relu(conv2d(x, layer.weight, layer.bias, 1));
  } else {
    for (const Mrc& b : mrc_)
      x = mrc_block(x, b.lift.weight, b.lift.bias, {b.global.weight, b.horizontal.weight, b.vertical.weight},
                    {b.global.bias, b.horizontal.bias, b.vertical.bias}, row_mask_, col_mask_);
  }
  return flatten(x);
}

Var BoundModel::frequency(Var dct) const {
  const Var informative = linear(dct, gate_i_.weight, gate_i_.bias);
  const Var gate = sigmoid(linear(dct, gate_g_.weight, gate_g_.bias));
  return mul(gate, informative);
}

Var BoundModel::logits(const Tensor& patch, const Tensor* dct) const {
  const Shape expected{2, arch_.r, arch_.r};
  if (patch.shape() != expected)
    throw DimensionError("forward: patch shape " + shape_string(patch.shape()) + " does not match model input " +
                         shape_string(expected));
  Var features;
  if (arch_.has_spatial()) features = spatial(tape_->leaf(patch));
  if (arch_.has_frequency()) {
    const Var vf = tape_->leaf(dct ? *dct : patch_to_dct(patch));
    features = arch_.has_spatial() ? concat(features, frequency(vf)) : frequency(vf);
  }
  return linear(features, fc_.weight, fc_.bias);
}

Tensor mrc_forward(const Tensor& x, const MrcParams& p, std::size_t mask_width) {
  if (x.rank() != 3 || x.dim(1) != x.dim(2)) throw DimensionError("mrc_forward: input must be [C x r x r]");
  const std::size_t r = x.dim(1);
  if (r <= 2 * mask_width)
    throw InputError("mrc_forward: r=" + std::to_string(r) + " too small for mask width " + std::to_string(mask_width));
  Tape tape;
  auto leaf = [&](const Tensor& t) { return tape.leaf(t); };
  return mrc_block(leaf(x), leaf(p.lift.weight), leaf(p.lift.bias),
                   {leaf(p.global.weight), leaf(p.horizontal.weight), leaf(p.vertical.weight)},
                   {leaf(p.global.bias), leaf(p.horizontal.bias), leaf(p.vertical.bias)},
                   leaf(row_mask(kGroupChannels, r, mask_width)), leaf(col_mask(kGroupChannels, r, mask_width)))
      .value();
}

Tensor spatial_branch(const Tensor& patch, const ModelParams& params) {
  if (!params.arch.has_spatial()) throw ContractError("spatial_branch: model has no spatial branch");
  Tape tape;
  BoundModel model(tape, params, false);
  return model.spatial(tape.leaf(patch)).value();
}

Tensor frequency_branch(const Tensor& dct, const GateParams& gate) {
  if (dct.rank() != 1 || dct.dim(0) != kDctLength)
    throw DimensionError("frequency_branch: DCT vector must be [128], got " + shape_string(dct.shape()));
  Tape tape;
  const Var v = tape.leaf(dct);
  const Var informative = linear(v, tape.leaf(gate.wi), tape.leaf(gate.bi));
  const Var g = sigmoid(linear(v, tape.leaf(gate.wg), tape.leaf(gate.bg)));
  return mul(g, informative).value();
}

Tensor forward(const Tensor& patch, const ModelParams& params) {
  Tape tape;
  BoundModel model(tape, params, false);
  return model.logits(patch).value();
}

Tensor forward(const Tensor& patch, const ModelParams& params, Mode mode) {
  if (params.arch.mode != mode)
    throw ContractError("forward: parameters were built for mode " + std::string(mode_name(params.arch.mode)) +
                        ", not " + std::string(mode_name(mode)));
  return forward(patch, params);
}

}  // namespace ddnet
