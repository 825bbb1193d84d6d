#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddnet/autodiff.hpp"
#include "ddnet/rng.hpp"
#include "ddnet/tensor.hpp"

namespace ddnet {

/// Network variants. Both is the full dual-domain model; the others are the
/// ablations (spatial branch only, frequency branch only, and a plain
/// four-layer CNN in place of the multi-region blocks).
enum class Mode : unsigned { Both = 0, SpatialOnly = 1, FreqOnly = 2, PlainCnn = 3 };

/// CLI spelling: both, no-dct, no-mrc, plain-cnn.
std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

inline constexpr std::size_t kLiftChannels = 15;  // 1x1 lift width, split in three groups
inline constexpr std::size_t kGroupChannels = kLiftChannels / 3;
inline constexpr std::size_t kSpatialBlocks = 4;

struct Architecture {
  std::size_t r = 7;
  Mode mode = Mode::Both;
  std::size_t mask_width = 2;

  bool has_spatial() const noexcept { return mode != Mode::FreqOnly; }
  bool has_frequency() const noexcept { return mode == Mode::Both || mode == Mode::FreqOnly; }
  /// 5 * r * r.
  std::size_t spatial_width() const noexcept { return kGroupChannels * r * r; }
  /// Input width of the classifier head.
  std::size_t head_width() const noexcept;
  /// Throws InputError for an even r, or when the masks leave no center rows.
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct ConvParams {
  Tensor weight;  // [C_out x C_in x k x k]
  Tensor bias;    // [C_out]
  friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

/// One multi-region block: a 1x1 lift to 15 channels, then a 3x3 conv per
/// group (global, horizontal middle, vertical middle), each 5 -> 5.
struct MrcParams {
  ConvParams lift;
  ConvParams global;
  ConvParams horizontal;
  ConvParams vertical;
  friend bool operator==(const MrcParams&, const MrcParams&) = default;
};

/// DCT on-off switch: informative vector Wi v + bi gated by sigmoid(Wg v + bg).
struct GateParams {
  Tensor wi, bi;  // [128 x 128], [128]
  Tensor wg, bg;
  friend bool operator==(const GateParams&, const GateParams&) = default;
};

struct ModelParams {
  Architecture arch;
  std::vector<MrcParams> mrc;     // Both, SpatialOnly
  std::vector<ConvParams> plain;  // PlainCnn
  std::optional<GateParams> gate;  // Both, FreqOnly
  Tensor fc_weight;               // [2 x head_width]
  Tensor fc_bias;                 // [2]

  /// Every trainable tensor in the fixed serialization order: blocks in
  /// network order (lift, global, horizontal, vertical; weight then bias),
  /// then gate (wi, bi, wg, bg), then the head (weight, bias).
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  std::size_t parameter_count() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// All-zero parameters with the right shapes for `arch`.
ModelParams zero_params(const Architecture& arch);
/// Weights uniform in +-sqrt(6 / fan_in), biases zero, drawn in tensors() order.
ModelParams init_params(const Architecture& arch, Rng& rng);
std::size_t parameter_count(const Architecture& arch);

/// Parameters placed on a tape as leaves, plus the cached masks.
class BoundModel {
 public:
  BoundModel(Tape& tape, const ModelParams& params, bool requires_grad);

  /// Logits [2] for one [2 x r x r] patch. `dct` is patch_to_dct(patch); pass
  /// it when precomputed, otherwise it is computed on demand.
  Var logits(const Tensor& patch, const Tensor* dct = nullptr) const;

  Var spatial(Var patch) const;
  Var frequency(Var dct) const;

  /// Leaves in ModelParams::tensors() order.
  const std::vector<Var>& leaves() const noexcept { return leaves_; }
  Tape& tape() const noexcept { return *tape_; }

 private:
  struct Conv {
    Var weight, bias;
  };
  struct Mrc {
    Conv lift, global, horizontal, vertical;
  };

  Conv bind(const ConvParams& p);

  Tape* tape_;
  Architecture arch_;
  std::vector<Mrc> mrc_;
  std::vector<Conv> plain_;
  Conv gate_i_{}, gate_g_{};
  Conv fc_{};
  Var row_mask_{}, col_mask_{};
  std::vector<Var> leaves_;
  bool requires_grad_;
};

/// Zeroes rows {0..w-1, r-w..r-1} of every channel (horizontal middle region).
Tensor row_mask(std::size_t channels, std::size_t r, std::size_t width);
/// Zeroes the same range of columns (vertical middle region).
Tensor col_mask(std::size_t channels, std::size_t r, std::size_t width);

/// One MRC block on a tape: relu(lift) -> split -> mask -> 3x3 convs -> sum -> relu.
Var mrc_block(Var x, Var lift_w, Var lift_b, const std::array<Var, 3>& group_w, const std::array<Var, 3>& group_b,
              Var row_mask, Var col_mask);

// Tape-free conveniences.
Tensor mrc_forward(const Tensor& x, const MrcParams& p, std::size_t mask_width);
Tensor spatial_branch(const Tensor& patch, const ModelParams& params);
Tensor frequency_branch(const Tensor& dct, const GateParams& gate);
Tensor forward(const Tensor& patch, const ModelParams& params);
/// As forward, but rejects parameters built for a different mode.
Tensor forward(const Tensor& patch, const ModelParams& params, Mode mode);

}  // namespace ddnet
