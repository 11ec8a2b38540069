#pragma once

#include <optional>

#include "xugt/primitives.hpp"

namespace xugt {

// Inverted-bottleneck block: [shift] -> [pre_dw] -> ghost expand ->
// factorized (2+1)D depthwise -> [tada] -> [se] -> ghost project -> residual.
// Stages 1-2 use it plain ("UIB"); stages 3-4 enable shift/tada ("T-UIB").
struct BlockSpec {
  int64_t c_in = 0;
  int64_t c_out = 0;
  double expansion = 2.5;
  int64_t spatial_stride = 1;  // 1 or 2; time is never strided
  int64_t pre_dw_kernel = 0;   // spatial size of the pre-depthwise stage, 0 = absent
  int64_t mid_dw_spatial = 3;  // spatial size k of the (1,k,k) mid depthwise
  bool use_shift = false;
  bool use_tada = false;
  bool use_se = false;
  int64_t ghost_ratio = 2;
  int64_t shift_fold_div = 8;
  Activation act = Activation::kRelu;

  // round-half-up(expansion * c_in), floored at 8
  int64_t expanded_width() const;
  void validate() const;  // throws ConfigError
};

struct BlockParams {
  std::optional<ConvParams> pre_dw;  // depthwise (1,k,k) over c_in
  AffineParams pre_affine;
  GhostParams expand;  // c_in -> c_exp
  AffineParams expand_affine;
  ConvParams temporal_dw;  // depthwise (3,1,1) over c_exp
  ConvParams spatial_dw;   // depthwise (1,k,k) over c_exp
  AffineParams dw_affine;
  std::optional<TadaParams> tada;
  std::optional<SEParams> se;
  GhostParams project;  // c_exp -> c_out, linear (no activation)
  AffineParams project_affine;
  std::optional<GhostParams> shortcut;  // absent = identity shortcut

  int64_t param_count() const;
};

struct Block {
  BlockSpec spec;
  BlockParams params;
};

Block make_block(const BlockSpec& spec);
Shape5 block_output_shape(const Shape5& in, const BlockSpec& spec);

// Exactly depthwise_conv3d(depthwise_conv3d(x, temporal), spatial); throws
// ShapeError when either conv is not depthwise.
Tensor5 factorized_mid_dw(const Tensor5& x, const ConvParams& temporal, const ConvParams& spatial);

// Spatial subsampling x[:, :, :, ::s, ::s] used by the residual shortcut of
// strided blocks.
Tensor5 spatial_subsample(const Tensor5& x, int64_t stride);

Tensor5 uib_forward(const Tensor5& x, const BlockSpec& spec, const BlockParams& p);
inline Tensor5 block_forward(const Tensor5& x, const Block& b) {
  return uib_forward(x, b.spec, b.params);
}

}  // namespace xugt
