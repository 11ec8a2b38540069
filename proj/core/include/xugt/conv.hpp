#pragma once

#include <array>
#include <cstdint>

#include "xugt/tensor.hpp"

namespace xugt {

// 3D convolution over (t, h, w).  Weights are stored (c_out, c_in/groups,
// k_t, k_h, k_w) reusing the rank-5 tensor container.  An empty bias vector
// means the convolution has no bias term.
struct ConvParams {
  Tensor5 weights;
  std::vector<float> bias;
  std::array<int64_t, 3> stride{1, 1, 1};   // (s_t, s_h, s_w)
  std::array<int64_t, 3> padding{0, 0, 0};  // zeros, symmetric per axis
  int64_t groups = 1;

  int64_t out_channels() const { return weights.shape().n; }
  int64_t group_in_channels() const { return weights.shape().c; }
  int64_t in_channels() const { return groups * group_in_channels(); }
  std::array<int64_t, 3> kernel() const {
    return {weights.shape().t, weights.shape().h, weights.shape().w};
  }
  bool has_bias() const { return !bias.empty(); }
  int64_t param_count() const;
  void validate() const;  // throws ConfigError on structural violations
};

ConvParams make_conv(int64_t c_in, int64_t c_out, std::array<int64_t, 3> kernel,
                     std::array<int64_t, 3> stride = {1, 1, 1},
                     std::array<int64_t, 3> padding = {0, 0, 0}, int64_t groups = 1,
                     bool with_bias = false);

// o = floor((d + 2*pad - k) / stride) + 1 per axis.  Throws ShapeError naming
// the failing axis when any output dimension would be < 1, and when the input
// channel count does not match the weights.
Shape5 conv_output_shape(const Shape5& in, const ConvParams& p);

// Scalar reference.  Per output element the accumulator is a single float and
// taps are visited in ascending (ci, k_t, k_h, k_w) order; taps in the zero
// padding contribute nothing.  Every other convolution entry point reproduces
// this order exactly, so results are bit-identical across paths.
Tensor5 conv3d_naive(const Tensor5& x, const ConvParams& p);

// Production entry point: dispatches to a pointwise, depthwise, or general
// row-wise kernel.  Bit-identical to conv3d_naive.
Tensor5 conv3d(const Tensor5& x, const ConvParams& p);

// Specialized fast path for k = (1,1,1), unit stride, zero padding.
// Bit-identical to conv3d_naive on the same params; throws ShapeError if p is
// not pointwise.
Tensor5 pointwise_conv(const Tensor5& x, const ConvParams& p);

// Specialized fast path for groups == c_in == c_out (one channel per group).
// Bit-identical to conv3d_naive; throws ShapeError if p is not depthwise.
Tensor5 depthwise_conv3d(const Tensor5& x, const ConvParams& p);

}  // namespace xugt
