#pragma once

#include "xugt/conv.hpp"
#include "xugt/ops.hpp"
#include "xugt/tensor.hpp"

namespace xugt {

// ---------------------------------------------------------------------------
// Temporal shift.  fold = floor(c / fold_div).  Channels [0, fold) move
// backward in time (output[t] = input[t+1], last frame zero-filled), channels
// [fold, 2*fold) move forward (output[t] = input[t-1], first frame
// zero-filled), the rest copy through.
Tensor5 temporal_shift(const Tensor5& x, int64_t fold_div);

// ---------------------------------------------------------------------------
// Ghost pointwise: a primary 1x1x1 convolution produces m = ceil(c_out/ratio)
// channels, a cheap depthwise (1,d,d) map over the primary output produces
// the remaining c_out - m, and the result is concat(primary, cheap).
struct GhostParams {
  ConvParams primary;
  ConvParams cheap;  // unused when ratio folds everything into the primary
  int64_t ratio = 1;

  bool has_cheap() const { return cheap.weights.numel() > 0; }
  int64_t in_channels() const { return primary.in_channels(); }
  int64_t primary_channels() const { return primary.out_channels(); }
  int64_t out_channels() const {
    return primary.out_channels() + (has_cheap() ? cheap.out_channels() : 0);
  }
  int64_t param_count() const;
  void validate() const;
};

GhostParams make_ghost(int64_t c_in, int64_t c_out, int64_t ratio = 2, int64_t cheap_kernel = 3);
Tensor5 ghost_pointwise(const Tensor5& x, const GhostParams& g);

// ---------------------------------------------------------------------------
// Squeeze-excitation: gate = sigmoid(expand(relu(reduce(mean over (t,h,w))))),
// broadcast-multiplied onto the input.
struct SEParams {
  ConvParams reduce;  // 1x1x1, c -> hidden, with bias
  ConvParams expand;  // 1x1x1, hidden -> c, with bias
  int64_t reduction = 16;

  int64_t channels() const { return reduce.in_channels(); }
  int64_t hidden() const { return reduce.out_channels(); }
  int64_t param_count() const;
  void validate() const;
};

SEParams make_se(int64_t channels, int64_t reduction = 16, int64_t min_hidden = 4);
Tensor5 squeeze_excite(const Tensor5& x, const SEParams& p);

// ---------------------------------------------------------------------------
// SimAM: parameter-free attention.  Per (batch, channel) group over t*h*w
// elements with mean m and variance v (denominator n-1), each element's
// minimal energy is e = 4*(v + lambda) / ((x - m)^2 + 2*v + 2*lambda) and the
// output is x * sigmoid(1/e).  per_frame switches the grouping to (batch,
// channel, time) over h*w.
struct SimamConfig {
  double lambda = 1e-4;
  bool per_frame = false;
};

Tensor5 simam(const Tensor5& x, const SimamConfig& cfg = {});

// ---------------------------------------------------------------------------
// Simplified TAda gate.  From the pre-depthwise context feature x_ctx, a
// per-(n, c, t) signal g = expand(temporal(relu(reduce(spatial mean)))) is
// computed and blended multiplicatively: output = x_dw * (1 + alpha * g).
// alpha = 0 makes the operator a bit-exact identity on x_dw.
struct TadaParams {
  ConvParams reduce;    // 1x1x1, c -> hidden, with bias
  ConvParams temporal;  // depthwise (3,1,1) over hidden, same-padded, no bias
  ConvParams expand;    // 1x1x1, hidden -> c, with bias
  float alpha = 0.0f;

  int64_t channels() const { return reduce.in_channels(); }
  int64_t hidden() const { return reduce.out_channels(); }
  int64_t param_count() const;  // includes alpha
  void validate() const;
};

TadaParams make_tada(int64_t channels, int64_t reduction = 4);
Tensor5 tada_gate(const Tensor5& x_dw, const Tensor5& x_ctx, const TadaParams& p);

}  // namespace xugt
