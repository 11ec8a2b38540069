#pragma once

#include <span>
#include <vector>

#include "xugt/tensor.hpp"

namespace xugt {

// Folded per-channel normalization: y = x * scale[c] + shift[c].
struct AffineParams {
  std::vector<float> scale;
  std::vector<float> shift;

  int64_t channels() const { return static_cast<int64_t>(scale.size()); }
  int64_t param_count() const { return static_cast<int64_t>(scale.size() + shift.size()); }
};

AffineParams make_affine(int64_t channels);  // scale 1, shift 0
Tensor5 affine_channel(const Tensor5& x, const AffineParams& a);

enum class Activation { kRelu, kSigmoid };

float sigmoid(float v);
Tensor5 activation(const Tensor5& x, Activation kind);

enum class PoolAxes { kSpatial, kSpatiotemporal };

// Arithmetic mean over (h, w) or (t, h, w); pooled dims become 1.  The sum is
// accumulated in ascending index order in a double, so results are
// deterministic and insensitive to thread count.
Tensor5 global_pool(const Tensor5& x, PoolAxes axes);

// Max-subtracted exp-normalize; the result sums to 1 within 1e-6.
std::vector<double> softmax(std::span<const double> logits);
std::vector<float> softmax(std::span<const float> logits);

}  // namespace xugt
