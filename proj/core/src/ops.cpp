#include "xugt/ops.hpp"

#include <algorithm>
#include <cmath>

#include "xugt/errors.hpp"
#include "xugt/runtime.hpp"

namespace xugt {

AffineParams make_affine(int64_t channels) {
  if (channels < 1) {
    throw ConfigError("affine channels must be >= 1, got " + std::to_string(channels));
  }
  AffineParams a;
  a.scale.assign(static_cast<size_t>(channels), 1.0f);
  a.shift.assign(static_cast<size_t>(channels), 0.0f);
  return a;
}

Tensor5 affine_channel(const Tensor5& x, const AffineParams& a) {
  const Shape5& s = x.shape();
  if (a.channels() != s.c || a.scale.size() != a.shift.size()) {
    throw ShapeError("affine parameter length " + std::to_string(a.channels()) +
                     " does not match channel count " + std::to_string(s.c));
  }
  Tensor5 y(s);
  const int64_t plane = s.t * s.h * s.w;
  const float* in = x.data();
  float* out = y.data();
  parallel_for(s.n * s.c, [&](int64_t begin, int64_t end) {
    for (int64_t nc = begin; nc < end; ++nc) {
      const int64_t c = nc % s.c;
      const float scale = a.scale[static_cast<size_t>(c)];
      const float shift = a.shift[static_cast<size_t>(c)];
      const float* src = in + nc * plane;
      float* dst = out + nc * plane;
      for (int64_t i = 0; i < plane; ++i) dst[i] = src[i] * scale + shift;
    }
  });
  return y;
}

float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

Tensor5 activation(const Tensor5& x, Activation kind) {
  Tensor5 y(x.shape());
  const float* in = x.data();
  float* out = y.data();
  const int64_t total = x.numel();
  parallel_for(total, [&](int64_t begin, int64_t end) {
    if (kind == Activation::kRelu) {
      for (int64_t i = begin; i < end; ++i) out[i] = in[i] > 0.0f ? in[i] : 0.0f;
    } else {
      for (int64_t i = begin; i < end; ++i) out[i] = sigmoid(in[i]);
    }
  });
  return y;
}

Tensor5 global_pool(const Tensor5& x, PoolAxes axes) {
  const Shape5& s = x.shape();
  if (x.numel() == 0) throw ShapeError("global_pool on empty tensor " + s.str());
  const bool temporal_too = axes == PoolAxes::kSpatiotemporal;
  const int64_t span = (temporal_too ? s.t : 1) * s.h * s.w;
  Shape5 out_shape{s.n, s.c, temporal_too ? 1 : s.t, 1, 1};
  Tensor5 y(out_shape);
  const int64_t slots = out_shape.numel();
  const float* in = x.data();
  float* out = y.data();
  parallel_for(slots, [&](int64_t begin, int64_t end) {
    for (int64_t i = begin; i < end; ++i) {
      // slot i covers a contiguous span because pooled axes are innermost
      const float* src = in + i * span;
      double sum = 0.0;
      for (int64_t j = 0; j < span; ++j) sum += src[j];
      out[i] = static_cast<float>(sum / static_cast<double>(span));
    }
  });
  return y;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ShapeError("softmax on empty input");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double denom = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - top);
    denom += probs[i];
  }
  for (double& p : probs) p /= denom;
  return probs;
}

std::vector<float> softmax(std::span<const float> logits) {
  std::vector<double> wide(logits.begin(), logits.end());
  const std::vector<double> probs = softmax(std::span<const double>(wide));
  std::vector<float> out(probs.size());
  for (size_t i = 0; i < probs.size(); ++i) out[i] = static_cast<float>(probs[i]);
  return out;
}

}  // namespace xugt
