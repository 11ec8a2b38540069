#include "xugt/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "xugt/errors.hpp"
#include "xugt/runtime.hpp"

namespace xugt {

// ---------------------------------------------------------------------------
// temporal shift

Tensor5 temporal_shift(const Tensor5& x, int64_t fold_div) {
  const Shape5& s = x.shape();
  if (fold_div < 1) {
    throw ShapeError("temporal_shift fold_div must be >= 1, got " + std::to_string(fold_div));
  }
  if (s.c < fold_div) {
    throw ShapeError("temporal_shift needs channels >= fold_div, got c=" + std::to_string(s.c) +
                     ", fold_div=" + std::to_string(fold_div));
  }
  const int64_t fold = s.c / fold_div;
  const int64_t fwd_end = std::min<int64_t>(2 * fold, s.c);
  Tensor5 y(s);  // zero-filled; boundary frames stay zero
  const int64_t hw = s.h * s.w;
  const float* in = x.data();
  float* out = y.data();
  parallel_for(s.n * s.c, [&](int64_t begin, int64_t end) {
    for (int64_t nc = begin; nc < end; ++nc) {
      const int64_t c = nc % s.c;
      const float* src = in + nc * s.t * hw;
      float* dst = out + nc * s.t * hw;
      for (int64_t t = 0; t < s.t; ++t) {
        int64_t t_src = t;
        if (c < fold) {
          t_src = t + 1;  // backward: pull the next frame
        } else if (c < fwd_end) {
          t_src = t - 1;  // forward: pull the previous frame
        }
        if (t_src < 0 || t_src >= s.t) continue;
        std::memcpy(dst + t * hw, src + t_src * hw, sizeof(float) * static_cast<size_t>(hw));
      }
    }
  });
  return y;
}

// ---------------------------------------------------------------------------
// ghost pointwise

int64_t GhostParams::param_count() const {
  return primary.param_count() + (has_cheap() ? cheap.param_count() : 0);
}

void GhostParams::validate() const {
  primary.validate();
  const auto pk = primary.kernel();
  if (pk != std::array<int64_t, 3>{1, 1, 1} || primary.groups != 1) {
    throw ConfigError("ghost primary branch must be an ungrouped 1x1x1 convolution");
  }
  if (ratio < 1) throw ConfigError("ghost ratio must be >= 1, got " + std::to_string(ratio));
  const int64_t m = primary.out_channels();
  if (has_cheap()) {
    cheap.validate();
    if (cheap.in_channels() != m || cheap.groups != m) {
      throw ConfigError("ghost cheap branch must be depthwise over the " + std::to_string(m) +
                        " primary channels");
    }
    if (cheap.kernel()[0] != 1) {
      throw ConfigError("ghost cheap branch kernel must be spatial (1,d,d)");
    }
  }
}

GhostParams make_ghost(int64_t c_in, int64_t c_out, int64_t ratio, int64_t cheap_kernel) {
  if (c_in < 1 || c_out < 1) {
    throw ConfigError("ghost channels must be >= 1, got c_in=" + std::to_string(c_in) +
                      ", c_out=" + std::to_string(c_out));
  }
  if (ratio < 1) throw ConfigError("ghost ratio must be >= 1, got " + std::to_string(ratio));
  const int64_t m = (c_out + ratio - 1) / ratio;  // ceil(c_out / ratio)
  const int64_t rest = c_out - m;
  GhostParams g;
  g.ratio = ratio;
  g.primary = make_conv(c_in, m, {1, 1, 1});
  if (rest > 0) {
    if (rest % m != 0) {
      throw ConfigError("ghost cheap channels " + std::to_string(rest) +
                        " not producible from " + std::to_string(m) +
                        " primary channels with a uniform per-channel map");
    }
    const int64_t pad = cheap_kernel / 2;
    g.cheap = make_conv(m, rest, {1, cheap_kernel, cheap_kernel}, {1, 1, 1}, {0, pad, pad}, m);
  }
  g.validate();
  return g;
}

Tensor5 ghost_pointwise(const Tensor5& x, const GhostParams& g) {
  g.validate();
  const Tensor5 primary = conv3d(x, g.primary);
  if (!g.has_cheap()) return primary;
  const Tensor5 cheap = conv3d(primary, g.cheap);
  const Shape5& ps = primary.shape();
  const Shape5& cs = cheap.shape();
  Shape5 out_shape{ps.n, ps.c + cs.c, ps.t, ps.h, ps.w};
  Tensor5 y(out_shape);
  const int64_t thw = ps.t * ps.h * ps.w;
  const size_t p_block = static_cast<size_t>(ps.c * thw);
  const size_t c_block = static_cast<size_t>(cs.c * thw);
  for (int64_t n = 0; n < ps.n; ++n) {
    float* dst = y.data() + n * out_shape.c * thw;
    std::memcpy(dst, primary.data() + n * ps.c * thw, sizeof(float) * p_block);
    std::memcpy(dst + p_block, cheap.data() + n * cs.c * thw, sizeof(float) * c_block);
  }
  return y;
}

// ---------------------------------------------------------------------------
// squeeze-excitation

int64_t SEParams::param_count() const { return reduce.param_count() + expand.param_count(); }

void SEParams::validate() const {
  reduce.validate();
  expand.validate();
  if (reduce.out_channels() != expand.in_channels() ||
      reduce.in_channels() != expand.out_channels()) {
    throw ConfigError("squeeze-excite reduce/expand channel counts do not mirror each other");
  }
  if (reduce.out_channels() < 1) throw ConfigError("squeeze-excite hidden width must be >= 1");
}

SEParams make_se(int64_t channels, int64_t reduction, int64_t min_hidden) {
  if (channels < 1 || reduction < 1) {
    throw ConfigError("squeeze-excite needs channels >= 1 and reduction >= 1");
  }
  const int64_t hidden = std::max<int64_t>(min_hidden, channels / reduction);
  SEParams p;
  p.reduction = reduction;
  p.reduce = make_conv(channels, hidden, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, 1, /*with_bias=*/true);
  p.expand = make_conv(hidden, channels, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, 1, /*with_bias=*/true);
  return p;
}

Tensor5 squeeze_excite(const Tensor5& x, const SEParams& p) {
  p.validate();
  if (x.shape().c != p.channels()) {
    throw ShapeError("squeeze-excite expects " + std::to_string(p.channels()) +
                     " channels, got " + std::to_string(x.shape().c));
  }
  const Tensor5 pooled = global_pool(x, PoolAxes::kSpatiotemporal);
  const Tensor5 mid = activation(conv3d(pooled, p.reduce), Activation::kRelu);
  const Tensor5 gate = activation(conv3d(mid, p.expand), Activation::kSigmoid);
  const Shape5& s = x.shape();
  Tensor5 y(s);
  const int64_t plane = s.t * s.h * s.w;
  const float* in = x.data();
  const float* gv = gate.data();
  float* out = y.data();
  parallel_for(s.n * s.c, [&](int64_t begin, int64_t end) {
    for (int64_t nc = begin; nc < end; ++nc) {
      const float scale = gv[nc];
      const float* src = in + nc * plane;
      float* dst = out + nc * plane;
      for (int64_t i = 0; i < plane; ++i) dst[i] = src[i] * scale;
    }
  });
  return y;
}

// ---------------------------------------------------------------------------
// SimAM

Tensor5 simam(const Tensor5& x, const SimamConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw ConfigError("simam lambda must be positive");
  const Shape5& s = x.shape();
  const int64_t group = cfg.per_frame ? s.h * s.w : s.t * s.h * s.w;
  if (group < 2) {
    throw ShapeError(std::string("simam needs ") + (cfg.per_frame ? "h*w" : "t*h*w") +
                     " >= 2 for the variance denominator, got shape " + s.str());
  }
  const int64_t groups = cfg.per_frame ? s.n * s.c * s.t : s.n * s.c;
  Tensor5 y(s);
  const float* in = x.data();
  float* out = y.data();
  const double lambda = cfg.lambda;
  parallel_for(groups, [&](int64_t begin, int64_t end) {
    for (int64_t nc = begin; nc < end; ++nc) {
      const float* src = in + nc * group;
      float* dst = out + nc * group;
      double sum = 0.0;
      for (int64_t i = 0; i < group; ++i) sum += src[i];
      const double mean = sum / static_cast<double>(group);
      double sq = 0.0;
      for (int64_t i = 0; i < group; ++i) {
        const double d = src[i] - mean;
        sq += d * d;
      }
      const double var = sq / static_cast<double>(group - 1);
      // e = 4*(var + lambda) / (d^2 + 2*var + 2*lambda); gate = sigmoid(1/e)
      const double num = 4.0 * (var + lambda);
      for (int64_t i = 0; i < group; ++i) {
        const double d = src[i] - mean;
        const double inv_e = (d * d + 2.0 * var + 2.0 * lambda) / num;
        const double gate = 1.0 / (1.0 + std::exp(-inv_e));
        dst[i] = static_cast<float>(src[i] * gate);
      }
    }
  });
  return y;
}

// ---------------------------------------------------------------------------
// TAda gate

int64_t TadaParams::param_count() const {
  return reduce.param_count() + temporal.param_count() + expand.param_count() + 1;
}

void TadaParams::validate() const {
  reduce.validate();
  temporal.validate();
  expand.validate();
  const int64_t h = reduce.out_channels();
  if (expand.in_channels() != h || expand.out_channels() != reduce.in_channels()) {
    throw ConfigError("tada reduce/expand channel counts do not mirror each other");
  }
  if (temporal.in_channels() != h || temporal.out_channels() != h || temporal.groups != h) {
    throw ConfigError("tada temporal branch must be depthwise over the hidden width " +
                      std::to_string(h));
  }
  if (temporal.kernel() != std::array<int64_t, 3>{3, 1, 1}) {
    throw ConfigError("tada temporal branch kernel must be (3,1,1)");
  }
}

TadaParams make_tada(int64_t channels, int64_t reduction) {
  if (channels < 1 || reduction < 1) {
    throw ConfigError("tada gate needs channels >= 1 and reduction >= 1");
  }
  const int64_t hidden = std::max<int64_t>(1, channels / reduction);
  TadaParams p;
  p.reduce = make_conv(channels, hidden, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, 1, /*with_bias=*/true);
  p.temporal = make_conv(hidden, hidden, {3, 1, 1}, {1, 1, 1}, {1, 0, 0}, hidden);
  p.expand = make_conv(hidden, channels, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, 1, /*with_bias=*/true);
  p.alpha = 0.0f;
  return p;
}

Tensor5 tada_gate(const Tensor5& x_dw, const Tensor5& x_ctx, const TadaParams& p) {
  p.validate();
  const Shape5& ds = x_dw.shape();
  const Shape5& cs = x_ctx.shape();
  if (ds.n != cs.n || ds.c != cs.c || ds.t != cs.t) {
    throw ShapeError("tada gate inputs must share (n, c, t): x_dw " + ds.str() + ", x_ctx " +
                     cs.str());
  }
  if (ds.c != p.channels()) {
    throw ShapeError("tada gate expects " + std::to_string(p.channels()) + " channels, got " +
                     std::to_string(ds.c));
  }
  const Tensor5 pooled = global_pool(x_ctx, PoolAxes::kSpatial);  // (n, c, t, 1, 1)
  const Tensor5 mid = activation(conv3d(pooled, p.reduce), Activation::kRelu);
  const Tensor5 agg = conv3d(mid, p.temporal);
  const Tensor5 g = conv3d(agg, p.expand);  // (n, c, t, 1, 1)
  Tensor5 y(ds);
  const int64_t hw = ds.h * ds.w;
  const float* in = x_dw.data();
  const float* gv = g.data();
  float* out = y.data();
  const float alpha = p.alpha;
  parallel_for(ds.n * ds.c * ds.t, [&](int64_t begin, int64_t end) {
    for (int64_t nct = begin; nct < end; ++nct) {
      // alpha = 0 gives factor exactly 1.0f, and x * 1.0f is bit-exact
      const float factor = 1.0f + alpha * gv[nct];
      const float* src = in + nct * hw;
      float* dst = out + nct * hw;
      for (int64_t i = 0; i < hw; ++i) dst[i] = src[i] * factor;
    }
  });
  return y;
}

}  // namespace xugt
