#include "xugt/conv.hpp"

#include <string>

#include "xugt/errors.hpp"
#include "xugt/runtime.hpp"

namespace xugt {

int64_t ConvParams::param_count() const {
  const Shape5& w = weights.shape();
  return w.n * w.c * w.t * w.h * w.w + static_cast<int64_t>(bias.size());
}

void ConvParams::validate() const {
  const Shape5& w = weights.shape();
  if (w.n < 1 || w.c < 1 || w.t < 1 || w.h < 1 || w.w < 1) {
    throw ConfigError("conv weights need positive dims, got " + w.str());
  }
  if (groups < 1) {
    throw ConfigError("conv groups must be >= 1, got " + std::to_string(groups));
  }
  if (w.n % groups != 0) {
    throw ConfigError("conv output channels " + std::to_string(w.n) +
                      " not divisible by groups " + std::to_string(groups));
  }
  if (!bias.empty() && static_cast<int64_t>(bias.size()) != w.n) {
    throw ConfigError("conv bias length " + std::to_string(bias.size()) +
                      " does not match output channels " + std::to_string(w.n));
  }
  for (int64_t s : stride) {
    if (s < 1) throw ConfigError("conv stride must be >= 1, got " + std::to_string(s));
  }
  for (int64_t p : padding) {
    if (p < 0) throw ConfigError("conv padding must be >= 0, got " + std::to_string(p));
  }
}

ConvParams make_conv(int64_t c_in, int64_t c_out, std::array<int64_t, 3> kernel,
                     std::array<int64_t, 3> stride, std::array<int64_t, 3> padding,
                     int64_t groups, bool with_bias) {
  if (groups < 1 || c_in % groups != 0) {
    throw ConfigError("conv input channels " + std::to_string(c_in) +
                      " not divisible by groups " + std::to_string(groups));
  }
  ConvParams p;
  p.weights = Tensor5(Shape5{c_out, c_in / groups, kernel[0], kernel[1], kernel[2]});
  if (with_bias) p.bias.assign(static_cast<size_t>(c_out), 0.0f);
  p.stride = stride;
  p.padding = padding;
  p.groups = groups;
  p.validate();
  return p;
}

Shape5 conv_output_shape(const Shape5& in, const ConvParams& p) {
  p.validate();
  if (in.n < 1) throw ShapeError("conv input batch must be >= 1, got " + in.str());
  if (in.c != p.in_channels()) {
    throw ShapeError("conv input channels: expected " + std::to_string(p.in_channels()) +
                     ", got " + std::to_string(in.c));
  }
  const auto k = p.kernel();
  auto out_dim = [&](int64_t d, int64_t kd, int64_t s, int64_t pad, const char* axis) {
    const int64_t span = d + 2 * pad - kd;
    if (span < 0) {
      throw ShapeError(std::string("conv ") + axis + " output would be empty: input " +
                       std::to_string(d) + ", kernel " + std::to_string(kd) + ", padding " +
                       std::to_string(pad));
    }
    return span / s + 1;  // floor; span >= 0 so plain integer division is floor
  };
  Shape5 out;
  out.n = in.n;
  out.c = p.out_channels();
  out.t = out_dim(in.t, k[0], p.stride[0], p.padding[0], "temporal");
  out.h = out_dim(in.h, k[1], p.stride[1], p.padding[1], "height");
  out.w = out_dim(in.w, k[2], p.stride[2], p.padding[2], "width");
  return out;
}

namespace {

// All kernels visit, per output element, the full nominal tap grid
// (ci, k_t, k_h, k_w) in ascending order with a single float accumulator.
// Taps in the zero padding are skipped after the bounds check, never by
// clipping the loop ranges, so the visited-tap count always equals
// c_in/groups * k_t * k_h * k_w and every path accumulates in the same order.

struct ConvGeom {
  Shape5 xs, ys;
  int64_t cig = 0, co_per_group = 0;
  int64_t kt = 0, kh = 0, kw = 0;
  int64_t st = 0, sh = 0, sw = 0;
  int64_t pt = 0, ph = 0, pw = 0;
  int64_t x_hw = 0, x_thw = 0;
};

ConvGeom make_geom(const Shape5& xs, const ConvParams& p, const Shape5& ys) {
  ConvGeom g;
  g.xs = xs;
  g.ys = ys;
  g.cig = p.group_in_channels();
  g.co_per_group = ys.c / p.groups;
  const auto k = p.kernel();
  g.kt = k[0];
  g.kh = k[1];
  g.kw = k[2];
  g.st = p.stride[0];
  g.sh = p.stride[1];
  g.sw = p.stride[2];
  g.pt = p.padding[0];
  g.ph = p.padding[1];
  g.pw = p.padding[2];
  g.x_hw = xs.h * xs.w;
  g.x_thw = xs.t * g.x_hw;
  return g;
}

// row index = ((n * c_out + co) * t_out + to) * h_out + ho
template <bool kCount>
void general_rows(const float* X, const float* W, const float* B, const ConvGeom& g, float* Y,
                  int64_t row_begin, int64_t row_end) {
  uint64_t taps = 0;
  for (int64_t row = row_begin; row < row_end; ++row) {
    int64_t rem = row;
    const int64_t ho = rem % g.ys.h;
    rem /= g.ys.h;
    const int64_t to = rem % g.ys.t;
    rem /= g.ys.t;
    const int64_t co = rem % g.ys.c;
    const int64_t n = rem / g.ys.c;
    const float* xg = X + n * g.xs.c * g.x_thw + (co / g.co_per_group) * g.cig * g.x_thw;
    const float* wc = W + co * g.cig * g.kt * g.kh * g.kw;
    const int64_t t0 = to * g.st - g.pt;
    const int64_t h0 = ho * g.sh - g.ph;
    const bool th_in = t0 >= 0 && t0 + g.kt <= g.xs.t && h0 >= 0 && h0 + g.kh <= g.xs.h;
    float* yrow = Y + row * g.ys.w;
    for (int64_t wo = 0; wo < g.ys.w; ++wo) {
      const int64_t w0 = wo * g.sw - g.pw;
      float acc = 0.0f;
      const float* wk = wc;
      if (th_in && w0 >= 0 && w0 + g.kw <= g.xs.w) {
        // interior element: footprint fully in-bounds, taps need no checks
        for (int64_t ci = 0; ci < g.cig; ++ci) {
          const float* xc = xg + ci * g.x_thw + t0 * g.x_hw + h0 * g.xs.w + w0;
          for (int64_t kt = 0; kt < g.kt; ++kt) {
            const float* xt = xc + kt * g.x_hw;
            for (int64_t kh = 0; kh < g.kh; ++kh) {
              const float* xr = xt + kh * g.xs.w;
              for (int64_t kw = 0; kw < g.kw; ++kw) {
                if (kCount) ++taps;
                acc += *wk++ * xr[kw];
              }
            }
          }
        }
      } else {
        for (int64_t ci = 0; ci < g.cig; ++ci) {
          const float* xc = xg + ci * g.x_thw;
          for (int64_t kt = 0; kt < g.kt; ++kt) {
            const int64_t ti = t0 + kt;
            const bool t_in = ti >= 0 && ti < g.xs.t;
            for (int64_t kh = 0; kh < g.kh; ++kh) {
              const int64_t hi = h0 + kh;
              const bool h_in = hi >= 0 && hi < g.xs.h;
              for (int64_t kw = 0; kw < g.kw; ++kw, ++wk) {
                if (kCount) ++taps;
                const int64_t wi = w0 + kw;
                if (!t_in || !h_in || wi < 0 || wi >= g.xs.w) continue;
                acc += *wk * xc[ti * g.x_hw + hi * g.xs.w + wi];
              }
            }
          }
        }
      }
      if (B) acc += B[co];
      yrow[wo] = acc;
    }
  }
  if (kCount) instr::add_macs(taps);
}

template <bool kCount>
void pointwise_rows(const float* X, const float* W, const float* B, const ConvGeom& g, float* Y,
                    int64_t row_begin, int64_t row_end) {
  uint64_t taps = 0;
  for (int64_t row = row_begin; row < row_end; ++row) {
    int64_t rem = row;
    const int64_t ho = rem % g.ys.h;
    rem /= g.ys.h;
    const int64_t to = rem % g.ys.t;
    rem /= g.ys.t;
    const int64_t co = rem % g.ys.c;
    const int64_t n = rem / g.ys.c;
    const float* xg = X + n * g.xs.c * g.x_thw + (co / g.co_per_group) * g.cig * g.x_thw +
                      (to * g.st) * g.x_hw + (ho * g.sh) * g.xs.w;
    const float* wc = W + co * g.cig;
    const float bias = B ? B[co] : 0.0f;
    float* yrow = Y + row * g.ys.w;
    for (int64_t wo = 0; wo < g.ys.w; ++wo) {
      const float* xp = xg + wo * g.sw;
      float acc = 0.0f;
      for (int64_t ci = 0; ci < g.cig; ++ci) {
        if (kCount) ++taps;
        acc += wc[ci] * xp[ci * g.x_thw];
      }
      if (B) acc += bias;
      yrow[wo] = acc;
    }
  }
  if (kCount) instr::add_macs(taps);
}

// groups == c_in: each output channel reads exactly one input channel.
template <bool kCount>
void depthwise_rows(const float* X, const float* W, const float* B, const ConvGeom& g, float* Y,
                    int64_t row_begin, int64_t row_end) {
  uint64_t taps = 0;
  for (int64_t row = row_begin; row < row_end; ++row) {
    int64_t rem = row;
    const int64_t ho = rem % g.ys.h;
    rem /= g.ys.h;
    const int64_t to = rem % g.ys.t;
    rem /= g.ys.t;
    const int64_t co = rem % g.ys.c;
    const int64_t n = rem / g.ys.c;
    const float* xc = X + n * g.xs.c * g.x_thw + (co / g.co_per_group) * g.x_thw;
    const float* wc = W + co * g.kt * g.kh * g.kw;
    const int64_t t0 = to * g.st - g.pt;
    const int64_t h0 = ho * g.sh - g.ph;
    const bool th_in = t0 >= 0 && t0 + g.kt <= g.xs.t && h0 >= 0 && h0 + g.kh <= g.xs.h;
    float* yrow = Y + row * g.ys.w;
    for (int64_t wo = 0; wo < g.ys.w; ++wo) {
      const int64_t w0 = wo * g.sw - g.pw;
      float acc = 0.0f;
      const float* wk = wc;
      if (th_in && w0 >= 0 && w0 + g.kw <= g.xs.w) {
        const float* xb = xc + t0 * g.x_hw + h0 * g.xs.w + w0;
        for (int64_t kt = 0; kt < g.kt; ++kt) {
          const float* xt = xb + kt * g.x_hw;
          for (int64_t kh = 0; kh < g.kh; ++kh) {
            const float* xr = xt + kh * g.xs.w;
            for (int64_t kw = 0; kw < g.kw; ++kw) {
              if (kCount) ++taps;
              acc += *wk++ * xr[kw];
            }
          }
        }
      } else {
        for (int64_t kt = 0; kt < g.kt; ++kt) {
          const int64_t ti = t0 + kt;
          const bool t_in = ti >= 0 && ti < g.xs.t;
          for (int64_t kh = 0; kh < g.kh; ++kh) {
            const int64_t hi = h0 + kh;
            const bool h_in = hi >= 0 && hi < g.xs.h;
            for (int64_t kw = 0; kw < g.kw; ++kw, ++wk) {
              if (kCount) ++taps;
              const int64_t wi = w0 + kw;
              if (!t_in || !h_in || wi < 0 || wi >= g.xs.w) continue;
              acc += *wk * xc[ti * g.x_hw + hi * g.xs.w + wi];
            }
          }
        }
      }
      if (B) acc += B[co];
      yrow[wo] = acc;
    }
  }
  if (kCount) instr::add_macs(taps);
}

enum class Path { kGeneral, kPointwise, kDepthwise };

Tensor5 run_conv(const Tensor5& x, const ConvParams& p, Path path) {
  const Shape5 ys = conv_output_shape(x.shape(), p);
  Tensor5 y(ys);
  const ConvGeom g = make_geom(x.shape(), p, ys);
  const float* X = x.data();
  const float* W = p.weights.data();
  const float* B = p.has_bias() ? p.bias.data() : nullptr;
  float* Y = y.data();
  const int64_t rows = ys.n * ys.c * ys.t * ys.h;
  const bool count = instr::mac_counter_enabled();
  parallel_for(rows, [&](int64_t begin, int64_t end) {
    switch (path) {
      case Path::kPointwise:
        count ? pointwise_rows<true>(X, W, B, g, Y, begin, end)
              : pointwise_rows<false>(X, W, B, g, Y, begin, end);
        break;
      case Path::kDepthwise:
        count ? depthwise_rows<true>(X, W, B, g, Y, begin, end)
              : depthwise_rows<false>(X, W, B, g, Y, begin, end);
        break;
      case Path::kGeneral:
        count ? general_rows<true>(X, W, B, g, Y, begin, end)
              : general_rows<false>(X, W, B, g, Y, begin, end);
        break;
    }
  });
  return y;
}

bool is_pointwise(const ConvParams& p) {
  const auto k = p.kernel();
  return k == std::array<int64_t, 3>{1, 1, 1} && p.padding == std::array<int64_t, 3>{0, 0, 0} &&
         p.stride == std::array<int64_t, 3>{1, 1, 1};
}

bool is_depthwise(const ConvParams& p) {
  return p.group_in_channels() == 1 && p.groups == p.in_channels();
}

}  // namespace

Tensor5 conv3d_naive(const Tensor5& x, const ConvParams& p) {
  // Deliberately shares no code with the dispatched kernels: a direct loop
  // nest over output elements and taps, used as the oracle they are all
  // compared against.
  const Shape5 ys = conv_output_shape(x.shape(), p);
  const Shape5 xs = x.shape();
  Tensor5 y(ys);
  const auto k = p.kernel();
  const int64_t cig = p.group_in_channels();
  const int64_t co_per_group = ys.c / p.groups;
  const bool counting = instr::mac_counter_enabled();
  uint64_t taps = 0;
  for (int64_t n = 0; n < ys.n; ++n) {
    for (int64_t co = 0; co < ys.c; ++co) {
      const int64_t ci_base = (co / co_per_group) * cig;
      for (int64_t to = 0; to < ys.t; ++to) {
        for (int64_t ho = 0; ho < ys.h; ++ho) {
          for (int64_t wo = 0; wo < ys.w; ++wo) {
            float acc = 0.0f;
            for (int64_t ci = 0; ci < cig; ++ci) {
              for (int64_t kt = 0; kt < k[0]; ++kt) {
                for (int64_t kh = 0; kh < k[1]; ++kh) {
                  for (int64_t kw = 0; kw < k[2]; ++kw) {
                    if (counting) ++taps;
                    const int64_t ti = to * p.stride[0] - p.padding[0] + kt;
                    const int64_t hi = ho * p.stride[1] - p.padding[1] + kh;
                    const int64_t wi = wo * p.stride[2] - p.padding[2] + kw;
                    if (ti < 0 || ti >= xs.t || hi < 0 || hi >= xs.h || wi < 0 || wi >= xs.w) {
                      continue;  // tap in the zero padding
                    }
                    acc += p.weights.at(co, ci, kt, kh, kw) * x.at(n, ci_base + ci, ti, hi, wi);
                  }
                }
              }
            }
            if (p.has_bias()) acc += p.bias[co];
            y.at(n, co, to, ho, wo) = acc;
          }
        }
      }
    }
  }
  if (counting) instr::add_macs(taps);
  return y;
}

Tensor5 conv3d(const Tensor5& x, const ConvParams& p) {
  if (is_pointwise(p)) return run_conv(x, p, Path::kPointwise);
  if (is_depthwise(p)) return run_conv(x, p, Path::kDepthwise);
  return run_conv(x, p, Path::kGeneral);
}

Tensor5 pointwise_conv(const Tensor5& x, const ConvParams& p) {
  if (!is_pointwise(p)) {
    throw ShapeError("pointwise_conv requires kernel (1,1,1), unit stride, zero padding");
  }
  return run_conv(x, p, Path::kPointwise);
}

Tensor5 depthwise_conv3d(const Tensor5& x, const ConvParams& p) {
  if (!is_depthwise(p) || p.out_channels() != p.in_channels()) {
    throw ShapeError("depthwise_conv3d requires groups == input channels == output channels");
  }
  return run_conv(x, p, Path::kDepthwise);
}

}  // namespace xugt
