#include "xugt/block.hpp"

#include <cmath>

#include "xugt/errors.hpp"
#include "xugt/runtime.hpp"

namespace xugt {

int64_t BlockSpec::expanded_width() const {
  const int64_t w = static_cast<int64_t>(std::floor(expansion * static_cast<double>(c_in) + 0.5));
  return w < 8 ? 8 : w;
}

void BlockSpec::validate() const {
  if (c_in < 1 || c_out < 1) {
    throw ConfigError("block channels must be >= 1, got c_in=" + std::to_string(c_in) +
                      ", c_out=" + std::to_string(c_out));
  }
  if (!(expansion > 0.0)) throw ConfigError("block expansion must be positive");
  if (spatial_stride != 1 && spatial_stride != 2) {
    throw ConfigError("block spatial_stride must be 1 or 2, got " +
                      std::to_string(spatial_stride));
  }
  if (pre_dw_kernel != 0 && (pre_dw_kernel < 1 || pre_dw_kernel % 2 == 0)) {
    throw ConfigError("block pre_dw_kernel must be 0 (absent) or odd, got " +
                      std::to_string(pre_dw_kernel));
  }
  if (mid_dw_spatial < 1 || mid_dw_spatial % 2 == 0) {
    throw ConfigError("block mid_dw_spatial must be odd, got " + std::to_string(mid_dw_spatial));
  }
  if (ghost_ratio < 1) throw ConfigError("block ghost_ratio must be >= 1");
  if (shift_fold_div < 1) throw ConfigError("block shift_fold_div must be >= 1");
  if (use_shift && c_in < shift_fold_div) {
    throw ConfigError("block use_shift needs c_in >= shift_fold_div, got c_in=" +
                      std::to_string(c_in) + ", fold_div=" + std::to_string(shift_fold_div));
  }
}

int64_t BlockParams::param_count() const {
  int64_t total = 0;
  if (pre_dw) total += pre_dw->param_count() + pre_affine.param_count();
  total += expand.param_count() + expand_affine.param_count();
  total += temporal_dw.param_count() + spatial_dw.param_count() + dw_affine.param_count();
  if (tada) total += tada->param_count();
  if (se) total += se->param_count();
  total += project.param_count() + project_affine.param_count();
  if (shortcut) total += shortcut->param_count();
  return total;
}

Block make_block(const BlockSpec& spec) {
  spec.validate();
  const int64_t c_exp = spec.expanded_width();
  const int64_t s = spec.spatial_stride;
  const int64_t mk = spec.mid_dw_spatial;
  const int64_t mpad = mk / 2;
  Block b;
  b.spec = spec;
  BlockParams& p = b.params;
  if (spec.pre_dw_kernel > 0) {
    const int64_t k = spec.pre_dw_kernel;
    // the pre-depthwise stage carries the spatial stride when present
    p.pre_dw = make_conv(spec.c_in, spec.c_in, {1, k, k}, {1, s, s}, {0, k / 2, k / 2}, spec.c_in);
    p.pre_affine = make_affine(spec.c_in);
  }
  p.expand = make_ghost(spec.c_in, c_exp, spec.ghost_ratio);
  p.expand_affine = make_affine(c_exp);
  p.temporal_dw = make_conv(c_exp, c_exp, {3, 1, 1}, {1, 1, 1}, {1, 0, 0}, c_exp);
  const int64_t mid_stride = spec.pre_dw_kernel > 0 ? 1 : s;
  p.spatial_dw =
      make_conv(c_exp, c_exp, {1, mk, mk}, {1, mid_stride, mid_stride}, {0, mpad, mpad}, c_exp);
  p.dw_affine = make_affine(c_exp);
  if (spec.use_tada) p.tada = make_tada(c_exp);
  if (spec.use_se) p.se = make_se(c_exp);
  p.project = make_ghost(c_exp, spec.c_out, spec.ghost_ratio);
  p.project_affine = make_affine(spec.c_out);
  if (s != 1 || spec.c_in != spec.c_out) {
    p.shortcut = make_ghost(spec.c_in, spec.c_out, spec.ghost_ratio);
  }
  return b;
}

Shape5 block_output_shape(const Shape5& in, const BlockSpec& spec) {
  spec.validate();
  if (in.c != spec.c_in) {
    throw ShapeError("block expects " + std::to_string(spec.c_in) + " input channels, got " +
                     std::to_string(in.c));
  }
  const int64_t s = spec.spatial_stride;
  // same-padded stride-s convs map d to ceil(d / s)
  return Shape5{in.n, spec.c_out, in.t, (in.h + s - 1) / s, (in.w + s - 1) / s};
}

Tensor5 factorized_mid_dw(const Tensor5& x, const ConvParams& temporal, const ConvParams& spatial) {
  return depthwise_conv3d(depthwise_conv3d(x, temporal), spatial);
}

Tensor5 spatial_subsample(const Tensor5& x, int64_t stride) {
  if (stride < 1) throw ShapeError("subsample stride must be >= 1, got " + std::to_string(stride));
  if (stride == 1) return x;
  const Shape5& s = x.shape();
  Shape5 os{s.n, s.c, s.t, (s.h + stride - 1) / stride, (s.w + stride - 1) / stride};
  Tensor5 y(os);
  const float* in = x.data();
  float* out = y.data();
  parallel_for(os.n * os.c * os.t, [&](int64_t begin, int64_t end) {
    for (int64_t nct = begin; nct < end; ++nct) {
      const float* src = in + nct * s.h * s.w;
      float* dst = out + nct * os.h * os.w;
      for (int64_t h = 0; h < os.h; ++h) {
        const float* row = src + h * stride * s.w;
        for (int64_t w = 0; w < os.w; ++w) dst[h * os.w + w] = row[w * stride];
      }
    }
  });
  return y;
}

namespace {

void validate_block_params(const BlockSpec& spec, const BlockParams& p) {
  const bool pre_present = p.pre_dw.has_value();
  if (pre_present != (spec.pre_dw_kernel > 0)) {
    throw ConfigError("block pre_dw stage presence does not match its settings");
  }
  if (spec.spatial_stride > 1 && pre_present) {
    const bool pre_strided = p.pre_dw->stride[1] > 1 || p.pre_dw->stride[2] > 1;
    const bool mid_strided = p.spatial_dw.stride[1] > 1 || p.spatial_dw.stride[2] > 1;
    if (pre_strided && mid_strided) {
      throw ConfigError("block stride placed in both pre_dw and spatial_dw");
    }
  }
  const int64_t c_exp = spec.expanded_width();
  if (p.expand.in_channels() != spec.c_in || p.expand.out_channels() != c_exp) {
    throw ConfigError("block expand stage must map " + std::to_string(spec.c_in) + " -> " +
                      std::to_string(c_exp) + " channels");
  }
  if (p.project.in_channels() != c_exp || p.project.out_channels() != spec.c_out) {
    throw ConfigError("block project stage must map " + std::to_string(c_exp) + " -> " +
                      std::to_string(spec.c_out) + " channels");
  }
  if (spec.use_tada != p.tada.has_value() || spec.use_se != p.se.has_value()) {
    throw ConfigError("block gate stages do not match their enable flags");
  }
  const bool need_shortcut = spec.spatial_stride != 1 || spec.c_in != spec.c_out;
  if (need_shortcut != p.shortcut.has_value()) {
    throw ConfigError("block shortcut presence does not match the in/out shapes");
  }
}

Tensor5 add_residual(const Tensor5& main, const Tensor5& shortcut) {
  require_shape(shortcut.shape(), main.shape(), "block residual");
  Tensor5 y(main.shape());
  const float* a = main.data();
  const float* b = shortcut.data();
  float* out = y.data();
  parallel_for(main.numel(), [&](int64_t begin, int64_t end) {
    for (int64_t i = begin; i < end; ++i) out[i] = a[i] + b[i];
  });
  return y;
}

}  // namespace

Tensor5 uib_forward(const Tensor5& x, const BlockSpec& spec, const BlockParams& p) {
  spec.validate();
  validate_block_params(spec, p);
  if (x.shape().c != spec.c_in) {
    throw ShapeError("block expects " + std::to_string(spec.c_in) + " input channels, got " +
                     std::to_string(x.shape().c));
  }
  // shift applies to the main path only; the residual sees the raw input
  Tensor5 main = spec.use_shift ? temporal_shift(x, spec.shift_fold_div) : x;
  if (p.pre_dw) {
    main = affine_channel(conv3d(main, *p.pre_dw), p.pre_affine);
  }
  main = activation(affine_channel(ghost_pointwise(main, p.expand), p.expand_affine), spec.act);
  const Tensor5 ctx = main;  // gate context: the feature entering the depthwise pair
  main = factorized_mid_dw(main, p.temporal_dw, p.spatial_dw);
  main = activation(affine_channel(main, p.dw_affine), spec.act);
  if (p.tada) main = tada_gate(main, ctx, *p.tada);
  if (p.se) main = squeeze_excite(main, *p.se);
  main = affine_channel(ghost_pointwise(main, p.project), p.project_affine);
  if (p.shortcut) {
    return add_residual(main,
                        ghost_pointwise(spatial_subsample(x, spec.spatial_stride), *p.shortcut));
  }
  return add_residual(main, x);
}

}  // namespace xugt
