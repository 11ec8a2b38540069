#include "xugt/selfcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "xugt/block.hpp"
#include "xugt/conv.hpp"
#include "xugt/cost.hpp"
#include "xugt/loss.hpp"
#include "xugt/ops.hpp"
#include "xugt/primitives.hpp"
#include "xugt/rng.hpp"
#include "xugt/runtime.hpp"

namespace xugt {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_diff(double value) {
  std::ostringstream out;
  out.setf(std::ios::scientific);
  out.precision(2);
  out << value;
  return out.str();
}

uint64_t suite_seed(const CheckOptions& opt, std::string_view suite) {
  return fnv1a64(suite) ^ opt.seed;
}

void fill_uniform(Tensor5& t, ParamRng& rng, float bound) {
  float* p = t.data();
  for (int64_t i = 0; i < t.numel(); ++i) p[i] = rng.uniform(bound);
}

void fill_uniform(std::vector<float>& v, ParamRng& rng, float bound) {
  for (float& x : v) x = rng.uniform(bound);
}

int64_t rand_in(ParamRng& rng, int64_t lo, int64_t hi) {
  // Inclusive range from the generator's raw stream.
  return lo + static_cast<int64_t>(rng.raw() % static_cast<uint64_t>(hi - lo + 1));
}

double max_abs_diff(const Tensor5& a, const Tensor5& b) {
  if (!(a.shape() == b.shape())) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  const float* pa = a.data();
  const float* pb = b.data();
  for (int64_t i = 0; i < a.numel(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(pa[i]) - static_cast<double>(pb[i])));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// conv-oracle-equivalence
// ---------------------------------------------------------------------------

// Families covered: pointwise, depthwise, ghost, SE, TAda gate, factorized
// (temporal then spatial) depthwise.  Paths that share the naive accumulation
// order must agree bitwise (diff 0); the separable cross-check reassociates
// the sum and gets a small tolerance.
struct FamilyStats {
  double exact_worst = 0.0;   // paths expected to be bit-equal to the oracle
  double approx_worst = 0.0;  // reassociated cross-checks, tolerance 1e-5
  int instances = 0;
};

void run_pointwise_family(ParamRng& rng, FamilyStats& st) {
  for (int i = 0; i < 100; ++i) {
    int64_t n = rand_in(rng, 1, 2), ci = rand_in(rng, 1, 8), co = rand_in(rng, 1, 8);
    int64_t t = rand_in(rng, 1, 4), h = rand_in(rng, 1, 8), w = rand_in(rng, 1, 8);
    int64_t groups = 1;
    if (ci % 2 == 0 && co % 2 == 0 && rand_in(rng, 0, 3) == 0) groups = 2;
    bool bias = rand_in(rng, 0, 1) == 1;
    ConvParams conv = make_conv(ci, co, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, groups, bias);
    fill_uniform(conv.weights, rng, 1.0f);
    fill_uniform(conv.bias, rng, 1.0f);
    Tensor5 x(Shape5{n, ci, t, h, w});
    fill_uniform(x, rng, 1.0f);
    st.exact_worst = std::max(st.exact_worst, max_abs_diff(pointwise_conv(x, conv), conv3d_naive(x, conv)));
    ++st.instances;
  }
}

void run_depthwise_family(ParamRng& rng, FamilyStats& st) {
  for (int i = 0; i < 100; ++i) {
    int64_t n = rand_in(rng, 1, 2), c = rand_in(rng, 1, 8);
    int64_t kt = rand_in(rng, 0, 1) == 0 ? 1 : 3;
    int64_t kh = rand_in(rng, 0, 1) == 0 ? 1 : 3;
    int64_t kw = rand_in(rng, 0, 1) == 0 ? 1 : 3;
    int64_t t = rand_in(rng, kt, 4), h = rand_in(rng, kh, 8), w = rand_in(rng, kw, 8);
    int64_t ss = rand_in(rng, 1, 2);
    std::array<int64_t, 3> pad{rand_in(rng, 0, 1) == 0 ? 0 : kt / 2,
                               rand_in(rng, 0, 1) == 0 ? 0 : kh / 2,
                               rand_in(rng, 0, 1) == 0 ? 0 : kw / 2};
    bool bias = rand_in(rng, 0, 1) == 1;
    ConvParams conv = make_conv(c, c, {kt, kh, kw}, {1, ss, ss}, pad, c, bias);
    fill_uniform(conv.weights, rng, 1.0f);
    fill_uniform(conv.bias, rng, 1.0f);
    Tensor5 x(Shape5{n, c, t, h, w});
    fill_uniform(x, rng, 1.0f);
    st.exact_worst = std::max(st.exact_worst, max_abs_diff(depthwise_conv3d(x, conv), conv3d_naive(x, conv)));
    ++st.instances;
  }
}

void run_ghost_family(ParamRng& rng, FamilyStats& st) {
  for (int i = 0; i < 100; ++i) {
    int64_t n = rand_in(rng, 1, 2), ci = rand_in(rng, 1, 8);
    int64_t ratio = rand_in(rng, 0, 3) == 0 ? 1 : 2;
    int64_t co = ratio == 1 ? rand_in(rng, 1, 8) : 2 * rand_in(rng, 1, 4);
    int64_t t = rand_in(rng, 1, 4), h = rand_in(rng, 1, 8), w = rand_in(rng, 1, 8);
    GhostParams ghost = make_ghost(ci, co, ratio, 3);
    fill_uniform(ghost.primary.weights, rng, 1.0f);
    if (ghost.has_cheap()) fill_uniform(ghost.cheap.weights, rng, 1.0f);
    Tensor5 x(Shape5{n, ci, t, h, w});
    fill_uniform(x, rng, 1.0f);

    Tensor5 got = ghost_pointwise(x, ghost);
    // Oracle: naive primary, naive cheap branch, explicit concat.
    Tensor5 primary = conv3d_naive(x, ghost.primary);
    Tensor5 want(Shape5{n, co, t, h, w});
    const int64_t m = ghost.primary_channels();
    if (ghost.has_cheap()) {
      Tensor5 cheap = conv3d_naive(primary, ghost.cheap);
      for (int64_t b = 0; b < n; ++b) {
        for (int64_t cc = 0; cc < co; ++cc) {
          const Tensor5& src = cc < m ? primary : cheap;
          int64_t sc = cc < m ? cc : cc - m;
          for (int64_t tt = 0; tt < t; ++tt)
            for (int64_t hh = 0; hh < h; ++hh)
              for (int64_t ww = 0; ww < w; ++ww)
                want.at(b, cc, tt, hh, ww) = src.at(b, sc, tt, hh, ww);
        }
      }
    } else {
      want = primary;
    }
    st.exact_worst = std::max(st.exact_worst, max_abs_diff(got, want));
    ++st.instances;
  }
}

void run_se_family(ParamRng& rng, FamilyStats& st) {
  for (int i = 0; i < 100; ++i) {
    int64_t n = rand_in(rng, 1, 2), c = rand_in(rng, 1, 8);
    int64_t t = rand_in(rng, 1, 4), h = rand_in(rng, 1, 8), w = rand_in(rng, 1, 8);
    int64_t reduction = rand_in(rng, 0, 1) == 0 ? 2 : 4;
    int64_t min_hidden = rand_in(rng, 0, 1) == 0 ? 1 : 4;
    SEParams se = make_se(c, reduction, min_hidden);
    fill_uniform(se.reduce.weights, rng, 1.0f);
    fill_uniform(se.reduce.bias, rng, 1.0f);
    fill_uniform(se.expand.weights, rng, 1.0f);
    fill_uniform(se.expand.bias, rng, 1.0f);
    Tensor5 x(Shape5{n, c, t, h, w});
    fill_uniform(x, rng, 1.0f);

    Tensor5 got = squeeze_excite(x, se);
    // Oracle composition with naive convolutions.
    Tensor5 pooled = global_pool(x, PoolAxes::kSpatiotemporal);
    Tensor5 mid = activation(conv3d_naive(pooled, se.reduce), Activation::kRelu);
    Tensor5 gate = activation(conv3d_naive(mid, se.expand), Activation::kSigmoid);
    Tensor5 want(x.shape());
    for (int64_t b = 0; b < n; ++b)
      for (int64_t cc = 0; cc < c; ++cc)
        for (int64_t tt = 0; tt < t; ++tt)
          for (int64_t hh = 0; hh < h; ++hh)
            for (int64_t ww = 0; ww < w; ++ww)
              want.at(b, cc, tt, hh, ww) = x.at(b, cc, tt, hh, ww) * gate.at(b, cc, 0, 0, 0);
    st.exact_worst = std::max(st.exact_worst, max_abs_diff(got, want));
    ++st.instances;
  }
}

void run_tada_family(ParamRng& rng, FamilyStats& st) {
  for (int i = 0; i < 100; ++i) {
    int64_t n = rand_in(rng, 1, 2), c = rand_in(rng, 1, 8);
    int64_t t = rand_in(rng, 1, 4);
    int64_t h = rand_in(rng, 1, 8), w = rand_in(rng, 1, 8);
    int64_t hc = rand_in(rng, 1, 8), wc = rand_in(rng, 1, 8);  // context may differ spatially
    TadaParams tada = make_tada(c, 4);
    fill_uniform(tada.reduce.weights, rng, 1.0f);
    fill_uniform(tada.reduce.bias, rng, 1.0f);
    fill_uniform(tada.temporal.weights, rng, 1.0f);
    fill_uniform(tada.expand.weights, rng, 1.0f);
    fill_uniform(tada.expand.bias, rng, 1.0f);
    tada.alpha = rand_in(rng, 0, 2) == 0 ? 0.0f : rng.uniform(0.5f);
    Tensor5 x(Shape5{n, c, t, h, w});
    Tensor5 ctx(Shape5{n, c, t, hc, wc});
    fill_uniform(x, rng, 1.0f);
    fill_uniform(ctx, rng, 1.0f);

    Tensor5 got = tada_gate(x, ctx, tada);
    // Oracle composition with naive convolutions.
    Tensor5 pooled = global_pool(ctx, PoolAxes::kSpatial);
    Tensor5 mid = activation(conv3d_naive(pooled, tada.reduce), Activation::kRelu);
    Tensor5 g = conv3d_naive(mid, tada.temporal);
    g = conv3d_naive(g, tada.expand);
    Tensor5 want(x.shape());
    for (int64_t b = 0; b < n; ++b)
      for (int64_t cc = 0; cc < c; ++cc)
        for (int64_t tt = 0; tt < t; ++tt) {
          float factor = 1.0f + tada.alpha * g.at(b, cc, tt, 0, 0);
          for (int64_t hh = 0; hh < h; ++hh)
            for (int64_t ww = 0; ww < w; ++ww)
              want.at(b, cc, tt, hh, ww) = x.at(b, cc, tt, hh, ww) * factor;
        }
    st.exact_worst = std::max(st.exact_worst, max_abs_diff(got, want));
    ++st.instances;
  }
}

void run_factorized_family(ParamRng& rng, FamilyStats& st) {
  for (int i = 0; i < 100; ++i) {
    int64_t n = rand_in(rng, 1, 2), c = rand_in(rng, 1, 8);
    int64_t t = rand_in(rng, 1, 4), h = rand_in(rng, 3, 8), w = rand_in(rng, 3, 8);
    int64_t ss = rand_in(rng, 1, 2);
    ConvParams temporal = make_conv(c, c, {3, 1, 1}, {1, 1, 1}, {1, 0, 0}, c, false);
    ConvParams spatial = make_conv(c, c, {1, 3, 3}, {1, ss, ss}, {0, 1, 1}, c, false);
    fill_uniform(temporal.weights, rng, 1.0f);
    fill_uniform(spatial.weights, rng, 1.0f);
    Tensor5 x(Shape5{n, c, t, h, w});
    fill_uniform(x, rng, 1.0f);

    Tensor5 got = factorized_mid_dw(x, temporal, spatial);
    Tensor5 want = conv3d_naive(conv3d_naive(x, temporal), spatial);
    st.exact_worst = std::max(st.exact_worst, max_abs_diff(got, want));

    // Cross-check against the equivalent full (3,3,3) depthwise kernel built
    // as the outer product of the two factors; the summation order differs so
    // this one carries a tolerance.
    ConvParams full = make_conv(c, c, {3, 3, 3}, {1, ss, ss}, {1, 1, 1}, c, false);
    for (int64_t cc = 0; cc < c; ++cc)
      for (int64_t kt = 0; kt < 3; ++kt)
        for (int64_t kh = 0; kh < 3; ++kh)
          for (int64_t kw = 0; kw < 3; ++kw)
            full.weights.at(cc, 0, kt, kh, kw) =
                temporal.weights.at(cc, 0, kt, 0, 0) * spatial.weights.at(cc, 0, 0, kh, kw);
    st.approx_worst = std::max(st.approx_worst, max_abs_diff(got, conv3d_naive(x, full)));
    ++st.instances;
  }
}

CheckResult conv_oracle_impl(const CheckOptions& opt) {
  CheckResult result;
  result.name = "conv-oracle-equivalence";
  auto start = Clock::now();
  ParamRng rng(suite_seed(opt, "conv-oracle-equivalence"));

  FamilyStats st;
  run_pointwise_family(rng, st);
  run_depthwise_family(rng, st);
  run_ghost_family(rng, st);
  run_se_family(rng, st);
  run_tada_family(rng, st);
  run_factorized_family(rng, st);

  bool exact_ok = st.exact_worst == 0.0;
  bool approx_ok = st.approx_worst <= 1e-5;
  result.pass = exact_ok && approx_ok;
  std::ostringstream detail;
  detail << "6 families, " << st.instances << " instances; max|diff| shared-order "
         << format_diff(st.exact_worst) << " (want 0), reassociated "
         << format_diff(st.approx_worst) << " (want <= 1e-05)";
  result.detail = detail.str();
  result.seconds = elapsed(start);
  return result;
}

// ---------------------------------------------------------------------------
// shift-permutation
// ---------------------------------------------------------------------------

CheckResult shift_permutation_impl(const CheckOptions& opt) {
  CheckResult result;
  result.name = "shift-permutation";
  auto start = Clock::now();
  ParamRng rng(suite_seed(opt, "shift-permutation"));

  // Under fault injection the expected roles of the two folds are swapped,
  // which is exactly what a reversed-direction implementation would produce.
  const bool reversed = opt.fault == Fault::kShiftDirection;

  int cases = 0;
  for (int64_t fold_div : {2, 4, 8}) {
    for (int64_t c = fold_div; c <= 16; ++c) {
      for (int64_t t = 1; t <= 8; ++t) {
        Tensor5 x(Shape5{2, c, t, 3, 2});
        fill_uniform(x, rng, 1.0f);
        Tensor5 y = temporal_shift(x, fold_div);
        const int64_t fold = c / fold_div;
        const int64_t fwd_end = std::min(2 * fold, c);
        for (int64_t n = 0; n < 2; ++n) {
          for (int64_t cc = 0; cc < c; ++cc) {
            bool backward = cc < fold;
            bool forward = cc >= fold && cc < fwd_end;
            if (reversed) std::swap(backward, forward);
            for (int64_t tt = 0; tt < t; ++tt) {
              for (int64_t hh = 0; hh < 3; ++hh) {
                for (int64_t ww = 0; ww < 2; ++ww) {
                  float want;
                  if (backward) {
                    want = tt + 1 < t ? x.at(n, cc, tt + 1, hh, ww) : 0.0f;
                  } else if (forward) {
                    want = tt > 0 ? x.at(n, cc, tt - 1, hh, ww) : 0.0f;
                  } else {
                    want = x.at(n, cc, tt, hh, ww);
                  }
                  if (y.at(n, cc, tt, hh, ww) != want) {
                    result.pass = false;
                    std::ostringstream detail;
                    detail << "mismatch at (n=" << n << ",c=" << cc << ",t=" << tt
                           << ") for c=" << c << " t=" << t << " fold_div=" << fold_div
                           << ": expected channels [0,fold) to read from t+1 and "
                              "[fold,2*fold) from t-1 with zero fill at the ends";
                    result.detail = detail.str();
                    result.seconds = elapsed(start);
                    return result;
                  }
                }
              }
            }
          }
        }

        // Interior recovery: swapping the two fold blocks turns the shift into
        // its opposite, so shift-swap-shift-swap restores every interior frame.
        if (fold > 0 && fwd_end == 2 * fold) {
          auto swap_folds = [&](Tensor5& v) {
            for (int64_t n = 0; n < 2; ++n)
              for (int64_t cc = 0; cc < fold; ++cc)
                for (int64_t tt = 0; tt < t; ++tt)
                  for (int64_t hh = 0; hh < 3; ++hh)
                    for (int64_t ww = 0; ww < 2; ++ww)
                      std::swap(v.at(n, cc, tt, hh, ww), v.at(n, cc + fold, tt, hh, ww));
          };
          Tensor5 round = y;
          swap_folds(round);
          round = temporal_shift(round, fold_div);
          swap_folds(round);
          for (int64_t n = 0; n < 2 && result.detail.empty(); ++n)
            for (int64_t cc = 0; cc < c; ++cc)
              for (int64_t tt = 1; tt + 1 < t; ++tt)
                for (int64_t hh = 0; hh < 3; ++hh)
                  for (int64_t ww = 0; ww < 2; ++ww)
                    if (round.at(n, cc, tt, hh, ww) != x.at(n, cc, tt, hh, ww)) {
                      result.pass = false;
                      result.detail = "interior frame not recovered by opposite-shift composition";
                      result.seconds = elapsed(start);
                      return result;
                    }
        }
        ++cases;
      }
    }
  }

  result.pass = true;
  std::ostringstream detail;
  detail << cases << " (c,t,fold_div) grids verified element-wise, interior recovery included";
  result.detail = detail.str();
  result.seconds = elapsed(start);
  return result;
}

// ---------------------------------------------------------------------------
// tada-identity
// ---------------------------------------------------------------------------

CheckResult tada_identity_impl(const CheckOptions& opt) {
  CheckResult result;
  result.name = "tada-identity";
  auto start = Clock::now();

  ModelConfig with_gates = reference_config();
  ModelConfig without_gates = with_gates;
  for (StageSpec& stage : without_gates.stages) stage.tada_first_k = 0;

  // Seeded init leaves every alpha at zero, so the gate must be a bitwise
  // no-op; the gate-free model shares every other buffer seed by name.
  Model gated = build_model(with_gates, InitKind::kSeededRandom, opt.seed ^ kDefaultSeed);
  Model plain = build_model(without_gates, InitKind::kSeededRandom, opt.seed ^ kDefaultSeed);

  Tensor5 clip(Shape5{1, 3, with_gates.input.frames, with_gates.input.height, with_gates.input.width});
  ParamRng rng(suite_seed(opt, "tada-identity"));
  fill_uniform(clip, rng, 1.0f);

  Logits a = forward(gated, clip);
  Logits b = forward(plain, clip);
  bool equal = a.values.size() == b.values.size() &&
               std::memcmp(a.values.data(), b.values.data(), sizeof(float) * a.values.size()) == 0;
  result.pass = equal;
  if (equal) {
    std::ostringstream detail;
    detail << "alpha=0 forward bitwise equals gate-free forward across " << a.classes << " logits";
    result.detail = detail.str();
  } else {
    result.detail = "logits differ between alpha=0 model and gate-free model";
  }
  result.seconds = elapsed(start);
  return result;
}

// ---------------------------------------------------------------------------
// simam-closed-form
// ---------------------------------------------------------------------------

CheckResult simam_closed_form_impl(const CheckOptions& opt) {
  CheckResult result;
  result.name = "simam-closed-form";
  auto start = Clock::now();
  ParamRng rng(suite_seed(opt, "simam-closed-form"));
  const SimamConfig cfg;

  // Zero learnable parameters: toggling the attention stage-wide must leave
  // the model's parameter count untouched.
  ModelConfig with_attention = reference_config();
  ModelConfig without_attention = with_attention;
  for (StageSpec& stage : without_attention.stages) stage.simam_after = false;
  Model ma = build_model(with_attention, InitKind::kZeros);
  Model mb = build_model(without_attention, InitKind::kZeros);
  if (count_params(ma).total_params != count_params(mb).total_params) {
    result.pass = false;
    result.detail = "attention toggled parameter count (expected zero learnable parameters)";
    result.seconds = elapsed(start);
    return result;
  }

  // Constant input: unit variance term vanishes, every element gates by
  // sigmoid(0.5).
  double const_worst = 0.0;
  for (float value : {0.0f, 1.0f, -3.5f, 0.25f}) {
    Tensor5 x(Shape5{2, 3, 2, 4, 5}, value);
    Tensor5 y = simam(x, cfg);
    const double gate = 1.0 / (1.0 + std::exp(-0.5));
    for (int64_t i = 0; i < y.numel(); ++i) {
      const_worst = std::max(const_worst,
                             std::abs(static_cast<double>(y.data()[i]) - static_cast<double>(value) * gate));
    }
  }

  // Random tensors against an element-by-element scalar oracle recomputed
  // here in double precision, both pooling modes.
  double oracle_worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    int64_t n = rand_in(rng, 1, 2), c = rand_in(rng, 1, 4);
    int64_t t = rand_in(rng, 1, 3), h = rand_in(rng, 1, 6), w = rand_in(rng, 2, 6);
    SimamConfig mode = cfg;
    mode.per_frame = rand_in(rng, 0, 1) == 1;
    if (!mode.per_frame && t * h * w < 2) continue;
    Tensor5 x(Shape5{n, c, t, h, w});
    fill_uniform(x, rng, 1.0f);
    Tensor5 y = simam(x, mode);
    for (int64_t b = 0; b < n; ++b) {
      for (int64_t cc = 0; cc < c; ++cc) {
        for (int64_t t0 = 0; t0 < (mode.per_frame ? t : 1); ++t0) {
          const int64_t t_lo = mode.per_frame ? t0 : 0;
          const int64_t t_hi = mode.per_frame ? t0 + 1 : t;
          const int64_t count = (t_hi - t_lo) * h * w;
          double sum = 0.0;
          for (int64_t tt = t_lo; tt < t_hi; ++tt)
            for (int64_t hh = 0; hh < h; ++hh)
              for (int64_t ww = 0; ww < w; ++ww) sum += x.at(b, cc, tt, hh, ww);
          const double mean = sum / static_cast<double>(count);
          double sq = 0.0;
          for (int64_t tt = t_lo; tt < t_hi; ++tt)
            for (int64_t hh = 0; hh < h; ++hh)
              for (int64_t ww = 0; ww < w; ++ww) {
                const double d = x.at(b, cc, tt, hh, ww) - mean;
                sq += d * d;
              }
          const double var = sq / static_cast<double>(count - 1);
          for (int64_t tt = t_lo; tt < t_hi; ++tt)
            for (int64_t hh = 0; hh < h; ++hh)
              for (int64_t ww = 0; ww < w; ++ww) {
                const double d = x.at(b, cc, tt, hh, ww) - mean;
                const double inv_e =
                    (d * d + 2.0 * var + 2.0 * cfg.lambda) / (4.0 * (var + cfg.lambda));
                const double want = x.at(b, cc, tt, hh, ww) / (1.0 + std::exp(-inv_e));
                oracle_worst = std::max(oracle_worst,
                                        std::abs(static_cast<double>(y.at(b, cc, tt, hh, ww)) - want));
              }
        }
      }
    }
  }

  result.pass = const_worst <= 1e-6 && oracle_worst <= 1e-6;
  std::ostringstream detail;
  detail << "params invariant; constant-case max|diff| " << format_diff(const_worst)
         << ", scalar-oracle max|diff| " << format_diff(oracle_worst) << " (want <= 1e-06)";
  result.detail = detail.str();
  result.seconds = elapsed(start);
  return result;
}

// ---------------------------------------------------------------------------
// poly1-gradient
// ---------------------------------------------------------------------------

CheckResult poly1_gradient_impl(const CheckOptions& opt) {
  CheckResult result;
  result.name = "poly1-gradient";
  auto start = Clock::now();
  std::mt19937_64 gen(suite_seed(opt, "poly1-gradient"));
  std::uniform_real_distribution<double> logit_dist(-5.0, 5.0);
  std::uniform_real_distribution<double> eps_dist(0.0, 2.0);

  // Closed form for uniform logits: every class has probability 1/K.
  double uniform_worst = 0.0;
  for (int k : {2, 10, 60}) {
    for (double eps : {0.0, 0.5, 1.0}) {
      std::vector<double> logits(static_cast<size_t>(k), 0.7);
      LossConfig cfg;
      cfg.epsilon = eps;
      cfg.num_classes = k;
      const double want = std::log(static_cast<double>(k)) + eps * (1.0 - 1.0 / k);
      uniform_worst = std::max(uniform_worst, std::abs(poly1_loss(logits, k / 2, cfg) - want));
    }
  }

  // Finite differences: relative error uses a small scale floor so that
  // near-zero components are judged on (tight) absolute error instead of
  // dividing by noise.
  double fd_worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 15);
    std::vector<double> logits(static_cast<size_t>(k));
    for (double& z : logits) z = logit_dist(gen);
    const int label = static_cast<int>(gen() % static_cast<uint64_t>(k));
    LossConfig cfg;
    cfg.epsilon = eps_dist(gen);
    cfg.num_classes = k;
    std::vector<double> grad = poly1_grad(logits, label, cfg);
    const double h = 1e-3;
    for (int j = 0; j < k; ++j) {
      std::vector<double> plus = logits, minus = logits;
      plus[static_cast<size_t>(j)] += h;
      minus[static_cast<size_t>(j)] -= h;
      const double fd = (poly1_loss(plus, label, cfg) - poly1_loss(minus, label, cfg)) / (2.0 * h);
      const double rel = std::abs(grad[static_cast<size_t>(j)] - fd) / std::max(std::abs(fd), 1e-2);
      fd_worst = std::max(fd_worst, rel);
    }
  }

  // epsilon = 0 reduces to plain cross-entropy: loss and gradient exactly,
  // via the same stabilized softmax arithmetic.
  double ce_worst = 0.0;
  bool ce_exact = true;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 15);
    std::vector<double> logits(static_cast<size_t>(k));
    for (double& z : logits) z = logit_dist(gen);
    const int label = static_cast<int>(gen() % static_cast<uint64_t>(k));
    LossConfig cfg;
    cfg.epsilon = 0.0;
    cfg.num_classes = k;

    double top = logits[0];
    for (double z : logits) top = std::max(top, z);
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - top);
    const double ce = -((logits[static_cast<size_t>(label)] - top) - std::log(denom));
    ce_worst = std::max(ce_worst, std::abs(poly1_loss(logits, label, cfg) - ce));

    std::vector<double> grad = poly1_grad(logits, label, cfg);
    for (int j = 0; j < k; ++j) {
      const double p = std::exp(logits[static_cast<size_t>(j)] - top) / denom;
      const double want = p - (j == label ? 1.0 : 0.0);
      if (grad[static_cast<size_t>(j)] != want) ce_exact = false;
    }
  }

  result.pass = uniform_worst <= 1e-6 && fd_worst <= 1e-4 && ce_worst <= 1e-12 && ce_exact;
  std::ostringstream detail;
  detail << "uniform-logits max|diff| " << format_diff(uniform_worst)
         << "; finite-difference worst rel " << format_diff(fd_worst)
         << " (want <= 1e-04); eps=0 cross-entropy "
         << (ce_exact && ce_worst <= 1e-12 ? "exact" : "MISMATCH");
  result.detail = detail.str();
  result.seconds = elapsed(start);
  return result;
}

// ---------------------------------------------------------------------------
// analyzer-enumeration
// ---------------------------------------------------------------------------

// Small-but-complete config exercising ghost, pre-dw, shift, attention, both
// gates, and the head, with a total MAC count safely below the counting budget.
ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.stem_width = 8;
  cfg.stages = {
      StageSpec{8, 1, 0, false, false, false, 2.5},
      StageSpec{8, 1, 0, false, false, false, 2.5},
      StageSpec{16, 1, 1, true, false, true, 2.5},
      StageSpec{16, 1, 1, true, true, true, 2.5},
  };
  cfg.head_mid_width = 32;
  cfg.num_classes = 5;
  cfg.input = InputSpec{4, 32, 32};
  return cfg;
}

CheckResult analyzer_enumeration_impl(const CheckOptions& opt) {
  CheckResult result;
  result.name = "analyzer-enumeration";
  auto start = Clock::now();

  // Closed-form parameter totals must equal direct buffer enumeration for the
  // reference model and every gate-placement variant.
  for (int variant = 0; variant <= 4; ++variant) {
    ModelConfig cfg = variant == 0 ? reference_config() : tada_variant_config(variant);
    Model m = build_model(cfg, InitKind::kZeros);
    const int64_t analyzed = count_params(m).total_params;
    const int64_t enumerated = sum_buffer_elements(m);
    if (analyzed != enumerated) {
      result.pass = false;
      std::ostringstream detail;
      detail << "parameter mismatch for " << (variant == 0 ? "reference" : "variant")
             << " config" << (variant == 0 ? "" : " v" + std::to_string(variant)) << ": analyzer "
             << analyzed << " vs enumerated " << enumerated;
      result.detail = detail.str();
      result.seconds = elapsed(start);
      return result;
    }
  }

  // MAC totals must equal the instrumented per-tap counter on a config small
  // enough to count exhaustively.
  ModelConfig cfg = tiny_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, opt.seed);
  CostReport report = analyze_model(m, cfg.input);
  if (report.total_macs > 10000000) {
    result.pass = false;
    result.detail = "counting config exceeds the 1e7 MAC budget";
    result.seconds = elapsed(start);
    return result;
  }
  Tensor5 clip(Shape5{1, 3, cfg.input.frames, cfg.input.height, cfg.input.width});
  ParamRng rng(suite_seed(opt, "analyzer-enumeration"));
  fill_uniform(clip, rng, 1.0f);
  instr::reset_mac_counter();
  instr::enable_mac_counter(true);
  forward(m, clip);
  instr::enable_mac_counter(false);
  const uint64_t counted = instr::mac_count();
  if (counted != static_cast<uint64_t>(report.total_macs)) {
    result.pass = false;
    std::ostringstream detail;
    detail << "MAC mismatch: analyzer " << report.total_macs << " vs instrumented " << counted;
    result.detail = detail.str();
    result.seconds = elapsed(start);
    return result;
  }

  result.pass = true;
  std::ostringstream detail;
  detail << "parameters match enumeration on 5 configs; instrumented MACs match analyzer ("
         << counted << ")";
  result.detail = detail.str();
  result.seconds = elapsed(start);
  return result;
}

}  // namespace

CheckResult check_conv_oracle(const CheckOptions& opt) { return conv_oracle_impl(opt); }
CheckResult check_shift_permutation(const CheckOptions& opt) { return shift_permutation_impl(opt); }
CheckResult check_tada_identity(const CheckOptions& opt) { return tada_identity_impl(opt); }
CheckResult check_simam_closed_form(const CheckOptions& opt) { return simam_closed_form_impl(opt); }
CheckResult check_poly1_gradient(const CheckOptions& opt) { return poly1_gradient_impl(opt); }
CheckResult check_analyzer_enumeration(const CheckOptions& opt) {
  return analyzer_enumeration_impl(opt);
}

std::vector<CheckResult> run_selfcheck(const CheckOptions& opt) {
  std::vector<CheckResult> results;
  results.push_back(check_conv_oracle(opt));
  results.push_back(check_shift_permutation(opt));
  results.push_back(check_tada_identity(opt));
  results.push_back(check_simam_closed_form(opt));
  results.push_back(check_poly1_gradient(opt));
  results.push_back(check_analyzer_enumeration(opt));
  return results;
}

}  // namespace xugt
