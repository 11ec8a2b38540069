#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "xugt/errors.hpp"
#include "xugt/ops.hpp"
#include "xugt/primitives.hpp"
#include "xugt/rng.hpp"

using namespace xugt;

TEST_CASE("affine applies per-channel scale and shift") {
  AffineParams affine = make_affine(2);
  affine.scale = {2.0f, -1.0f};
  affine.shift = {0.5f, 3.0f};
  Tensor5 x(Shape5{1, 2, 1, 1, 2}, 1.0f);
  Tensor5 y = affine_channel(x, affine);
  CHECK(y.at(0, 0, 0, 0, 0) == 2.5f);
  CHECK(y.at(0, 0, 0, 0, 1) == 2.5f);
  CHECK(y.at(0, 1, 0, 0, 0) == 2.0f);
}

TEST_CASE("activations compute relu and the logistic gate") {
  Tensor5 x = Tensor5::from_data(Shape5{1, 1, 1, 1, 3}, {-1.0f, 0.0f, 0.5f});
  Tensor5 r = activation(x, Activation::kRelu);
  CHECK(r.at(0, 0, 0, 0, 0) == 0.0f);
  CHECK(r.at(0, 0, 0, 0, 2) == 0.5f);
  Tensor5 s = activation(x, Activation::kSigmoid);
  CHECK(s.at(0, 0, 0, 0, 2) == doctest::Approx(0.6224593312018546).epsilon(1e-6));
  CHECK(s.at(0, 0, 0, 0, 1) == 0.5f);
}

TEST_CASE("global pooling averages the selected axes") {
  Tensor5 x(Shape5{1, 2, 2, 1, 2});
  // channel 0: frames (1,2) and (3,4); channel 1: all 10
  x.at(0, 0, 0, 0, 0) = 1.0f;
  x.at(0, 0, 0, 0, 1) = 2.0f;
  x.at(0, 0, 1, 0, 0) = 3.0f;
  x.at(0, 0, 1, 0, 1) = 4.0f;
  for (int64_t t = 0; t < 2; ++t)
    for (int64_t w = 0; w < 2; ++w) x.at(0, 1, t, 0, w) = 10.0f;

  Tensor5 spatial = global_pool(x, PoolAxes::kSpatial);
  CHECK(spatial.shape() == Shape5{1, 2, 2, 1, 1});
  CHECK(spatial.at(0, 0, 0, 0, 0) == 1.5f);
  CHECK(spatial.at(0, 0, 1, 0, 0) == 3.5f);

  Tensor5 both = global_pool(x, PoolAxes::kSpatiotemporal);
  CHECK(both.shape() == Shape5{1, 2, 1, 1, 1});
  CHECK(both.at(0, 0, 0, 0, 0) == 2.5f);
  CHECK(both.at(0, 1, 0, 0, 0) == 10.0f);
}

TEST_CASE("global pooling rejects empty pooling regions") {
  Tensor5 empty(Shape5{1, 1, 0, 2, 2});
  CHECK_THROWS_AS(global_pool(empty, PoolAxes::kSpatiotemporal), ShapeError);
}

TEST_CASE("softmax matches the two-logit closed form") {
  std::vector<float> logits{2.0f, 0.0f};
  std::vector<float> p = softmax(std::span<const float>(logits));
  CHECK(p[0] == doctest::Approx(0.8807970779778823).epsilon(1e-7));
  CHECK(p[1] == doctest::Approx(0.11920292202211755).epsilon(1e-7));
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("temporal shift moves the first fold back and the second forward") {
  // c=3, fold_div=2 -> fold=1: channel 0 backward, channel 1 forward, 2 copies.
  Tensor5 x(Shape5{1, 3, 3, 1, 1});
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t t = 0; t < 3; ++t) x.at(0, c, t, 0, 0) = static_cast<float>(t + 1);
  Tensor5 y = temporal_shift(x, 2);
  CHECK(y.at(0, 0, 0, 0, 0) == 2.0f);
  CHECK(y.at(0, 0, 1, 0, 0) == 3.0f);
  CHECK(y.at(0, 0, 2, 0, 0) == 0.0f);  // zero fill at the tail
  CHECK(y.at(0, 1, 0, 0, 0) == 0.0f);  // zero fill at the head
  CHECK(y.at(0, 1, 1, 0, 0) == 1.0f);
  CHECK(y.at(0, 1, 2, 0, 0) == 2.0f);
  CHECK(y.at(0, 2, 0, 0, 0) == 1.0f);  // untouched remainder
  CHECK(y.at(0, 2, 2, 0, 0) == 3.0f);
}

TEST_CASE("temporal shift preserves per-channel element multisets up to zero fill") {
  ParamRng rng(5);
  Tensor5 x(Shape5{1, 8, 4, 2, 2});
  for (int64_t i = 0; i < x.numel(); ++i) x.data()[i] = rng.uniform(1.0f);
  Tensor5 y = temporal_shift(x, 4);
  // Shifted channels lose exactly one frame's worth of values and gain zeros;
  // untouched channels are identical.
  for (int64_t c = 4; c < 8; ++c)
    for (int64_t t = 0; t < 4; ++t)
      for (int64_t h = 0; h < 2; ++h)
        for (int64_t w = 0; w < 2; ++w) CHECK(y.at(0, c, t, h, w) == x.at(0, c, t, h, w));
}

TEST_CASE("temporal shift validates fold_div against the channel count") {
  Tensor5 x(Shape5{1, 3, 2, 1, 1});
  CHECK_THROWS_AS(temporal_shift(x, 0), ShapeError);
  CHECK_THROWS_AS(temporal_shift(x, 4), ShapeError);
}

TEST_CASE("ghost module splits output channels between primary and cheap maps") {
  GhostParams g = make_ghost(64, 64, 2, 3);
  CHECK(g.primary_channels() == 32);
  CHECK(g.out_channels() == 64);
  // 32*64 primary weights + 32 cheap 3x3 depthwise filters.
  CHECK(g.param_count() == 2336);

  GhostParams plain = make_ghost(8, 5, 1);
  CHECK_FALSE(plain.has_cheap());
  CHECK(plain.param_count() == 40);
}

TEST_CASE("ghost module rejects splits the cheap map cannot fill evenly") {
  CHECK_THROWS_AS(make_ghost(4, 5, 2), ConfigError);
  CHECK_THROWS_AS(make_ghost(4, 0, 2), ConfigError);
}

TEST_CASE("ghost with ratio 1 equals the plain pointwise projection") {
  ParamRng rng(11);
  GhostParams g = make_ghost(6, 5, 1);
  for (int64_t i = 0; i < g.primary.weights.numel(); ++i)
    g.primary.weights.data()[i] = rng.uniform(1.0f);
  Tensor5 x(Shape5{1, 6, 2, 3, 3});
  for (int64_t i = 0; i < x.numel(); ++i) x.data()[i] = rng.uniform(1.0f);
  Tensor5 a = ghost_pointwise(x, g);
  Tensor5 b = pointwise_conv(x, g.primary);
  for (int64_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("squeeze-excitation with zeroed expand weights gates everything by one half") {
  SEParams se = make_se(8, 4, 1);
  CHECK(se.hidden() == 2);
  ParamRng rng(3);
  for (int64_t i = 0; i < se.reduce.weights.numel(); ++i)
    se.reduce.weights.data()[i] = rng.uniform(1.0f);
  // expand weights and bias all zero -> pre-sigmoid zero -> gate exactly 0.5
  Tensor5 x(Shape5{2, 8, 2, 3, 3});
  for (int64_t i = 0; i < x.numel(); ++i) x.data()[i] = rng.uniform(1.0f);
  Tensor5 y = squeeze_excite(x, se);
  for (int64_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == 0.5f * x.data()[i]);
}

TEST_CASE("squeeze-excitation hidden width respects the floor") {
  CHECK(make_se(64).hidden() == 4);    // 64/16
  CHECK(make_se(192).hidden() == 12);  // 192/16
  CHECK(make_se(16).hidden() == 4);    // floor at min_hidden
}

TEST_CASE("simam gates a constant tensor by sigmoid of one half") {
  Tensor5 x(Shape5{1, 2, 2, 3, 3}, 2.0f);
  Tensor5 y = simam(x);
  const float want = 2.0f * 1.0f / (1.0f + std::exp(-0.5f));
  for (int64_t i = 0; i < y.numel(); ++i) {
    CHECK(y.data()[i] == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("simam validates lambda and the group size") {
  Tensor5 tiny(Shape5{1, 1, 1, 1, 1});
  CHECK_THROWS_AS(simam(tiny), ShapeError);  // variance needs at least 2 elements
  SimamConfig bad;
  bad.lambda = 0.0;
  Tensor5 ok(Shape5{1, 1, 1, 2, 2});
  CHECK_THROWS_AS(simam(ok, bad), ConfigError);
}

TEST_CASE("simam per-frame grouping pools over each frame independently") {
  // Two frames with different statistics: per-frame output must differ from
  // the clip-wide grouping on at least one element.
  Tensor5 x(Shape5{1, 1, 2, 2, 2});
  const float frame0[] = {1.0f, 2.0f, 3.0f, 4.0f};
  const float frame1[] = {10.0f, 20.0f, 30.0f, 40.0f};
  for (int64_t i = 0; i < 4; ++i) {
    x.data()[i] = frame0[i];
    x.data()[4 + i] = frame1[i];
  }
  SimamConfig per_frame;
  per_frame.per_frame = true;
  Tensor5 a = simam(x);
  Tensor5 b = simam(x, per_frame);
  bool differs = false;
  for (int64_t i = 0; i < 8; ++i) differs |= a.data()[i] != b.data()[i];
  CHECK(differs);
}

TEST_CASE("tada gate with alpha zero is a bitwise identity") {
  ParamRng rng(17);
  TadaParams tada = make_tada(8);
  CHECK(tada.hidden() == 2);
  for (int64_t i = 0; i < tada.reduce.weights.numel(); ++i)
    tada.reduce.weights.data()[i] = rng.uniform(1.0f);
  for (int64_t i = 0; i < tada.temporal.weights.numel(); ++i)
    tada.temporal.weights.data()[i] = rng.uniform(1.0f);
  for (int64_t i = 0; i < tada.expand.weights.numel(); ++i)
    tada.expand.weights.data()[i] = rng.uniform(1.0f);
  std::fill(tada.reduce.bias.begin(), tada.reduce.bias.end(), 0.3f);
  std::fill(tada.expand.bias.begin(), tada.expand.bias.end(), -0.2f);
  tada.alpha = 0.0f;

  Tensor5 x(Shape5{2, 8, 3, 4, 4});
  Tensor5 ctx(Shape5{2, 8, 3, 5, 5});
  for (int64_t i = 0; i < x.numel(); ++i) x.data()[i] = rng.uniform(1.0f);
  for (int64_t i = 0; i < ctx.numel(); ++i) ctx.data()[i] = rng.uniform(1.0f);
  Tensor5 y = tada_gate(x, ctx, tada);
  for (int64_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("tada gate modulates per (batch, channel, frame)") {
  TadaParams tada = make_tada(1, 1);
  // One channel, hidden 1: make g constant 1 via expand weight 1, bias 1 on a
  // zeroed context so only the expand bias survives.
  tada.alpha = 0.5f;
  for (float& b : tada.expand.bias) b = 1.0f;
  Tensor5 x(Shape5{1, 1, 2, 1, 2}, 2.0f);
  Tensor5 ctx(Shape5{1, 1, 2, 3, 3});  // zeros
  Tensor5 y = tada_gate(x, ctx, tada);
  // factor = 1 + 0.5*1 = 1.5 everywhere
  for (int64_t i = 0; i < y.numel(); ++i) CHECK(y.data()[i] == 3.0f);
}

TEST_CASE("tada parameter count includes the scalar blend weight") {
  TadaParams tada = make_tada(8);
  // reduce 8->2 (+2 bias), temporal 3-tap over 2, expand 2->8 (+8 bias), alpha
  CHECK(tada.param_count() == 16 + 2 + 6 + 16 + 8 + 1);
}

TEST_CASE("tada gate requires matching (n, c, t) between main path and context") {
  TadaParams tada = make_tada(4);
  Tensor5 x(Shape5{1, 4, 3, 2, 2});
  Tensor5 ctx(Shape5{1, 4, 2, 2, 2});
  CHECK_THROWS_AS(tada_gate(x, ctx, tada), ShapeError);
}
