// Kernel- and model-level latency benchmarks.  Single worker thread by
// default so numbers are comparable across machines; pass --threads=N ahead
// of the google-benchmark flags to change that.
#include <benchmark/benchmark.h>

#include <cstring>
#include <string>

#include "xugt/block.hpp"
#include "xugt/conv.hpp"
#include "xugt/model.hpp"
#include "xugt/primitives.hpp"
#include "xugt/rng.hpp"
#include "xugt/runtime.hpp"

namespace {

using namespace xugt;

Tensor5 random_tensor(const Shape5& shape, const char* name) {
  Tensor5 t(shape);
  ParamRng rng(fnv1a64(name));
  float* p = t.data();
  for (int64_t i = 0; i < t.numel(); ++i) p[i] = rng.uniform(1.0f);
  return t;
}

void randomize(ConvParams& conv, const char* name) {
  ParamRng rng(fnv1a64(name));
  float* w = conv.weights.data();
  for (int64_t i = 0; i < conv.weights.numel(); ++i) w[i] = rng.uniform(0.25f);
  for (float& b : conv.bias) b = rng.uniform(0.25f);
}

void BM_PointwiseConv(benchmark::State& state) {
  const Tensor5 x = random_tensor({1, 48, 16, 28, 28}, "bench.pw.x");
  ConvParams conv = make_conv(48, 120, {1, 1, 1});
  randomize(conv, "bench.pw.w");
  for (auto _ : state) {
    benchmark::DoNotOptimize(pointwise_conv(x, conv).data());
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_PointwiseConv)->Unit(benchmark::kMillisecond);

void BM_DepthwiseSpatial3x3(benchmark::State& state) {
  const Tensor5 x = random_tensor({1, 120, 16, 28, 28}, "bench.dw.x");
  ConvParams conv = make_conv(120, 120, {1, 3, 3}, {1, 1, 1}, {0, 1, 1}, 120);
  randomize(conv, "bench.dw.w");
  for (auto _ : state) {
    benchmark::DoNotOptimize(depthwise_conv3d(x, conv).data());
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_DepthwiseSpatial3x3)->Unit(benchmark::kMillisecond);

void BM_FactorizedMidDepthwise(benchmark::State& state) {
  const Tensor5 x = random_tensor({1, 120, 16, 28, 28}, "bench.fact.x");
  ConvParams temporal = make_conv(120, 120, {3, 1, 1}, {1, 1, 1}, {1, 0, 0}, 120);
  ConvParams spatial = make_conv(120, 120, {1, 3, 3}, {1, 1, 1}, {0, 1, 1}, 120);
  randomize(temporal, "bench.fact.t");
  randomize(spatial, "bench.fact.s");
  for (auto _ : state) {
    benchmark::DoNotOptimize(factorized_mid_dw(x, temporal, spatial).data());
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_FactorizedMidDepthwise)->Unit(benchmark::kMillisecond);

void BM_TemporalShift(benchmark::State& state) {
  const Tensor5 x = random_tensor({1, 96, 16, 28, 28}, "bench.shift.x");
  for (auto _ : state) {
    benchmark::DoNotOptimize(temporal_shift(x, 8).data());
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_TemporalShift)->Unit(benchmark::kMillisecond);

void BM_GhostExpand(benchmark::State& state) {
  const Tensor5 x = random_tensor({1, 48, 16, 28, 28}, "bench.ghost.x");
  GhostParams ghost = make_ghost(48, 120, 2, 3);
  randomize(ghost.primary, "bench.ghost.p");
  randomize(ghost.cheap, "bench.ghost.c");
  for (auto _ : state) {
    benchmark::DoNotOptimize(ghost_pointwise(x, ghost).data());
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_GhostExpand)->Unit(benchmark::kMillisecond);

void BM_SqueezeExcite(benchmark::State& state) {
  const Tensor5 x = random_tensor({1, 192, 16, 7, 7}, "bench.se.x");
  SEParams se = make_se(192);
  randomize(se.reduce, "bench.se.r");
  randomize(se.expand, "bench.se.e");
  for (auto _ : state) {
    benchmark::DoNotOptimize(squeeze_excite(x, se).data());
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_SqueezeExcite)->Unit(benchmark::kMillisecond);

void BM_Simam(benchmark::State& state) {
  const Tensor5 x = random_tensor({1, 144, 16, 14, 14}, "bench.simam.x");
  for (auto _ : state) {
    benchmark::DoNotOptimize(simam(x).data());
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_Simam)->Unit(benchmark::kMillisecond);

void BM_TadaGate(benchmark::State& state) {
  const Tensor5 x = random_tensor({1, 144, 16, 14, 14}, "bench.tada.x");
  const Tensor5 ctx = random_tensor({1, 144, 16, 14, 14}, "bench.tada.ctx");
  TadaParams tada = make_tada(144);
  tada.alpha = 0.5f;
  randomize(tada.reduce, "bench.tada.r");
  randomize(tada.temporal, "bench.tada.t");
  randomize(tada.expand, "bench.tada.e");
  for (auto _ : state) {
    benchmark::DoNotOptimize(tada_gate(x, ctx, tada).data());
  }
  state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_TadaGate)->Unit(benchmark::kMillisecond);

void BM_FullBlock(benchmark::State& state) {
  BlockSpec spec;
  spec.c_in = 144;
  spec.c_out = 144;
  spec.expansion = 2.5;
  spec.mid_dw_spatial = 3;
  spec.use_shift = true;
  spec.use_tada = true;
  const Block block = make_block(spec);
  const Tensor5 x = random_tensor({1, 144, 16, 14, 14}, "bench.block.x");
  for (auto _ : state) {
    benchmark::DoNotOptimize(block_forward(x, block).data());
  }
}
BENCHMARK(BM_FullBlock)->Unit(benchmark::kMillisecond);

void BM_ReferenceForward(benchmark::State& state) {
  const ModelConfig cfg = reference_config();
  const Model model = build_model(cfg, InitKind::kSeededRandom);
  const Tensor5 clip =
      random_tensor({1, 3, cfg.input.frames, cfg.input.height, cfg.input.width}, "bench.fwd.x");
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(model, clip).values.data());
  }
}
BENCHMARK(BM_ReferenceForward)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

int main(int argc, char** argv) {
  int64_t threads = 1;
  // Peel off our own --threads=N before google-benchmark parses the rest.
  int kept = 1;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--threads=", 0) == 0) {
      threads = std::stoll(arg.substr(10));
    } else {
      argv[kept++] = argv[i];
    }
  }
  argc = kept;
  xugt::set_num_threads(threads);

  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
