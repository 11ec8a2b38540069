#include <doctest.h>

#include <string>

#include "xugt/cost.hpp"
#include "xugt/model.hpp"
#include "xugt/rng.hpp"
#include "xugt/runtime.hpp"

using namespace xugt;

namespace {

ModelConfig small_config() {
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

const CostRow& row_named(const CostReport& report, const std::string& path) {
  for (const CostRow& row : report.rows) {
    if (row.path == path) return row;
  }
  REQUIRE_MESSAGE(false, "no analyzer row named " << path);
  static CostRow dummy;
  return dummy;
}

}  // namespace

TEST_CASE("reference analysis reproduces the frozen totals") {
  const ModelConfig cfg = reference_config();
  Model m = build_model(cfg, InitKind::kZeros);
  const CostReport report = analyze_model(m, cfg.input);
  CHECK(report.total_params == 973550);
  CHECK(report.total_macs == 4364932320);
  CHECK(report.gflops_1x == doctest::Approx(4.36493232).epsilon(1e-9));
  CHECK(report.gflops_2x == doctest::Approx(8.72986464).epsilon(1e-9));
}

TEST_CASE("stem row carries the closed-form parameter and MAC counts") {
  const ModelConfig cfg = reference_config();
  Model m = build_model(cfg, InitKind::kZeros);
  const CostReport report = analyze_model(m, cfg.input);
  const CostRow& stem = row_named(report, "stem");
  CHECK(stem.params == 648);  // 24 filters x 3 channels x 1x3x3
  // nominal MACs: (24*16*112*112) outputs x 27 taps, padding taps included
  CHECK(stem.macs == 130056192);
  CHECK(stem.out_shape == std::vector<int64_t>{1, 24, 16, 112, 112});
  const CostRow& affine = row_named(report, "stem.affine");
  CHECK(affine.params == 48);
  CHECK(affine.macs == 0);
  CHECK(affine.elementwise == 4816896);
}

TEST_CASE("parameter totals equal direct buffer enumeration") {
  for (const ModelConfig& cfg : {reference_config(), small_config()}) {
    Model m = build_model(cfg, InitKind::kZeros);
    CHECK(count_params(m).total_params == sum_buffer_elements(m));
  }
}

TEST_CASE("analyzer MACs equal the instrumented tap counter on a small model") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, 2);
  const CostReport report = analyze_model(m, cfg.input);
  REQUIRE(report.total_macs < 10000000);  // exhaustive counting budget

  Tensor5 clip(Shape5{1, 3, cfg.input.frames, cfg.input.height, cfg.input.width});
  ParamRng rng(2);
  for (int64_t i = 0; i < clip.numel(); ++i) clip.data()[i] = rng.uniform(1.0f);
  instr::reset_mac_counter();
  instr::enable_mac_counter(true);
  forward(m, clip);
  instr::enable_mac_counter(false);
  CHECK(instr::mac_count() == static_cast<uint64_t>(report.total_macs));
}

TEST_CASE("zero-parameter attention appears as a pure elementwise row") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kZeros);
  const CostReport report = analyze_model(m, cfg.input);
  const CostRow& attention = row_named(report, "stages.2.simam");
  CHECK(attention.params == 0);
  CHECK(attention.macs == 0);
  CHECK(attention.elementwise > 0);
  const CostRow& alpha = row_named(report, "stages.2.blocks.0.tada.alpha");
  CHECK(alpha.params == 1);
  CHECK(alpha.macs == 0);
}

TEST_CASE("analysis scales with the probe input size") {
  const ModelConfig cfg = reference_config();
  Model m = build_model(cfg, InitKind::kZeros);
  const int64_t base = count_macs(m, cfg.input).total_macs;
  const int64_t half_frames = count_macs(m, InputSpec{8, 224, 224}).total_macs;
  CHECK(half_frames < base);
  CHECK(half_frames > base / 3);  // roughly halves, head costs keep it above a third
  // Parameters never depend on the probe input.
  CHECK(count_macs(m, InputSpec{8, 224, 224}).total_params == 973550);
}

TEST_CASE("cost report json round-trips exactly") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kZeros);
  const CostReport report = analyze_model(m, cfg.input);
  const CostReport back = cost_report_from_json(cost_report_to_json(report));
  CHECK(back == report);
}

TEST_CASE("rendered table prints both FLOP conventions and the provenance note") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kZeros);
  const CostReport report = analyze_model(m, cfg.input);
  const std::string table = render_cost_table(report, "totals are estimates of note");
  CHECK(table.find("1 FLOP/MAC") != std::string::npos);
  CHECK(table.find("2 FLOPs/MAC") != std::string::npos);
  CHECK(table.find("note: totals are estimates of note") != std::string::npos);
  CHECK(table.find("excluded from MACs") != std::string::npos);
}
