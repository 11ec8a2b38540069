#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xugt/block.hpp"

namespace xugt {

struct StageSpec {
  int64_t width = 0;
  int64_t depth = 0;
  int64_t tada_first_k = 0;  // gate the first K blocks of the stage
  bool simam_after = false;
  bool se_all_blocks = false;
  bool shift_all_blocks = false;
  double expansion = 2.5;

  bool operator==(const StageSpec&) const = default;
};

struct InputSpec {
  int64_t frames = 16;
  int64_t height = 224;
  int64_t width = 224;

  bool operator==(const InputSpec&) const = default;
};

struct ModelConfig {
  int64_t stem_width = 24;
  std::vector<StageSpec> stages;  // exactly 4
  int64_t head_mid_width = 432;
  int64_t num_classes = 60;
  InputSpec input;

  bool operator==(const ModelConfig&) const = default;
};

// Collects every violation instead of stopping at the first.
std::vector<std::string> validate_config(const ModelConfig& cfg);
// Throws ConfigError listing all violations.
void check_config(const ModelConfig& cfg);

// The shipped configuration (same as configs/x3d_ugt_ref.json): stem 24,
// stage widths (48, 96, 144, 192) at depths (5, 5, 4, 2), expansion 2.5.
ModelConfig reference_config();
// Gate-placement ablation variants over the reference stages:
//   1 = all four stages, 2 = stages 1-2, 3 = stage 3 only, 4 = stage 4 only.
ModelConfig tada_variant_config(int variant);

// kSeededRandom: fan-in-bounded uniform conv weights, identity affines, zero
// biases/gates; each buffer's stream is keyed by its name XOR the seed.
// kZeros: every buffer at its neutral element — affine scales one, all else
// zero — mainly for structural work (analysis, serialization fixtures).
enum class InitKind { kSeededRandom, kZeros };

inline constexpr uint64_t kDefaultSeed = 0x58554754ULL;  // "XUGT"

struct Model {
  ModelConfig config;
  ConvParams stem;  // (1,3,3) stride (1,2,2), no bias
  AffineParams stem_affine;
  std::vector<std::vector<Block>> stages;
  SimamConfig simam;
  GhostParams head_project;  // last stage width -> head_mid_width
  AffineParams head_affine;
  ConvParams classifier;  // 1x1x1, head_mid_width -> num_classes, with bias
};

Model build_model(const ModelConfig& cfg, InitKind init = InitKind::kSeededRandom,
                  uint64_t seed = kDefaultSeed);

struct Logits {
  int64_t batch = 0;
  int64_t classes = 0;
  std::vector<float> values;  // batch-major

  std::span<const float> row(int64_t b) const {
    return std::span<const float>(values).subspan(static_cast<size_t>(b * classes),
                                                 static_cast<size_t>(classes));
  }
};

Tensor5 run_stem(const Model& m, const Tensor5& x);
Tensor5 run_stage(const Model& m, size_t stage_idx, const Tensor5& x);
Logits run_head(const Model& m, const Tensor5& x);
Logits forward(const Model& m, const Tensor5& clip);

// One named parameter buffer; dims uses the natural rank (5 for conv weights,
// 1 for affine/bias vectors and alpha).
struct BufferRef {
  std::string name;
  std::vector<int64_t> dims;
  float* data = nullptr;
  int64_t size = 0;
};

struct ConstBufferRef {
  std::string name;
  std::vector<int64_t> dims;
  const float* data = nullptr;
  int64_t size = 0;
};

// Visits every parameter buffer in deterministic forward order with stable
// dotted names ("stages.0.blocks.1.expand.primary.weight", ...).
void visit_buffers(Model& m, const std::function<void(const BufferRef&)>& fn);
void visit_buffers(const Model& m, const std::function<void(const ConstBufferRef&)>& fn);

}  // namespace xugt
