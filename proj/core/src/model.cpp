#include "xugt/model.hpp"

#include <cmath>
#include <string>

#include "xugt/errors.hpp"
#include "xugt/rng.hpp"

namespace xugt {

namespace {

bool ghost_split_ok(int64_t c_out, int64_t ratio) {
  if (c_out < 1 || ratio < 1) return false;
  const int64_t m = (c_out + ratio - 1) / ratio;
  const int64_t rest = c_out - m;
  return rest == 0 || rest % m == 0;
}

constexpr int64_t kGhostRatio = 2;
constexpr int64_t kShiftFoldDiv = 8;
constexpr int64_t kPreDwKernel = 3;
constexpr int64_t kMidDwSpatial = 3;

BlockSpec stage_block_spec(const StageSpec& stage, int64_t c_prev, int64_t block_idx) {
  BlockSpec spec;
  spec.c_in = block_idx == 0 ? c_prev : stage.width;
  spec.c_out = stage.width;
  spec.expansion = stage.expansion;
  // every stage opens with a stride-2 block; only stride-2 blocks carry pre_dw
  spec.spatial_stride = block_idx == 0 ? 2 : 1;
  spec.pre_dw_kernel = block_idx == 0 ? kPreDwKernel : 0;
  spec.mid_dw_spatial = kMidDwSpatial;
  spec.use_shift = stage.shift_all_blocks;
  spec.use_tada = block_idx < stage.tada_first_k;
  spec.use_se = stage.se_all_blocks;
  spec.ghost_ratio = kGhostRatio;
  spec.shift_fold_div = kShiftFoldDiv;
  spec.act = Activation::kRelu;
  return spec;
}

}  // namespace

std::vector<std::string> validate_config(const ModelConfig& cfg) {
  std::vector<std::string> problems;
  auto bad = [&](const std::string& msg) { problems.push_back(msg); };
  if (cfg.stem_width < 1) bad("stem_width must be >= 1");
  if (cfg.stages.size() != 4) {
    bad("exactly 4 stages required, got " + std::to_string(cfg.stages.size()));
  }
  if (cfg.head_mid_width < 1) bad("head_mid_width must be >= 1");
  if (cfg.num_classes < 1) bad("num_classes must be >= 1");
  if (cfg.input.frames < 1 || cfg.input.height < 1 || cfg.input.width < 1) {
    bad("input dims must all be >= 1");
  }
  if (!ghost_split_ok(cfg.head_mid_width, kGhostRatio)) {
    bad("head_mid_width " + std::to_string(cfg.head_mid_width) +
        " cannot be split by the ghost ratio " + std::to_string(kGhostRatio));
  }
  int64_t c_prev = cfg.stem_width;
  for (size_t i = 0; i < cfg.stages.size(); ++i) {
    const StageSpec& st = cfg.stages[i];
    const std::string who = "stage " + std::to_string(i + 1);
    if (st.width < 1) bad(who + ": width must be >= 1");
    if (st.depth < 0) bad(who + ": depth must be >= 0");
    if (st.tada_first_k < 0 || st.tada_first_k > st.depth) {
      bad(who + ": tada_first_k must lie in [0, depth], got " + std::to_string(st.tada_first_k) +
          " with depth " + std::to_string(st.depth));
    }
    if (!(st.expansion > 0.0)) bad(who + ": expansion must be positive");
    if (st.depth == 0) {
      if (st.width != c_prev) {
        bad(who + ": depth 0 passes channels through, so width must stay " +
            std::to_string(c_prev) + ", got " + std::to_string(st.width));
      }
      continue;
    }
    if (st.width >= 1 && st.expansion > 0.0 && c_prev >= 1) {
      for (int64_t j = 0; j < st.depth; ++j) {
        BlockSpec spec = stage_block_spec(st, c_prev, j);
        try {
          spec.validate();
        } catch (const Error& e) {
          bad(who + ", block " + std::to_string(j + 1) + ": " + e.what());
          break;
        }
        const int64_t c_exp = spec.expanded_width();
        if (!ghost_split_ok(c_exp, kGhostRatio) || !ghost_split_ok(spec.c_out, kGhostRatio)) {
          bad(who + ", block " + std::to_string(j + 1) + ": widths (expanded " +
              std::to_string(c_exp) + ", out " + std::to_string(spec.c_out) +
              ") cannot be split by the ghost ratio " + std::to_string(kGhostRatio));
          break;
        }
      }
    }
    c_prev = st.width;
  }
  return problems;
}

void check_config(const ModelConfig& cfg) {
  const std::vector<std::string> problems = validate_config(cfg);
  if (problems.empty()) return;
  std::string report = "invalid model config (" + std::to_string(problems.size()) + " problems):";
  for (const std::string& p : problems) report += "\n  - " + p;
  throw ConfigError(report);
}

ModelConfig reference_config() {
  // Widths/depths tuned so the analyzer lands near 0.96M params and the
  // 2-FLOPs-per-MAC total near 9 GFLOPs on the (3,16,224,224) input; shift
  // and the gates follow the stage plan (gates in stages 3-4, K=2; SE in
  // stage 4 only; attention after stages 3 and 4).
  ModelConfig cfg;
  cfg.stem_width = 24;
  cfg.stages = {
      StageSpec{48, 5, 0, false, false, false, 2.5},
      StageSpec{96, 5, 0, false, false, false, 2.5},
      StageSpec{144, 4, 2, true, false, true, 2.5},
      StageSpec{192, 2, 2, true, true, true, 2.5},
  };
  cfg.head_mid_width = 432;
  cfg.num_classes = 60;
  cfg.input = InputSpec{16, 224, 224};
  return cfg;
}

ModelConfig tada_variant_config(int variant) {
  ModelConfig cfg = reference_config();
  auto set_k = [&](int64_t k1, int64_t k2, int64_t k3, int64_t k4) {
    cfg.stages[0].tada_first_k = k1;
    cfg.stages[1].tada_first_k = k2;
    cfg.stages[2].tada_first_k = k3;
    cfg.stages[3].tada_first_k = k4;
  };
  switch (variant) {
    case 1: set_k(2, 2, 2, 2); break;  // all stages
    case 2: set_k(2, 2, 0, 0); break;  // early stages only
    case 3: set_k(0, 0, 2, 0); break;  // stage 3 only
    case 4: set_k(0, 0, 0, 2); break;  // stage 4 only
    default:
      throw ConfigError("tada variant must be 1..4, got " + std::to_string(variant));
  }
  return cfg;
}

namespace {

// Shared traversal for const/mutable buffer visits.
template <typename ModelT, typename RefT, typename ConvT, typename AffineT, typename FloatT>
struct Visitor {
  const std::function<void(const RefT&)>& fn;

  void emit(const std::string& name, std::vector<int64_t> dims, FloatT* data, int64_t size) {
    RefT ref;
    ref.name = name;
    ref.dims = std::move(dims);
    ref.data = data;
    ref.size = size;
    fn(ref);
  }
  void conv(ConvT& c, const std::string& path) {
    const Shape5& s = c.weights.shape();
    emit(path + ".weight", {s.n, s.c, s.t, s.h, s.w}, c.weights.data(), c.weights.numel());
    if (!c.bias.empty()) {
      emit(path + ".bias", {static_cast<int64_t>(c.bias.size())}, c.bias.data(),
           static_cast<int64_t>(c.bias.size()));
    }
  }
  void affine(AffineT& a, const std::string& path) {
    emit(path + ".scale", {a.channels()}, a.scale.data(), a.channels());
    emit(path + ".shift", {a.channels()}, a.shift.data(), a.channels());
  }
  template <typename GhostT>
  void ghost(GhostT& g, const std::string& path) {
    conv(g.primary, path + ".primary");
    if (g.has_cheap()) conv(g.cheap, path + ".cheap");
  }
  void walk(ModelT& m) {
    conv(m.stem, "stem");
    affine(m.stem_affine, "stem.affine");
    for (size_t i = 0; i < m.stages.size(); ++i) {
      for (size_t j = 0; j < m.stages[i].size(); ++j) {
        auto& b = m.stages[i][j];
        const std::string base =
            "stages." + std::to_string(i) + ".blocks." + std::to_string(j) + ".";
        if (b.params.pre_dw) {
          conv(*b.params.pre_dw, base + "pre_dw");
          affine(b.params.pre_affine, base + "pre_affine");
        }
        ghost(b.params.expand, base + "expand");
        affine(b.params.expand_affine, base + "expand_affine");
        conv(b.params.temporal_dw, base + "temporal_dw");
        conv(b.params.spatial_dw, base + "spatial_dw");
        affine(b.params.dw_affine, base + "dw_affine");
        if (b.params.tada) {
          auto& t = *b.params.tada;
          conv(t.reduce, base + "tada.reduce");
          conv(t.temporal, base + "tada.temporal");
          conv(t.expand, base + "tada.expand");
          emit(base + "tada.alpha", {1}, &t.alpha, 1);
        }
        if (b.params.se) {
          conv(b.params.se->reduce, base + "se.reduce");
          conv(b.params.se->expand, base + "se.expand");
        }
        ghost(b.params.project, base + "project");
        affine(b.params.project_affine, base + "project_affine");
        if (b.params.shortcut) ghost(*b.params.shortcut, base + "shortcut");
      }
    }
    ghost(m.head_project, "head.project");
    affine(m.head_affine, "head.affine");
    conv(m.classifier, "head.classifier");
  }
};

}  // namespace

void visit_buffers(Model& m, const std::function<void(const BufferRef&)>& fn) {
  Visitor<Model, BufferRef, ConvParams, AffineParams, float> v{fn};
  v.walk(m);
}

void visit_buffers(const Model& m, const std::function<void(const ConstBufferRef&)>& fn) {
  Visitor<const Model, ConstBufferRef, const ConvParams, const AffineParams, const float> v{fn};
  v.walk(m);
}

Model build_model(const ModelConfig& cfg, InitKind init, uint64_t seed) {
  check_config(cfg);
  Model m;
  m.config = cfg;
  m.stem = make_conv(3, cfg.stem_width, {1, 3, 3}, {1, 2, 2}, {0, 1, 1});
  m.stem_affine = make_affine(cfg.stem_width);
  int64_t c_prev = cfg.stem_width;
  m.stages.resize(cfg.stages.size());
  for (size_t i = 0; i < cfg.stages.size(); ++i) {
    const StageSpec& st = cfg.stages[i];
    for (int64_t j = 0; j < st.depth; ++j) {
      m.stages[i].push_back(make_block(stage_block_spec(st, c_prev, j)));
    }
    if (st.depth > 0) c_prev = st.width;
  }
  m.simam = SimamConfig{};
  m.head_project = make_ghost(c_prev, cfg.head_mid_width, kGhostRatio);
  m.head_affine = make_affine(cfg.head_mid_width);
  m.classifier = make_conv(cfg.head_mid_width, cfg.num_classes, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, 1,
                           /*with_bias=*/true);
  if (init == InitKind::kZeros) {
    // Neutral baseline: conv weights, biases, shifts, and blend coefficients
    // at zero, affine scales at their identity value of one.
    visit_buffers(m, [](const BufferRef& ref) {
      const float value = ref.name.ends_with(".scale") ? 1.0f : 0.0f;
      for (int64_t i = 0; i < ref.size; ++i) ref.data[i] = value;
    });
    return m;
  }
  // Seeded per-buffer init keyed by name, so adding or removing a gate leaves
  // every other buffer's values untouched.  Conv weights get fan-in uniform
  // draws; scales 1; shifts, biases, and blend coefficients 0.
  visit_buffers(m, [seed](const BufferRef& ref) {
    if (ref.name.ends_with(".weight")) {
      const int64_t fan_in = ref.dims[1] * ref.dims[2] * ref.dims[3] * ref.dims[4];
      const float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
      ParamRng rng(fnv1a64(ref.name) ^ seed);
      for (int64_t i = 0; i < ref.size; ++i) ref.data[i] = rng.uniform(bound);
    } else if (ref.name.ends_with(".scale")) {
      for (int64_t i = 0; i < ref.size; ++i) ref.data[i] = 1.0f;
    } else {
      // .shift / .bias / .alpha
      for (int64_t i = 0; i < ref.size; ++i) ref.data[i] = 0.0f;
    }
  });
  return m;
}

Tensor5 run_stem(const Model& m, const Tensor5& x) {
  return activation(affine_channel(conv3d(x, m.stem), m.stem_affine), Activation::kRelu);
}

Tensor5 run_stage(const Model& m, size_t stage_idx, const Tensor5& x) {
  if (stage_idx >= m.stages.size()) {
    throw ShapeError("stage index " + std::to_string(stage_idx) + " out of range");
  }
  Tensor5 y = x;
  for (const Block& b : m.stages[stage_idx]) y = block_forward(y, b);
  if (m.config.stages[stage_idx].simam_after) y = simam(y, m.simam);
  return y;
}

Logits run_head(const Model& m, const Tensor5& x) {
  Tensor5 y = ghost_pointwise(x, m.head_project);
  y = activation(affine_channel(y, m.head_affine), Activation::kRelu);
  y = global_pool(y, PoolAxes::kSpatiotemporal);
  y = conv3d(y, m.classifier);  // (n, num_classes, 1, 1, 1)
  Logits out;
  out.batch = y.shape().n;
  out.classes = y.shape().c;
  out.values = y.buffer();
  return out;
}

Logits forward(const Model& m, const Tensor5& clip) {
  const Shape5 want{clip.shape().n, 3, m.config.input.frames, m.config.input.height,
                    m.config.input.width};
  require_shape(clip.shape(), want, "model input clip");
  Tensor5 y = run_stem(m, clip);
  for (size_t i = 0; i < m.stages.size(); ++i) y = run_stage(m, i, y);
  return run_head(m, y);
}

}  // namespace xugt
