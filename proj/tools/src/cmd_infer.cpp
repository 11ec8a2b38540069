#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "cli_commands.hpp"
#include "xugt/config_io.hpp"
#include "xugt/errors.hpp"
#include "xugt/model.hpp"
#include "xugt/ops.hpp"
#include "xugt/preprocess.hpp"
#include "xugt/weights.hpp"

namespace xugt::cli {

namespace {

ClipSource load_clip_any(const std::string& path) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (std::filesystem::is_directory(p, ec)) return load_ppm_dir(p);
  return load_raw_clip(p);
}

}  // namespace

int run_infer(const InferOptions& opt) {
  if (opt.topk < 1) throw ConfigError("--topk must be >= 1");
  apply_threads(opt.threads);

  const ModelConfig cfg = load_config(opt.config_path);
  if (cfg.input.height != cfg.input.width) {
    throw ConfigError("preprocessing produces square crops; config input must be square, got " +
                      std::to_string(cfg.input.height) + "x" + std::to_string(cfg.input.width));
  }

  Model model = opt.weights_path.empty()
                    ? build_model(cfg, InitKind::kSeededRandom, opt.seed)
                    : load_weights(cfg, opt.weights_path);

  const ClipSource clip = load_clip_any(opt.clip_path);
  BoxTrack boxes;
  const BoxTrack* boxes_ptr = nullptr;
  if (!opt.boxes_path.empty()) {
    boxes = load_boxes_json(opt.boxes_path);
    boxes_ptr = &boxes;
  }

  PreprocessConfig pp;
  pp.target_frames = cfg.input.frames;
  pp.crop.out_size = cfg.input.height;
  const Tensor5 input = preprocess_clip(clip, boxes_ptr, pp);

  const Logits logits = forward(model, input);
  const std::vector<float> row(logits.row(0).begin(), logits.row(0).end());
  const std::vector<float> probs = softmax(std::span<const float>(row));

  std::vector<int64_t> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int64_t a, int64_t b) { return row[static_cast<size_t>(a)] > row[static_cast<size_t>(b)]; });
  const int64_t k = std::min<int64_t>(opt.topk, static_cast<int64_t>(row.size()));

  std::printf("clip: %s (%lld source frames -> %lld sampled)\n", opt.clip_path.c_str(),
              static_cast<long long>(clip.count()), static_cast<long long>(cfg.input.frames));
  if (opt.weights_path.empty()) {
    std::printf("weights: seeded initialization (seed 0x%llx)\n",
                static_cast<unsigned long long>(opt.seed));
  } else {
    std::printf("weights: %s\n", opt.weights_path.c_str());
  }
  std::printf("top-%lld of %lld classes\n", static_cast<long long>(k),
              static_cast<long long>(row.size()));
  std::printf("%4s  %6s  %12s  %10s\n", "rank", "class", "logit", "prob");
  for (int64_t i = 0; i < k; ++i) {
    const int64_t cls = order[static_cast<size_t>(i)];
    std::printf("%4lld  %6lld  %12.6f  %10.6f\n", static_cast<long long>(i + 1),
                static_cast<long long>(cls), static_cast<double>(row[static_cast<size_t>(cls)]),
                static_cast<double>(probs[static_cast<size_t>(cls)]));
  }

  if (!opt.json_path.empty()) {
    nlohmann::json doc;
    doc["classes"] = row.size();
    doc["topk"] = nlohmann::json::array();
    for (int64_t i = 0; i < k; ++i) {
      const int64_t cls = order[static_cast<size_t>(i)];
      doc["topk"].push_back({{"rank", i + 1},
                             {"class", cls},
                             {"logit", row[static_cast<size_t>(cls)]},
                             {"prob", probs[static_cast<size_t>(cls)]}});
    }
    std::ofstream out(opt.json_path, std::ios::binary);
    if (!out) throw IoError("cannot open " + opt.json_path + " for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + opt.json_path);
  }
  return 0;
}

}  // namespace xugt::cli
