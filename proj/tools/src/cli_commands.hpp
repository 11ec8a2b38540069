#pragma once

#include <cstdint>
#include <string>

namespace xugt::cli {

struct AnalyzeOptions {
  std::string config_path;
  std::string json_path;  // empty = table only
};

struct InferOptions {
  std::string config_path;
  std::string weights_path;  // empty = seeded in-memory initialization
  std::string clip_path;
  std::string boxes_path;  // empty = full-frame boxes
  std::string json_path;
  int64_t topk = 5;
  int64_t threads = 0;           // 0 = all hardware threads
  uint64_t seed = 0x58554754ULL; // seed for the fallback initialization
};

struct BenchOptions {
  std::string config_path;
  std::string json_path;
  int64_t reps = 30;
  int64_t warmups = 5;
  int64_t threads = 1;
  bool per_stage = false;
  uint64_t seed = 0x58554754ULL;
};

struct SelfcheckOptions {
  uint64_t seed = 20260822;
  int64_t threads = 0;
  std::string inject_fault;  // testing hook; "shift-direction" corrupts the shift suite
};

int run_analyze(const AnalyzeOptions& opt);
int run_infer(const InferOptions& opt);
int run_bench(const BenchOptions& opt);
int run_selfcheck_cmd(const SelfcheckOptions& opt);

// Maps 0 to the full hardware thread count, then applies the setting.
void apply_threads(int64_t threads);

}  // namespace xugt::cli
