#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "cli_commands.hpp"
#include "xugt/errors.hpp"
#include "xugt/runtime.hpp"

namespace xugt::cli {

void apply_threads(int64_t threads) {
  if (threads < 0) throw ConfigError("--threads must be >= 0");
  if (threads == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int64_t>(hw);
  }
  set_num_threads(threads);
}

}  // namespace xugt::cli

// Exit codes: 0 success, 2 invalid config/flags, 3 I/O failure,
// 4 shape/contract failure, 5 selfcheck failure.
int main(int argc, char** argv) {
  using namespace xugt::cli;

  CLI::App app{"X3D-UGT compact action-recognition network toolkit"};
  app.require_subcommand(1);

  AnalyzeOptions analyze_opt;
  CLI::App* analyze = app.add_subcommand("analyze", "Parameter/MAC/GFLOP breakdown for a config");
  analyze->add_option("--config", analyze_opt.config_path, "model config JSON")
      ->required();
  analyze->add_option("--json", analyze_opt.json_path, "also write the report as JSON to this path");

  InferOptions infer_opt;
  CLI::App* infer = app.add_subcommand("infer", "Run a clip through the network and rank classes");
  infer->add_option("--config", infer_opt.config_path, "model config JSON")->required();
  infer->add_option("--weights", infer_opt.weights_path,
                    "weight file; omitted = deterministic seeded initialization");
  infer->add_option("--clip", infer_opt.clip_path,
                    "clip input: directory of PPM frames, or a raw planar clip with JSON sidecar")
      ->required();
  infer->add_option("--boxes", infer_opt.boxes_path,
                    "per-frame person boxes JSON; omitted = full-frame crops");
  infer->add_option("--topk", infer_opt.topk, "classes to print")->capture_default_str();
  infer->add_option("--threads", infer_opt.threads, "worker threads (0 = all hardware threads)")
      ->capture_default_str();
  infer->add_option("--seed", infer_opt.seed, "seed for the fallback initialization")
      ->capture_default_str();
  infer->add_option("--json", infer_opt.json_path, "also write rankings as JSON to this path");

  BenchOptions bench_opt;
  CLI::App* bench = app.add_subcommand("bench", "Micro-benchmark forward latency on a synthetic clip");
  bench->add_option("--config", bench_opt.config_path, "model config JSON")->required();
  bench->add_option("--reps", bench_opt.reps, "timed repetitions")->capture_default_str();
  bench->add_option("--warmups", bench_opt.warmups, "untimed warmup runs")->capture_default_str();
  bench->add_option("--threads", bench_opt.threads, "worker threads (0 = all hardware threads)")
      ->capture_default_str();
  bench->add_flag("--per-stage", bench_opt.per_stage,
                  "additionally time stem/stages/head in a separate instrumented pass");
  bench->add_option("--seed", bench_opt.seed, "seed for weights and the synthetic clip")
      ->capture_default_str();
  bench->add_option("--json", bench_opt.json_path, "also write the report as JSON to this path");

  SelfcheckOptions selfcheck_opt;
  CLI::App* selfcheck = app.add_subcommand("selfcheck", "Run every oracle suite and report pass/fail");
  selfcheck->add_option("--seed", selfcheck_opt.seed, "suite seed")->capture_default_str();
  selfcheck->add_option("--threads", selfcheck_opt.threads, "worker threads (0 = all hardware threads)")
      ->capture_default_str();
  selfcheck
      ->add_option("--inject-fault", selfcheck_opt.inject_fault,
                   "testing hook: corrupt a named property (shift-direction)")
      ->group("");  // hidden from help

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // malformed flags are config failures
  }

  try {
    if (*analyze) return run_analyze(analyze_opt);
    if (*infer) return run_infer(infer_opt);
    if (*bench) return run_bench(bench_opt);
    if (*selfcheck) return run_selfcheck_cmd(selfcheck_opt);
  } catch (const xugt::ConfigError& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return 2;
  } catch (const xugt::IoError& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return 3;
  } catch (const xugt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
