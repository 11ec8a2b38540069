#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "xugt/config_io.hpp"
#include "xugt/cost.hpp"
#include "xugt/model.hpp"
#include "xugt/preprocess.hpp"

using namespace xugt;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string command = std::string("\"") + XUGT_CLI_PATH + "\" " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  while (size_t got = fread(buffer, 1, sizeof(buffer), pipe)) {
    result.output.append(buffer, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

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

struct CliFixture {
  fs::path dir;
  fs::path config;
  fs::path clip_dir;

  CliFixture() {
    dir = fs::temp_directory_path() / "xugt_cli_fixture";
    fs::remove_all(dir);
    fs::create_directories(dir);
    config = dir / "small.json";
    save_config(small_config(), config);
    clip_dir = dir / "clip";
    fs::create_directories(clip_dir);
    for (int i = 0; i < 10; ++i) {
      Frame f;
      f.height = 40;
      f.width = 48;
      f.rgb.resize(40 * 48 * 3);
      for (size_t p = 0; p < f.rgb.size(); ++p) {
        f.rgb[p] = static_cast<uint8_t>((p + 13 * static_cast<size_t>(i)) % 251);
      }
      char name[32];
      std::snprintf(name, sizeof(name), "f%d.ppm", i);
      save_ppm(f, clip_dir / name);
    }
  }
  ~CliFixture() { fs::remove_all(dir); }
};

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("cli analyze prints the frozen totals and writes matching json") {
  CliFixture fx;
  const fs::path ref_config = fs::path(XUGT_CONFIG_DIR) / "x3d_ugt_ref.json";
  const fs::path json_out = fx.dir / "report.json";
  const RunResult r =
      run_cli("analyze --config " + quoted(ref_config) + " --json " + quoted(json_out));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("973550") != std::string::npos);
  CHECK(r.output.find("1 FLOP/MAC") != std::string::npos);
  CHECK(r.output.find("2 FLOPs/MAC") != std::string::npos);
  CHECK(r.output.find("note:") != std::string::npos);

  // The machine-readable report round-trips to the in-memory analysis.
  std::ifstream in(json_out, std::ios::binary);
  REQUIRE(in.good());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const CostReport parsed = cost_report_from_json(text);
  const ModelConfig cfg = load_config(ref_config);
  Model m = build_model(cfg, InitKind::kZeros);
  CHECK(parsed == analyze_model(m, cfg.input));
}

TEST_CASE("cli analyze fails with the config exit code on invalid input") {
  CliFixture fx;
  const fs::path bad = fx.dir / "bad.json";
  std::ofstream(bad) << "{\"stem_width\": 0}";
  const RunResult r = run_cli("analyze --config " + quoted(bad));
  CHECK(r.exit_code == 2);
  const RunResult missing_flag = run_cli("analyze");
  CHECK(missing_flag.exit_code == 2);
  const RunResult gone = run_cli("analyze --config " + quoted(fx.dir / "nope.json"));
  CHECK(gone.exit_code == 3);
}

TEST_CASE("cli infer is byte-identical across runs and ranks the requested top-k") {
  CliFixture fx;
  const std::string args = "infer --config " + quoted(fx.config) + " --clip " +
                           quoted(fx.clip_dir) + " --topk 3 --threads 2";
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("top-3 of 5 classes") != std::string::npos);
  // Single-thread run must agree: numeric results are thread-invariant.
  const RunResult c = run_cli("infer --config " + quoted(fx.config) + " --clip " +
                              quoted(fx.clip_dir) + " --topk 3 --threads 1");
  CHECK(c.output == a.output);
}

TEST_CASE("cli infer distinguishes io failures from shape failures") {
  CliFixture fx;
  const RunResult io = run_cli("infer --config " + quoted(fx.config) + " --clip " +
                               quoted(fx.clip_dir) + " --weights " + quoted(fx.dir / "w.bin"));
  CHECK(io.exit_code == 3);

  // A grayscale frame violates the three-channel clip contract.
  std::ofstream(fx.clip_dir / "f3.ppm", std::ios::binary | std::ios::trunc) << "P5\n2 2\n255\naaaa";
  const RunResult shape =
      run_cli("infer --config " + quoted(fx.config) + " --clip " + quoted(fx.clip_dir));
  CHECK(shape.exit_code == 4);
}

TEST_CASE("cli bench reports timing statistics and honors rep counts") {
  CliFixture fx;
  const fs::path json_out = fx.dir / "bench.json";
  const RunResult r = run_cli("bench --config " + quoted(fx.config) +
                              " --reps 2 --warmups 0 --per-stage --json " + quoted(json_out));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("end-to-end") != std::string::npos);
  CHECK(r.output.find("stage1") != std::string::npos);
  CHECK(r.output.find("head") != std::string::npos);
  CHECK(r.output.find("logits digest: 0x") != std::string::npos);
  CHECK(fs::exists(json_out));

  const RunResult bad = run_cli("bench --config " + quoted(fx.config) + " --reps 0");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("cli rejects unknown subcommands and flags as config failures") {
  const RunResult unknown = run_cli("transmogrify");
  CHECK(unknown.exit_code == 2);
  const RunResult extra = run_cli("selfcheck --frobnicate");
  CHECK(extra.exit_code == 2);
  const RunResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("analyze") != std::string::npos);
  CHECK(help.output.find("selfcheck") != std::string::npos);
}
