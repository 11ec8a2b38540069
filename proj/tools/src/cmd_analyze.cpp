#include <fstream>
#include <iostream>

#include "cli_commands.hpp"
#include "xugt/config_io.hpp"
#include "xugt/cost.hpp"
#include "xugt/errors.hpp"
#include "xugt/model.hpp"

namespace xugt::cli {

namespace {

// Printed under every table so readers know how the totals were produced.
constexpr const char* kProvenanceNote =
    "MACs are nominal (every kernel tap counted, padding included); totals are"
    " printed under both the 1 FLOP/MAC and 2 FLOPs/MAC conventions."
    " Stage widths/depths are this implementation's tuned operating point;"
    " the config file is the single source of truth.";

}  // namespace

int run_analyze(const AnalyzeOptions& opt) {
  const ModelConfig cfg = load_config(opt.config_path);
  const Model model = build_model(cfg, InitKind::kZeros);
  const CostReport report = analyze_model(model, cfg.input);

  std::cout << render_cost_table(report, kProvenanceNote);

  if (!opt.json_path.empty()) {
    const std::string text = cost_report_to_json(report);
    std::ofstream out(opt.json_path, std::ios::binary);
    if (!out) throw IoError("cannot open " + opt.json_path + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + opt.json_path);
  }
  return 0;
}

}  // namespace xugt::cli
