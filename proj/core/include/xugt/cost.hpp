#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xugt/model.hpp"

namespace xugt {

// One analyzed layer.  MACs follow the nominal convention: output elements
// times (c_in/groups)*k_t*k_h*k_w, counting taps that land in the padding.
// The elementwise column counts activation, shift, attention, and affine
// element visits, which are excluded from the MAC total.
struct CostRow {
  std::string path;
  int64_t params = 0;
  int64_t macs = 0;
  int64_t elementwise = 0;
  std::vector<int64_t> out_shape;  // (n, c, t, h, w) after this layer

  bool operator==(const CostRow&) const = default;
};

struct CostReport {
  std::vector<CostRow> rows;
  int64_t total_params = 0;
  int64_t total_macs = 0;
  int64_t total_elementwise = 0;
  double gflops_1x = 0.0;  // 1 FLOP per MAC
  double gflops_2x = 0.0;  // 2 FLOPs per MAC

  bool operator==(const CostReport&) const = default;
};

// Closed-form walk of the model mirroring forward() layer by layer.
CostReport analyze_model(const Model& m, const InputSpec& input);

// Parameter analysis at the config's own input.
CostReport count_params(const Model& m);
// MAC analysis for an arbitrary input size.
CostReport count_macs(const Model& m, const InputSpec& input);

// Sum of all stored parameter buffer lengths; must equal
// count_params(m).total_params exactly.
int64_t sum_buffer_elements(const Model& m);

// Plain-text table with totals under both FLOP conventions and a provenance
// note appended at the end.
std::string render_cost_table(const CostReport& report, std::string_view provenance_note);

std::string cost_report_to_json(const CostReport& report);
CostReport cost_report_from_json(const std::string& text);

}  // namespace xugt
