#include "xugt/cost.hpp"

#include <cstdio>

#include <json.hpp>

#include "xugt/errors.hpp"

namespace xugt {

namespace {

int64_t numel(const Shape5& s) { return s.numel(); }

std::vector<int64_t> dims_of(const Shape5& s) { return {s.n, s.c, s.t, s.h, s.w}; }

struct Walker {
  std::vector<CostRow> rows;

  // conv cost: params = weights + bias; MACs = out_elems * (c_in/groups) * k^3
  Shape5 conv(const std::string& path, const ConvParams& p, const Shape5& in) {
    const Shape5 out = conv_output_shape(in, p);
    const auto k = p.kernel();
    CostRow row;
    row.path = path;
    row.params = p.param_count();
    row.macs = numel(out) * p.group_in_channels() * k[0] * k[1] * k[2];
    row.out_shape = dims_of(out);
    rows.push_back(std::move(row));
    return out;
  }
  void affine(const std::string& path, const AffineParams& a, const Shape5& shape) {
    CostRow row;
    row.path = path;
    row.params = a.param_count();
    row.elementwise = numel(shape);
    row.out_shape = dims_of(shape);
    rows.push_back(std::move(row));
  }
  void elementwise(const std::string& path, const Shape5& shape) {
    CostRow row;
    row.path = path;
    row.elementwise = numel(shape);
    row.out_shape = dims_of(shape);
    rows.push_back(std::move(row));
  }
  void scalar_param(const std::string& path, const Shape5& shape) {
    CostRow row;
    row.path = path;
    row.params = 1;
    row.out_shape = dims_of(shape);
    rows.push_back(std::move(row));
  }
  Shape5 ghost(const std::string& path, const GhostParams& g, const Shape5& in) {
    const Shape5 primary = conv(path + ".primary", g.primary, in);
    if (!g.has_cheap()) return primary;
    const Shape5 cheap = conv(path + ".cheap", g.cheap, primary);
    return Shape5{primary.n, primary.c + cheap.c, primary.t, primary.h, primary.w};
  }

  Shape5 block(const std::string& base, const Block& b, const Shape5& in) {
    const BlockSpec& spec = b.spec;
    const BlockParams& p = b.params;
    Shape5 cur = in;
    if (spec.use_shift) elementwise(base + "shift", cur);
    if (p.pre_dw) {
      cur = conv(base + "pre_dw", *p.pre_dw, cur);
      affine(base + "pre_affine", p.pre_affine, cur);
    }
    cur = ghost(base + "expand", p.expand, cur);
    affine(base + "expand_affine", p.expand_affine, cur);
    elementwise(base + "expand_act", cur);
    const Shape5 ctx = cur;
    cur = conv(base + "temporal_dw", p.temporal_dw, cur);
    cur = conv(base + "spatial_dw", p.spatial_dw, cur);
    affine(base + "dw_affine", p.dw_affine, cur);
    elementwise(base + "dw_act", cur);
    if (p.tada) {
      const TadaParams& t = *p.tada;
      Shape5 pooled{ctx.n, ctx.c, ctx.t, 1, 1};
      pooled = conv(base + "tada.reduce", t.reduce, pooled);
      elementwise(base + "tada.act", pooled);
      pooled = conv(base + "tada.temporal", t.temporal, pooled);
      pooled = conv(base + "tada.expand", t.expand, pooled);
      scalar_param(base + "tada.alpha", cur);
    }
    if (p.se) {
      const SEParams& s = *p.se;
      Shape5 pooled{cur.n, cur.c, 1, 1, 1};
      pooled = conv(base + "se.reduce", s.reduce, pooled);
      elementwise(base + "se.act", pooled);
      pooled = conv(base + "se.expand", s.expand, pooled);
      elementwise(base + "se.gate", pooled);
    }
    cur = ghost(base + "project", p.project, cur);
    affine(base + "project_affine", p.project_affine, cur);
    if (p.shortcut) {
      const int64_t s = spec.spatial_stride;
      const Shape5 sub{in.n, in.c, in.t, (in.h + s - 1) / s, (in.w + s - 1) / s};
      ghost(base + "shortcut", *p.shortcut, sub);
    }
    return cur;
  }
};

}  // namespace

CostReport analyze_model(const Model& m, const InputSpec& input) {
  Walker w;
  Shape5 cur{1, 3, input.frames, input.height, input.width};
  cur = w.conv("stem", m.stem, cur);
  w.affine("stem.affine", m.stem_affine, cur);
  w.elementwise("stem.act", cur);
  for (size_t i = 0; i < m.stages.size(); ++i) {
    for (size_t j = 0; j < m.stages[i].size(); ++j) {
      const std::string base = "stages." + std::to_string(i) + ".blocks." + std::to_string(j) + ".";
      cur = w.block(base, m.stages[i][j], cur);
    }
    if (m.config.stages[i].simam_after) {
      w.elementwise("stages." + std::to_string(i) + ".simam", cur);
    }
  }
  cur = w.ghost("head.project", m.head_project, cur);
  w.affine("head.affine", m.head_affine, cur);
  w.elementwise("head.act", cur);
  const Shape5 pooled{cur.n, cur.c, 1, 1, 1};
  w.conv("head.classifier", m.classifier, pooled);
  CostReport report;
  report.rows = std::move(w.rows);
  for (const CostRow& row : report.rows) {
    report.total_params += row.params;
    report.total_macs += row.macs;
    report.total_elementwise += row.elementwise;
  }
  report.gflops_1x = static_cast<double>(report.total_macs) / 1e9;
  report.gflops_2x = 2.0 * static_cast<double>(report.total_macs) / 1e9;
  return report;
}

CostReport count_params(const Model& m) { return analyze_model(m, m.config.input); }

CostReport count_macs(const Model& m, const InputSpec& input) { return analyze_model(m, input); }

int64_t sum_buffer_elements(const Model& m) {
  int64_t total = 0;
  visit_buffers(m, [&](const ConstBufferRef& ref) { total += ref.size; });
  return total;
}

std::string render_cost_table(const CostReport& report, std::string_view provenance_note) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-44s %12s %14s %14s  %s\n", "layer", "params", "MACs",
                "elementwise", "output");
  out += line;
  for (const CostRow& row : report.rows) {
    std::string shape = "(";
    for (size_t i = 0; i < row.out_shape.size(); ++i) {
      shape += (i ? "," : "") + std::to_string(row.out_shape[i]);
    }
    shape += ")";
    std::snprintf(line, sizeof(line), "%-44s %12lld %14lld %14lld  %s\n", row.path.c_str(),
                  static_cast<long long>(row.params), static_cast<long long>(row.macs),
                  static_cast<long long>(row.elementwise), shape.c_str());
    out += line;
  }
  std::snprintf(line, sizeof(line), "totals: params %lld (%.4f M)\n",
                static_cast<long long>(report.total_params),
                static_cast<double>(report.total_params) / 1e6);
  out += line;
  std::snprintf(line, sizeof(line), "        MACs %lld\n",
                static_cast<long long>(report.total_macs));
  out += line;
  std::snprintf(line, sizeof(line),
                "        GFLOPs %.3f at 1 FLOP/MAC | %.3f at 2 FLOPs/MAC\n", report.gflops_1x,
                report.gflops_2x);
  out += line;
  std::snprintf(line, sizeof(line), "        elementwise ops %lld (excluded from MACs)\n",
                static_cast<long long>(report.total_elementwise));
  out += line;
  out += "note: ";
  out += provenance_note;
  out += "\n";
  return out;
}

std::string cost_report_to_json(const CostReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const CostRow& row : report.rows) {
    rows.push_back({{"path", row.path},
                    {"params", row.params},
                    {"macs", row.macs},
                    {"elementwise", row.elementwise},
                    {"out_shape", row.out_shape}});
  }
  const nlohmann::json doc = {{"rows", rows},
                              {"totals",
                               {{"params", report.total_params},
                                {"macs", report.total_macs},
                                {"elementwise", report.total_elementwise},
                                {"gflops_1x", report.gflops_1x},
                                {"gflops_2x", report.gflops_2x}}}};
  return doc.dump(2);
}

CostReport cost_report_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("cost report JSON parse failure: ") + e.what());
  }
  try {
    CostReport report;
    for (const auto& row : doc.at("rows")) {
      CostRow r;
      r.path = row.at("path").get<std::string>();
      r.params = row.at("params").get<int64_t>();
      r.macs = row.at("macs").get<int64_t>();
      r.elementwise = row.at("elementwise").get<int64_t>();
      r.out_shape = row.at("out_shape").get<std::vector<int64_t>>();
      report.rows.push_back(std::move(r));
    }
    const auto& totals = doc.at("totals");
    report.total_params = totals.at("params").get<int64_t>();
    report.total_macs = totals.at("macs").get<int64_t>();
    report.total_elementwise = totals.at("elementwise").get<int64_t>();
    report.gflops_1x = totals.at("gflops_1x").get<double>();
    report.gflops_2x = totals.at("gflops_2x").get<double>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("cost report JSON field failure: ") + e.what());
  }
}

}  // namespace xugt
