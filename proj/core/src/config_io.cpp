#include "xugt/config_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xugt/errors.hpp"

namespace xugt {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

int64_t require_int(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key \"" + std::string(key) + "\" in " + where);
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be an integer");
  }
  return v.get<int64_t>();
}

bool require_bool(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key \"" + std::string(key) + "\" in " + where);
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be a boolean");
  }
  return v.get<bool>();
}

double require_real(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key \"" + std::string(key) + "\" in " + where);
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError("key \"" + std::string(key) + "\" in " + where + " must be a number");
  }
  return v.get<double>();
}

}  // namespace

ModelConfig parse_config_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config JSON parse failure: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown_keys(doc, {"stem_width", "stages", "head_mid_width", "num_classes", "input"},
                      "config");
  ModelConfig cfg;
  cfg.stem_width = require_int(doc, "stem_width", "config");
  cfg.head_mid_width = require_int(doc, "head_mid_width", "config");
  cfg.num_classes = require_int(doc, "num_classes", "config");
  if (!doc.contains("input") || !doc.at("input").is_object()) {
    throw ConfigError("config needs an \"input\" object");
  }
  const json& input = doc.at("input");
  reject_unknown_keys(input, {"frames", "height", "width"}, "input");
  cfg.input.frames = require_int(input, "frames", "input");
  cfg.input.height = require_int(input, "height", "input");
  cfg.input.width = require_int(input, "width", "input");
  if (!doc.contains("stages") || !doc.at("stages").is_array()) {
    throw ConfigError("config needs a \"stages\" array");
  }
  cfg.stages.clear();
  size_t idx = 0;
  for (const json& st : doc.at("stages")) {
    const std::string where = "stages[" + std::to_string(idx) + "]";
    if (!st.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown_keys(st,
                        {"width", "depth", "tada_first_k", "simam_after", "se_all_blocks",
                         "shift_all_blocks", "expansion"},
                        where);
    StageSpec spec;
    spec.width = require_int(st, "width", where);
    spec.depth = require_int(st, "depth", where);
    spec.tada_first_k = require_int(st, "tada_first_k", where);
    spec.simam_after = require_bool(st, "simam_after", where);
    spec.se_all_blocks = require_bool(st, "se_all_blocks", where);
    spec.shift_all_blocks = require_bool(st, "shift_all_blocks", where);
    spec.expansion = require_real(st, "expansion", where);
    cfg.stages.push_back(spec);
    ++idx;
  }
  check_config(cfg);
  return cfg;
}

std::string config_to_json(const ModelConfig& cfg) {
  json stages = json::array();
  for (const StageSpec& st : cfg.stages) {
    stages.push_back({{"width", st.width},
                      {"depth", st.depth},
                      {"tada_first_k", st.tada_first_k},
                      {"simam_after", st.simam_after},
                      {"se_all_blocks", st.se_all_blocks},
                      {"shift_all_blocks", st.shift_all_blocks},
                      {"expansion", st.expansion}});
  }
  const json doc = {{"stem_width", cfg.stem_width},
                    {"stages", stages},
                    {"head_mid_width", cfg.head_mid_width},
                    {"num_classes", cfg.num_classes},
                    {"input",
                     {{"frames", cfg.input.frames},
                      {"height", cfg.input.height},
                      {"width", cfg.input.width}}}};
  return doc.dump(2) + "\n";
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

void save_config(const ModelConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << config_to_json(cfg);
  if (!out) throw IoError("failed writing config file " + path.string());
}

}  // namespace xugt
