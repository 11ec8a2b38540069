#pragma once

#include <filesystem>
#include <string>

#include "xugt/model.hpp"

namespace xugt {

// JSON mirrors ModelConfig field names exactly:
// {"stem_width": 24, "stages": [{"width": .., "depth": .., "tada_first_k": ..,
//  "simam_after": .., "se_all_blocks": .., "shift_all_blocks": ..,
//  "expansion": ..}, ...], "head_mid_width": .., "num_classes": ..,
//  "input": {"frames": .., "height": .., "width": ..}}
// Unknown keys are rejected so typos cannot silently fall back to defaults.
ModelConfig parse_config_json(const std::string& text);
std::string config_to_json(const ModelConfig& cfg);

ModelConfig load_config(const std::filesystem::path& path);
void save_config(const ModelConfig& cfg, const std::filesystem::path& path);

}  // namespace xugt
