#pragma once

#include <filesystem>

#include "xugt/model.hpp"

namespace xugt {

// Weight file, little-endian throughout:
//   magic "XUGT" | u32 version = 1 | u32 tensor count
//   per tensor: u16 name length | name bytes | u8 ndim | u32 dims[ndim] |
//               f32 data (product of dims)
//   trailing u64 FNV-1a digest of every preceding byte
//
// Integrity failures (magic, version, truncation, digest) raise IoError;
// mismatches against the model built from the config (unknown name, missing
// name, wrong shape) raise ShapeError naming the tensor.
void save_weights(const Model& m, const std::filesystem::path& path);
Model load_weights(const ModelConfig& cfg, const std::filesystem::path& path);

inline constexpr uint32_t kWeightFormatVersion = 1;

}  // namespace xugt
