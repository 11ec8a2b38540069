#include "xugt/rng.hpp"

#include <cmath>

#include "xugt/errors.hpp"

namespace xugt {

uint64_t fnv1a64(const void* data, size_t len, uint64_t state) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    state ^= bytes[i];
    state *= 0x100000001b3ULL;
  }
  return state;
}

uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

void init_kaiming_uniform(Tensor5& weights, int64_t fan_in, uint64_t seed) {
  if (fan_in < 1) throw ConfigError("init fan_in must be >= 1, got " + std::to_string(fan_in));
  const float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
  ParamRng rng(seed);
  for (float& v : weights.buffer()) v = rng.uniform(bound);
}

}  // namespace xugt
