#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "xugt/tensor.hpp"

namespace xugt {

inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

// FNV-1a over bytes; used for name-keyed parameter seeds and file digests.
uint64_t fnv1a64(const void* data, size_t len, uint64_t state = kFnvOffset);
uint64_t fnv1a64(std::string_view s);

// Portable deterministic draws: std::mt19937_64 (exactly specified by the
// standard) mapped through the top 24 bits, so results do not depend on
// distribution implementations.
class ParamRng {
public:
  explicit ParamRng(uint64_t seed) : gen_(seed) {}

  // uniform in [-bound, bound)
  float uniform(float bound) {
    const uint64_t bits = gen_() >> 40;  // top 24 bits
    const double u = static_cast<double>(bits) * (1.0 / 16777216.0);
    return static_cast<float>((2.0 * u - 1.0) * static_cast<double>(bound));
  }

  // Raw 64-bit draw, for shape and choice sampling in self-checks.
  uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
};

// Uniform fan-in init: bound = sqrt(6 / fan_in).
void init_kaiming_uniform(Tensor5& weights, int64_t fan_in, uint64_t seed);

}  // namespace xugt
