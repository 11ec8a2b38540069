#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace xugt {

// Cross-entropy with a polynomial correction term:
//   loss = -ln(p_y) + epsilon * (1 - p_y),  p = softmax(logits)
// gradient w.r.t. logits: (p_j - [j == y]) * (1 + epsilon * p_y).
// Internals run in double with a stabilized log-softmax.
struct LossConfig {
  double epsilon = 1.0;
  int64_t num_classes = 0;
};

double poly1_loss(std::span<const double> logits, int64_t label, const LossConfig& cfg);
double poly1_loss(std::span<const float> logits, int64_t label, const LossConfig& cfg);

std::vector<double> poly1_grad(std::span<const double> logits, int64_t label,
                               const LossConfig& cfg);
std::vector<double> poly1_grad(std::span<const float> logits, int64_t label, const LossConfig& cfg);

}  // namespace xugt
