#include "xugt/loss.hpp"

#include <algorithm>
#include <cmath>

#include "xugt/errors.hpp"

namespace xugt {

namespace {

void check_inputs(size_t n, int64_t label, const LossConfig& cfg) {
  if (n == 0) throw ShapeError("loss needs at least one logit");
  if (cfg.num_classes != static_cast<int64_t>(n)) {
    throw ShapeError("loss config expects " + std::to_string(cfg.num_classes) +
                     " classes, got " + std::to_string(n) + " logits");
  }
  if (label < 0 || label >= static_cast<int64_t>(n)) {
    throw ShapeError("loss label " + std::to_string(label) + " out of range [0, " +
                     std::to_string(n) + ")");
  }
  if (!std::isfinite(cfg.epsilon)) throw ConfigError("loss epsilon must be finite");
}

// log p_y and p via one stabilized pass
struct SoftmaxParts {
  std::vector<double> p;
  double log_py = 0.0;
};

SoftmaxParts softmax_parts(std::span<const double> z, int64_t label) {
  const double top = *std::max_element(z.begin(), z.end());
  SoftmaxParts parts;
  parts.p.resize(z.size());
  double denom = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    parts.p[i] = std::exp(z[i] - top);
    denom += parts.p[i];
  }
  for (double& v : parts.p) v /= denom;
  parts.log_py = (z[static_cast<size_t>(label)] - top) - std::log(denom);
  return parts;
}

}  // namespace

double poly1_loss(std::span<const double> logits, int64_t label, const LossConfig& cfg) {
  check_inputs(logits.size(), label, cfg);
  for (double v : logits) {
    if (!std::isfinite(v)) throw ShapeError("loss logits must be finite");
  }
  const SoftmaxParts parts = softmax_parts(logits, label);
  const double p_y = parts.p[static_cast<size_t>(label)];
  return -parts.log_py + cfg.epsilon * (1.0 - p_y);
}

double poly1_loss(std::span<const float> logits, int64_t label, const LossConfig& cfg) {
  std::vector<double> wide(logits.begin(), logits.end());
  return poly1_loss(std::span<const double>(wide), label, cfg);
}

std::vector<double> poly1_grad(std::span<const double> logits, int64_t label,
                               const LossConfig& cfg) {
  check_inputs(logits.size(), label, cfg);
  for (double v : logits) {
    if (!std::isfinite(v)) throw ShapeError("loss logits must be finite");
  }
  const SoftmaxParts parts = softmax_parts(logits, label);
  const double p_y = parts.p[static_cast<size_t>(label)];
  const double factor = 1.0 + cfg.epsilon * p_y;
  std::vector<double> grad(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) {
    const double onehot = static_cast<int64_t>(i) == label ? 1.0 : 0.0;
    grad[i] = (parts.p[i] - onehot) * factor;
  }
  return grad;
}

std::vector<double> poly1_grad(std::span<const float> logits, int64_t label,
                               const LossConfig& cfg) {
  std::vector<double> wide(logits.begin(), logits.end());
  return poly1_grad(std::span<const double>(wide), label, cfg);
}

}  // namespace xugt
