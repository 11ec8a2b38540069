#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "xugt/errors.hpp"
#include "xugt/loss.hpp"

using namespace xugt;

namespace {

LossConfig config_for(int64_t classes, double epsilon) {
  LossConfig cfg;
  cfg.num_classes = classes;
  cfg.epsilon = epsilon;
  return cfg;
}

}  // namespace

TEST_CASE("two-logit case matches the hand-computed value") {
  // softmax([2, 0]) = (0.880797..., 0.119203...)
  const std::vector<double> logits{2.0, 0.0};
  const double ce = poly1_loss(logits, 0, config_for(2, 0.0));
  CHECK(ce == doctest::Approx(0.12692801104297263).epsilon(1e-12));
  const double poly = poly1_loss(logits, 0, config_for(2, 1.0));
  CHECK(poly == doctest::Approx(0.12692801104297263 + (1.0 - 0.8807970779778823)).epsilon(1e-12));
}

TEST_CASE("uniform logits evaluate to ln K plus the correction term") {
  const std::vector<double> ten(10, 1.25);
  const double loss = poly1_loss(ten, 3, config_for(10, 1.0));
  CHECK(loss == doctest::Approx(std::log(10.0) + 0.9).epsilon(1e-12));
  CHECK(loss == doctest::Approx(3.202585092994046).epsilon(1e-9));
  const std::vector<double> sixty(60, -0.5);
  CHECK(poly1_loss(sixty, 59, config_for(60, 0.25)) ==
        doctest::Approx(std::log(60.0) + 0.25 * (1.0 - 1.0 / 60.0)).epsilon(1e-12));
}

TEST_CASE("loss is invariant to a constant logit shift") {
  const std::vector<double> logits{0.3, -1.2, 2.7, 0.0};
  std::vector<double> shifted = logits;
  for (double& v : shifted) v += 100.0;
  const LossConfig cfg = config_for(4, 1.5);
  CHECK(poly1_loss(logits, 2, cfg) == doctest::Approx(poly1_loss(shifted, 2, cfg)).epsilon(1e-9));
}

TEST_CASE("extreme logits stay finite through the stabilized path") {
  const std::vector<double> logits{1000.0, 0.0, -1000.0};
  const double loss = poly1_loss(logits, 1, config_for(3, 1.0));
  CHECK(std::isfinite(loss));
  CHECK(loss > 100.0);  // label probability is astronomically small
  const std::vector<double> grad = poly1_grad(logits, 1, config_for(3, 1.0));
  for (double g : grad) CHECK(std::isfinite(g));
}

TEST_CASE("gradient components sum to zero when epsilon is zero") {
  const std::vector<double> logits{0.5, -0.25, 1.75, -2.0, 0.0};
  const std::vector<double> grad = poly1_grad(logits, 3, config_for(5, 0.0));
  double sum = 0.0;
  for (double g : grad) sum += g;
  CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  const std::vector<double> logits{1.1, -0.7, 0.3, 2.2};
  const LossConfig cfg = config_for(4, 0.8);
  const std::vector<double> grad = poly1_grad(logits, 1, cfg);
  const double h = 1e-3;
  for (size_t j = 0; j < logits.size(); ++j) {
    std::vector<double> plus = logits, minus = logits;
    plus[j] += h;
    minus[j] -= h;
    const double fd = (poly1_loss(plus, 1, cfg) - poly1_loss(minus, 1, cfg)) / (2.0 * h);
    CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("float logits promote to the double path") {
  const std::vector<float> logits{2.0f, 0.0f};
  const std::vector<double> wide{2.0, 0.0};
  const LossConfig cfg = config_for(2, 1.0);
  CHECK(poly1_loss(std::span<const float>(logits), 0, cfg) ==
        poly1_loss(std::span<const double>(wide), 0, cfg));
}

TEST_CASE("loss validates labels, class counts, epsilon, and logit finiteness") {
  const std::vector<double> logits{0.0, 1.0};
  CHECK_THROWS_AS(poly1_loss(logits, 2, config_for(2, 1.0)), ShapeError);
  CHECK_THROWS_AS(poly1_loss(logits, -1, config_for(2, 1.0)), ShapeError);
  CHECK_THROWS_AS(poly1_loss(logits, 0, config_for(3, 1.0)), ShapeError);
  CHECK_THROWS_AS(poly1_loss(std::vector<double>{}, 0, config_for(0, 1.0)), ShapeError);
  CHECK_THROWS_AS(poly1_loss(logits, 0, config_for(2, std::numeric_limits<double>::infinity())),
                  ConfigError);
  const std::vector<double> bad{0.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(poly1_loss(bad, 0, config_for(2, 1.0)), ShapeError);
}
