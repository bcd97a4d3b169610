#include <doctest.h>

#include <cmath>

#include "fist/errors.hpp"
#include "fist/params.hpp"

using namespace fist;
using nn::AdamConfig;
using nn::AdamState;
using nn::ParamSet;
using nn::Tensor;

TEST_CASE("zero gradient leaves parameters unchanged") {
  ParamSet ps;
  ps.add("w", Tensor::row_vector({1.0, -2.0, 3.0}));
  AdamState adam(AdamConfig{});
  adam.step(ps);
  CHECK(ps.get("w").value.data[0] == doctest::Approx(1.0));
  CHECK(ps.get("w").value.data[1] == doctest::Approx(-2.0));
  CHECK(ps.get("w").value.data[2] == doctest::Approx(3.0));
}

TEST_CASE("first step moves by -lr * sign(g) up to epsilon effects") {
  ParamSet ps;
  ps.add("w", Tensor::row_vector({1.0, 1.0}));
  ps.get("w").grad = Tensor::row_vector({0.5, -0.003});
  AdamConfig cfg;
  AdamState adam(cfg);
  adam.step(ps);
  CHECK(std::fabs(ps.get("w").value.data[0] - (1.0 - cfg.lr)) < cfg.lr * 1e-4);
  CHECK(std::fabs(ps.get("w").value.data[1] - (1.0 + cfg.lr)) < cfg.lr * 1e-4);
  // gradients were consumed
  CHECK(ps.get("w").grad.data[0] == 0.0);
  CHECK(ps.get("w").grad.data[1] == 0.0);
}

TEST_CASE("three-step trace matches an independent scalar implementation") {
  // oracle: scalar Adam stepped by hand on f(x) = 0.5 x^2 (grad = x)
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double x = 1.0, m = 0.0, v = 0.0;
  std::vector<double> expected;
  for (int t = 1; t <= 3; ++t) {
    const double g = x;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double m_hat = m / (1 - std::pow(b1, t));
    const double v_hat = v / (1 - std::pow(b2, t));
    x -= lr * m_hat / (std::sqrt(v_hat) + eps);
    expected.push_back(x);
  }

  ParamSet ps;
  ps.add("x", Tensor::row_vector({1.0}));
  AdamState adam(AdamConfig{lr, b1, b2, eps});
  for (int t = 0; t < 3; ++t) {
    ps.get("x").grad.data[0] = ps.get("x").value.data[0];
    adam.step(ps);
    CHECK(ps.get("x").value.data[0] == doctest::Approx(expected[t]).epsilon(1e-12));
  }
  CHECK(adam.step_count() == 3);
}

TEST_CASE("adam is deterministic given (params, grads, state)") {
  auto run = []() {
    ParamSet ps;
    ps.add("w", Tensor::row_vector({0.3, -0.7}));
    AdamState adam(AdamConfig{});
    for (int t = 0; t < 10; ++t) {
      ps.get("w").grad.data[0] = 0.1 * (t + 1);
      ps.get("w").grad.data[1] = -0.05 * (t + 1);
      adam.step(ps);
    }
    return std::make_pair(ps.get("w").value.data[0], ps.get("w").value.data[1]);
  };
  auto a = run();
  auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("non-finite gradient aborts naming the parameter") {
  ParamSet ps;
  ps.add("fine", Tensor::row_vector({1.0}));
  ps.add("broken", Tensor::row_vector({1.0}));
  ps.get("broken").grad.data[0] = std::nan("");
  AdamState adam(AdamConfig{});
  CHECK_THROWS_WITH_AS(adam.step(ps), doctest::Contains("broken"), NumericError);
}
