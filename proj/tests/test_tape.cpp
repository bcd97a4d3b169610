#include <doctest.h>

#include <cmath>

#include "fist/errors.hpp"
#include "fist/layers.hpp"
#include "fist/tape.hpp"
#include "gradcheck.hpp"

using namespace fist;
using nn::Binder;
using nn::ParamSet;
using nn::Tape;
using nn::Tensor;

namespace {

Tensor random_tensor(int r, int c, Rng& rng, double scale = 1.0) {
  Tensor t(r, c);
  for (auto& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

}  // namespace

TEST_CASE("matmul forward matches hand multiplication") {
  // independent dense oracle: explicit triple loop
  Rng rng(7);
  Tensor a = random_tensor(3, 2, rng);
  Tensor b = random_tensor(2, 4, rng);
  Tape t;
  Tape::Id c = t.matmul(t.constant(a), t.constant(b));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 2; ++k) acc += a.at(i, k) * b.at(k, j);
      CHECK(t.val(c).at(i, j) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("elementwise forward values") {
  Tape t;
  Tape::Id x = t.constant(Tensor::row_vector({-1.0, 0.0, 2.0}));
  CHECK(t.val(t.tanh(x)).data[0] == doctest::Approx(std::tanh(-1.0)));
  CHECK(t.val(t.sigmoid(x)).data[1] == doctest::Approx(0.5));
  CHECK(t.val(t.exp(x)).data[2] == doctest::Approx(std::exp(2.0)));
  CHECK(t.val(t.clamp(x, -0.5, 1.0)).data[0] == doctest::Approx(-0.5));
  CHECK(t.val(t.clamp(x, -0.5, 1.0)).data[2] == doctest::Approx(1.0));
  CHECK(t.val(t.sum_all(x)).data[0] == doctest::Approx(1.0));
  CHECK(t.val(t.mean_all(x)).data[0] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("shape mismatches are configuration errors") {
  Tape t;
  Tape::Id a = t.constant(Tensor::zeros(2, 3));
  Tape::Id b = t.constant(Tensor::zeros(3, 2));
  CHECK_THROWS_AS((void)t.add(a, b), ConfigError);
  CHECK_THROWS_AS((void)t.matmul(a, a), ConfigError);
  CHECK_THROWS_AS((void)t.slice_cols(a, 2, 1), ConfigError);
}

TEST_CASE("gradients of a composite graph match finite differences") {
  // exercises matmul, add_row, tanh, sigmoid, mul, concat, slice, sub_col,
  // row_sum, transpose, log, exp, clamp, scale in one graph
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    Rng rng(seed);
    ParamSet ps;
    ps.add("W1", random_tensor(4, 6, rng, 0.7));
    ps.add("b1", random_tensor(1, 6, rng, 0.3));
    ps.add("W2", random_tensor(6, 3, rng, 0.7));
    Tensor x = random_tensor(5, 4, rng);
    Tensor mask = random_tensor(5, 3, rng);

    testing::check_gradients(ps, [&](Binder& bind) {
      Tape& t = bind.tape();
      Tape::Id xin = t.constant(x);
      Tape::Id h = t.tanh(t.add_row_broadcast(t.matmul(xin, bind["W1"]), bind["b1"]));
      Tape::Id left = t.slice_cols(h, 0, 3);
      Tape::Id right = t.sigmoid(t.slice_cols(h, 3, 6));
      Tape::Id joined = t.mul(t.concat_cols(left, right), t.concat_cols(t.constant(mask), t.constant(mask)));
      Tape::Id y = t.matmul(joined, t.concat_cols(bind["W2"], bind["W2"]));
      Tape::Id shifted = t.sub_col_broadcast(y, t.constant(Tensor::constant(5, 1, 0.25)));
      Tape::Id lse = t.log(t.row_sum(t.exp(t.clamp(shifted, -4.0, 4.0))));
      Tape::Id tr = t.transpose(lse);
      return t.scale(t.mean_all(tr), 1.7);
    });
  }
}

TEST_CASE("detach blocks gradient flow") {
  Rng rng(11);
  ParamSet ps;
  ps.add("w", random_tensor(1, 3, rng));
  Tape t;
  Binder bind(t, ps);
  Tape::Id w = bind["w"];
  Tape::Id loss = t.sum_all(t.mul(t.detach(w), w));
  t.backward(loss);
  // d/dw of detach(w)*w is detach(w), not 2w
  for (int i = 0; i < 3; ++i) {
    CHECK(ps.get("w").grad.data[i] == doctest::Approx(ps.get("w").value.data[i]));
  }
}

TEST_CASE("values and gradients stay finite through a deep graph") {
  Rng rng(13);
  ParamSet ps;
  ps.add("W", random_tensor(8, 8, rng, 0.5));
  Tape t;
  Binder bind(t, ps);
  Tape::Id h = t.constant(random_tensor(2, 8, rng));
  for (int i = 0; i < 30; ++i) h = t.tanh(t.matmul(h, bind["W"]));
  Tape::Id loss = t.mean_all(h);
  t.backward(loss);
  CHECK(t.val(loss).all_finite());
  CHECK(ps.get("W").grad.all_finite());
}

TEST_CASE("parameter node is shared within one tape") {
  Rng rng(17);
  ParamSet ps;
  ps.add("w", random_tensor(2, 2, rng));
  Tape t;
  Tape::Id a = t.param(ps, "w");
  Tape::Id b = t.param(ps, "w");
  CHECK(a == b);
}
