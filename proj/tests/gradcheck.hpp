#pragma once

#include <doctest.h>

#include <functional>
#include <string>

#include "fist/layers.hpp"
#include "fist/tape.hpp"

namespace fist::testing {

using GraphFn = std::function<nn::Tape::Id(nn::Binder&)>;

// Central finite differences (64-bit, step 1e-5) against tape gradients,
// checked element by element at relative tolerance rel_tol. The graph builder
// must be deterministic; any sampling noise has to be captured beforehand.
// `prefix` restricts the check to parameters whose name starts with it (used
// for loss terms that intentionally stop gradients into other groups).
inline void check_gradients(nn::ParamSet& ps, const GraphFn& build, double rel_tol = 1e-4,
                            double fd_step = 1e-5, const std::string& prefix = "") {
  ps.zero_grads();
  double loss0 = 0.0;
  {
    nn::Tape tape;
    nn::Binder bind(tape, ps);
    nn::Tape::Id root = build(bind);
    tape.backward(root);
    loss0 = tape.val(root).data[0];
  }
  CHECK(std::isfinite(loss0));

  const auto eval = [&]() {
    nn::Tape tape;
    nn::Binder bind(tape, static_cast<const nn::ParamSet&>(ps));
    return tape.val(build(bind)).data[0];
  };

  for (auto& p : ps) {
    if (!prefix.empty() && p.name.rfind(prefix, 0) != 0) continue;
    for (std::size_t i = 0; i < p.value.data.size(); ++i) {
      const double orig = p.value.data[i];
      p.value.data[i] = orig + fd_step;
      const double fp = eval();
      p.value.data[i] = orig - fd_step;
      const double fm = eval();
      p.value.data[i] = orig;
      const double fd = (fp - fm) / (2.0 * fd_step);
      const double an = p.grad.data[i];
      const double denom = std::max({std::fabs(an), std::fabs(fd), 1e-3});
      const double rel = std::fabs(an - fd) / denom;
      if (rel > rel_tol) {
        FAIL_CHECK("gradient mismatch at " << p.name << "[" << i << "]: analytic=" << an
                                           << " fd=" << fd << " rel=" << rel);
        return;
      }
    }
  }
}

}  // namespace fist::testing
