#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fist/gaussian.hpp"
#include "fist/rng.hpp"
#include "fist/tape.hpp"

namespace fist::nn {

// Resolves parameter names to tape ids, either trainable (param nodes) or as
// frozen snapshots for concurrent inference.
class Binder {
 public:
  Binder(Tape& t, ParamSet& trainable) : tape_(&t), train_(&trainable) {}
  Binder(Tape& t, const ParamSet& frozen) : tape_(&t), frozen_(&frozen) {}

  Tape::Id operator[](const std::string& name);
  Tape& tape() { return *tape_; }

 private:
  Tape* tape_;
  ParamSet* train_ = nullptr;
  const ParamSet* frozen_ = nullptr;
  std::unordered_map<std::string, Tape::Id> cache_;
};

// Uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor dense_init(int fan_in, int rows, int cols, Rng& rng);

// y = x W + b with parameters "<prefix>.W" (in x out) and "<prefix>.b" (1 x out).
struct Linear {
  std::string prefix;
  int in = 0;
  int out = 0;

  static Linear create(ParamSet& ps, const std::string& prefix, int in, int out, Rng& rng);
  Tape::Id forward(Binder& bind, Tape::Id x) const;
};

// Feed-forward body with tanh hidden activations and a linear output layer.
struct Mlp {
  std::vector<Linear> hidden;
  Linear head;

  static Mlp create(ParamSet& ps, const std::string& prefix, int in, int width, int hidden_layers,
                    int out, Rng& rng);
  Tape::Id forward(Binder& bind, Tape::Id x) const;
};

// Single recurrent cell with input/forget/candidate/output gates packed into
// "<prefix>.Wx" (in x 4h), "<prefix>.Wh" (h x 4h), "<prefix>.b" (1 x 4h).
struct LstmCell {
  std::string prefix;
  int in = 0;
  int hidden = 0;

  static LstmCell create(ParamSet& ps, const std::string& prefix, int in, int hidden, Rng& rng);
  // Returns (h', c').
  std::pair<Tape::Id, Tape::Id> step(Binder& bind, Tape::Id x, Tape::Id h, Tape::Id c) const;
};

// Linear head producing a clamped-log-std diagonal Gaussian of dimension z.
struct GaussianHead {
  Linear lin;
  int z = 0;
  double lo = -5.0;
  double hi = 2.0;

  static GaussianHead create(ParamSet& ps, const std::string& prefix, int in, int z, Rng& rng,
                             double lo = -5.0, double hi = 2.0);
  GaussianNodes forward(Binder& bind, Tape::Id x) const;
};

}  // namespace fist::nn
