#include "fist/layers.hpp"

#include <cmath>

namespace fist::nn {

Tape::Id Binder::operator[](const std::string& name) {
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  Tape::Id id = train_ ? tape_->param(*train_, name) : tape_->frozen(*frozen_, name);
  cache_[name] = id;
  return id;
}

Tensor dense_init(int fan_in, int rows, int cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(rows, cols);
  for (auto& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

Linear Linear::create(ParamSet& ps, const std::string& prefix, int in, int out, Rng& rng) {
  ps.add(prefix + ".W", dense_init(in, in, out, rng));
  ps.add(prefix + ".b", Tensor::zeros(1, out));
  return Linear{prefix, in, out};
}

Tape::Id Linear::forward(Binder& bind, Tape::Id x) const {
  Tape& t = bind.tape();
  return t.add_row_broadcast(t.matmul(x, bind[prefix + ".W"]), bind[prefix + ".b"]);
}

Mlp Mlp::create(ParamSet& ps, const std::string& prefix, int in, int width, int hidden_layers,
                int out, Rng& rng) {
  Mlp m;
  int d = in;
  for (int i = 0; i < hidden_layers; ++i) {
    m.hidden.push_back(Linear::create(ps, prefix + ".l" + std::to_string(i), d, width, rng));
    d = width;
  }
  m.head = Linear::create(ps, prefix + ".out", d, out, rng);
  return m;
}

Tape::Id Mlp::forward(Binder& bind, Tape::Id x) const {
  Tape& t = bind.tape();
  Tape::Id h = x;
  for (const auto& layer : hidden) h = t.tanh(layer.forward(bind, h));
  return head.forward(bind, h);
}

LstmCell LstmCell::create(ParamSet& ps, const std::string& prefix, int in, int hidden, Rng& rng) {
  const int fan_in = in + hidden;
  ps.add(prefix + ".Wx", dense_init(fan_in, in, 4 * hidden, rng));
  ps.add(prefix + ".Wh", dense_init(fan_in, hidden, 4 * hidden, rng));
  ps.add(prefix + ".b", Tensor::zeros(1, 4 * hidden));
  return LstmCell{prefix, in, hidden};
}

std::pair<Tape::Id, Tape::Id> LstmCell::step(Binder& bind, Tape::Id x, Tape::Id h,
                                             Tape::Id c) const {
  Tape& t = bind.tape();
  Tape::Id pre = t.add_row_broadcast(
      t.add(t.matmul(x, bind[prefix + ".Wx"]), t.matmul(h, bind[prefix + ".Wh"])),
      bind[prefix + ".b"]);
  Tape::Id gi = t.sigmoid(t.slice_cols(pre, 0, hidden));
  Tape::Id gf = t.sigmoid(t.slice_cols(pre, hidden, 2 * hidden));
  Tape::Id gg = t.tanh(t.slice_cols(pre, 2 * hidden, 3 * hidden));
  Tape::Id go = t.sigmoid(t.slice_cols(pre, 3 * hidden, 4 * hidden));
  Tape::Id c_next = t.add(t.mul(gf, c), t.mul(gi, gg));
  Tape::Id h_next = t.mul(go, t.tanh(c_next));
  return {h_next, c_next};
}

GaussianHead GaussianHead::create(ParamSet& ps, const std::string& prefix, int in, int z, Rng& rng,
                                  double lo, double hi) {
  GaussianHead g;
  g.lin = Linear::create(ps, prefix, in, 2 * z, rng);
  g.z = z;
  g.lo = lo;
  g.hi = hi;
  return g;
}

GaussianNodes GaussianHead::forward(Binder& bind, Tape::Id x) const {
  Tape& t = bind.tape();
  Tape::Id out = lin.forward(bind, x);
  GaussianNodes g;
  g.mean = t.slice_cols(out, 0, z);
  g.log_std = t.clamp(t.slice_cols(out, z, 2 * z), lo, hi);
  return g;
}

}  // namespace fist::nn
