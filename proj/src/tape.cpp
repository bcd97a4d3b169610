#include "fist/tape.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fist/errors.hpp"

namespace fist::nn {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> emap(const Tensor& t) {
  return {t.data.data(), t.rows, t.cols};
}

Eigen::Map<RowMajor> emap(Tensor& t) {
  return {t.data.data(), t.rows, t.cols};
}

}  // namespace

Tape::Id Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

void Tape::check_same_shape(Id a, Id b, const char* what) const {
  if (!nodes_[a].value.same_shape(nodes_[b].value)) {
    throw ConfigError(std::string(what) + ": shape mismatch (" +
                      std::to_string(nodes_[a].value.rows) + "x" + std::to_string(nodes_[a].value.cols) +
                      " vs " + std::to_string(nodes_[b].value.rows) + "x" +
                      std::to_string(nodes_[b].value.cols) + ")");
  }
}

Tape::Id Tape::constant(Tensor v) {
  Node n;
  n.value = std::move(v);
  n.op = Op::kConst;
  return push(std::move(n));
}

Tape::Id Tape::leaf(Tensor v) {
  Node n;
  n.value = std::move(v);
  n.op = Op::kLeaf;
  n.tracked = true;
  return push(std::move(n));
}

Tape::Id Tape::param(ParamSet& ps, const std::string& name) {
  auto& cache = param_cache_[&ps];
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  Node n;
  n.value = ps.get(name).value;
  n.op = Op::kParam;
  n.tracked = true;
  n.param_set = &ps;
  n.param_name = name;
  Id id = push(std::move(n));
  cache[name] = id;
  return id;
}

Tape::Id Tape::frozen(const ParamSet& ps, const std::string& name) {
  return constant(ps.get(name).value);
}

Tape::Id Tape::unary(Op op, Id a, double k0, double k1) {
  Node n;
  n.op = op;
  n.a = a;
  n.k0 = k0;
  n.k1 = k1;
  n.tracked = nodes_[a].tracked;
  const Tensor& va = nodes_[a].value;
  switch (op) {
    case Op::kScale: {
      n.value = va;
      for (auto& x : n.value.data) x *= k0;
      break;
    }
    case Op::kAddScalar: {
      n.value = va;
      for (auto& x : n.value.data) x += k0;
      break;
    }
    case Op::kTanh: {
      n.value = va;
      for (auto& x : n.value.data) x = std::tanh(x);
      break;
    }
    case Op::kSigmoid: {
      n.value = va;
      for (auto& x : n.value.data) x = 1.0 / (1.0 + std::exp(-x));
      break;
    }
    case Op::kExp: {
      n.value = va;
      for (auto& x : n.value.data) x = std::exp(x);
      break;
    }
    case Op::kLog: {
      n.value = va;
      for (auto& x : n.value.data) x = std::log(x);
      break;
    }
    case Op::kClamp: {
      n.value = va;
      for (auto& x : n.value.data) x = x < k0 ? k0 : (x > k1 ? k1 : x);
      break;
    }
    case Op::kTranspose: {
      n.value = Tensor(va.cols, va.rows);
      emap(n.value) = emap(va).transpose();
      break;
    }
    case Op::kRowSum: {
      n.value = Tensor(va.rows, 1);
      for (int r = 0; r < va.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < va.cols; ++c) s += va.at(r, c);
        n.value.at(r, 0) = s;
      }
      break;
    }
    case Op::kSumAll:
    case Op::kMeanAll: {
      double s = 0.0;
      for (double x : va.data) s += x;
      if (op == Op::kMeanAll) s /= static_cast<double>(va.size());
      n.value = Tensor(1, 1);
      n.value.data[0] = s;
      break;
    }
    case Op::kSliceCols: {
      const int c0 = static_cast<int>(k0), c1 = static_cast<int>(k1);
      if (c0 < 0 || c1 > va.cols || c0 >= c1) throw ConfigError("slice_cols: bad range");
      n.value = Tensor(va.rows, c1 - c0);
      for (int r = 0; r < va.rows; ++r)
        for (int c = c0; c < c1; ++c) n.value.at(r, c - c0) = va.at(r, c);
      break;
    }
    case Op::kDetach: {
      n.value = va;
      n.tracked = false;
      break;
    }
    default:
      throw ConfigError("unary: bad op");
  }
  return push(std::move(n));
}

Tape::Id Tape::binary(Op op, Id a, Id b) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.tracked = nodes_[a].tracked || nodes_[b].tracked;
  const Tensor& va = nodes_[a].value;
  const Tensor& vb = nodes_[b].value;
  switch (op) {
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul: {
      check_same_shape(a, b, op == Op::kAdd ? "add" : (op == Op::kSub ? "sub" : "mul"));
      n.value = va;
      const std::size_t sz = n.value.data.size();
      if (op == Op::kAdd)
        for (std::size_t i = 0; i < sz; ++i) n.value.data[i] += vb.data[i];
      else if (op == Op::kSub)
        for (std::size_t i = 0; i < sz; ++i) n.value.data[i] -= vb.data[i];
      else
        for (std::size_t i = 0; i < sz; ++i) n.value.data[i] *= vb.data[i];
      break;
    }
    case Op::kAddRow: {
      if (vb.rows != 1 || vb.cols != va.cols) throw ConfigError("add_row_broadcast: shape mismatch");
      n.value = va;
      for (int r = 0; r < va.rows; ++r)
        for (int c = 0; c < va.cols; ++c) n.value.at(r, c) += vb.at(0, c);
      break;
    }
    case Op::kSubCol: {
      if (vb.cols != 1 || vb.rows != va.rows) throw ConfigError("sub_col_broadcast: shape mismatch");
      n.value = va;
      for (int r = 0; r < va.rows; ++r)
        for (int c = 0; c < va.cols; ++c) n.value.at(r, c) -= vb.at(r, 0);
      break;
    }
    case Op::kMatmul: {
      if (va.cols != vb.rows) {
        throw ConfigError("matmul: inner dimensions differ (" + std::to_string(va.cols) + " vs " +
                          std::to_string(vb.rows) + ")");
      }
      n.value = Tensor(va.rows, vb.cols);
      emap(n.value).noalias() = emap(va) * emap(vb);
      break;
    }
    case Op::kConcatCols: {
      if (va.rows != vb.rows) throw ConfigError("concat_cols: row mismatch");
      n.value = Tensor(va.rows, va.cols + vb.cols);
      for (int r = 0; r < va.rows; ++r) {
        for (int c = 0; c < va.cols; ++c) n.value.at(r, c) = va.at(r, c);
        for (int c = 0; c < vb.cols; ++c) n.value.at(r, va.cols + c) = vb.at(r, c);
      }
      break;
    }
    default:
      throw ConfigError("binary: bad op");
  }
  return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) { return binary(Op::kAdd, a, b); }
Tape::Id Tape::sub(Id a, Id b) { return binary(Op::kSub, a, b); }
Tape::Id Tape::mul(Id a, Id b) { return binary(Op::kMul, a, b); }
Tape::Id Tape::scale(Id a, double k) { return unary(Op::kScale, a, k); }
Tape::Id Tape::add_scalar(Id a, double k) { return unary(Op::kAddScalar, a, k); }
Tape::Id Tape::add_row_broadcast(Id a, Id row) { return binary(Op::kAddRow, a, row); }
Tape::Id Tape::sub_col_broadcast(Id a, Id col) { return binary(Op::kSubCol, a, col); }
Tape::Id Tape::tanh(Id a) { return unary(Op::kTanh, a); }
Tape::Id Tape::sigmoid(Id a) { return unary(Op::kSigmoid, a); }
Tape::Id Tape::exp(Id a) { return unary(Op::kExp, a); }
Tape::Id Tape::log(Id a) { return unary(Op::kLog, a); }
Tape::Id Tape::square(Id a) { return binary(Op::kMul, a, a); }
Tape::Id Tape::clamp(Id a, double lo, double hi) { return unary(Op::kClamp, a, lo, hi); }
Tape::Id Tape::matmul(Id a, Id b) { return binary(Op::kMatmul, a, b); }
Tape::Id Tape::transpose(Id a) { return unary(Op::kTranspose, a); }
Tape::Id Tape::concat_cols(Id a, Id b) { return binary(Op::kConcatCols, a, b); }
Tape::Id Tape::slice_cols(Id a, int c0, int c1) {
  return unary(Op::kSliceCols, a, static_cast<double>(c0), static_cast<double>(c1));
}
Tape::Id Tape::row_sum(Id a) { return unary(Op::kRowSum, a); }
Tape::Id Tape::sum_all(Id a) { return unary(Op::kSumAll, a); }
Tape::Id Tape::mean_all(Id a) { return unary(Op::kMeanAll, a); }
Tape::Id Tape::detach(Id a) { return unary(Op::kDetach, a); }

Tensor& Tape::grad_buf(Id id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor::zeros(n.value.rows, n.value.cols);
  return n.grad;
}

Tensor Tape::grad_of(Id id) const {
  const Node& n = nodes_[id];
  if (n.grad.empty()) return Tensor::zeros(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::backward(Id root, bool flush_params) {
  const Tensor& rv = nodes_[root].value;
  if (rv.rows != 1 || rv.cols != 1) throw ConfigError("backward: root must be 1x1");
  grad_buf(root).data[0] = 1.0;

  for (Id id = root; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.tracked || n.grad.empty()) continue;
    const Tensor& g = n.grad;
    const bool track_a = n.a >= 0 && nodes_[n.a].tracked;
    const bool track_b = n.b >= 0 && nodes_[n.b].tracked;
    if (!track_a && !track_b) continue;

    switch (n.op) {
      case Op::kAdd: {
        if (track_a) emap(grad_buf(n.a)) += emap(g);
        if (track_b) emap(grad_buf(n.b)) += emap(g);
        break;
      }
      case Op::kSub: {
        if (track_a) emap(grad_buf(n.a)) += emap(g);
        if (track_b) emap(grad_buf(n.b)) -= emap(g);
        break;
      }
      case Op::kMul: {
        // Handles a == b (square): both contributions accumulate.
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          const Tensor& vb = nodes_[n.b].value;
          for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * vb.data[i];
        }
        if (track_b) {
          Tensor& gb = grad_buf(n.b);
          const Tensor& va = nodes_[n.a].value;
          for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i] * va.data[i];
        }
        break;
      }
      case Op::kScale: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += n.k0 * g.data[i];
        }
        break;
      }
      case Op::kAddScalar: {
        if (track_a) emap(grad_buf(n.a)) += emap(g);
        break;
      }
      case Op::kAddRow: {
        if (track_a) emap(grad_buf(n.a)) += emap(g);
        if (track_b) {
          Tensor& gb = grad_buf(n.b);
          for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) gb.at(0, c) += g.at(r, c);
        }
        break;
      }
      case Op::kSubCol: {
        if (track_a) emap(grad_buf(n.a)) += emap(g);
        if (track_b) {
          Tensor& gb = grad_buf(n.b);
          for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) gb.at(r, 0) -= g.at(r, c);
        }
        break;
      }
      case Op::kTanh: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          for (std::size_t i = 0; i < g.data.size(); ++i) {
            const double y = n.value.data[i];
            ga.data[i] += g.data[i] * (1.0 - y * y);
          }
        }
        break;
      }
      case Op::kSigmoid: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          for (std::size_t i = 0; i < g.data.size(); ++i) {
            const double y = n.value.data[i];
            ga.data[i] += g.data[i] * y * (1.0 - y);
          }
        }
        break;
      }
      case Op::kExp: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * n.value.data[i];
        }
        break;
      }
      case Op::kLog: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          const Tensor& va = nodes_[n.a].value;
          for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] / va.data[i];
        }
        break;
      }
      case Op::kClamp: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          const Tensor& va = nodes_[n.a].value;
          for (std::size_t i = 0; i < g.data.size(); ++i) {
            if (va.data[i] > n.k0 && va.data[i] < n.k1) ga.data[i] += g.data[i];
          }
        }
        break;
      }
      case Op::kMatmul: {
        const Tensor& va = nodes_[n.a].value;
        const Tensor& vb = nodes_[n.b].value;
        if (track_a) emap(grad_buf(n.a)).noalias() += emap(g) * emap(vb).transpose();
        if (track_b) emap(grad_buf(n.b)).noalias() += emap(va).transpose() * emap(g);
        break;
      }
      case Op::kTranspose: {
        if (track_a) emap(grad_buf(n.a)) += emap(g).transpose();
        break;
      }
      case Op::kConcatCols: {
        const int ca = nodes_[n.a].value.cols;
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < ca; ++c) ga.at(r, c) += g.at(r, c);
        }
        if (track_b) {
          Tensor& gb = grad_buf(n.b);
          for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < gb.cols; ++c) gb.at(r, c) += g.at(r, ca + c);
        }
        break;
      }
      case Op::kSliceCols: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          const int c0 = static_cast<int>(n.k0);
          for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) ga.at(r, c0 + c) += g.at(r, c);
        }
        break;
      }
      case Op::kRowSum: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          for (int r = 0; r < ga.rows; ++r)
            for (int c = 0; c < ga.cols; ++c) ga.at(r, c) += g.at(r, 0);
        }
        break;
      }
      case Op::kSumAll: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          const double gv = g.data[0];
          for (auto& x : ga.data) x += gv;
        }
        break;
      }
      case Op::kMeanAll: {
        if (track_a) {
          Tensor& ga = grad_buf(n.a);
          const double gv = g.data[0] / static_cast<double>(ga.size());
          for (auto& x : ga.data) x += gv;
        }
        break;
      }
      case Op::kLeaf:
      case Op::kConst:
      case Op::kParam:
      case Op::kDetach:
        break;
    }
  }

  if (flush_params) accumulate_param_grads(1.0);
}

void Tape::accumulate_param_grads(double scale) {
  for (auto& [ps, names] : param_cache_) {
    (void)ps;
    for (auto& [name, id] : names) {
      Node& n = nodes_[id];
      if (n.grad.empty()) continue;
      Tensor& dst = n.param_set->get(name).grad;
      if (scale == 1.0) {
        emap(dst) += emap(n.grad);
      } else {
        emap(dst) += scale * emap(n.grad);
      }
    }
  }
}

}  // namespace fist::nn
