#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fist/params.hpp"
#include "fist/tensor.hpp"

namespace fist::nn {

// Reverse-mode tape over matrix-valued operations. One tape = one forward
// pass; nodes are topologically ordered by construction and freed with the
// tape. Construction and backward() are single-writer; reading values from a
// finished tape is safe from any thread.
class Tape {
 public:
  using Id = std::int32_t;

  // Leaves.
  Id constant(Tensor v);                                // no gradient tracking
  Id leaf(Tensor v);                                    // tracked, free-standing
  Id param(ParamSet& ps, const std::string& name);      // tracked, accumulates into ps on backward()
  Id frozen(const ParamSet& ps, const std::string& name);  // parameter snapshot, no gradient

  // Elementwise / broadcast arithmetic.
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  Id scale(Id a, double k);
  Id add_scalar(Id a, double k);
  Id add_row_broadcast(Id a, Id row);   // row is 1xC, added to every row of a
  Id sub_col_broadcast(Id a, Id col);   // col is Rx1, subtracted from every column of a

  // Nonlinearities.
  Id tanh(Id a);
  Id sigmoid(Id a);
  Id exp(Id a);
  Id log(Id a);
  Id square(Id a);
  Id clamp(Id a, double lo, double hi);  // zero gradient outside (lo, hi)

  // Structure.
  Id matmul(Id a, Id b);
  Id transpose(Id a);
  Id concat_cols(Id a, Id b);
  Id slice_cols(Id a, int c0, int c1);  // half-open [c0, c1)
  Id row_sum(Id a);                     // RxC -> Rx1
  Id sum_all(Id a);                     // -> 1x1
  Id mean_all(Id a);                    // -> 1x1
  Id detach(Id a);                      // value passthrough, gradient barrier

  // Seeds d(root)=1 and propagates to every tracked leaf. Parameter leaves
  // add their gradient into the bound ParamSet unless flush_params is false,
  // in which case accumulate_param_grads() transfers them later (used to run
  // several backward passes concurrently and combine them in a fixed order).
  // root must be 1x1.
  void backward(Id root, bool flush_params = true);
  void accumulate_param_grads(double scale = 1.0);

  const Tensor& val(Id id) const { return nodes_[id].value; }
  // Gradient of the last backward() w.r.t. this node (zeros if unreached).
  Tensor grad_of(Id id) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf, kConst, kParam,
    kAdd, kSub, kMul, kScale, kAddScalar, kAddRow, kSubCol,
    kTanh, kSigmoid, kExp, kLog, kClamp,
    kMatmul, kTranspose, kConcatCols, kSliceCols, kRowSum, kSumAll, kMeanAll,
    kDetach,
  };

  struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily during backward
    Op op = Op::kConst;
    Id a = -1;
    Id b = -1;
    double k0 = 0.0;
    double k1 = 0.0;
    bool tracked = false;     // some leaf below requires gradients
    ParamSet* param_set = nullptr;
    std::string param_name;
  };

  Id push(Node n);
  Id unary(Op op, Id a, double k0 = 0.0, double k1 = 0.0);
  Id binary(Op op, Id a, Id b);
  Tensor& grad_buf(Id id);
  void check_same_shape(Id a, Id b, const char* what) const;

  std::vector<Node> nodes_;
  std::unordered_map<const void*, std::unordered_map<std::string, Id>> param_cache_;
};

}  // namespace fist::nn
