#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fist/tensor.hpp"

namespace fist::nn {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value, zero-initialized
};

// Named parameters with paired gradient buffers. Iteration follows insertion
// order so that reductions and updates are reproducible.
class ParamSet {
 public:
  Param& add(const std::string& name, Tensor init);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grads();
  // Name of the first parameter with a non-finite value or gradient, if any.
  bool find_non_finite(std::string* name, bool check_grads) const;
  std::size_t total_elements() const;

 private:
  std::vector<Param> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. step() consumes and zeroes the gradients.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg) : cfg_(cfg) {}

  // Throws NumericError naming the parameter if any gradient is non-finite.
  void step(ParamSet& params);

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::int64_t step_count_ = 0;
  std::unordered_map<std::string, std::pair<Tensor, Tensor>> moments_;  // m, v
};

}  // namespace fist::nn
