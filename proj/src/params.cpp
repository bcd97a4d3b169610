#include "fist/params.hpp"

#include <cmath>

#include "fist/errors.hpp"

namespace fist::nn {

Param& ParamSet::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter: " + name);
  index_[name] = params_.size();
  params_.push_back(Param{name, std::move(init), Tensor()});
  Param& p = params_.back();
  p.grad = Tensor::zeros(p.value.rows, p.value.cols);
  return p;
}

Param& ParamSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return params_[it->second];
}

const Param& ParamSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return params_[it->second];
}

bool ParamSet::contains(const std::string& name) const { return index_.count(name) > 0; }

void ParamSet::zero_grads() {
  for (auto& p : params_) p.grad.fill(0.0);
}

bool ParamSet::find_non_finite(std::string* name, bool check_grads) const {
  for (const auto& p : params_) {
    const Tensor& t = check_grads ? p.grad : p.value;
    if (!t.all_finite()) {
      if (name) *name = p.name;
      return true;
    }
  }
  return false;
}

std::size_t ParamSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void AdamState::step(ParamSet& params) {
  std::string bad;
  if (params.find_non_finite(&bad, /*check_grads=*/true)) {
    throw NumericError("non-finite gradient in parameter '" + bad + "' at step " +
                       std::to_string(step_count_ + 1));
  }
  step_count_ += 1;
  const double t = static_cast<double>(step_count_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
  for (auto& p : params) {
    auto& [m, v] = moments_[p.name];
    if (m.empty()) {
      m = Tensor::zeros(p.value.rows, p.value.cols);
      v = Tensor::zeros(p.value.rows, p.value.cols);
    }
    const std::size_t n = p.value.data.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = p.grad.data[i];
      m.data[i] = cfg_.beta1 * m.data[i] + (1.0 - cfg_.beta1) * g;
      v.data[i] = cfg_.beta2 * v.data[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m.data[i] / bc1;
      const double v_hat = v.data[i] / bc2;
      p.value.data[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
  params.zero_grads();
}

}  // namespace fist::nn
