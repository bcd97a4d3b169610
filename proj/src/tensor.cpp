#include "fist/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace fist::nn {

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace fist::nn
