#include "fist/gaussian.hpp"

#include <cmath>

#include "fist/errors.hpp"

namespace fist::nn {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2π)
}

double DiagGaussian::log_prob(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) throw ConfigError("log_prob: dimension mismatch");
  double lp = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double ls = log_std[i];
    const double z = (x[i] - mean[i]) * std::exp(-ls);
    lp += -0.5 * z * z - ls - 0.5 * kLog2Pi;
  }
  return lp;
}

std::vector<double> DiagGaussian::rsample(std::span<const double> noise) const {
  if (static_cast<int>(noise.size()) != dim()) throw ConfigError("rsample: dimension mismatch");
  std::vector<double> out(mean.size());
  for (int i = 0; i < dim(); ++i) out[i] = mean[i] + std::exp(log_std[i]) * noise[i];
  return out;
}

std::vector<double> DiagGaussian::sample(Rng& rng) const {
  std::vector<double> noise(mean.size());
  for (auto& v : noise) v = rng.gaussian();
  return rsample(noise);
}

double DiagGaussian::kl(const DiagGaussian& q, const DiagGaussian& p) {
  if (q.dim() != p.dim()) throw ConfigError("kl: dimension mismatch");
  double total = 0.0;
  for (int i = 0; i < q.dim(); ++i) {
    const double lq = q.log_std[i], lp = p.log_std[i];
    const double var_ratio = std::exp(2.0 * (lq - lp));
    const double md = q.mean[i] - p.mean[i];
    total += (lp - lq) + 0.5 * (var_ratio + md * md * std::exp(-2.0 * lp)) - 0.5;
  }
  return total;
}

DiagGaussian DiagGaussian::standard(int dim) {
  return DiagGaussian{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
}

Tape::Id gaussian_rsample(Tape& t, const GaussianNodes& g, Tape::Id noise) {
  return t.add(g.mean, t.mul(t.exp(g.log_std), noise));
}

Tape::Id gaussian_nll_unit_variance(Tape& t, Tape::Id mean, Tape::Id target) {
  const int rows = t.val(mean).rows;
  const int cols = t.val(mean).cols;
  Tape::Id sq = t.square(t.sub(target, mean));
  Tape::Id half_sq = t.scale(t.sum_all(sq), 0.5 / static_cast<double>(rows));
  return t.add_scalar(half_sq, 0.5 * kLog2Pi * cols);
}

Tape::Id gaussian_kl_to_standard(Tape& t, const GaussianNodes& q) {
  const int rows = t.val(q.mean).rows;
  // per element: -lq + 0.5*(exp(2 lq) + mu^2) - 0.5
  Tape::Id var = t.exp(t.scale(q.log_std, 2.0));
  Tape::Id elem = t.add_scalar(t.sub(t.scale(t.add(var, t.square(q.mean)), 0.5), q.log_std), -0.5);
  return t.scale(t.sum_all(elem), 1.0 / static_cast<double>(rows));
}

Tape::Id gaussian_kl(Tape& t, const GaussianNodes& q, const GaussianNodes& p) {
  const int rows = t.val(q.mean).rows;
  // per element: (lp - lq) + 0.5 * (exp(2 lq) + (mq - mp)^2) * exp(-2 lp) - 0.5
  Tape::Id var_q = t.exp(t.scale(q.log_std, 2.0));
  Tape::Id inv_var_p = t.exp(t.scale(p.log_std, -2.0));
  Tape::Id md2 = t.square(t.sub(q.mean, p.mean));
  Tape::Id quad = t.scale(t.mul(t.add(var_q, md2), inv_var_p), 0.5);
  Tape::Id elem = t.add_scalar(t.add(t.sub(p.log_std, q.log_std), quad), -0.5);
  return t.scale(t.sum_all(elem), 1.0 / static_cast<double>(rows));
}

GaussianNodes detach_gaussian(Tape& t, const GaussianNodes& g) {
  return GaussianNodes{t.detach(g.mean), t.detach(g.log_std)};
}

DiagGaussian gaussian_from_row(const Tape& t, const GaussianNodes& g, int row) {
  const Tensor& m = t.val(g.mean);
  const Tensor& ls = t.val(g.log_std);
  DiagGaussian out;
  out.mean.resize(m.cols);
  out.log_std.resize(ls.cols);
  for (int c = 0; c < m.cols; ++c) out.mean[c] = m.at(row, c);
  for (int c = 0; c < ls.cols; ++c) out.log_std[c] = ls.at(row, c);
  return out;
}

}  // namespace fist::nn
