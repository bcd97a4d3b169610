#pragma once

#include <span>
#include <vector>

#include "fist/rng.hpp"
#include "fist/tape.hpp"

namespace fist::nn {

// Diagonal Gaussian given by per-dimension mean and log standard deviation.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> log_std;

  int dim() const { return static_cast<int>(mean.size()); }

  // Sum over dimensions of univariate log densities.
  double log_prob(std::span<const double> x) const;

  // mean + exp(log_std) * noise, with externally supplied N(0,I) noise.
  std::vector<double> rsample(std::span<const double> noise) const;
  std::vector<double> sample(Rng& rng) const;

  // Closed-form KL(q || p), summed over dimensions. Nonnegative.
  static double kl(const DiagGaussian& q, const DiagGaussian& p);

  static DiagGaussian standard(int dim);
};

// ---- tape-level builders (rows = batch) ----

struct GaussianNodes {
  Tape::Id mean = -1;
  Tape::Id log_std = -1;
};

// mean + exp(log_std) ⊙ noise; noise is an untracked constant.
Tape::Id gaussian_rsample(Tape& t, const GaussianNodes& g, Tape::Id noise);

// Batch mean of -log N(target; mean, I) with the per-row density summed over
// columns. Returns 1x1 (constant 0.5*ln(2π) per dimension included).
Tape::Id gaussian_nll_unit_variance(Tape& t, Tape::Id mean, Tape::Id target);

// Batch mean over rows of KL(q || N(0, I)).
Tape::Id gaussian_kl_to_standard(Tape& t, const GaussianNodes& q);

// Batch mean over rows of KL(q || p), both diagonal.
Tape::Id gaussian_kl(Tape& t, const GaussianNodes& q, const GaussianNodes& p);

GaussianNodes detach_gaussian(Tape& t, const GaussianNodes& g);

// Single-row helpers for pulling a distribution out of a finished tape.
DiagGaussian gaussian_from_row(const Tape& t, const GaussianNodes& g, int row = 0);

}  // namespace fist::nn
