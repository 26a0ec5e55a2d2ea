// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "davi/common.hpp"
#include "davi/diffusion.hpp"
#include "davi/operators.hpp"

namespace davi {

/// Mixture of diagonal Gaussians. Stands in for a pre-trained diffusion prior: every
/// diffused marginal is again a diagonal mixture, so scores are exact.
class GaussianMixturePrior {
 public:
  GaussianMixturePrior(Vector weights, std::vector<Vector> means, std::vector<Vector> variances);

  std::size_t num_components() const { return weights_.size(); }
  std::size_t dim() const { return means_.front().size(); }
  const Vector& weights() const { return weights_; }
  const std::vector<Vector>& means() const { return means_; }
  const std::vector<Vector>& variances() const { return variances_; }

  /// log p_t(x_t); t = 0 is the undiffused mixture.
  double log_density(ConstSpan x_t, int t, const NoiseSchedule& sched) const;
  /// grad_x log p_t(x_t).
  Vector score(ConstSpan x_t, int t, const NoiseSchedule& sched) const;
  /// Noise-prediction form -sqrt(1 - ab_t) * score, for t >= 1.
  Vector noise_prediction(ConstSpan x_t, int t, const NoiseSchedule& sched) const;

  Vector mean() const;
  Vector marginal_variance() const;

 private:
  /// Per-component log(weight * N(x; diffused mean, diffused var)).
  Vector component_log_terms(ConstSpan x_t, double ab) const;

  Vector weights_;
  std::vector<Vector> means_;
  std::vector<Vector> variances_;
};

Vector prior_score(const GaussianMixturePrior& prior, ConstSpan x_t, int t,
                   const NoiseSchedule& sched);

std::vector<Vector> sample_prior(const GaussianMixturePrior& prior, std::size_t n, Rng& rng);
std::vector<Vector> sample_prior(const GaussianMixturePrior& prior, std::size_t n,
                                 std::uint64_t rng_seed);

/// Exact posterior of a Gaussian mixture under a linear-Gaussian likelihood. Component
/// covariances are full because a general H couples coordinates.
class GaussianPosterior {
 public:
  GaussianPosterior(Vector weights, std::vector<Vector> means, std::vector<DenseMatrix> covariances);

  std::size_t num_components() const { return weights_.size(); }
  std::size_t dim() const { return means_.front().size(); }
  const Vector& weights() const { return weights_; }
  const std::vector<Vector>& means() const { return means_; }
  const std::vector<DenseMatrix>& covariances() const { return covariances_; }

  Vector mean() const;
  /// Marginal per-coordinate variance of the mixture.
  Vector variance() const;
  double log_density(ConstSpan x) const;
  std::vector<Vector> sample(std::size_t n, Rng& rng) const;

 private:
  Vector weights_;
  std::vector<Vector> means_;
  std::vector<DenseMatrix> covariances_;
  std::vector<DenseMatrix> cholesky_;  // lower factors
  Vector log_dets_;
};

GaussianPosterior true_posterior(const GaussianMixturePrior& prior, const LinearOperator& op,
                                 ConstSpan y, double sigma_y);

/// Diagonal Gaussian moments.
struct GaussianMoments {
  Vector mean;
  Vector variance;
};

/// KL(qa || pb) for diagonal Gaussians.
double gaussian_kl(const GaussianMoments& qa, const GaussianMoments& pb);

}  // namespace davi
