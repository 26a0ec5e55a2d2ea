// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "davi/common.hpp"
#include "davi/diffusion.hpp"
#include "davi/networks.hpp"
#include "davi/operators.hpp"
#include "davi/prior.hpp"

namespace davi {

/// Time weighting w(t) of the integral KL.
///   constant:  1
///   inv_sigma: 1 / sqrt(1 - ab_t)
///   sigma:     sqrt(1 - ab_t) (turns the score difference into a noise-prediction difference)
enum class TimeWeightKind { constant, inv_sigma, sigma };

std::string to_string(TimeWeightKind kind);
TimeWeightKind time_weight_from_string(const std::string& name);

struct LossWeights {
  double gamma = 1.0;
  double reg_coeff = 0.0;
  int ikl_t_max = 1000;
  TimeWeightKind w_kind = TimeWeightKind::constant;

  void validate(const NoiseSchedule& sched) const;
};

double time_weight(TimeWeightKind kind, int t, const NoiseSchedule& sched);

struct LossGrad {
  double value = 0.0;
  Vector grad;
};

/// gamma ||y - H x_hat||^2 (Gaussian) or gamma (y - H x_hat)^T Lambda (y - H x_hat) with
/// Lambda_ii = 1 / (2 y_i) (Poisson). Gradient is w.r.t. x_hat.
LossGrad data_consistency(ConstSpan x_hat, const Measurement& y, const LinearOperator& op,
                          const LossWeights& weights);

/// reg_coeff ||x0_train - x_hat||^2, gradient w.r.t. x_hat.
LossGrad regularization(ConstSpan x_hat, ConstSpan x0_train, const LossWeights& weights);

/// Denoising score matching ||s_psi(x_t, t) + eps / sqrt(1 - ab_t)||^2 at
/// x_t = sqrt(ab_t) x0_hat + sqrt(1 - ab_t) eps. `grad` is w.r.t. the psi parameters;
/// x0_hat is a constant.
LossGrad score_matching_loss(const ImplicitScoreNet& psi_net, ConstSpan x0_hat, int t, ConstSpan eps,
                             const NoiseSchedule& sched);

/// Score difference at a perturbed sample, with both scores consumed as values.
struct ScoreDistillation {
  Vector upstream;  // w(t) sqrt(ab_t) (s_psi - s_theta): gradient signal at x0_hat
  double delta_s_sq = 0.0;
};

ScoreDistillation ikl_upstream(const ImplicitScoreNet& psi_net, const GaussianMixturePrior& prior,
                               ConstSpan x_t, int t, const NoiseSchedule& sched,
                               const LossWeights& weights);

struct IklGradient {
  Vector phi_grad;
  double delta_s_sq = 0.0;
};

/// Score-distillation estimate of grad_phi of the integral KL for one (a, t, eps) draw.
/// Gradient only: no scalar loss is defined.
IklGradient ikl_grad_phi(const AmortizedPosterior& phi_net, const ImplicitScoreNet& psi_net,
                         const GaussianMixturePrior& prior, ConstSpan y_a, double a, int t,
                         ConstSpan eps, const NoiseSchedule& sched, const LossWeights& weights);

/// Noise-prediction oracle eps_theta(x_t, t).
using NoisePredFn = std::function<Vector(ConstSpan x_t, int t)>;

/// Analytic IKL gradient for q(x0|y) = N(mu, sigma^2 I):
/// w(t) sqrt(ab) (-eps / sqrt(ab sigma^2 + 1 - ab) - s_theta(x_t)), x_t = sqrt(ab) mu + sqrt(ab sigma^2 + 1 - ab) eps.
Vector gaussian_posterior_grad(ConstSpan mu, double sigma, const ScoreFn& prior_score, int t,
                               ConstSpan eps, const NoiseSchedule& sched, double w_t = 1.0);

/// Same gradient in noise-prediction form (eta_t eps - eps_theta) scaled by w'(t) = -w(t) / sqrt(1 - ab).
Vector gaussian_posterior_grad_noise_form(ConstSpan mu, double sigma, const NoisePredFn& eps_theta,
                                          int t, ConstSpan eps, const NoiseSchedule& sched,
                                          double w_t = 1.0);

/// Dirac posterior (score distillation sampling): w'(t) sqrt(ab) (eps - eps_theta(x_t)).
Vector dirac_sds_grad(ConstSpan mu, const NoisePredFn& eps_theta, int t, ConstSpan eps,
                      const NoiseSchedule& sched, double w_t = 1.0);

/// d/dmu log q(x_t) at fixed x_t for the Gaussian surrogate: the score-function term whose
/// expectation vanishes in the IKL gradient derivation.
Vector ikl_score_function_term(ConstSpan mu, double sigma, int t, ConstSpan eps,
                               const NoiseSchedule& sched);

}  // namespace davi
