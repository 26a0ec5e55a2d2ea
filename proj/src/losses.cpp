// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/losses.hpp"

#include <cmath>

namespace davi {

std::string to_string(TimeWeightKind kind) {
  switch (kind) {
    case TimeWeightKind::constant: return "constant";
    case TimeWeightKind::inv_sigma: return "inv_sigma";
    case TimeWeightKind::sigma: return "sigma";
  }
  return "constant";
}

TimeWeightKind time_weight_from_string(const std::string& name) {
  if (name == "constant") return TimeWeightKind::constant;
  if (name == "inv_sigma") return TimeWeightKind::inv_sigma;
  if (name == "sigma") return TimeWeightKind::sigma;
  throw ParameterError("unknown w_kind '" + name + "'");
}

void LossWeights::validate(const NoiseSchedule& sched) const {
  if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
  if (!(reg_coeff >= 0.0)) throw ParameterError("reg_coeff must be >= 0");
  if (ikl_t_max < 1 || ikl_t_max > sched.num_steps()) {
    throw ParameterError("ikl_t_max must lie in [1, T]");
  }
}

double time_weight(TimeWeightKind kind, int t, const NoiseSchedule& sched) {
  const double sd = std::sqrt(1.0 - sched.alpha_bar(t));
  switch (kind) {
    case TimeWeightKind::constant: return 1.0;
    case TimeWeightKind::inv_sigma: return 1.0 / sd;
    case TimeWeightKind::sigma: return sd;
  }
  return 1.0;
}

LossGrad data_consistency(ConstSpan x_hat, const Measurement& y, const LinearOperator& op,
                          const LossWeights& weights) {
  require_same_size(y.y.size(), op.out_dim(), "data_consistency");
  const Vector hx = op.apply(x_hat);
  Vector weighted(hx.size());
  double value = 0.0;
  for (std::size_t i = 0; i < hx.size(); ++i) {
    const double r = y.y[i] - hx[i];
    double lambda = 1.0;
    if (y.noise_kind == NoiseKind::poisson) {
      if (!(y.y[i] > 0.0)) {
        throw DomainError("data_consistency: Poisson bin " + std::to_string(i) + " must be > 0");
      }
      lambda = 1.0 / (2.0 * y.y[i]);
    }
    value += lambda * r * r;
    weighted[i] = -2.0 * weights.gamma * lambda * r;
  }
  return {weights.gamma * value, op.adjoint(weighted)};
}

LossGrad regularization(ConstSpan x_hat, ConstSpan x0_train, const LossWeights& weights) {
  require_same_size(x_hat.size(), x0_train.size(), "regularization");
  LossGrad out{0.0, Vector(x_hat.size())};
  for (std::size_t i = 0; i < x_hat.size(); ++i) {
    const double d = x0_train[i] - x_hat[i];
    out.value += d * d;
    out.grad[i] = -2.0 * weights.reg_coeff * d;
  }
  out.value *= weights.reg_coeff;
  return out;
}

LossGrad score_matching_loss(const ImplicitScoreNet& psi_net, ConstSpan x0_hat, int t, ConstSpan eps,
                             const NoiseSchedule& sched) {
  if (t < 1 || t > sched.num_steps()) {
    throw ParameterError("score_matching_loss: t=" + std::to_string(t) + " out of range");
  }
  const Vector x_t = forward_marginal_sample(x0_hat, t, eps, sched);
  MlpTrace trace;
  const Vector eps_hat = psi_net.predict_noise(x_t, t, sched, &trace);
  const double var = 1.0 - sched.alpha_bar(t);
  // s_psi + eps / sd = (eps - eps_hat) / sd
  Vector upstream(eps_hat.size());
  double value = 0.0;
  for (std::size_t i = 0; i < eps_hat.size(); ++i) {
    const double r = eps[i] - eps_hat[i];
    value += r * r / var;
    upstream[i] = -2.0 * r / var;
  }
  return {value, psi_net.net().backward(trace, upstream).params};
}

ScoreDistillation ikl_upstream(const ImplicitScoreNet& psi_net, const GaussianMixturePrior& prior,
                               ConstSpan x_t, int t, const NoiseSchedule& sched,
                               const LossWeights& weights) {
  if (t < 1 || t > weights.ikl_t_max || t > sched.num_steps()) {
    throw ParameterError("ikl: t=" + std::to_string(t) + " outside [1, ikl_t_max]");
  }
  const Vector s_psi = psi_net.score(x_t, t, sched);
  const Vector s_theta = prior.score(x_t, t, sched);
  const double scale = time_weight(weights.w_kind, t, sched) * std::sqrt(sched.alpha_bar(t));
  ScoreDistillation out{Vector(x_t.size()), 0.0};
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    const double ds = s_psi[i] - s_theta[i];
    out.delta_s_sq += ds * ds;
    out.upstream[i] = scale * ds;
  }
  return out;
}

IklGradient ikl_grad_phi(const AmortizedPosterior& phi_net, const ImplicitScoreNet& psi_net,
                         const GaussianMixturePrior& prior, ConstSpan y_a, double a, int t,
                         ConstSpan eps, const NoiseSchedule& sched, const LossWeights& weights) {
  AmortizedPosterior::Trace trace;
  const Vector x0_hat = phi_net.forward(y_a, a, sched, &trace);
  const Vector x_t = forward_marginal_sample(x0_hat, t, eps, sched);
  const ScoreDistillation sd = ikl_upstream(psi_net, prior, x_t, t, sched, weights);
  return {phi_net.backward(trace, sd.upstream).params, sd.delta_s_sq};
}

Vector gaussian_posterior_grad(ConstSpan mu, double sigma, const ScoreFn& prior_score, int t,
                               ConstSpan eps, const NoiseSchedule& sched, double w_t) {
  require_same_size(mu.size(), eps.size(), "gaussian_posterior_grad");
  if (!(sigma >= 0.0)) throw ParameterError("gaussian_posterior_grad: sigma must be >= 0");
  const double ab = sched.alpha_bar(t);
  const double spread = std::sqrt(ab * sigma * sigma + (1.0 - ab));
  Vector x_t(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) x_t[i] = std::sqrt(ab) * mu[i] + spread * eps[i];
  const Vector s_theta = prior_score(x_t, t);
  Vector g(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    g[i] = w_t * (-eps[i] / spread - s_theta[i]) * std::sqrt(ab);
  }
  return g;
}

Vector gaussian_posterior_grad_noise_form(ConstSpan mu, double sigma, const NoisePredFn& eps_theta,
                                          int t, ConstSpan eps, const NoiseSchedule& sched,
                                          double w_t) {
  require_same_size(mu.size(), eps.size(), "gaussian_posterior_grad_noise_form");
  const double ab = sched.alpha_bar(t);
  const double sd = std::sqrt(1.0 - ab);
  const double spread = std::sqrt(ab * sigma * sigma + (1.0 - ab));
  const double eta = sd / spread;
  const double w_prime = -w_t / sd;
  Vector x_t(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) x_t[i] = std::sqrt(ab) * mu[i] + spread * eps[i];
  const Vector eps_hat = eps_theta(x_t, t);
  Vector g(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    g[i] = w_prime * (eta * eps[i] - eps_hat[i]) * std::sqrt(ab);
  }
  return g;
}

Vector dirac_sds_grad(ConstSpan mu, const NoisePredFn& eps_theta, int t, ConstSpan eps,
                      const NoiseSchedule& sched, double w_t) {
  require_same_size(mu.size(), eps.size(), "dirac_sds_grad");
  const double ab = sched.alpha_bar(t);
  const double sd = std::sqrt(1.0 - ab);
  const double w_prime = -w_t / sd;
  const Vector x_t = forward_marginal_sample(mu, t, eps, sched);
  const Vector eps_hat = eps_theta(x_t, t);
  Vector g(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) g[i] = w_prime * (eps[i] - eps_hat[i]) * std::sqrt(ab);
  return g;
}

Vector ikl_score_function_term(ConstSpan mu, double sigma, int t, ConstSpan eps,
                               const NoiseSchedule& sched) {
  require_same_size(mu.size(), eps.size(), "ikl_score_function_term");
  const double ab = sched.alpha_bar(t);
  const double spread = std::sqrt(ab * sigma * sigma + (1.0 - ab));
  // log q(x_t) = -|x_t - sqrt(ab) mu|^2 / (2 v) + const, so d/dmu = sqrt(ab) (x_t - sqrt(ab) mu) / v.
  Vector g(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) g[i] = std::sqrt(ab) * eps[i] / spread;
  return g;
}

}  // namespace davi
