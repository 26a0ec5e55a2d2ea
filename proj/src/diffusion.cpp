// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/diffusion.hpp"

#include <algorithm>
#include <cmath>

namespace davi {

NoiseSchedule::NoiseSchedule(Vector betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw ParameterError("NoiseSchedule: at least one step required");
  alpha_bars_.assign(betas_.size() + 1, 1.0);
  cumsum_.assign(betas_.size() + 1, 0.0);
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    const double b = betas_[i];
    if (!(b > 0.0 && b < 1.0)) {
      throw ParameterError("NoiseSchedule: beta_" + std::to_string(i + 1) + " outside (0, 1)");
    }
    alpha_bars_[i + 1] = alpha_bars_[i] * (1.0 - b);
    cumsum_[i + 1] = cumsum_[i] + b;
  }
  if (!(alpha_bars_.back() > 0.0)) throw ParameterError("NoiseSchedule: alpha_bar_T underflows");
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > num_steps()) throw DomainError("beta: t=" + std::to_string(t) + " out of range");
  return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > num_steps()) {
    throw DomainError("alpha_bar: t=" + std::to_string(t) + " out of range");
  }
  return alpha_bars_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::beta_cumsum(int t) const {
  if (t < 0 || t > num_steps()) {
    throw DomainError("beta_cumsum: t=" + std::to_string(t) + " out of range");
  }
  return cumsum_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::beta_integral(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw ParameterError("beta_integral: u outside [0, 1]");
  const double pos = u * num_steps();
  const int k = std::min(static_cast<int>(std::floor(pos)), num_steps());
  if (k == num_steps()) return cumsum_.back();
  return cumsum_[static_cast<std::size_t>(k)] + (pos - k) * betas_[static_cast<std::size_t>(k)];
}

int NoiseSchedule::quantize(double a) const {
  if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("quantize: a outside [0, 1]");
  return std::min(static_cast<int>(std::floor(a * num_steps())), num_steps());
}

NoiseSchedule make_linear_schedule(int num_steps, double beta_min, double beta_max) {
  if (num_steps < 1) throw ParameterError("make_linear_schedule: num_steps must be >= 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
    throw ParameterError("make_linear_schedule: need 0 < beta_min <= beta_max < 1");
  }
  Vector betas(static_cast<std::size_t>(num_steps));
  for (int i = 0; i < num_steps; ++i) {
    const double frac = num_steps == 1 ? 0.0 : static_cast<double>(i) / (num_steps - 1);
    betas[static_cast<std::size_t>(i)] = beta_min + frac * (beta_max - beta_min);
  }
  return NoiseSchedule(std::move(betas));
}

Vector forward_marginal_sample(ConstSpan x0, int t, ConstSpan eps, const NoiseSchedule& sched) {
  require_same_size(x0.size(), eps.size(), "forward_marginal_sample");
  const double ab = sched.alpha_bar(t);
  const double signal = std::sqrt(ab);
  const double noise = std::sqrt(1.0 - ab);
  Vector out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out[i] = signal * x0[i] + noise * eps[i];
  return out;
}

Vector transition_score(ConstSpan x_t, ConstSpan x0, int t, const NoiseSchedule& sched) {
  require_same_size(x_t.size(), x0.size(), "transition_score");
  if (t < 1 || t > sched.num_steps()) {
    throw DomainError("transition_score: kernel degenerate or out of range at t=" +
                      std::to_string(t));
  }
  const double ab = sched.alpha_bar(t);
  const double signal = std::sqrt(ab);
  const double var = 1.0 - ab;
  Vector out(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i) out[i] = -(x_t[i] - signal * x0[i]) / var;
  return out;
}

std::vector<Vector> reverse_sde_sample(const ScoreFn& prior_score, const NoiseSchedule& sched,
                                       std::size_t dim, std::size_t n, std::uint64_t rng_seed) {
  std::vector<Vector> samples;
  samples.reserve(n);
  Rng rng(rng_seed);
  for (std::size_t s = 0; s < n; ++s) {
    Vector x = standard_normal(rng, dim);
    for (int t = sched.num_steps(); t >= 1; --t) {
      const double b = sched.beta(t);
      const Vector score = prior_score(x, t);
      require_same_size(score.size(), dim, "reverse_sde_sample: score");
      const Vector z = standard_normal(rng, dim);
      // dx = [-b/2 x - b s] dt + sqrt(b) dw, stepped backwards with dt = -1.
      for (std::size_t i = 0; i < dim; ++i) {
        x[i] += 0.5 * b * x[i] + b * score[i] + std::sqrt(b) * z[i];
      }
    }
    samples.push_back(std::move(x));
  }
  return samples;
}

}  // namespace davi
