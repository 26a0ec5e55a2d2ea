// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "davi/common.hpp"

namespace davi {

/// Discrete variance-preserving noise schedule.
///
/// Steps are indexed t = 1..T. `alpha_bar(t)` is the running product of (1 - beta_s)
/// for s <= t, with alpha_bar(0) = 1.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(Vector betas);

  int num_steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const;
  double alpha_bar(int t) const;
  const Vector& betas() const { return betas_; }
  const Vector& alpha_bars() const { return alpha_bars_; }

  /// Sum of beta_s for s <= t; beta_cumsum(0) = 0.
  double beta_cumsum(int t) const;

  /// Integral of the piecewise-constant beta over [0, u] with u in [0, 1] mapped onto
  /// the T steps. Exact at the grid points.
  double beta_integral(double u) const;

  /// Floor quantization of a in [0, 1] to a step index in [0, T].
  int quantize(double a) const;

  bool operator==(const NoiseSchedule& other) const { return betas_ == other.betas_; }

 private:
  Vector betas_;
  Vector alpha_bars_;  // length T + 1
  Vector cumsum_;      // length T + 1
};

/// Betas linearly interpolated from beta_min (t = 1) to beta_max (t = T).
NoiseSchedule make_linear_schedule(int num_steps, double beta_min, double beta_max);

/// sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
Vector forward_marginal_sample(ConstSpan x0, int t, ConstSpan eps, const NoiseSchedule& sched);

/// Score of the Gaussian transition kernel q(x_t | x0): -(x_t - sqrt(ab) x0) / (1 - ab).
Vector transition_score(ConstSpan x_t, ConstSpan x0, int t, const NoiseSchedule& sched);

/// Score oracle s(x_t, t).
using ScoreFn = std::function<Vector(ConstSpan x_t, int t)>;

/// Euler-Maruyama integration of the reverse VP SDE from x_T ~ N(0, I) down to t = 0.
std::vector<Vector> reverse_sde_sample(const ScoreFn& prior_score, const NoiseSchedule& sched,
                                       std::size_t dim, std::size_t n, std::uint64_t rng_seed);

}  // namespace davi
