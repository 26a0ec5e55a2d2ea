// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "davi/prior.hpp"

namespace davi {
namespace {

const NoiseSchedule& sched() {
  static const NoiseSchedule s = make_linear_schedule(1000, 1e-4, 0.02);
  return s;
}

GaussianMixturePrior bimodal2d() {
  return GaussianMixturePrior({0.3, 0.7}, {{-1.0, 1.5}, {1.5, -1.0}}, {{0.15, 0.3}, {0.2, 0.1}});
}

TEST(PriorScore, UnitGaussianFixedPoint) {
  const GaussianMixturePrior p({1.0}, {{0.0, 0.0}}, {{1.0, 1.0}});
  for (int t : {0, 1, 250, 1000}) {
    const Vector s = prior_score(p, Vector{0.3, -1.2}, t, sched());
    EXPECT_NEAR(s[0], -0.3, 1e-14);
    EXPECT_NEAR(s[1], 1.2, 1e-14);
  }
}

TEST(PriorScore, UndiffusedGaussian) {
  const GaussianMixturePrior p({1.0}, {{2.0}}, {{0.25}});
  EXPECT_NEAR(prior_score(p, Vector{1.0}, 0, sched())[0], 4.0, 1e-14);
}

TEST(PriorScore, SymmetryPoint) {
  const GaussianMixturePrior p({0.5, 0.5}, {{-1.0, 2.0}, {1.0, -2.0}}, {{0.2, 0.2}, {0.2, 0.2}});
  for (int t : {0, 10, 500}) {
    const Vector s = prior_score(p, Vector{0.0, 0.0}, t, sched());
    EXPECT_NEAR(s[0], 0.0, 1e-14);
    EXPECT_NEAR(s[1], 0.0, 1e-14);
  }
}

TEST(PriorScore, MatchesFiniteDifferences) {
  const auto p = bimodal2d();
  Rng rng(41);
  const double step = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    const int t = static_cast<int>(rng() % 1001);
    Vector x = standard_normal(rng, 2);
    for (auto& v : x) v *= 2.0;
    const Vector s = prior_score(p, x, t, sched());
    for (int i = 0; i < 2; ++i) {
      Vector xp = x;
      Vector xm = x;
      xp[i] += step;
      xm[i] -= step;
      const double fd = (p.log_density(xp, t, sched()) - p.log_density(xm, t, sched())) / (2.0 * step);
      EXPECT_NEAR(s[i], fd, 1e-6) << "t=" << t;
    }
  }
}

TEST(PriorScore, SingleComponentIsAffine) {
  const GaussianMixturePrior p({1.0}, {{0.7}}, {{0.3}});
  const int t = 123;
  const double s0 = prior_score(p, Vector{0.0}, t, sched())[0];
  const double slope = prior_score(p, Vector{1.0}, t, sched())[0] - s0;
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const double x = 4.0 * standard_normal(rng, 1)[0];
    EXPECT_NEAR(prior_score(p, Vector{x}, t, sched())[0], s0 + slope * x, 1e-12);
  }
}

TEST(PriorScore, FarTailsStayFinite) {
  const auto p = bimodal2d();
  const Vector s = prior_score(p, Vector{400.0, -300.0}, 0, sched());
  EXPECT_TRUE(all_finite(s));
  EXPECT_TRUE(std::isfinite(p.log_density(Vector{400.0, -300.0}, 0, sched())));
}

TEST(PriorScore, NoisePredictionForm) {
  const auto p = bimodal2d();
  const Vector x{0.2, 0.4};
  const int t = 300;
  const Vector s = p.score(x, t, sched());
  const Vector e = p.noise_prediction(x, t, sched());
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(e[i], -std::sqrt(1.0 - sched().alpha_bar(t)) * s[i], 1e-14);
  EXPECT_THROW(p.noise_prediction(x, 0, sched()), DomainError);
}

TEST(Prior, ConstructionErrors) {
  EXPECT_THROW(GaussianMixturePrior({0.5, 0.6}, {{0.0}, {1.0}}, {{1.0}, {1.0}}), ParameterError);
  EXPECT_THROW(GaussianMixturePrior({1.0}, {{0.0}}, {{0.0}}), ParameterError);
  EXPECT_THROW(GaussianMixturePrior({1.0}, {{0.0}, {1.0}}, {{1.0}}), ParameterError);
  EXPECT_THROW(GaussianMixturePrior({}, {}, {}), ParameterError);
}

TEST(SamplePrior, Empty) { EXPECT_TRUE(sample_prior(bimodal2d(), 0, 1).empty()); }

TEST(SamplePrior, NarrowGaussianMean) {
  const GaussianMixturePrior p({1.0}, {{3.0}}, {{0.01}});
  const auto xs = sample_prior(p, 10000, 4);
  double mean = 0.0;
  for (const auto& x : xs) mean += x[0] / xs.size();
  EXPECT_GE(mean, 2.99);
  EXPECT_LE(mean, 3.01);
}

TEST(SamplePrior, DegenerateWeights) {
  const GaussianMixturePrior p({1.0, 0.0}, {{-10.0}, {10.0}}, {{1.0}, {1.0}});
  for (const auto& x : sample_prior(p, 500, 6)) EXPECT_LT(x[0], 0.0);
}

TEST(SamplePrior, SeedDeterminism) {
  EXPECT_EQ(sample_prior(bimodal2d(), 32, 9), sample_prior(bimodal2d(), 32, 9));
  EXPECT_NE(sample_prior(bimodal2d(), 32, 9), sample_prior(bimodal2d(), 32, 10));
}

TEST(TruePosterior, ConjugateScalar) {
  const GaussianMixturePrior p({1.0}, {{0.0}}, {{1.0}});
  const auto post = true_posterior(p, LinearOperator::identity(1), Vector{1.0}, 1.0);
  EXPECT_NEAR(post.mean()[0], 0.5, 1e-14);
  EXPECT_NEAR(post.variance()[0], 0.5, 1e-14);
}

TEST(TruePosterior, UninformativeLikelihood) {
  const auto p = bimodal2d();
  const auto op = LinearOperator::dense(DenseMatrix{1, 2, {1.0, 0.5}});
  const auto post = true_posterior(p, op, Vector{0.3}, 1e3);
  const Vector pm = p.mean();
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(post.mean()[i], pm[i], 1e-3);
}

TEST(TruePosterior, RejectsZeroNoise) {
  EXPECT_THROW(true_posterior(bimodal2d(), LinearOperator::identity(2), Vector{0, 0}, 0.0), DomainError);
}

TEST(TruePosterior, WeightsSumToOne) {
  Rng rng(12);
  const auto op = LinearOperator::dense(DenseMatrix{1, 2, {1.0, 0.5}});
  for (int i = 0; i < 20; ++i) {
    const auto post = true_posterior(bimodal2d(), op, standard_normal(rng, 1), 0.1);
    double s = 0.0;
    for (double w : post.weights()) s += w;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

// Posterior mean and variance by brute-force quadrature of prior x likelihood on a grid.
struct GridMoments {
  Vector mean;
  Vector var;
};

GridMoments quadrature_1d(const GaussianMixturePrior& p, double h, double y, double sigma) {
  const double lo = -8.0;
  const double dx = 1e-4;
  double z = 0.0, m = 0.0, m2 = 0.0;
  for (double x = lo; x <= 8.0; x += dx) {
    const double r = y - h * x;
    const double w = std::exp(p.log_density(Vector{x}, 0, sched()) - 0.5 * r * r / (sigma * sigma));
    z += w;
    m += w * x;
    m2 += w * x * x;
  }
  GridMoments g;
  g.mean = {m / z};
  g.var = {m2 / z - (m / z) * (m / z)};
  return g;
}

TEST(TruePosterior, BimodalScalarMatchesQuadrature) {
  const GaussianMixturePrior prior({0.4, 0.6}, {{-1.5}, {1.0}}, {{0.3}, {0.5}});
  const auto op = LinearOperator::dense(DenseMatrix{1, 1, {2.0}});
  const double y = -0.4;
  const double sigma = 0.8;
  const auto post = true_posterior(prior, op, Vector{y}, sigma);
  const auto g = quadrature_1d(prior, 2.0, y, sigma);
  EXPECT_NEAR(post.mean()[0], g.mean[0], 1e-4 * std::abs(g.mean[0]));
  EXPECT_NEAR(post.variance()[0], g.var[0], 1e-4 * g.var[0]);
  // Component weights: prior weight times evidence N(y; h mu_k, h^2 v_k + sigma^2).
  double e[2];
  for (int k = 0; k < 2; ++k) {
    const double mu = 2.0 * prior.means()[k][0];
    const double v = 4.0 * prior.variances()[k][0] + sigma * sigma;
    e[k] = prior.weights()[k] * std::exp(-0.5 * (y - mu) * (y - mu) / v) / std::sqrt(v);
  }
  EXPECT_NEAR(post.weights()[0], e[0] / (e[0] + e[1]), 1e-12);
}

TEST(TruePosterior, Projection2dMatchesQuadrature) {
  const auto prior = bimodal2d();
  const auto op = LinearOperator::dense(DenseMatrix{1, 2, {1.0, 0.5}});
  const double y = 0.35;
  const double sigma = 0.3;
  const auto post = true_posterior(prior, op, Vector{y}, sigma);
  const double dx = 4e-3;
  double z = 0.0;
  Vector m(2, 0.0), m2(2, 0.0);
  for (double a = -5.0; a <= 5.0; a += dx) {
    for (double b = -5.0; b <= 5.0; b += dx) {
      const double r = y - (a + 0.5 * b);
      const double w = std::exp(prior.log_density(Vector{a, b}, 0, sched()) - 0.5 * r * r / (sigma * sigma));
      z += w;
      m[0] += w * a;
      m[1] += w * b;
      m2[0] += w * a * a;
      m2[1] += w * b * b;
    }
  }
  for (int i = 0; i < 2; ++i) {
    const double mean = m[i] / z;
    const double var = m2[i] / z - mean * mean;
    EXPECT_NEAR(post.mean()[i], mean, 1e-4 * std::abs(mean) + 1e-9);
    EXPECT_NEAR(post.variance()[i], var, 1e-4 * var);
  }
}

TEST(TruePosterior, SamplesMatchMoments) {
  const auto op = LinearOperator::dense(DenseMatrix{1, 2, {1.0, 0.5}});
  const auto post = true_posterior(bimodal2d(), op, Vector{0.35}, 0.3);
  Rng rng(3);
  const std::size_t n = 40000;
  const auto xs = post.sample(n, rng);
  const Vector mean = post.mean();
  const Vector var = post.variance();
  for (int i = 0; i < 2; ++i) {
    double s = 0.0;
    for (const auto& x : xs) s += x[i] / n;
    EXPECT_NEAR(s, mean[i], 4.0 * std::sqrt(var[i] / n));
  }
}

TEST(GaussianKl, Examples) {
  const GaussianMoments a{{0.3, -1.0}, {0.5, 2.0}};
  EXPECT_EQ(gaussian_kl(a, a), 0.0);
  EXPECT_NEAR(gaussian_kl({{1.7}, {1.0}}, {{0.0}, {1.0}}), 1.7 * 1.7 / 2.0, 1e-14);
  EXPECT_NEAR(gaussian_kl({{0.0}, {2.0}}, {{0.0}, {1.0}}), 0.15342640972002736, 1e-14);
  EXPECT_THROW(gaussian_kl({{0.0}, {0.0}}, {{0.0}, {1.0}}), DomainError);
  EXPECT_THROW(gaussian_kl({{0.0}, {1.0}}, {{0.0}, {-1.0}}), DomainError);
}

}  // namespace
}  // namespace davi
