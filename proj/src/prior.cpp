// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/prior.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace davi {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_sum_exp(ConstSpan v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Normalized responsibilities from unnormalized log terms (max-subtracted).
Vector softmax(ConstSpan log_terms) {
  const double lse = log_sum_exp(log_terms);
  Vector r(log_terms.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = std::exp(log_terms[k] - lse);
  return r;
}

void check_simplex(const Vector& weights, const char* who) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ParameterError(std::string(who) + ": negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError(std::string(who) + ": weights must sum to 1");
  }
}

using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

MatX to_eigen(const DenseMatrix& m) {
  MatX out(static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  }
  return out;
}

DenseMatrix from_eigen(const MatX& m) {
  DenseMatrix out{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
                  Vector(static_cast<std::size_t>(m.size()))};
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = m(r, c);
  }
  return out;
}

VecX to_eigen(ConstSpan v) { return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size())); }

Vector from_eigen(const VecX& v) { return Vector(v.data(), v.data() + v.size()); }

}  // namespace

GaussianMixturePrior::GaussianMixturePrior(Vector weights, std::vector<Vector> means,
                                           std::vector<Vector> variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  if (weights_.empty()) throw ParameterError("GaussianMixturePrior: need at least one component");
  if (means_.size() != weights_.size() || variances_.size() != weights_.size()) {
    throw ParameterError("GaussianMixturePrior: weights/means/variances count mismatch");
  }
  check_simplex(weights_, "GaussianMixturePrior");
  const std::size_t d = means_.front().size();
  if (d == 0) throw ParameterError("GaussianMixturePrior: zero-dimensional component");
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    require_same_size(means_[k].size(), d, "GaussianMixturePrior mean");
    require_same_size(variances_[k].size(), d, "GaussianMixturePrior variance");
    for (double v : variances_[k]) {
      if (!(v > 0.0)) throw ParameterError("GaussianMixturePrior: variances must be > 0");
    }
  }
}

Vector GaussianMixturePrior::component_log_terms(ConstSpan x_t, double ab) const {
  const double signal = std::sqrt(ab);
  Vector terms(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0.0) {
      terms[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double s = std::log(weights_[k]);
    for (std::size_t i = 0; i < x_t.size(); ++i) {
      const double var = ab * variances_[k][i] + (1.0 - ab);
      const double r = x_t[i] - signal * means_[k][i];
      s -= 0.5 * (r * r / var + std::log(var) + kLog2Pi);
    }
    terms[k] = s;
  }
  return terms;
}

double GaussianMixturePrior::log_density(ConstSpan x_t, int t, const NoiseSchedule& sched) const {
  require_same_size(x_t.size(), dim(), "log_density");
  return log_sum_exp(component_log_terms(x_t, sched.alpha_bar(t)));
}

Vector GaussianMixturePrior::score(ConstSpan x_t, int t, const NoiseSchedule& sched) const {
  require_same_size(x_t.size(), dim(), "prior score");
  const double ab = sched.alpha_bar(t);
  const double signal = std::sqrt(ab);
  const Vector resp = softmax(component_log_terms(x_t, ab));
  Vector out(x_t.size(), 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (resp[k] == 0.0) continue;
    for (std::size_t i = 0; i < x_t.size(); ++i) {
      const double var = ab * variances_[k][i] + (1.0 - ab);
      out[i] -= resp[k] * (x_t[i] - signal * means_[k][i]) / var;
    }
  }
  return out;
}

Vector GaussianMixturePrior::noise_prediction(ConstSpan x_t, int t, const NoiseSchedule& sched) const {
  if (t < 1) throw DomainError("noise_prediction: t must be >= 1");
  Vector s = score(x_t, t, sched);
  const double scale = -std::sqrt(1.0 - sched.alpha_bar(t));
  for (auto& v : s) v *= scale;
  return s;
}

Vector GaussianMixturePrior::mean() const {
  Vector m(dim(), 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    for (std::size_t i = 0; i < dim(); ++i) m[i] += weights_[k] * means_[k][i];
  }
  return m;
}

Vector GaussianMixturePrior::marginal_variance() const {
  const Vector m = mean();
  Vector v(dim(), 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    for (std::size_t i = 0; i < dim(); ++i) {
      const double d = means_[k][i] - m[i];
      v[i] += weights_[k] * (variances_[k][i] + d * d);
    }
  }
  return v;
}

Vector prior_score(const GaussianMixturePrior& prior, ConstSpan x_t, int t,
                   const NoiseSchedule& sched) {
  return prior.score(x_t, t, sched);
}

std::vector<Vector> sample_prior(const GaussianMixturePrior& prior, std::size_t n, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(prior.weights().begin(), prior.weights().end());
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t k = pick(rng);
    Vector x = standard_normal(rng, prior.dim());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = prior.means()[k][i] + std::sqrt(prior.variances()[k][i]) * x[i];
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Vector> sample_prior(const GaussianMixturePrior& prior, std::size_t n,
                                 std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return sample_prior(prior, n, rng);
}

GaussianPosterior::GaussianPosterior(Vector weights, std::vector<Vector> means,
                                     std::vector<DenseMatrix> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  if (weights_.empty() || means_.size() != weights_.size() ||
      covariances_.size() != weights_.size()) {
    throw ParameterError("GaussianPosterior: component count mismatch");
  }
  check_simplex(weights_, "GaussianPosterior");
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const std::size_t d = means_[k].size();
    if (covariances_[k].rows != d || covariances_[k].cols != d) {
      throw DimensionError("GaussianPosterior: covariance shape mismatch");
    }
    Eigen::LLT<MatX> llt(to_eigen(covariances_[k]));
    if (llt.info() != Eigen::Success) {
      throw ParameterError("GaussianPosterior: covariance not positive definite");
    }
    const MatX l = llt.matrixL();
    cholesky_.push_back(from_eigen(l));
    log_dets_.push_back(2.0 * l.diagonal().array().log().sum());
  }
}

Vector GaussianPosterior::mean() const {
  Vector m(dim(), 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    for (std::size_t i = 0; i < dim(); ++i) m[i] += weights_[k] * means_[k][i];
  }
  return m;
}

Vector GaussianPosterior::variance() const {
  const Vector m = mean();
  Vector v(dim(), 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    for (std::size_t i = 0; i < dim(); ++i) {
      const double d = means_[k][i] - m[i];
      v[i] += weights_[k] * (covariances_[k](i, i) + d * d);
    }
  }
  return v;
}

double GaussianPosterior::log_density(ConstSpan x) const {
  require_same_size(x.size(), dim(), "GaussianPosterior::log_density");
  Vector terms(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0.0) {
      terms[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const MatX l = to_eigen(cholesky_[k]);
    const VecX r = to_eigen(x) - to_eigen(means_[k]);
    const VecX w = l.triangularView<Eigen::Lower>().solve(r);
    terms[k] = std::log(weights_[k]) -
               0.5 * (w.squaredNorm() + log_dets_[k] + static_cast<double>(dim()) * kLog2Pi);
  }
  return log_sum_exp(terms);
}

std::vector<Vector> GaussianPosterior::sample(std::size_t n, Rng& rng) const {
  std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t k = pick(rng);
    const Vector z = standard_normal(rng, dim());
    Vector x = means_[k];
    const DenseMatrix& l = cholesky_[k];
    for (std::size_t i = 0; i < dim(); ++i) {
      for (std::size_t j = 0; j <= i; ++j) x[i] += l(i, j) * z[j];
    }
    out.push_back(std::move(x));
  }
  return out;
}

GaussianPosterior true_posterior(const GaussianMixturePrior& prior, const LinearOperator& op,
                                 ConstSpan y, double sigma_y) {
  if (!(sigma_y > 0.0)) throw DomainError("true_posterior: sigma_y must be > 0");
  require_same_size(op.in_dim(), prior.dim(), "true_posterior: operator input");
  require_same_size(y.size(), op.out_dim(), "true_posterior: measurement");
  const MatX h = to_eigen(op.to_dense());
  const VecX yv = to_eigen(y);
  const double noise_var = sigma_y * sigma_y;
  const auto m = static_cast<Eigen::Index>(op.out_dim());

  Vector log_evidence(prior.num_components());
  std::vector<Vector> means;
  std::vector<DenseMatrix> covs;
  for (std::size_t k = 0; k < prior.num_components(); ++k) {
    const VecX mu = to_eigen(prior.means()[k]);
    const VecX var = to_eigen(prior.variances()[k]);
    // Evidence: y ~ N(H mu, H S H^T + s^2 I).
    const MatX hs = h * var.asDiagonal();
    const MatX s_y = hs * h.transpose() + noise_var * MatX::Identity(m, m);
    Eigen::LLT<MatX> llt_y(s_y);
    const VecX resid = yv - h * mu;
    const VecX w = llt_y.matrixL().solve(resid);
    const MatX ly = llt_y.matrixL();
    const double log_det = 2.0 * ly.diagonal().array().log().sum();
    log_evidence[k] = prior.weights()[k] > 0.0
                          ? std::log(prior.weights()[k]) -
                                0.5 * (w.squaredNorm() + log_det + static_cast<double>(m) * kLog2Pi)
                          : -std::numeric_limits<double>::infinity();
    // Conjugate update through the gain K = S H^T (H S H^T + s^2 I)^{-1}.
    const MatX gain = llt_y.solve(hs).transpose();
    const VecX post_mean = mu + gain * resid;
    MatX post_cov = MatX(var.asDiagonal()) - gain * hs;
    post_cov = 0.5 * (post_cov + post_cov.transpose());
    means.push_back(from_eigen(post_mean));
    covs.push_back(from_eigen(post_cov));
  }
  Vector weights = softmax(log_evidence);
  // Renormalize so the simplex check holds to rounding.
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (auto& wk : weights) wk /= total;
  return GaussianPosterior(std::move(weights), std::move(means), std::move(covs));
}

double gaussian_kl(const GaussianMoments& qa, const GaussianMoments& pb) {
  require_same_size(qa.mean.size(), qa.variance.size(), "gaussian_kl");
  require_same_size(pb.mean.size(), pb.variance.size(), "gaussian_kl");
  require_same_size(qa.mean.size(), pb.mean.size(), "gaussian_kl");
  double kl = 0.0;
  for (std::size_t i = 0; i < qa.mean.size(); ++i) {
    const double vq = qa.variance[i];
    const double vp = pb.variance[i];
    if (!(vq > 0.0 && vp > 0.0)) throw DomainError("gaussian_kl: variances must be > 0");
    const double dm = qa.mean[i] - pb.mean[i];
    kl += 0.5 * (vq / vp + dm * dm / vp - 1.0 + std::log(vp / vq));
  }
  return kl;
}

}  // namespace davi
