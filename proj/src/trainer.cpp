// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace davi {

std::string to_string(DataSource source) {
  return source == DataSource::dataset ? "dataset" : "davi_g";
}

DataSource data_source_from_string(const std::string& name) {
  if (name == "dataset") return DataSource::dataset;
  if (name == "davi_g") return DataSource::davi_g;
  throw ParameterError("unknown data_source '" + name + "'");
}

std::string to_string(LrSchedule schedule) {
  return schedule == LrSchedule::constant ? "constant" : "cosine";
}

LrSchedule lr_schedule_from_string(const std::string& name) {
  if (name == "constant") return LrSchedule::constant;
  if (name == "cosine") return LrSchedule::cosine;
  throw ParameterError("unknown lr_schedule '" + name + "'");
}

double lr_multiplier(const TrainConfig& cfg, long iteration) {
  if (cfg.lr_schedule == LrSchedule::constant || cfg.K <= 0) return 1.0;
  const double u = std::clamp(static_cast<double>(iteration) / static_cast<double>(cfg.K), 0.0, 1.0);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * u));
}

void TrainConfig::validate() const {
  if (K < 0) throw ParameterError("train.K must be >= 0");
  if (batch_size == 0) throw ParameterError("train.batch_size must be >= 1");
  if (!(lr_phi > 0.0 && lr_psi > 0.0)) throw ParameterError("learning rates must be > 0");
  if (threads == 0) throw ParameterError("train.threads must be >= 1");
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

TrainState init_train_state(const Problem& problem, const NetworkShape& shape,
                            const TrainConfig& cfg) {
  const std::size_t d = problem.prior.dim();
  TrainState state{0,
                   AmortizedPosterior(d, shape, problem.ppb.h),
                   ImplicitScoreNet(d, shape),
                   {},
                   {},
                   Rng(cfg.rng_seed),
                   {}};
  Rng init_phi(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  Rng init_psi(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  state.phi.net().initialize(init_phi, true);
  state.psi.net().initialize(init_psi, true);
  state.phi_opt = AdamMoments::zeros(state.phi.net().num_params());
  state.psi_opt = AdamMoments::zeros(state.psi.net().num_params());
  return state;
}

StepDraws draw_step(TrainState& state, std::span<const Vector> batch, const Problem& problem) {
  if (batch.empty()) throw ParameterError("train_step: empty batch");
  StepDraws draws;
  std::uniform_int_distribution<int> pick_t(1, problem.weights.ikl_t_max);
  for (const Vector& x0 : batch) {
    require_same_size(x0.size(), problem.prior.dim(), "train_step: batch element");
    Measurement y = apply_forward_model(problem.op, x0, problem.noise, state.rng);
    const double a = sample_a(problem.ppb, state.rng);
    Vector y_lifted = problem.op.lift(y.y);
    Vector y_a = ppb_sample(y_lifted, x0, a, problem.ppb, problem.sched, state.rng);
    draws.t.push_back(pick_t(state.rng));
    draws.eps.push_back(standard_normal(state.rng, x0.size()));
    draws.x0.push_back(x0);
    draws.y.push_back(std::move(y));
    draws.a.push_back(a);
    draws.y_lifted.push_back(std::move(y_lifted));
    draws.y_a.push_back(std::move(y_a));
  }
  return draws;
}

namespace {

Vector mean_of(const std::vector<Vector>& grads) {
  Vector out(grads.front().size(), 0.0);
  for (const Vector& g : grads) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(grads.size());
  for (auto& v : out) v *= inv;
  return out;
}

void ensure_finite(ConstSpan v, const char* what, long iteration) {
  if (!all_finite(v)) {
    double worst = 0.0;
    for (double x : v) {
      if (std::isfinite(x)) worst = std::max(worst, std::abs(x));
    }
    throw NumericError(std::string("non-finite ") + what + " at iteration " +
                       std::to_string(iteration) + " (largest finite magnitude " +
                       std::to_string(worst) + ")");
  }
}

}  // namespace

PsiStepResult psi_gradient(const TrainState& state, const StepDraws& draws, const Problem& problem,
                           std::size_t threads) {
  const std::size_t n = draws.x0.size();
  PsiStepResult out;
  out.x0_hat.resize(n);
  out.phi_traces.resize(n);
  std::vector<Vector> grads(n);
  Vector losses(n);
  parallel_for(n, threads, [&](std::size_t i) {
    out.x0_hat[i] = state.phi.forward(draws.y_a[i], draws.a[i], problem.sched, &out.phi_traces[i]);
    LossGrad lg = score_matching_loss(state.psi, out.x0_hat[i], draws.t[i], draws.eps[i], problem.sched);
    losses[i] = lg.value;
    grads[i] = std::move(lg.grad);
  });
  for (double l : losses) out.loss_s += l;
  out.loss_s /= static_cast<double>(n);
  out.grad = mean_of(grads);
  return out;
}

PhiStepResult phi_gradient(const TrainState& state, const StepDraws& draws,
                           const PsiStepResult& psi_pass, const Problem& problem,
                           std::size_t threads, const ScoreFn* psi_override) {
  const std::size_t n = draws.x0.size();
  std::vector<Vector> grads(n);
  Vector loss_c(n), reg(n), delta(n);
  const LossWeights& weights = problem.weights;
  parallel_for(n, threads, [&](std::size_t i) {
    const Vector& x0_hat = psi_pass.x0_hat[i];
    const int t = draws.t[i];
    const Vector x_t = forward_marginal_sample(x0_hat, t, draws.eps[i], problem.sched);
    ScoreDistillation sd;
    if (psi_override != nullptr) {
      const Vector s_psi = (*psi_override)(x_t, t);
      const Vector s_theta = problem.prior.score(x_t, t, problem.sched);
      const double scale = time_weight(weights.w_kind, t, problem.sched) *
                           std::sqrt(problem.sched.alpha_bar(t));
      sd.upstream.resize(x_t.size());
      for (std::size_t k = 0; k < x_t.size(); ++k) {
        const double ds = s_psi[k] - s_theta[k];
        sd.delta_s_sq += ds * ds;
        sd.upstream[k] = scale * ds;
      }
    } else {
      sd = ikl_upstream(state.psi, problem.prior, x_t, t, problem.sched, weights);
    }
    const LossGrad dc = data_consistency(x0_hat, draws.y[i], problem.op, weights);
    const LossGrad rg = regularization(x0_hat, draws.x0[i], weights);
    Vector upstream(x0_hat.size());
    for (std::size_t k = 0; k < upstream.size(); ++k) {
      upstream[k] = dc.grad[k] + rg.grad[k] + sd.upstream[k];
    }
    grads[i] = state.phi.backward(psi_pass.phi_traces[i], upstream).params;
    loss_c[i] = dc.value;
    reg[i] = rg.value;
    delta[i] = sd.delta_s_sq;
  });
  PhiStepResult out;
  for (std::size_t i = 0; i < n; ++i) {
    out.loss_c += loss_c[i];
    out.reg += reg[i];
    out.delta_s_sq += delta[i];
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.loss_c *= inv;
  out.reg *= inv;
  out.delta_s_sq *= inv;
  out.grad = mean_of(grads);
  return out;
}

MetricsRow train_step(TrainState& state, std::span<const Vector> batch, const Problem& problem,
                      const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const StepDraws draws = draw_step(state, batch, problem);
  const double lr_scale = lr_multiplier(cfg, state.iteration);

  PsiStepResult psi_pass = psi_gradient(state, draws, problem, cfg.threads);
  ensure_finite(psi_pass.grad, "psi gradient", state.iteration);
  clip_global_norm(psi_pass.grad, cfg.grad_clip);
  adaptive_update(state.psi.net().params(), psi_pass.grad, state.psi_opt, cfg.lr_psi * lr_scale, cfg.adam);

  PhiStepResult phi_pass = phi_gradient(state, draws, psi_pass, problem, cfg.threads);
  ensure_finite(phi_pass.grad, "phi gradient", state.iteration);
  clip_global_norm(phi_pass.grad, cfg.grad_clip);
  adaptive_update(state.phi.net().params(), phi_pass.grad, state.phi_opt, cfg.lr_phi * lr_scale, cfg.adam);
  ensure_finite(state.phi.net().params(), "phi parameters", state.iteration);
  ensure_finite(state.psi.net().params(), "psi parameters", state.iteration);

  ++state.iteration;
  MetricsRow row;
  row.iter = state.iteration;
  row.loss_c = phi_pass.loss_c;
  row.loss_s = psi_pass.loss_s;
  row.delta_s_sq = phi_pass.delta_s_sq;
  row.reg = phi_pass.reg;
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  state.log.push_back(row);
  return row;
}

std::vector<Vector> draw_batch(TrainState& state, const Problem& problem, const TrainConfig& cfg) {
  if (cfg.data_source == DataSource::davi_g) {
    return sample_prior(problem.prior, cfg.batch_size, state.rng);
  }
  if (problem.dataset.empty()) throw ParameterError("dataset mode requires a non-empty dataset");
  std::uniform_int_distribution<std::size_t> pick(0, problem.dataset.size() - 1);
  std::vector<Vector> batch;
  batch.reserve(cfg.batch_size);
  for (std::size_t i = 0; i < cfg.batch_size; ++i) batch.push_back(problem.dataset[pick(state.rng)]);
  return batch;
}

void continue_training(TrainState& state, long K, const Problem& problem, const TrainConfig& cfg,
                       const CheckpointCallback& on_checkpoint) {
  for (long k = 0; k < K; ++k) {
    const std::vector<Vector> batch = draw_batch(state, problem, cfg);
    train_step(state, batch, problem, cfg);
    if (on_checkpoint && cfg.checkpoint_every > 0 && state.iteration % cfg.checkpoint_every == 0) {
      on_checkpoint(state);
    }
  }
}

TrainState run_training(const TrainConfig& cfg, const Problem& problem, const NetworkShape& shape,
                        const CheckpointCallback& on_checkpoint) {
  cfg.validate();
  problem.ppb.validate();
  problem.weights.validate(problem.sched);
  TrainState state = init_train_state(problem, shape, cfg);
  continue_training(state, cfg.K, problem, cfg, on_checkpoint);
  return state;
}

}  // namespace davi
