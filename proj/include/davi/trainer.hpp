// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "davi/common.hpp"
#include "davi/diffusion.hpp"
#include "davi/losses.hpp"
#include "davi/networks.hpp"
#include "davi/operators.hpp"
#include "davi/optimizer.hpp"
#include "davi/ppb.hpp"
#include "davi/prior.hpp"

namespace davi {

enum class DataSource { dataset, davi_g };

std::string to_string(DataSource source);
DataSource data_source_from_string(const std::string& name);

/// Learning-rate multiplier over the K iterations of a run: constant 1, or a half cosine
/// from 1 at iteration 0 down to 0 at iteration K.
enum class LrSchedule { constant, cosine };
std::string to_string(LrSchedule schedule);
LrSchedule lr_schedule_from_string(const std::string& name);

struct TrainConfig {
  long K = 1000;
  std::size_t batch_size = 32;
  double lr_phi = 1e-3;
  double lr_psi = 1e-3;
  AdamHyper adam;
  LrSchedule lr_schedule = LrSchedule::constant;
  DataSource data_source = DataSource::dataset;
  std::uint64_t rng_seed = 0;
  /// Iterations between checkpoints; 0 disables them.
  long checkpoint_every = 0;
  /// Global-norm gradient clipping for both networks; 0 disables it.
  double grad_clip = 0.0;
  /// Workers for per-element gradient evaluation. Reduction order is fixed, so results do
  /// not depend on this value.
  std::size_t threads = 1;

  void validate() const;
};

/// Everything held fixed during training.
struct Problem {
  GaussianMixturePrior prior;
  LinearOperator op;
  NoiseModel noise;
  NoiseSchedule sched;
  PPBConfig ppb;
  LossWeights weights;
  /// Training signals for DataSource::dataset.
  std::vector<Vector> dataset;
};

struct MetricsRow {
  long iter = 0;
  double loss_c = 0.0;
  double loss_s = 0.0;
  double delta_s_sq = 0.0;
  double reg = 0.0;
  double wall_ms = 0.0;
};

struct TrainState {
  long iteration = 0;
  AmortizedPosterior phi;
  ImplicitScoreNet psi;
  AdamMoments phi_opt;
  AdamMoments psi_opt;
  Rng rng;
  std::vector<MetricsRow> log;
};

/// Both networks are initialized from the same seed; their output layers start at zero so
/// the implicit map is the identity on its lifted input.
TrainState init_train_state(const Problem& problem, const NetworkShape& shape,
                            const TrainConfig& cfg);

/// Random quantities of one alternation, drawn sequentially from the state generator.
struct StepDraws {
  std::vector<Vector> x0;
  std::vector<Measurement> y;
  std::vector<double> a;
  std::vector<Vector> y_lifted;
  std::vector<Vector> y_a;
  std::vector<int> t;
  std::vector<Vector> eps;
};

StepDraws draw_step(TrainState& state, std::span<const Vector> batch, const Problem& problem);

struct PsiStepResult {
  std::vector<Vector> x0_hat;
  std::vector<AmortizedPosterior::Trace> phi_traces;
  double loss_s = 0.0;
  Vector grad;
};

/// Batch-mean score-matching gradient for psi on the current phi's outputs.
PsiStepResult psi_gradient(const TrainState& state, const StepDraws& draws, const Problem& problem,
                           std::size_t threads);

struct PhiStepResult {
  double loss_c = 0.0;
  double reg = 0.0;
  double delta_s_sq = 0.0;
  Vector grad;
};

/// Batch-mean gradient of data consistency + integral KL + regularizer w.r.t. phi.
/// `psi_override` replaces s_psi (used to check the null update).
PhiStepResult phi_gradient(const TrainState& state, const StepDraws& draws,
                           const PsiStepResult& psi_pass, const Problem& problem,
                           std::size_t threads, const ScoreFn* psi_override = nullptr);

/// Multiplier applied to both learning rates at `iteration` (0-based) of a K-step run.
double lr_multiplier(const TrainConfig& cfg, long iteration);

/// One alternation: psi update on the current phi, then phi update with the new psi.
MetricsRow train_step(TrainState& state, std::span<const Vector> batch, const Problem& problem,
                      const TrainConfig& cfg);

/// Draws a training batch from the dataset or, for davi_g, from the prior.
std::vector<Vector> draw_batch(TrainState& state, const Problem& problem, const TrainConfig& cfg);

using CheckpointCallback = std::function<void(const TrainState&)>;

/// Runs K alternations from `state` (continuing its counters).
void continue_training(TrainState& state, long K, const Problem& problem, const TrainConfig& cfg,
                       const CheckpointCallback& on_checkpoint = {});

TrainState run_training(const TrainConfig& cfg, const Problem& problem, const NetworkShape& shape,
                        const CheckpointCallback& on_checkpoint = {});

/// Calls fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace davi
