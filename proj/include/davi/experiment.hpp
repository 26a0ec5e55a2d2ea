// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>

#include "davi/config.hpp"
#include "davi/metrics.hpp"
#include "davi/trainer.hpp"

namespace davi {

struct EvalSet {
  std::vector<Vector> x0;
  std::vector<Measurement> y;
};

/// Fresh signals and measurements drawn from the eval seed.
EvalSet make_heldout_set(const ExperimentConfig& cfg);

/// The first `n` training signals with fresh measurement noise.
EvalSet make_training_set(const ExperimentConfig& cfg, std::size_t n);

/// Throws StateError if any eval signal also appears in `train`.
void assert_disjoint(const EvalSet& eval, const std::vector<Vector>& train);

/// Peak for PSNR: the widest coordinate range covered by the prior's components at +-3 std.
double default_psnr_peak(const GaussianMixturePrior& prior);

/// Evaluates one-step amortized inference on every measurement of `set`.
EvalReport evaluate(const AmortizedPosterior& phi, const Problem& problem, const EvalSet& set,
                    const EvalSpec& spec);

struct ExperimentResult {
  TrainState state;
  EvalReport heldout;
  EvalReport training;
};

/// Trains, checkpoints and evaluates. With an output directory, writes checkpoint.json,
/// metrics.csv, report.csv, config.json, summary.json and train_report.csv.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::optional<std::filesystem::path>& out_dir);

/// Evaluates a saved checkpoint on the held-out set.
EvalReport evaluate_checkpoint(const std::filesystem::path& checkpoint, const ExperimentConfig& cfg);

}  // namespace davi
