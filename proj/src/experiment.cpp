// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

#include "davi/checkpoint.hpp"

namespace davi {

namespace {

constexpr std::uint64_t kNoiseSalt = 0x6d656173ULL;
constexpr std::uint64_t kSampleSalt = 0x73616d70ULL;

EvalSet measure(const ExperimentConfig& cfg, std::vector<Vector> x0, std::uint64_t noise_seed) {
  EvalSet set;
  Rng rng(noise_seed);
  for (const auto& x : x0) set.y.push_back(apply_forward_model(cfg.problem.op, x, cfg.problem.noise, rng));
  set.x0 = std::move(x0);
  return set;
}

/// Effective Gaussian noise level for the reference posterior. Poisson measurements use the
/// mean count variance.
double reference_sigma(const Measurement& y, const NoiseModel& noise) {
  if (y.noise_kind == NoiseKind::gaussian) return y.sigma_y;
  double mean = 0.0;
  for (double v : y.y) mean += std::max(v, 0.0);
  mean /= static_cast<double>(y.y.size());
  return std::sqrt(std::max(mean, 1.0 / noise.photon_scale) / noise.photon_scale);
}

}  // namespace

EvalSet make_heldout_set(const ExperimentConfig& cfg) {
  return measure(cfg, sample_prior(cfg.problem.prior, cfg.eval.num_measurements, cfg.eval.seed),
                 cfg.eval.seed ^ kNoiseSalt);
}

EvalSet make_training_set(const ExperimentConfig& cfg, std::size_t n) {
  const auto& data = cfg.problem.dataset;
  n = std::min(n, data.size());
  return measure(cfg, std::vector<Vector>(data.begin(), data.begin() + static_cast<long>(n)),
                 (cfg.eval.seed + 1) ^ kNoiseSalt);
}

void assert_disjoint(const EvalSet& eval, const std::vector<Vector>& train) {
  const std::set<Vector> seen(train.begin(), train.end());
  for (std::size_t i = 0; i < eval.x0.size(); ++i) {
    if (seen.count(eval.x0[i]) != 0) {
      throw StateError("held-out signal " + std::to_string(i) + " appears in the training set");
    }
  }
}

double default_psnr_peak(const GaussianMixturePrior& prior) {
  double peak = 0.0;
  for (std::size_t i = 0; i < prior.dim(); ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < prior.num_components(); ++k) {
      const double s = 3.0 * std::sqrt(prior.variances()[k][i]);
      lo = std::min(lo, prior.means()[k][i] - s);
      hi = std::max(hi, prior.means()[k][i] + s);
    }
    peak = std::max(peak, hi - lo);
  }
  return peak;
}

EvalReport evaluate(const AmortizedPosterior& phi, const Problem& problem, const EvalSet& set,
                    const EvalSpec& spec) {
  const double peak = spec.psnr_peak.value_or(default_psnr_peak(problem.prior));
  const std::size_t S = spec.samples_per_measurement;
  EvalReport report;
  for (std::size_t m = 0; m < set.y.size(); ++m) {
    const Measurement& y = set.y[m];
    Rng rng((spec.seed + m) ^ kSampleSalt);
    const std::uint64_t nfe_before = phi.nfe();
    const auto start = std::chrono::steady_clock::now();
    std::vector<Vector> samples;
    samples.reserve(S);
    for (std::size_t s = 0; s < S; ++s) samples.push_back(implicit_sample(phi, y, problem.op, problem.sched, rng));
    const auto stop = std::chrono::steady_clock::now();

    EvalRow row;
    row.meas_id = m;
    row.nfe = static_cast<double>(phi.nfe() - nfe_before) / static_cast<double>(S);
    if (spec.record_wall_clock) {
      row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count() / static_cast<double>(S);
    }
    double residual = 0.0;
    Vector restored(problem.prior.dim(), 0.0);
    for (const auto& x : samples) {
      const Vector hx = problem.op.apply(x);
      for (std::size_t i = 0; i < hx.size(); ++i) residual += (y.y[i] - hx[i]) * (y.y[i] - hx[i]);
      for (std::size_t i = 0; i < x.size(); ++i) restored[i] += x[i] / static_cast<double>(S);
    }
    row.residual = residual / static_cast<double>(S);
    row.psnr = psnr(restored, set.x0[m], peak);
    const GaussianPosterior post =
        true_posterior(problem.prior, problem.op, y.y, reference_sigma(y, problem.noise));
    const PosteriorDistance dist = posterior_distance(samples, post, spec.seed + m, spec.swd_projections);
    row.mean_err = dist.mean_err;
    row.std_err = dist.std_err;
    row.swd = dist.swd;
    report.rows.push_back(row);
  }
  return report;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::optional<std::filesystem::path>& out_dir) {
  const EvalSet heldout = make_heldout_set(cfg);
  assert_disjoint(heldout, cfg.problem.dataset);
  if (out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir->string() + ": " + ec.message());
  }

  CheckpointCallback on_checkpoint;
  if (out_dir) {
    on_checkpoint = [&](const TrainState& s) {
      const auto path = *out_dir / ("checkpoint_" + std::to_string(s.iteration) + ".json");
      try {
        save_checkpoint(path, s, cfg.problem.sched);
      } catch (const IoError& e) {
        throw IoError("iteration " + std::to_string(s.iteration) + ": " + e.what());
      }
    };
  }
  ExperimentResult result{run_training(cfg.train, cfg.problem, cfg.network, on_checkpoint), {}, {}};
  result.heldout = evaluate(result.state.phi, cfg.problem, heldout, cfg.eval);
  const EvalSet seen = make_training_set(cfg, cfg.eval.num_measurements);
  result.training = evaluate(result.state.phi, cfg.problem, seen, cfg.eval);

  if (out_dir) {
    save_checkpoint(*out_dir / "checkpoint.json", result.state, cfg.problem.sched);
    std::vector<MetricsRow> log = result.state.log;
    if (!cfg.eval.record_wall_clock) {
      for (auto& r : log) r.wall_ms = 0.0;
    }
    write_metrics_csv(*out_dir / "metrics.csv", log);
    emit_report(result.heldout, cfg.source, *out_dir);
    std::ofstream train_out(*out_dir / "train_report.csv", std::ios::binary);
    train_out << report_csv(result.training);
    if (!train_out) throw IoError("failed writing " + (*out_dir / "train_report.csv").string());
  }
  return result;
}

EvalReport evaluate_checkpoint(const std::filesystem::path& checkpoint, const ExperimentConfig& cfg) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint);
  if (!(loaded.sched == cfg.problem.sched)) {
    throw ParameterError("checkpoint schedule does not match config schedule");
  }
  if (loaded.state.phi.signal_dim() != cfg.problem.prior.dim()) {
    throw DimensionError("checkpoint signal dimension does not match config prior");
  }
  return evaluate(loaded.state.phi, cfg.problem, make_heldout_set(cfg), cfg.eval);
}

}  // namespace davi
