// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/self_check.hpp"

#include <functional>
#include <sstream>

#include "davi/checkpoint.hpp"
#include "davi/losses.hpp"
#include "davi/ppb.hpp"
#include "davi/prior.hpp"
#include "davi/trainer.hpp"

namespace davi {

namespace {

struct Check {
  std::string name;
  std::function<std::string()> run;  // empty string on success
};

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

std::string check_adjoints(Rng& rng) {
  DenseMatrix m{2, 3, {1.0, 0.5, -0.3, 0.2, 0.0, 1.1}};
  const std::vector<LinearOperator> ops{
      LinearOperator::identity(6),
      LinearOperator::gaussian_blur(4, 5, 1, 0.8),
      LinearOperator::avgpool_sr(4, 6, 2),
      LinearOperator::box_mask(6, {0, 2, 5}),
      LinearOperator::box_inpaint(4, 4, 1, 1, 2, 2),
      LinearOperator::grayscale(3, 4),
      LinearOperator::dense(m)};
  for (const auto& op : ops) {
    for (int probe = 0; probe < 20; ++probe) {
      const Vector x = standard_normal(rng, op.in_dim());
      const Vector y = standard_normal(rng, op.out_dim());
      const double lhs = dot(op.apply(x), y);
      const double rhs = dot(x, op.adjoint(y));
      if (rel_err(lhs, rhs) > 1e-10) return op.name() + ": <Hx,y> != <x,H^T y>";
    }
    if (op.kind() == OperatorKind::gaussian_blur) continue;
    const Vector y = standard_normal(rng, op.out_dim());
    const Vector back = op.apply(op.lift(y));
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (std::abs(back[i] - y[i]) > 1e-10) return op.name() + ": H lift(y) != y";
    }
  }
  return {};
}

std::string check_prior_score(Rng& rng) {
  const NoiseSchedule sched = make_linear_schedule(200, 1e-4, 0.02);
  const GaussianMixturePrior prior({0.3, 0.7}, {{-1.0, 0.5}, {1.5, -1.0}}, {{0.2, 0.4}, {0.15, 0.3}});
  const double h = 1e-5;
  for (int t : {0, 1, 50, 200}) {
    for (int rep = 0; rep < 5; ++rep) {
      Vector x = standard_normal(rng, 2);
      const Vector s = prior.score(x, t, sched);
      for (std::size_t i = 0; i < 2; ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (prior.log_density(xp, t, sched) - prior.log_density(xm, t, sched)) / (2 * h);
        if (std::abs(fd - s[i]) > 1e-6) return "score mismatch at t=" + std::to_string(t);
      }
    }
  }
  return {};
}

std::string check_ppb(Rng& rng) {
  const NoiseSchedule sched = make_linear_schedule(200, 1e-4, 0.02);
  if (sigma_a(0.0, sched) != 1.0 || sigma_a(1.0, sched) != 0.0) return "sigma_a endpoints";
  const PPBConfig cfg;
  const Vector x0{0.25, -1.5};
  const Vector y{1.0, 2.0};
  if (ppb_sample(y, x0, 0.0, cfg, sched, rng) != x0) return "a=0 branch is not x0";
  Rng a(7), b(7);
  const Vector got = ppb_sample(y, x0, 1.0, cfg, sched, a);
  const Vector z = standard_normal(b, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    if (got[i] != y[i] + cfg.h * z[i]) return "a=1 branch is not y + h z";
  }
  return {};
}

std::string check_sds_identity(Rng& rng) {
  const NoiseSchedule sched = make_linear_schedule(200, 1e-4, 0.02);
  const GaussianMixturePrior prior({1.0}, {{0.0}}, {{1.0}});
  const ScoreFn score = [&](ConstSpan x, int t) { return prior.score(x, t, sched); };
  const NoisePredFn eps_theta = [&](ConstSpan x, int t) { return prior.noise_prediction(x, t, sched); };
  std::uniform_int_distribution<int> pick(1, 200);
  for (int i = 0; i < 100; ++i) {
    const Vector mu = standard_normal(rng, 1);
    const Vector eps = standard_normal(rng, 1);
    const int t = pick(rng);
    const double w = time_weight(TimeWeightKind::inv_sigma, t, sched);
    const Vector a = dirac_sds_grad(mu, eps_theta, t, eps, sched, w);
    const Vector b = gaussian_posterior_grad(mu, 0.0, score, t, eps, sched, w);
    if (rel_err(a[0], b[0]) > 1e-12) return "dirac vs sigma=0 gaussian gradient";
  }
  return {};
}

std::string check_backward(Rng& rng) {
  Mlp net({3, 8, 2}, Activation::silu);
  net.initialize(rng, false);
  const Vector x = standard_normal(rng, 3);
  const Vector up = standard_normal(rng, 2);
  MlpTrace trace;
  net.forward(x, &trace);
  const MlpGradient g = net.backward(trace, up);
  const double h = 1e-6;
  for (std::size_t p = 0; p < net.num_params(); p += 5) {
    Mlp plus = net, minus = net;
    plus.params()[p] += h;
    minus.params()[p] -= h;
    const double fd = (dot(plus.forward(x), up) - dot(minus.forward(x), up)) / (2 * h);
    if (std::abs(fd - g.params[p]) > 1e-6 * std::max(1.0, std::abs(fd))) return "parameter gradient";
  }
  return {};
}

std::string check_checkpoint_roundtrip() {
  const NoiseSchedule sched = make_linear_schedule(50, 1e-4, 0.02);
  const GaussianMixturePrior prior({0.5, 0.5}, {{-1.0}, {1.0}}, {{0.1}, {0.1}});
  Problem problem{prior, LinearOperator::identity(1), NoiseModel{NoiseKind::gaussian, 0.1, 100.0},
                  sched, PPBConfig{}, LossWeights{1.0, 0.0, 50, TimeWeightKind::constant},
                  sample_prior(prior, 64, 3)};
  TrainConfig cfg;
  cfg.K = 2;
  cfg.batch_size = 4;
  NetworkShape shape{{8}, Activation::silu, 4};
  TrainState state = run_training(cfg, problem, shape);
  const LoadedCheckpoint loaded = checkpoint_from_json(checkpoint_to_json(state, sched));
  if (checkpoint_to_json(loaded.state, loaded.sched).dump() != checkpoint_to_json(state, sched).dump()) {
    return "checkpoint JSON round-trip is not exact";
  }
  TrainState resumed = loaded.state;
  continue_training(state, 1, problem, cfg);
  continue_training(resumed, 1, problem, cfg);
  if (state.phi.net().params() != resumed.phi.net().params() ||
      state.psi.net().params() != resumed.psi.net().params()) {
    return "resumed training diverged";
  }
  return {};
}

}  // namespace

bool run_self_checks(std::ostream& out, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<Check> checks{
      {"operator adjoints and lifts", [&] { return check_adjoints(rng); }},
      {"prior score vs finite differences", [&] { return check_prior_score(rng); }},
      {"bridge endpoints", [&] { return check_ppb(rng); }},
      {"dirac and zero-width gaussian gradients agree", [&] { return check_sds_identity(rng); }},
      {"network backward vs finite differences", [&] { return check_backward(rng); }},
      {"checkpoint round-trip", [] { return check_checkpoint_roundtrip(); }},
  };
  bool ok = true;
  for (const auto& c : checks) {
    std::string failure;
    try {
      failure = c.run();
    } catch (const std::exception& e) {
      failure = std::string("threw: ") + e.what();
    }
    if (failure.empty()) {
      out << "ok    " << c.name << '\n';
    } else {
      ok = false;
      out << "FAIL  " << c.name << ": " << failure << '\n';
    }
  }
  return ok;
}

}  // namespace davi
