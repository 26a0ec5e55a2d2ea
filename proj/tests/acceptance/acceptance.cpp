// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "davi/checkpoint.hpp"
#include "davi/experiment.hpp"

namespace {

using namespace davi;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates a verdict and keeps the first failure message.
class Verdict {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && pass_) first_failure_ = what;
    pass_ = pass_ && ok;
  }
  bool pass() const { return pass_; }
  const std::string& failure() const { return first_failure_; }

 private:
  bool pass_ = true;
  std::string first_failure_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::size_t n, const std::function<double()>& draw) {
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = draw();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(sq / static_cast<double>(n) - mean * mean, 0.0);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

ScoreFn standard_normal_score() {
  return [](ConstSpan x, int) {
    Vector s(x.begin(), x.end());
    for (auto& v : s) v = -v;
    return s;
  };
}

NoisePredFn standard_normal_noise(const NoiseSchedule& sched) {
  return [&sched](ConstSpan x, int t) {
    Vector e(x.begin(), x.end());
    for (auto& v : e) v *= std::sqrt(1.0 - sched.alpha_bar(t));
    return e;
  };
}

// ---------------------------------------------------------------------------------------

Outcome gradient_oracle() {
  const auto sched = make_linear_schedule(1000, 1e-4, 0.02);
  const ScoreFn score = standard_normal_score();
  const NoisePredFn noise = standard_normal_noise(sched);
  Rng rng(101);
  Verdict v;
  double worst = 0.0;
  for (int t : {1, 50, 250, 600, 1000}) {
    for (double mu : {-2.0, 0.5, 2.0}) {
      const double target = sched.alpha_bar(t) * mu;
      const MeanSe dirac = mean_se(100000, [&] {
        return dirac_sds_grad(Vector{mu}, noise, t, standard_normal(rng, 1), sched)[0];
      });
      const MeanSe gauss = mean_se(100000, [&] {
        return gaussian_posterior_grad(Vector{mu}, 0.5, score, t, standard_normal(rng, 1), sched)[0];
      });
      for (const auto& [name, m] : {std::pair{"dirac", dirac}, std::pair{"gaussian", gauss}}) {
        const double z = std::abs(m.mean - target) / m.se;
        worst = std::max(worst, z);
        v.expect(z <= 3.0, std::string(name) + fmt(" t=%g mu=%g: %.2f standard errors", t, mu, z));
      }
    }
  }
  return {v.pass(), v.pass() ? fmt("max deviation %.2f standard errors over 30 cases", worst) : v.failure()};
}

Outcome surrogate_identities() {
  const auto sched = make_linear_schedule(1000, 1e-4, 0.02);
  const GaussianMixturePrior prior({0.4, 0.6}, {{-1.0}, {1.2}}, {{0.3}, {0.2}});
  const ScoreFn score = [&](ConstSpan x, int t) { return prior.score(x, t, sched); };
  const NoisePredFn noise = [&](ConstSpan x, int t) { return prior.noise_prediction(x, t, sched); };
  Rng rng(202);
  Verdict v;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int t = 1 + static_cast<int>(rng() % 1000);
    const Vector mu = standard_normal(rng, 1);
    const Vector eps = standard_normal(rng, 1);
    const double a = dirac_sds_grad(mu, noise, t, eps, sched)[0];
    const double b = gaussian_posterior_grad(mu, 0.0, score, t, eps, sched)[0];
    const double rel = std::abs(a - b) / std::max(std::abs(a), std::numeric_limits<double>::min());
    worst = std::max(worst, rel);
  }
  v.expect(worst <= 1e-12, fmt("dirac vs zero-spread gaussian: relative error %.3g", worst));
  const MeanSe sf = mean_se(100000, [&] {
    return ikl_score_function_term(Vector{0.8}, 0.4, 300, standard_normal(rng, 1), sched)[0];
  });
  const double z = std::abs(sf.mean) / sf.se;
  v.expect(z <= 3.0, fmt("score-function term mean %.3g is %.2f standard errors from 0", sf.mean, z));
  return {v.pass(), v.pass() ? fmt("max relative gap %.2g; score-function term at %.2f standard errors", worst, z)
                             : v.failure()};
}

// Directional central difference check: |<g, d> - fd| <= 1e-5 max(|<g, d>|, |fd|).
template <typename F>
double worst_fd_ratio(F f, const Vector& x, const Vector& grad, Rng& rng, int directions = 50) {
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < directions; ++k) {
    const Vector d = standard_normal(rng, x.size());
    Vector xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp[i] += h * d[i];
      xm[i] -= h * d[i];
    }
    const double fd = (f(xp) - f(xm)) / (2.0 * h);
    const double an = dot(grad, d);
    worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-300}));
  }
  return worst;
}

Outcome finite_differences() {
  Rng rng(303);
  const auto sched = make_linear_schedule(200, 1e-4, 0.02);
  Verdict v;
  std::ostringstream summary;

  const auto op = LinearOperator::gaussian_blur(3, 3, 1, 0.8);
  LossWeights w;
  w.gamma = 2.0;
  w.reg_coeff = 0.3;
  for (auto kind : {NoiseKind::gaussian, NoiseKind::poisson}) {
    Measurement y;
    y.noise_kind = kind;
    y.sigma_y = 0.3;
    y.y = Vector(9);
    std::uniform_real_distribution<double> pos(0.2, 2.0);
    for (auto& e : y.y) e = pos(rng);
    const Vector x = standard_normal(rng, 9);
    const double r = worst_fd_ratio([&](const Vector& p) { return data_consistency(p, y, op, w).value; }, x,
                                    data_consistency(x, y, op, w).grad, rng);
    v.expect(r <= 1e-5, "data consistency (" + to_string(kind) + fmt("): %.3g", r));
    summary << "data(" << to_string(kind) << ") " << fmt("%.1e", r) << "; ";
  }

  const Vector x0 = standard_normal(rng, 4);
  const Vector xr = standard_normal(rng, 4);
  const double rreg = worst_fd_ratio([&](const Vector& p) { return regularization(p, x0, w).value; }, xr,
                                     regularization(xr, x0, w).grad, rng);
  v.expect(rreg <= 1e-5, fmt("regularizer: %.3g", rreg));
  summary << "reg " << fmt("%.1e", rreg) << "; ";

  ImplicitScoreNet psi(2, NetworkShape{{32, 32}, Activation::silu, 8});
  psi.net().initialize(rng, false);
  const Vector xh = standard_normal(rng, 2);
  const Vector eps = standard_normal(rng, 2);
  const Vector base = psi.net().params();
  const auto sm = [&](const Vector& p) {
    psi.net().params() = p;
    const double val = score_matching_loss(psi, xh, 80, eps, sched).value;
    psi.net().params() = base;
    return val;
  };
  const double rsm = worst_fd_ratio(sm, base, score_matching_loss(psi, xh, 80, eps, sched).grad, rng);
  v.expect(rsm <= 1e-5, fmt("score matching: %.3g", rsm));
  summary << "dsm " << fmt("%.1e", rsm) << "; ";

  for (auto act : {Activation::silu, Activation::tanh}) {
    Mlp net({5, 24, 24, 3}, act);
    net.initialize(rng, false);
    const Vector in = standard_normal(rng, 5);
    const Vector up = standard_normal(rng, 3);
    MlpTrace trace;
    net.forward(in, &trace);
    const MlpGradient g = net.backward(trace, up);
    const Vector p0 = net.params();
    const auto fp = [&](const Vector& p) {
      net.params() = p;
      const double val = dot(up, net.forward(in));
      net.params() = p0;
      return val;
    };
    const double rp = worst_fd_ratio(fp, p0, g.params, rng);
    const double ri = worst_fd_ratio([&](const Vector& i) { return dot(up, net.forward(i)); }, in, g.input, rng);
    v.expect(rp <= 1e-5 && ri <= 1e-5, "mlp backward (" + to_string(act) + fmt("): %.3g / %.3g", rp, ri));
    summary << "mlp(" << to_string(act) << ") " << fmt("%.1e", std::max(rp, ri)) << "; ";
  }

  AmortizedPosterior phi(2, NetworkShape{{32, 32}, Activation::silu, 8}, 0.1);
  phi.net().initialize(rng, false);
  const Vector ya = standard_normal(rng, 2);
  const Vector up = standard_normal(rng, 2);
  AmortizedPosterior::Trace trace;
  phi.forward(ya, 0.9, sched, &trace);
  const Vector pp = phi.net().params();
  const auto fphi = [&](const Vector& p) {
    phi.net().params() = p;
    const double val = dot(up, phi.forward(ya, 0.9, sched));
    phi.net().params() = pp;
    return val;
  };
  const double rphi = worst_fd_ratio(fphi, pp, phi.backward(trace, up).params, rng);
  v.expect(rphi <= 1e-5, fmt("posterior net backward: %.3g", rphi));
  summary << "phi " << fmt("%.1e", rphi);
  return {v.pass(), v.pass() ? "worst relative gap: " + summary.str() : v.failure()};
}

GaussianMixturePrior benchmark_prior() {
  return GaussianMixturePrior({0.5, 0.5}, {{-1.0, 1.5}, {1.5, -1.0}}, {{0.15, 0.15}, {0.15, 0.15}});
}

Outcome analytic_score() {
  const auto sched = make_linear_schedule(1000, 1e-4, 0.02);
  const auto prior = benchmark_prior();
  Rng rng(404);
  Verdict v;
  double worst = 0.0;
  const double h = 1e-4;
  for (int k = 0; k < 100; ++k) {
    const int t = static_cast<int>(rng() % 1001);
    Vector x = standard_normal(rng, 2);
    for (auto& e : x) e *= 2.0;
    const Vector s = prior_score(prior, x, t, sched);
    for (int i = 0; i < 2; ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (prior.log_density(xp, t, sched) - prior.log_density(xm, t, sched)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - s[i]));
    }
  }
  v.expect(worst <= 1e-6, fmt("score vs finite differences: %.3g", worst));

  const std::size_t n = 4096;
  const ScoreFn score = [&](ConstSpan x, int t) { return prior_score(prior, x, t, sched); };
  const auto xs = reverse_sde_sample(score, sched, 2, n, 405);
  const Vector mean = prior.mean();
  const Vector var = prior.marginal_variance();
  double worst_z = 0.0;
  for (int i = 0; i < 2; ++i) {
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (const auto& x : xs) m1 += x[i] / n;
    for (const auto& x : xs) {
      const double d = x[i] - mean[i];
      m2 += d * d / n;
      m4 += d * d * d * d / n;
    }
    // Standard errors from the exact prior moments.
    double pm4 = 0.0;
    for (std::size_t k = 0; k < prior.num_components(); ++k) {
      const double dm = prior.means()[k][i] - mean[i];
      const double s2 = prior.variances()[k][i];
      pm4 += prior.weights()[k] * (dm * dm * dm * dm + 6.0 * dm * dm * s2 + 3.0 * s2 * s2);
    }
    const double z_mean = std::abs(m1 - mean[i]) / std::sqrt(var[i] / n);
    const double z_var = std::abs(m2 - var[i]) / std::sqrt((pm4 - var[i] * var[i]) / n);
    worst_z = std::max({worst_z, z_mean, z_var});
    v.expect(z_mean <= 3.0 && z_var <= 3.0, fmt("reverse SDE coordinate %g: mean z %.2f, variance z %.2f", i, z_mean, z_var));
  }
  return {v.pass(), v.pass() ? fmt("max score gap %.2g; reverse SDE moments within %.2f standard errors", worst, worst_z)
                             : v.failure()};
}

Outcome ppb_suite() {
  const auto sched = make_linear_schedule(1000, 1e-4, 0.02);
  Verdict v;
  v.expect(sigma_a(0.0, sched) == 1.0, "sigma_0 != 1");
  v.expect(sigma_a(1.0, sched) == 0.0, "sigma_1 != 0");
  double prev = 1.0;
  bool monotone = true;
  for (int i = 0; i <= 10000; ++i) {
    const double s = sigma_a(i / 10000.0, sched);
    monotone = monotone && s <= prev;
    prev = s;
  }
  v.expect(monotone, "sigma_a not monotone decreasing");

  PPBConfig cfg;
  cfg.h = 0.3;
  Rng rng(505);
  bool start_exact = true;
  bool end_exact = true;
  for (int i = 0; i < 200; ++i) {
    const Vector x0 = standard_normal(rng, 3);
    const Vector y = standard_normal(rng, 3);
    start_exact = start_exact && ppb_sample(y, x0, 0.0, cfg, sched, rng) == x0;
    Rng replay = rng;
    const Vector end = ppb_sample(y, x0, 1.0, cfg, sched, rng);
    const Vector z = standard_normal(replay, 3);
    for (int k = 0; k < 3; ++k) end_exact = end_exact && end[k] == y[k] + cfg.h * z[k];
  }
  v.expect(start_exact, "a=0 does not return x0 bit-exactly");
  v.expect(end_exact, "a=1 does not return y + h z");

  const MeanSe a = mean_se(100000, [&] { return sample_a(cfg, rng); });
  v.expect(std::abs(a.mean - 0.75) <= 0.01, fmt("Beta(3,1) mean %.4f", a.mean));
  return {v.pass(), v.pass() ? fmt("endpoints exact; Beta(3,1) mean %.4f", a.mean) : v.failure()};
}

Outcome operator_suite() {
  const std::vector<LinearOperator> ops{
      LinearOperator::identity(6),
      LinearOperator::gaussian_blur(6, 5, 2, 1.1),
      LinearOperator::avgpool_sr(6, 6, 3),
      LinearOperator::box_inpaint(5, 5, 1, 2, 3, 2),
      LinearOperator::box_mask(7, {6, 0, 3}),
      LinearOperator::grayscale(3, 5),
      LinearOperator::dense(DenseMatrix{2, 4, {1.0, -0.5, 0.25, 2.0, 0.0, 1.0, 1.0, -1.0}})};
  Rng rng(606);
  Verdict v;
  double worst = 0.0;
  for (const auto& op : ops) {
    for (int k = 0; k < 100; ++k) {
      const Vector x = standard_normal(rng, op.in_dim());
      const Vector y = standard_normal(rng, op.out_dim());
      const double gap = std::abs(dot(op.apply(x), y) - dot(x, op.adjoint(y))) /
                         std::sqrt(squared_norm(x) * squared_norm(y));
      worst = std::max(worst, gap);
      v.expect(gap <= 1e-10, op.name() + fmt(": adjoint gap %.3g", gap));
    }
  }
  double worst_w = 0.0;
  std::uniform_real_distribution<double> pos(0.05, 5.0);
  for (int k = 0; k < 100; ++k) {
    const auto& op = ops[k % ops.size()];
    const Vector x = standard_normal(rng, op.in_dim());
    Vector y(op.out_dim());
    for (auto& e : y) e = pos(rng);
    const Vector hx = op.apply(x);
    double direct = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) direct += (y[i] - hx[i]) * (1.0 / (2.0 * y[i])) * (y[i] - hx[i]);
    const double got = poisson_weighted_residual(op, x, y);
    worst_w = std::max(worst_w, std::abs(got - direct) / direct);
  }
  v.expect(worst_w <= 1e-12, fmt("Poisson weighting gap %.3g", worst_w));
  return {v.pass(), v.pass() ? fmt("max adjoint gap %.2g over 7 kinds; Poisson weighting gap %.2g", worst, worst_w)
                             : v.failure()};
}

// ---------------------------------------------------------------------------------------
// End-to-end benchmark: shared by criteria 7 to 9.

struct Benchmark {
  ExperimentConfig cfg;
  ExperimentResult dataset;
  EvalReport initial;
  double exact_residual = 0.0;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
};

Benchmark run_benchmark() {
  Benchmark b{load_experiment_config(std::filesystem::path(DAVI_SOURCE_DIR) / "configs/gmm2d.json"), {}, {}, 0.0,
              0.0, 0.0};
  const EvalSet heldout = make_heldout_set(b.cfg);
  const TrainState init = init_train_state(b.cfg.problem, b.cfg.network, b.cfg.train);
  b.initial = evaluate(init.phi, b.cfg.problem, heldout, b.cfg.eval);

  const auto start = Clock::now();
  b.dataset = run_experiment(b.cfg, std::nullopt);
  b.train_seconds = std::chrono::duration<double>(Clock::now() - start).count();

  // Residual of exact posterior samples on the same measurements.
  double total = 0.0;
  const std::size_t S = b.cfg.eval.samples_per_measurement;
  for (std::size_t m = 0; m < heldout.y.size(); ++m) {
    const auto post = true_posterior(b.cfg.problem.prior, b.cfg.problem.op, heldout.y[m].y, heldout.y[m].sigma_y);
    Rng rng(9000 + m);
    for (const auto& x : post.sample(S, rng)) {
      const Vector hx = b.cfg.problem.op.apply(x);
      for (std::size_t i = 0; i < hx.size(); ++i) total += (heldout.y[m].y[i] - hx[i]) * (heldout.y[m].y[i] - hx[i]);
    }
  }
  b.exact_residual = total / static_cast<double>(S * heldout.y.size());
  return b;
}

Outcome end_to_end(const Benchmark& b) {
  Verdict v;
  const auto& final_report = b.dataset.heldout;
  bool nfe_one = true;
  for (const auto& r : final_report.rows) nfe_one = nfe_one && r.nfe == 1.0;
  v.expect(nfe_one, "NFE per sample is not exactly 1");
  v.expect(b.cfg.train.K <= 5000, "more than 5000 training steps");
  v.expect(b.cfg.problem.sched.num_steps() == 200, "schedule is not 200 steps");
  const double swd0 = column_stats(b.initial, "swd").mean;
  const double swd1 = column_stats(final_report, "swd").mean;
  const double ratio = swd0 / swd1;
  v.expect(ratio >= 5.0, fmt("sliced-W1 %.4f -> %.4f: decrease %.2fx < 5x", swd0, swd1, ratio));
  const double res = column_stats(final_report, "residual").mean;
  v.expect(res <= 2.0 * b.exact_residual, fmt("residual %.4f > 2 x exact %.4f", res, b.exact_residual));
  v.expect(b.train_seconds < 600.0, fmt("runtime %.0f s", b.train_seconds));
  return {v.pass(), fmt("NFE 1; sliced-W1 %.4f -> %.4f (%.2fx)", swd0, swd1, ratio) +
                        fmt("; residual %.4f vs exact %.4f; %.0f s", res, b.exact_residual, b.train_seconds) +
                        (v.pass() ? "" : "; " + v.failure())};
}

Outcome amortization(const Benchmark& b) {
  Verdict v;
  std::ostringstream detail;
  for (const char* col : {"mean_err", "std_err", "swd", "residual"}) {
    const double held = column_stats(b.dataset.heldout, col).mean;
    const double seen = column_stats(b.dataset.training, col).mean;
    const double ratio = held / seen;
    v.expect(ratio <= 1.5, std::string(col) + fmt(": held-out %.4f vs training %.4f", held, seen));
    detail << (detail.tellp() > 0 ? "; " : "") << col << fmt(" %.2fx", ratio);
  }
  return {v.pass(), "held-out / training: " + detail.str() + (v.pass() ? "" : "; " + v.failure())};
}

Outcome davi_g(const Benchmark& b) {
  ExperimentConfig cfg = b.cfg;
  cfg.train.data_source = DataSource::davi_g;
  cfg.problem.dataset.clear();
  const ExperimentResult g = run_experiment(cfg, std::nullopt);
  const double eg = column_stats(g.heldout, "mean_err").mean;
  const double ed = column_stats(b.dataset.heldout, "mean_err").mean;
  const bool ok = eg <= 1.5 * ed;
  return {ok, fmt("posterior-mean error: prior-generated %.4f vs dataset %.4f (%.2fx)", eg, ed, eg / ed)};
}

// ---------------------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  ExperimentConfig cfg = load_experiment_config(std::filesystem::path(DAVI_SOURCE_DIR) / "configs/gmm2d.json");
  cfg.train.K = 200;
  cfg.train.checkpoint_every = 100;
  cfg.train.threads = 1;
  cfg.eval.record_wall_clock = false;
  const auto root = std::filesystem::temp_directory_path() / "davi_acceptance_determinism";
  std::filesystem::remove_all(root);
  run_experiment(cfg, root / "a");
  run_experiment(cfg, root / "b");
  Verdict v;
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    v.expect(slurp(entry.path()) == slurp(root / "b" / name), name.string() + " differs between runs");
    ++files;
  }

  // Resume from the midpoint checkpoint and compare with the uninterrupted run.
  LoadedCheckpoint mid = load_checkpoint(root / "a" / "checkpoint_100.json");
  continue_training(mid.state, 100, cfg.problem, cfg.train);
  const std::string resumed = checkpoint_to_json(mid.state, mid.sched).dump();
  const LoadedCheckpoint full = load_checkpoint(root / "a" / "checkpoint.json");
  v.expect(resumed == checkpoint_to_json(full.state, full.sched).dump(), "resumed run differs from uninterrupted run");
  const LoadedCheckpoint again = checkpoint_from_json(nlohmann::json::parse(slurp(root / "a" / "checkpoint.json")));
  v.expect(checkpoint_to_json(again.state, again.sched).dump() == checkpoint_to_json(full.state, full.sched).dump(),
           "checkpoint does not round-trip");
  std::filesystem::remove_all(root);
  return {v.pass(), v.pass() ? fmt("%g output files identical; resume from iteration 100 bit-exact", files)
                             : v.failure()};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& fn, double limit_s = 0.0) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (limit_s > 0.0 && secs >= limit_s) {
      o.pass = false;
      o.detail += fmt("; took %.1f s (limit %.0f s)", secs, limit_s);
    }
    if (!o.pass) ++failures;
    std::printf("%s  [%2d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "gradient oracle", gradient_oracle, 30.0);
  report(2, "surrogate identities", surrogate_identities, 10.0);
  report(3, "finite differences", finite_differences, 60.0);
  report(4, "analytic score", analytic_score);
  report(5, "bridge", ppb_suite);
  report(6, "operators", operator_suite);

  std::optional<Benchmark> bench;
  std::string bench_error;
  try {
    bench = run_benchmark();
  } catch (const std::exception& e) {
    bench_error = e.what();
  }
  const auto need_bench = [&](const std::function<Outcome(const Benchmark&)>& fn) {
    return [&, fn]() -> Outcome {
      if (!bench) return {false, "benchmark failed: " + bench_error};
      return fn(*bench);
    };
  };
  report(7, "end-to-end benchmark", need_bench(end_to_end));
  report(8, "held-out generalization", need_bench(amortization));
  report(9, "prior-generated training", need_bench(davi_g));
  report(10, "determinism", determinism);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
