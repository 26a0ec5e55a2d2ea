// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

// davi: train, evaluate and check amortized posterior samplers.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "davi/experiment.hpp"
#include "davi/self_check.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
};

davi::ExperimentConfig load_config(const std::string& path, const Overrides& o) {
  std::ifstream in(path);
  if (!in) throw davi::IoError("cannot open config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw davi::ConfigError({path + ": " + e.what()});
  }
  if (o.seed) doc["train"]["rng_seed"] = *o.seed;
  if (o.out) doc["output_dir"] = *o.out;
  if (o.threads) doc["train"]["threads"] = *o.threads;
  return davi::parse_experiment_config(doc, std::filesystem::path(path).parent_path());
}

/// Report-level validations: every metric finite and exactly one network evaluation per sample.
bool validate(const davi::EvalReport& report, std::ostream& out) {
  bool ok = true;
  for (const auto& r : report.rows) {
    for (const auto& col : davi::report_columns()) {
      const double v = davi::column_value(r, col);
      if (col == "psnr" && std::isinf(v) && v > 0) continue;
      if (!std::isfinite(v)) {
        out << "measurement " << r.meas_id << ": " << col << " is not finite\n";
        ok = false;
      }
    }
    if (r.nfe != 1.0) {
      out << "measurement " << r.meas_id << ": nfe = " << r.nfe << "\n";
      ok = false;
    }
  }
  return ok;
}

void print_summary(const davi::EvalReport& report) {
  std::cout << "measurements: " << report.rows.size() << "\n";
  for (const auto& col : davi::report_columns()) {
    if (col == "meas_id") continue;
    const auto s = davi::column_stats(report, col);
    std::cout << "  " << col << ": " << s.mean << " +- " << s.std << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Amortized posterior sampling with diffusion priors"};
  app.require_subcommand(1);

  Overrides o;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 1;
  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "training RNG seed");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--threads", threads, "worker threads for batch evaluation")->check(CLI::PositiveNumber);
  };
  auto collect = [&](CLI::App* cmd) {
    if (cmd->count("--seed")) o.seed = seed;
    if (cmd->count("--out")) o.out = out;
    if (cmd->count("--threads")) o.threads = threads;
  };

  std::string config_path;
  std::string checkpoint_path;
  std::string report_dir;

  auto* train = app.add_subcommand("train", "train and evaluate on held-out measurements");
  train->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  add_overrides(train);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on held-out measurements");
  eval->add_option("checkpoint", checkpoint_path, "checkpoint (JSON)")->required()->check(CLI::ExistingFile);
  eval->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  add_overrides(eval);

  auto* check = app.add_subcommand("check", "run the oracle and identity checks");
  add_overrides(check);

  auto* report = app.add_subcommand("report", "summarize a report directory");
  report->add_option("dir", report_dir, "directory containing report.csv")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      collect(train);
      const auto cfg = load_config(config_path, o);
      const auto result = davi::run_experiment(cfg, cfg.output_dir);
      std::cout << "trained " << result.state.iteration << " iterations; outputs in " << cfg.output_dir.string() << "\n";
      print_summary(result.heldout);
      return validate(result.heldout, std::cerr) ? 0 : 1;
    }
    if (*eval) {
      collect(eval);
      const auto cfg = load_config(config_path, o);
      const auto rep = davi::evaluate_checkpoint(checkpoint_path, cfg);
      davi::emit_report(rep, cfg.source, cfg.output_dir);
      print_summary(rep);
      return validate(rep, std::cerr) ? 0 : 1;
    }
    if (*check) {
      collect(check);
      return davi::run_self_checks(std::cout, o.seed.value_or(20260101)) ? 0 : 1;
    }
    if (*report) {
      const auto rep = davi::read_report_csv(std::filesystem::path(report_dir) / "report.csv");
      print_summary(rep);
      return validate(rep, std::cerr) ? 0 : 1;
    }
  } catch (const davi::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
