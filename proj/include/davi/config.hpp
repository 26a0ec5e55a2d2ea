// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "davi/trainer.hpp"

namespace davi {

/// Raised when a config fails validation; `errors` lists every violated key.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct EvalSpec {
  std::size_t num_measurements = 20;
  std::size_t samples_per_measurement = 256;
  std::uint64_t seed = 1000003;
  /// PSNR peak; defaults to the prior's dynamic range.
  std::optional<double> psnr_peak;
  std::size_t swd_projections = 64;
  /// When false, wall-clock columns are written as 0 so reports are byte-reproducible.
  bool record_wall_clock = true;
  std::vector<std::string> metrics{"mean_err", "std_err", "swd", "psnr", "residual", "nfe", "wall_ms"};
};

struct ScheduleSpec {
  int num_steps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;
};

struct ExperimentConfig {
  Problem problem;
  ScheduleSpec schedule;
  std::size_t dataset_size = 4096;
  std::uint64_t dataset_seed = 7;
  NetworkShape network;
  TrainConfig train;
  EvalSpec eval;
  std::filesystem::path output_dir = "out";
  /// The document as read, echoed into the output directory.
  nlohmann::json source;
};

/// Parses and validates a config document. Relative CSV paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         const std::filesystem::path& base_dir = ".");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

GaussianMixturePrior parse_prior(const nlohmann::json& j, const std::filesystem::path& base_dir);
LinearOperator parse_operator(const nlohmann::json& j, const std::filesystem::path& base_dir);

}  // namespace davi
