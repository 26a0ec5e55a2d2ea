// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "davi/common.hpp"
#include "davi/prior.hpp"

namespace davi {

/// 10 log10(peak^2 / MSE) in dB; +inf when the signals coincide.
double psnr(ConstSpan x_hat, ConstSpan x0, double peak);

struct PosteriorDistance {
  double mean_err = 0.0;
  double std_err = 0.0;
  double swd = 0.0;
};

/// Sliced Wasserstein-1 between two equally sized sample sets along `num_projections`
/// random unit directions drawn from `projection_seed`.
double sliced_w1(const std::vector<Vector>& a, const std::vector<Vector>& b,
                 std::size_t num_projections, std::uint64_t projection_seed);

/// Distance of a sample set to the exact posterior. The reference set has as many
/// samples as `samples` and is drawn from `rng_seed`.
PosteriorDistance posterior_distance(const std::vector<Vector>& samples,
                                     const GaussianPosterior& posterior, std::uint64_t rng_seed,
                                     std::size_t num_projections = 64);

struct EvalRow {
  std::size_t meas_id = 0;
  double mean_err = 0.0;
  double std_err = 0.0;
  double swd = 0.0;
  /// PSNR of the sample-mean restoration.
  double psnr = 0.0;
  /// Mean over samples of ||y - H x_hat||^2.
  double residual = 0.0;
  double nfe = 0.0;
  double wall_ms = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{"meas_id", "mean_err", "std_err", "swd",
                                             "psnr",    "residual", "nfe",     "wall_ms"};
  return cols;
}

/// Column accessor by name (excluding meas_id).
double column_value(const EvalRow& row, const std::string& column);

struct ColumnStats {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population std of one column; an empty report yields zeros.
ColumnStats column_stats(const EvalReport& report, const std::string& column);

nlohmann::json report_summary(const EvalReport& report);

std::string report_csv(const EvalReport& report);

/// Writes report.csv, config.json and summary.json into `dir`.
void emit_report(const EvalReport& report, const nlohmann::json& config,
                 const std::filesystem::path& dir);

/// Parses a report.csv written by emit_report.
EvalReport read_report_csv(const std::filesystem::path& path);

}  // namespace davi
