// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace davi {

namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

double psnr(ConstSpan x_hat, ConstSpan x0, double peak) {
  require_same_size(x_hat.size(), x0.size(), "psnr");
  if (!(peak > 0.0)) throw ParameterError("psnr: peak must be > 0");
  double mse = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) mse += (x_hat[i] - x0[i]) * (x_hat[i] - x0[i]);
  mse /= static_cast<double>(x0.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double sliced_w1(const std::vector<Vector>& a, const std::vector<Vector>& b,
                 std::size_t num_projections, std::uint64_t projection_seed) {
  if (a.size() != b.size() || a.empty()) {
    throw ParameterError("sliced_w1: sample sets must be nonempty and equally sized");
  }
  const std::size_t d = a.front().size();
  Rng rng(projection_seed);
  double total = 0.0;
  Vector pa(a.size());
  Vector pb(b.size());
  for (std::size_t p = 0; p < num_projections; ++p) {
    Vector dir = standard_normal(rng, d);
    const double norm = std::sqrt(squared_norm(dir));
    for (auto& v : dir) v /= norm;
    for (std::size_t i = 0; i < a.size(); ++i) {
      pa[i] = dot(a[i], dir);
      pb[i] = dot(b[i], dir);
    }
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    double w = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) w += std::abs(pa[i] - pb[i]);
    total += w / static_cast<double>(pa.size());
  }
  return total / static_cast<double>(num_projections);
}

PosteriorDistance posterior_distance(const std::vector<Vector>& samples,
                                     const GaussianPosterior& posterior, std::uint64_t rng_seed,
                                     std::size_t num_projections) {
  if (samples.size() < 2) throw ParameterError("posterior_distance: need at least 2 samples");
  const std::size_t d = posterior.dim();
  const double n = static_cast<double>(samples.size());
  Vector mean(d, 0.0);
  for (const auto& s : samples) {
    require_same_size(s.size(), d, "posterior_distance");
    for (std::size_t i = 0; i < d; ++i) mean[i] += s[i] / n;
  }
  Vector var(d, 0.0);
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < d; ++i) var[i] += (s[i] - mean[i]) * (s[i] - mean[i]) / n;
  }
  const Vector post_mean = posterior.mean();
  const Vector post_var = posterior.variance();
  PosteriorDistance out;
  double me = 0.0;
  double se = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    me += (mean[i] - post_mean[i]) * (mean[i] - post_mean[i]);
    const double ds = std::sqrt(var[i]) - std::sqrt(post_var[i]);
    se += ds * ds;
  }
  out.mean_err = std::sqrt(me);
  out.std_err = std::sqrt(se);
  Rng rng(rng_seed);
  const std::vector<Vector> reference = posterior.sample(samples.size(), rng);
  out.swd = sliced_w1(samples, reference, num_projections, rng_seed ^ 0x5eedULL);
  return out;
}

double column_value(const EvalRow& row, const std::string& column) {
  if (column == "meas_id") return static_cast<double>(row.meas_id);
  if (column == "mean_err") return row.mean_err;
  if (column == "std_err") return row.std_err;
  if (column == "swd") return row.swd;
  if (column == "psnr") return row.psnr;
  if (column == "residual") return row.residual;
  if (column == "nfe") return row.nfe;
  if (column == "wall_ms") return row.wall_ms;
  throw ParameterError("unknown report column '" + column + "'");
}

ColumnStats column_stats(const EvalReport& report, const std::string& column) {
  ColumnStats s;
  if (report.rows.empty()) return s;
  const double n = static_cast<double>(report.rows.size());
  for (const auto& r : report.rows) s.mean += column_value(r, column);
  s.mean /= n;
  if (std::isinf(s.mean)) return s;
  for (const auto& r : report.rows) {
    const double dv = column_value(r, column) - s.mean;
    s.std += dv * dv;
  }
  s.std = std::sqrt(s.std / n);
  return s;
}

nlohmann::json report_summary(const EvalReport& report) {
  nlohmann::json j;
  j["num_measurements"] = report.rows.size();
  for (const auto& col : report_columns()) {
    if (col == "meas_id") continue;
    const ColumnStats s = column_stats(report, col);
    j[col] = {{"mean", json_number(s.mean)}, {"std", json_number(s.std)}};
  }
  return j;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  const auto& cols = report_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const auto& r : report.rows) {
    out << r.meas_id;
    for (std::size_t c = 1; c < cols.size(); ++c) out << ',' << format_double(column_value(r, cols[c]));
    out << '\n';
  }
  return out.str();
}

void emit_report(const EvalReport& report, const nlohmann::json& config,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "report.csv", report_csv(report));
  write_file(dir / "config.json", config.dump(2) + "\n");
  write_file(dir / "summary.json", report_summary(report).dump(2) + "\n");
}

EvalReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::string expected;
  for (const auto& c : report_columns()) expected += (expected.empty() ? "" : ",") + c;
  if (line != expected) throw IoError(path.string() + ": unexpected header");
  EvalReport report;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != report_columns().size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    try {
      EvalRow r;
      r.meas_id = std::stoul(cells[0]);
      r.mean_err = parse_double(cells[1]);
      r.std_err = parse_double(cells[2]);
      r.swd = parse_double(cells[3]);
      r.psnr = parse_double(cells[4]);
      r.residual = parse_double(cells[5]);
      r.nfe = parse_double(cells[6]);
      r.wall_ms = parse_double(cells[7]);
      report.rows.push_back(r);
    } catch (const std::logic_error&) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return report;
}

}  // namespace davi
