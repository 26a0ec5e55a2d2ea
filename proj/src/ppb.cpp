// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/ppb.hpp"

#include <algorithm>

namespace davi {

std::string to_string(SigmaBarKind kind) {
  return kind == SigmaBarKind::monotone_increasing ? "monotone_increasing" : "constant";
}

SigmaBarKind sigma_bar_kind_from_string(const std::string& name) {
  if (name == "monotone_increasing") return SigmaBarKind::monotone_increasing;
  if (name == "constant") return SigmaBarKind::constant;
  throw ParameterError("unknown sigma_bar kind '" + name + "'");
}

std::string to_string(BridgeNoiseVariant variant) {
  return variant == BridgeNoiseVariant::scaled ? "scaled" : "brownian";
}

BridgeNoiseVariant bridge_variant_from_string(const std::string& name) {
  if (name == "scaled") return BridgeNoiseVariant::scaled;
  if (name == "brownian") return BridgeNoiseVariant::brownian;
  throw ParameterError("unknown bridge noise variant '" + name + "'");
}

void PPBConfig::validate() const {
  if (!(h >= 0.0)) throw ParameterError("ppb.h must be >= 0");
  if (!(beta_shape_a > 0.0 && beta_shape_b > 0.0)) {
    throw ParameterError("ppb beta shapes must be > 0");
  }
}

double sigma_a(double a, const NoiseSchedule& sched) {
  if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("sigma_a: a outside [0, 1]");
  const double total = sched.beta_cumsum(sched.num_steps());
  const double remaining = total - sched.beta_integral(a);
  return std::clamp(remaining / total, 0.0, 1.0);
}

double sigma_bar(double a, const NoiseSchedule& sched, SigmaBarKind kind) {
  if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("sigma_bar: a outside [0, 1]");
  if (kind == SigmaBarKind::constant) return 1.0;
  return 1.0 - sched.alpha_bar(sched.quantize(a));
}

double sample_a(const PPBConfig& cfg, Rng& rng) {
  cfg.validate();
  std::gamma_distribution<double> ga(cfg.beta_shape_a, 1.0);
  std::gamma_distribution<double> gb(cfg.beta_shape_b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return std::clamp(x / (x + y), 0.0, 1.0);
}

Vector ppb_sample(ConstSpan y_lifted, ConstSpan x0, double a, const PPBConfig& cfg,
                  const NoiseSchedule& sched, Rng& rng) {
  require_same_size(y_lifted.size(), x0.size(), "ppb_sample");
  if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("ppb_sample: a outside [0, 1]");
  const std::size_t n = x0.size();
  if (a == 0.0) return Vector(x0.begin(), x0.end());
  const Vector z = standard_normal(rng, n);
  Vector out(n);
  if (a == 1.0) {
    for (std::size_t i = 0; i < n; ++i) out[i] = y_lifted[i] + cfg.h * z[i];
    return out;
  }
  const double s = sigma_a(a, sched);
  double noise = cfg.h * sigma_bar(a, sched, cfg.sigma_bar_kind);
  if (cfg.noise_variant == BridgeNoiseVariant::brownian) noise += s * (1.0 - s);
  for (std::size_t i = 0; i < n; ++i) out[i] = (1.0 - s) * y_lifted[i] + s * x0[i] + noise * z[i];
  return out;
}

}  // namespace davi
