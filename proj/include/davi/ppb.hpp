// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "davi/common.hpp"
#include "davi/diffusion.hpp"

namespace davi {

enum class SigmaBarKind { monotone_increasing, constant };
/// scaled: noise scale h * sigma_bar_a. brownian: adds sigma_a (1 - sigma_a) for 0 < a < 1.
enum class BridgeNoiseVariant { scaled, brownian };

std::string to_string(SigmaBarKind kind);
SigmaBarKind sigma_bar_kind_from_string(const std::string& name);
std::string to_string(BridgeNoiseVariant variant);
BridgeNoiseVariant bridge_variant_from_string(const std::string& name);

/// Perturbed posterior bridge settings.
struct PPBConfig {
  double h = 0.1;
  SigmaBarKind sigma_bar_kind = SigmaBarKind::monotone_increasing;
  double beta_shape_a = 3.0;
  double beta_shape_b = 1.0;
  BridgeNoiseVariant noise_variant = BridgeNoiseVariant::scaled;

  void validate() const;
};

/// Fraction of the total beta mass remaining after a: integral_a^1 beta / integral_0^1 beta.
double sigma_a(double a, const NoiseSchedule& sched);

double sigma_bar(double a, const NoiseSchedule& sched, SigmaBarKind kind);

/// a ~ Beta(shape_a, shape_b).
double sample_a(const PPBConfig& cfg, Rng& rng);

/// Intermediate measurement y_a between x0 (a = 0) and y_lifted (a = 1).
Vector ppb_sample(ConstSpan y_lifted, ConstSpan x0, double a, const PPBConfig& cfg,
                  const NoiseSchedule& sched, Rng& rng);

}  // namespace davi
