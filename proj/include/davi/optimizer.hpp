// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "davi/common.hpp"

namespace davi {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled (AdamW) weight decay; 0 gives plain Adam.
  double weight_decay = 0.0;
};

struct AdamMoments {
  Vector m;
  Vector v;
  std::uint64_t step = 0;

  static AdamMoments zeros(std::size_t n) { return {Vector(n, 0.0), Vector(n, 0.0), 0}; }
};

/// One bias-corrected adaptive-moment step, in place.
void adaptive_update(Vector& params, ConstSpan grads, AdamMoments& moments, double lr,
                     const AdamHyper& hyper);

/// Rescales `grads` so its Euclidean norm is at most `max_norm` (no-op when max_norm <= 0).
/// Returns the norm before clipping.
double clip_global_norm(Vector& grads, double max_norm);

}  // namespace davi
