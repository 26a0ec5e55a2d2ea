// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/optimizer.hpp"

#include <cmath>

namespace davi {

void adaptive_update(Vector& params, ConstSpan grads, AdamMoments& moments, double lr,
                     const AdamHyper& hyper) {
  require_same_size(params.size(), grads.size(), "adaptive_update");
  require_same_size(moments.m.size(), params.size(), "adaptive_update: first moment");
  require_same_size(moments.v.size(), params.size(), "adaptive_update: second moment");
  ++moments.step;
  const double step = static_cast<double>(moments.step);
  const double bc1 = 1.0 - std::pow(hyper.beta1, step);
  const double bc2 = 1.0 - std::pow(hyper.beta2, step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    moments.m[i] = hyper.beta1 * moments.m[i] + (1.0 - hyper.beta1) * grads[i];
    moments.v[i] = hyper.beta2 * moments.v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
    const double m_hat = moments.m[i] / bc1;
    const double v_hat = moments.v[i] / bc2;
    params[i] -= lr * (m_hat / (std::sqrt(v_hat) + hyper.eps) + hyper.weight_decay * params[i]);
  }
}

double clip_global_norm(Vector& grads, double max_norm) {
  const double norm = std::sqrt(squared_norm(grads));
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace davi
