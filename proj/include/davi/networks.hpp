// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <string>

#include "davi/common.hpp"
#include "davi/diffusion.hpp"
#include "davi/operators.hpp"

namespace davi {

enum class Activation { tanh, silu };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

/// Sinusoidal positional features of a scalar in [0, 1] (position scaled by 1000,
/// frequencies geometric from 1 down to 1/10000). `dim` must be even.
Vector sinusoidal_embedding(double a, std::size_t dim);

/// Recorded forward pass, consumed by Mlp::backward.
struct MlpTrace {
  std::vector<Vector> inputs;  // input to each layer
  std::vector<Vector> pre;     // pre-activations of each hidden layer
  bool empty() const { return inputs.empty(); }
};

struct MlpGradient {
  Vector params;
  Vector input;
};

/// Fully connected network with smooth hidden activations and a linear output layer.
/// Parameters live in one flat buffer: for each layer, W (out x in, row-major) then b.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> layer_sizes, Activation act);

  /// Glorot-uniform weights, zero biases. The output layer is zeroed when
  /// `zero_output` is set.
  void initialize(Rng& rng, bool zero_output);

  Vector forward(ConstSpan input, MlpTrace* trace = nullptr) const;
  /// Reverse-mode derivatives of <upstream, f(input)> for the recorded pass.
  MlpGradient backward(const MlpTrace& trace, ConstSpan upstream) const;

  std::size_t in_dim() const { return sizes_.front(); }
  std::size_t out_dim() const { return sizes_.back(); }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  Activation activation() const { return act_; }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }
  void zero_output_layer();

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer + 1] * sizes_[layer];
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  Activation act_ = Activation::tanh;
  Vector params_;
};

/// Architecture knobs shared by both networks.
struct NetworkShape {
  std::vector<std::size_t> hidden{64, 64};
  Activation activation = Activation::silu;
  std::size_t embed_dim = 16;
};

/// Implicit posterior map: x0_hat = y_a + ab_a * MLP([y_a, embed(a)]).
class AmortizedPosterior {
 public:
  AmortizedPosterior() = default;
  AmortizedPosterior(std::size_t signal_dim, const NetworkShape& shape, double h);
  /// Rebuilds from stored parts; `net` must map signal_dim + embed_dim -> signal_dim.
  AmortizedPosterior(std::size_t signal_dim, std::size_t embed_dim, double h, Mlp net);
  AmortizedPosterior(const AmortizedPosterior& other);
  AmortizedPosterior& operator=(const AmortizedPosterior& other);

  struct Trace {
    MlpTrace mlp;
    double gate = 0.0;
  };

  Vector forward(ConstSpan y_a, double a, const NoiseSchedule& sched, Trace* trace = nullptr) const;
  /// Gradient w.r.t. parameters (and lifted input) of <upstream, x0_hat>.
  MlpGradient backward(const Trace& trace, ConstSpan upstream) const;

  std::size_t signal_dim() const { return signal_dim_; }
  std::size_t embed_dim() const { return embed_dim_; }
  double h() const { return h_; }
  void set_h(double h);

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  /// Network evaluations since construction (or the last reset).
  std::uint64_t nfe() const { return nfe_.load(); }
  void reset_nfe() { nfe_.store(0); }

 private:
  std::size_t signal_dim_ = 0;
  std::size_t embed_dim_ = 0;
  double h_ = 0.0;
  Mlp net_;
  mutable std::atomic<std::uint64_t> nfe_{0};
};

/// Noise-prediction network eps_psi(x_t, embed(t / T)). It sees no measurement, so it
/// learns the score of q aggregated over measurements.
class ImplicitScoreNet {
 public:
  ImplicitScoreNet() = default;
  ImplicitScoreNet(std::size_t signal_dim, const NetworkShape& shape);
  ImplicitScoreNet(std::size_t signal_dim, std::size_t embed_dim, Mlp net);

  /// Raw noise prediction; `trace` records the pass for backward.
  Vector predict_noise(ConstSpan x_t, int t, const NoiseSchedule& sched,
                       MlpTrace* trace = nullptr) const;
  /// Score form -eps_psi / sqrt(1 - ab_t).
  Vector score(ConstSpan x_t, int t, const NoiseSchedule& sched) const;

  std::size_t signal_dim() const { return signal_dim_; }
  std::size_t embed_dim() const { return embed_dim_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  std::size_t signal_dim_ = 0;
  std::size_t embed_dim_ = 0;
  Mlp net_;
};

Vector implicit_forward(const AmortizedPosterior& net, ConstSpan y_a, double a,
                        const NoiseSchedule& sched);

/// Single-step inference: lift y, add h z, evaluate once at a = 1.
Vector implicit_sample(const AmortizedPosterior& net, const Measurement& y, const LinearOperator& op,
                       const NoiseSchedule& sched, Rng& rng);
Vector implicit_sample(const AmortizedPosterior& net, const Measurement& y, const LinearOperator& op,
                       const NoiseSchedule& sched, std::uint64_t rng_seed);

Vector score_net_eval(const ImplicitScoreNet& net, ConstSpan x_t, int t, const NoiseSchedule& sched);

}  // namespace davi
