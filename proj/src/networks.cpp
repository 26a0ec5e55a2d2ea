// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/networks.hpp"

#include <cmath>

namespace davi {

namespace {

double activate(Activation act, double x) {
  switch (act) {
    case Activation::tanh: return std::tanh(x);
    case Activation::silu: return x / (1.0 + std::exp(-x));
  }
  return x;
}

double activate_grad(Activation act, double x) {
  switch (act) {
    case Activation::tanh: {
      const double th = std::tanh(x);
      return 1.0 - th * th;
    }
    case Activation::silu: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 + x * (1.0 - s));
    }
  }
  return 1.0;
}

Vector concat(ConstSpan a, ConstSpan b) {
  Vector out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

std::string to_string(Activation act) { return act == Activation::tanh ? "tanh" : "silu"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "silu") return Activation::silu;
  throw ParameterError("unknown activation '" + name + "' (smooth activations only)");
}

Vector sinusoidal_embedding(double a, std::size_t dim) {
  if (dim % 2 != 0) throw ParameterError("sinusoidal_embedding: dim must be even");
  const std::size_t half = dim / 2;
  const double position = 1000.0 * a;
  Vector out(dim);
  for (std::size_t k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half));
    out[k] = std::sin(position * freq);
    out[half + k] = std::cos(position * freq);
  }
  return out;
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation act)
    : sizes_(std::move(layer_sizes)), act_(act) {
  if (sizes_.size() < 2) throw ParameterError("Mlp: need input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw ParameterError("Mlp: zero-width layer");
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

void Mlp::initialize(Rng& rng, bool zero_output) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l] + sizes_[l + 1]));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    const std::size_t w0 = weight_offset(l);
    for (std::size_t i = 0; i < sizes_[l + 1] * sizes_[l]; ++i) params_[w0 + i] = uniform(rng);
    const std::size_t b0 = bias_offset(l);
    for (std::size_t i = 0; i < sizes_[l + 1]; ++i) params_[b0 + i] = 0.0;
  }
  if (zero_output) zero_output_layer();
}

void Mlp::zero_output_layer() {
  const std::size_t last = sizes_.size() - 2;
  for (std::size_t i = weight_offset(last); i < params_.size(); ++i) params_[i] = 0.0;
}

Vector Mlp::forward(ConstSpan input, MlpTrace* trace) const {
  require_same_size(input.size(), in_dim(), "Mlp::forward");
  if (trace != nullptr) {
    trace->inputs.clear();
    trace->pre.clear();
  }
  Vector x(input.begin(), input.end());
  const std::size_t num_layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    Vector z(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
      z[o] = s;
    }
    if (trace != nullptr) trace->inputs.push_back(x);
    if (l + 1 == num_layers) return z;
    if (trace != nullptr) trace->pre.push_back(z);
    for (auto& v : z) v = activate(act_, v);
    x = std::move(z);
  }
  return x;
}

MlpGradient Mlp::backward(const MlpTrace& trace, ConstSpan upstream) const {
  const std::size_t num_layers = sizes_.size() - 1;
  if (trace.empty() || trace.inputs.size() != num_layers) {
    throw StateError("Mlp::backward: no recorded forward pass");
  }
  require_same_size(upstream.size(), out_dim(), "Mlp::backward");
  MlpGradient grad{Vector(params_.size(), 0.0), {}};
  Vector g(upstream.begin(), upstream.end());
  for (std::size_t l = num_layers; l-- > 0;) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const Vector& x = trace.inputs[l];
    const double* w = params_.data() + weight_offset(l);
    double* dw = grad.params.data() + weight_offset(l);
    double* db = grad.params.data() + bias_offset(l);
    Vector g_in(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double go = g[o];
      db[o] += go;
      const double* row = w + o * in;
      double* drow = dw + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        drow[i] += go * x[i];
        g_in[i] += row[i] * go;
      }
    }
    if (l > 0) {
      const Vector& pre = trace.pre[l - 1];
      for (std::size_t i = 0; i < in; ++i) g_in[i] *= activate_grad(act_, pre[i]);
    }
    g = std::move(g_in);
  }
  grad.input = std::move(g);
  return grad;
}

namespace {

std::vector<std::size_t> layer_sizes(std::size_t in, const NetworkShape& shape, std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), shape.hidden.begin(), shape.hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

AmortizedPosterior::AmortizedPosterior(std::size_t signal_dim, const NetworkShape& shape, double h)
    : signal_dim_(signal_dim),
      embed_dim_(shape.embed_dim),
      net_(layer_sizes(signal_dim + shape.embed_dim, shape, signal_dim), shape.activation) {
  set_h(h);
}

AmortizedPosterior::AmortizedPosterior(std::size_t signal_dim, std::size_t embed_dim, double h,
                                       Mlp net)
    : signal_dim_(signal_dim), embed_dim_(embed_dim), net_(std::move(net)) {
  if (net_.in_dim() != signal_dim + embed_dim || net_.out_dim() != signal_dim) {
    throw DimensionError("AmortizedPosterior: network shape does not match signal/embed dims");
  }
  set_h(h);
}

AmortizedPosterior::AmortizedPosterior(const AmortizedPosterior& other)
    : signal_dim_(other.signal_dim_),
      embed_dim_(other.embed_dim_),
      h_(other.h_),
      net_(other.net_),
      nfe_(other.nfe_.load()) {}

AmortizedPosterior& AmortizedPosterior::operator=(const AmortizedPosterior& other) {
  signal_dim_ = other.signal_dim_;
  embed_dim_ = other.embed_dim_;
  h_ = other.h_;
  net_ = other.net_;
  nfe_.store(other.nfe_.load());
  return *this;
}

void AmortizedPosterior::set_h(double h) {
  if (!(h >= 0.0)) throw ParameterError("AmortizedPosterior: h must be >= 0");
  h_ = h;
}

Vector AmortizedPosterior::forward(ConstSpan y_a, double a, const NoiseSchedule& sched,
                                   Trace* trace) const {
  require_same_size(y_a.size(), signal_dim_, "implicit_forward");
  if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("implicit_forward: a outside [0, 1]");
  if (!all_finite(y_a)) throw NumericError("implicit_forward: non-finite input");
  const int step = sched.quantize(a);
  const double gate = sched.alpha_bar(step);
  const double a_grid = static_cast<double>(step) / sched.num_steps();
  const Vector input = concat(y_a, sinusoidal_embedding(a_grid, embed_dim_));
  const Vector residual = net_.forward(input, trace != nullptr ? &trace->mlp : nullptr);
  ++nfe_;
  if (trace != nullptr) trace->gate = gate;
  Vector out(y_a.begin(), y_a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += gate * residual[i];
  return out;
}

MlpGradient AmortizedPosterior::backward(const Trace& trace, ConstSpan upstream) const {
  require_same_size(upstream.size(), signal_dim_, "AmortizedPosterior::backward");
  Vector scaled(upstream.begin(), upstream.end());
  for (auto& v : scaled) v *= trace.gate;
  MlpGradient g = net_.backward(trace.mlp, scaled);
  Vector input(signal_dim_);
  for (std::size_t i = 0; i < signal_dim_; ++i) input[i] = upstream[i] + g.input[i];
  g.input = std::move(input);
  return g;
}

ImplicitScoreNet::ImplicitScoreNet(std::size_t signal_dim, const NetworkShape& shape)
    : signal_dim_(signal_dim),
      embed_dim_(shape.embed_dim),
      net_(layer_sizes(signal_dim + shape.embed_dim, shape, signal_dim), shape.activation) {}

ImplicitScoreNet::ImplicitScoreNet(std::size_t signal_dim, std::size_t embed_dim, Mlp net)
    : signal_dim_(signal_dim), embed_dim_(embed_dim), net_(std::move(net)) {
  if (net_.in_dim() != signal_dim + embed_dim || net_.out_dim() != signal_dim) {
    throw DimensionError("ImplicitScoreNet: network shape does not match signal/embed dims");
  }
}

Vector ImplicitScoreNet::predict_noise(ConstSpan x_t, int t, const NoiseSchedule& sched,
                                       MlpTrace* trace) const {
  require_same_size(x_t.size(), signal_dim_, "ImplicitScoreNet");
  if (t < 1 || t > sched.num_steps()) {
    throw DomainError("ImplicitScoreNet: t=" + std::to_string(t) + " outside [1, T]");
  }
  const double u = static_cast<double>(t) / sched.num_steps();
  return net_.forward(concat(x_t, sinusoidal_embedding(u, embed_dim_)), trace);
}

Vector ImplicitScoreNet::score(ConstSpan x_t, int t, const NoiseSchedule& sched) const {
  Vector eps = predict_noise(x_t, t, sched);
  const double scale = -1.0 / std::sqrt(1.0 - sched.alpha_bar(t));
  for (auto& v : eps) v *= scale;
  return eps;
}

Vector implicit_forward(const AmortizedPosterior& net, ConstSpan y_a, double a,
                        const NoiseSchedule& sched) {
  return net.forward(y_a, a, sched);
}

Vector implicit_sample(const AmortizedPosterior& net, const Measurement& y, const LinearOperator& op,
                       const NoiseSchedule& sched, Rng& rng) {
  Vector input = op.lift(y.y);
  if (net.h() > 0.0) {
    const Vector z = standard_normal(rng, input.size());
    for (std::size_t i = 0; i < input.size(); ++i) input[i] += net.h() * z[i];
  }
  return net.forward(input, 1.0, sched);
}

Vector implicit_sample(const AmortizedPosterior& net, const Measurement& y, const LinearOperator& op,
                       const NoiseSchedule& sched, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return implicit_sample(net, y, op, sched, rng);
}

Vector score_net_eval(const ImplicitScoreNet& net, ConstSpan x_t, int t, const NoiseSchedule& sched) {
  return net.score(x_t, t, sched);
}

}  // namespace davi
