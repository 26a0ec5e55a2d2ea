// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#include "davi/operators.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace davi {

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::identity: return "identity";
    case OperatorKind::gaussian_blur: return "gaussian_blur";
    case OperatorKind::avgpool_sr: return "avgpool_sr";
    case OperatorKind::box_mask: return "box_mask";
    case OperatorKind::grayscale: return "grayscale";
    case OperatorKind::dense: return "dense";
  }
  return "unknown";
}

OperatorKind operator_kind_from_string(const std::string& name) {
  for (auto k : {OperatorKind::identity, OperatorKind::gaussian_blur, OperatorKind::avgpool_sr,
                 OperatorKind::box_mask, OperatorKind::grayscale, OperatorKind::dense}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterError("unknown operator kind '" + name + "'");
}

std::string to_string(NoiseKind kind) {
  return kind == NoiseKind::gaussian ? "gaussian" : "poisson";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "poisson") return NoiseKind::poisson;
  throw ParameterError("unknown noise kind '" + name + "'");
}

DenseMatrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix CSV " + path.string());
  DenseMatrix m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        m.data.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path.string() + ": bad number '" + cell + "' on row " +
                      std::to_string(m.rows + 1));
      }
      ++cols;
    }
    if (m.rows == 0) m.cols = cols;
    if (cols != m.cols) throw IoError(path.string() + ": ragged row " + std::to_string(m.rows + 1));
    ++m.rows;
  }
  if (m.rows == 0) throw IoError(path.string() + ": empty matrix");
  return m;
}

LinearOperator::LinearOperator(OperatorKind kind, std::size_t in_dim, std::size_t out_dim,
                               std::string name)
    : kind_(kind), in_dim_(in_dim), out_dim_(out_dim), name_(std::move(name)) {
  if (in_dim == 0 || out_dim == 0) throw ParameterError("operator dimensions must be positive");
}

LinearOperator LinearOperator::identity(std::size_t dim) {
  return LinearOperator(OperatorKind::identity, dim, dim, "identity");
}

LinearOperator LinearOperator::gaussian_blur(std::size_t height, std::size_t width, int radius,
                                             double stddev) {
  if (radius < 0 || !(stddev > 0.0)) throw ParameterError("gaussian_blur: need radius >= 0, std > 0");
  LinearOperator op(OperatorKind::gaussian_blur, height * width, height * width, "gaussian_blur");
  op.height_ = height;
  op.width_ = width;
  op.radius_ = radius;
  const int side = 2 * radius + 1;
  op.kernel_.resize(static_cast<std::size_t>(side * side));
  double total = 0.0;
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      const double w = std::exp(-(dr * dr + dc * dc) / (2.0 * stddev * stddev));
      op.kernel_[static_cast<std::size_t>((dr + radius) * side + (dc + radius))] = w;
      total += w;
    }
  }
  for (auto& w : op.kernel_) w /= total;
  return op;
}

LinearOperator LinearOperator::avgpool_sr(std::size_t height, std::size_t width,
                                          std::size_t factor) {
  const std::size_t bh = height == 1 ? 1 : factor;
  const std::size_t bw = factor;
  if (factor == 0 || height % bh != 0 || width % bw != 0) {
    throw ParameterError("avgpool_sr: factor must divide the image dimensions");
  }
  LinearOperator op(OperatorKind::avgpool_sr, height * width, (height / bh) * (width / bw),
                    "avgpool_sr");
  op.height_ = height;
  op.width_ = width;
  op.block_h_ = bh;
  op.block_w_ = bw;
  return op;
}

LinearOperator LinearOperator::box_mask(std::size_t dim, std::vector<std::size_t> kept) {
  for (auto k : kept) {
    if (k >= dim) throw ParameterError("box_mask: kept index out of range");
  }
  LinearOperator op(OperatorKind::box_mask, dim, kept.size(), "box_mask");
  op.kept_ = std::move(kept);
  return op;
}

LinearOperator LinearOperator::box_inpaint(std::size_t height, std::size_t width,
                                           std::size_t row0, std::size_t col0, std::size_t box_h,
                                           std::size_t box_w) {
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const bool inside = r >= row0 && r < row0 + box_h && c >= col0 && c < col0 + box_w;
      if (!inside) kept.push_back(r * width + c);
    }
  }
  return box_mask(height * width, std::move(kept));
}

LinearOperator LinearOperator::grayscale(std::size_t channels, std::size_t pixels) {
  if (channels == 0) throw ParameterError("grayscale: channels must be positive");
  LinearOperator op(OperatorKind::grayscale, channels * pixels, pixels, "grayscale");
  op.channels_ = channels;
  return op;
}

LinearOperator LinearOperator::dense(DenseMatrix matrix) {
  if (matrix.rows == 0 || matrix.cols == 0 || matrix.data.size() != matrix.rows * matrix.cols) {
    throw ParameterError("dense: malformed matrix");
  }
  LinearOperator op(OperatorKind::dense, matrix.cols, matrix.rows, "dense");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMat> h(matrix.data.data(), static_cast<Eigen::Index>(matrix.rows),
                                   static_cast<Eigen::Index>(matrix.cols));
  const Eigen::MatrixXd gram = h * h.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() < gram.rows()) throw ParameterError("dense: operator must have full row rank");
  const RowMat pinv = h.transpose() * lu.inverse();
  op.pinv_.rows = matrix.cols;
  op.pinv_.cols = matrix.rows;
  op.pinv_.data.assign(pinv.data(), pinv.data() + pinv.size());
  op.matrix_ = std::move(matrix);
  return op;
}

namespace {

std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

}  // namespace

Vector LinearOperator::apply(ConstSpan x) const {
  require_same_size(x.size(), in_dim_, "LinearOperator::apply");
  Vector y(out_dim_, 0.0);
  switch (kind_) {
    case OperatorKind::identity:
      y.assign(x.begin(), x.end());
      break;
    case OperatorKind::gaussian_blur: {
      const int side = 2 * radius_ + 1;
      for (std::size_t r = 0; r < height_; ++r) {
        for (std::size_t c = 0; c < width_; ++c) {
          double s = 0.0;
          for (int dr = -radius_; dr <= radius_; ++dr) {
            for (int dc = -radius_; dc <= radius_; ++dc) {
              const double k = kernel_[static_cast<std::size_t>((dr + radius_) * side + dc + radius_)];
              s += k * x[wrap(static_cast<long>(r) - dr, height_) * width_ +
                         wrap(static_cast<long>(c) - dc, width_)];
            }
          }
          y[r * width_ + c] = s;
        }
      }
      break;
    }
    case OperatorKind::avgpool_sr: {
      const std::size_t out_w = width_ / block_w_;
      const double inv = 1.0 / static_cast<double>(block_h_ * block_w_);
      for (std::size_t r = 0; r < height_; ++r) {
        for (std::size_t c = 0; c < width_; ++c) {
          y[(r / block_h_) * out_w + c / block_w_] += inv * x[r * width_ + c];
        }
      }
      break;
    }
    case OperatorKind::box_mask:
      for (std::size_t i = 0; i < kept_.size(); ++i) y[i] = x[kept_[i]];
      break;
    case OperatorKind::grayscale: {
      const double inv = 1.0 / static_cast<double>(channels_);
      for (std::size_t ch = 0; ch < channels_; ++ch) {
        for (std::size_t p = 0; p < out_dim_; ++p) y[p] += inv * x[ch * out_dim_ + p];
      }
      break;
    }
    case OperatorKind::dense:
      for (std::size_t r = 0; r < matrix_.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < matrix_.cols; ++c) s += matrix_(r, c) * x[c];
        y[r] = s;
      }
      break;
  }
  return y;
}

Vector LinearOperator::adjoint(ConstSpan y) const {
  require_same_size(y.size(), out_dim_, "LinearOperator::adjoint");
  Vector x(in_dim_, 0.0);
  switch (kind_) {
    case OperatorKind::identity:
      x.assign(y.begin(), y.end());
      break;
    case OperatorKind::gaussian_blur: {
      const int side = 2 * radius_ + 1;
      for (std::size_t r = 0; r < height_; ++r) {
        for (std::size_t c = 0; c < width_; ++c) {
          double s = 0.0;
          for (int dr = -radius_; dr <= radius_; ++dr) {
            for (int dc = -radius_; dc <= radius_; ++dc) {
              const double k = kernel_[static_cast<std::size_t>((dr + radius_) * side + dc + radius_)];
              s += k * y[wrap(static_cast<long>(r) + dr, height_) * width_ +
                         wrap(static_cast<long>(c) + dc, width_)];
            }
          }
          x[r * width_ + c] = s;
        }
      }
      break;
    }
    case OperatorKind::avgpool_sr: {
      const std::size_t out_w = width_ / block_w_;
      const double inv = 1.0 / static_cast<double>(block_h_ * block_w_);
      for (std::size_t r = 0; r < height_; ++r) {
        for (std::size_t c = 0; c < width_; ++c) {
          x[r * width_ + c] = inv * y[(r / block_h_) * out_w + c / block_w_];
        }
      }
      break;
    }
    case OperatorKind::box_mask:
      for (std::size_t i = 0; i < kept_.size(); ++i) x[kept_[i]] += y[i];
      break;
    case OperatorKind::grayscale: {
      const double inv = 1.0 / static_cast<double>(channels_);
      for (std::size_t ch = 0; ch < channels_; ++ch) {
        for (std::size_t p = 0; p < out_dim_; ++p) x[ch * out_dim_ + p] = inv * y[p];
      }
      break;
    }
    case OperatorKind::dense:
      for (std::size_t r = 0; r < matrix_.rows; ++r) {
        for (std::size_t c = 0; c < matrix_.cols; ++c) x[c] += matrix_(r, c) * y[r];
      }
      break;
  }
  return x;
}

Vector LinearOperator::lift(ConstSpan y) const {
  require_same_size(y.size(), out_dim_, "LinearOperator::lift");
  switch (kind_) {
    case OperatorKind::identity:
    case OperatorKind::gaussian_blur:
      return Vector(y.begin(), y.end());
    case OperatorKind::box_mask:
      return adjoint(y);
    case OperatorKind::avgpool_sr: {
      Vector x = adjoint(y);
      const double factor = static_cast<double>(block_h_ * block_w_);
      for (auto& v : x) v *= factor;
      return x;
    }
    case OperatorKind::grayscale: {
      Vector x = adjoint(y);
      for (auto& v : x) v *= static_cast<double>(channels_);
      return x;
    }
    case OperatorKind::dense: {
      Vector x(in_dim_, 0.0);
      for (std::size_t r = 0; r < pinv_.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < pinv_.cols; ++c) s += pinv_(r, c) * y[c];
        x[r] = s;
      }
      return x;
    }
  }
  return {};
}

DenseMatrix LinearOperator::to_dense() const {
  DenseMatrix m{out_dim_, in_dim_, Vector(out_dim_ * in_dim_, 0.0)};
  Vector e(in_dim_, 0.0);
  for (std::size_t c = 0; c < in_dim_; ++c) {
    e[c] = 1.0;
    const Vector col = apply(e);
    for (std::size_t r = 0; r < out_dim_; ++r) m(r, c) = col[r];
    e[c] = 0.0;
  }
  return m;
}

Measurement apply_forward_model(const LinearOperator& op, ConstSpan x0, const NoiseModel& noise,
                                Rng& rng) {
  if (!(noise.sigma_y >= 0.0)) throw ParameterError("apply_forward_model: sigma_y must be >= 0");
  Measurement m;
  m.sigma_y = noise.sigma_y;
  m.noise_kind = noise.kind;
  m.operator_kind = op.kind();
  m.y = op.apply(x0);
  if (noise.kind == NoiseKind::gaussian) {
    if (noise.sigma_y > 0.0) {
      const Vector z = standard_normal(rng, m.y.size());
      for (std::size_t i = 0; i < m.y.size(); ++i) m.y[i] += noise.sigma_y * z[i];
    }
    return m;
  }
  if (!(noise.photon_scale > 0.0)) throw ParameterError("apply_forward_model: photon_scale must be > 0");
  for (auto& v : m.y) {
    if (v < 0.0) {
      v = 0.0;
      ++m.clamped_bins;
    }
    if (v > 0.0) {
      std::poisson_distribution<long long> counts(v * noise.photon_scale);
      v = static_cast<double>(counts(rng)) / noise.photon_scale;
    }
  }
  return m;
}

Measurement apply_forward_model(const LinearOperator& op, ConstSpan x0, const NoiseModel& noise,
                                std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return apply_forward_model(op, x0, noise, rng);
}

double gaussian_neg_loglik(const LinearOperator& op, ConstSpan x0, ConstSpan y, double sigma_y) {
  if (!(sigma_y > 0.0)) throw DomainError("gaussian_neg_loglik: sigma_y must be > 0");
  require_same_size(y.size(), op.out_dim(), "gaussian_neg_loglik");
  const Vector hx = op.apply(x0);
  double r2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) r2 += (y[i] - hx[i]) * (y[i] - hx[i]);
  const double var = sigma_y * sigma_y;
  return r2 / (2.0 * var) +
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi * var);
}

double poisson_weighted_residual(const LinearOperator& op, ConstSpan x0, ConstSpan y) {
  require_same_size(y.size(), op.out_dim(), "poisson_weighted_residual");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) {
      throw DomainError("poisson_weighted_residual: y_" + std::to_string(i) + " must be > 0");
    }
  }
  const Vector hx = op.apply(x0);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - hx[i];
    s += r * r / (2.0 * y[i]);
  }
  return s;
}

}  // namespace davi
