// Copyright 2026 The DAVI Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "davi/common.hpp"

namespace davi {

enum class OperatorKind { identity, gaussian_blur, avgpool_sr, box_mask, grayscale, dense };

std::string to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(const std::string& name);

/// Row-major dense matrix, used for explicit operators and test oracles.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector data;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

DenseMatrix load_matrix_csv(const std::filesystem::path& path);

/// Linear degradation operator H mapping signals (d_x) to measurements (d_y).
///
/// Image-shaped kinds work on row-major height x width grids; grayscale expects the
/// channel-major layout [channel][pixel].
class LinearOperator {
 public:
  static LinearOperator identity(std::size_t dim);
  /// Circular 2-D convolution with a normalized (2r+1)^2 Gaussian kernel.
  static LinearOperator gaussian_blur(std::size_t height, std::size_t width, int radius,
                                      double stddev);
  /// Mean over factor x factor blocks (1 x factor blocks when height == 1).
  static LinearOperator avgpool_sr(std::size_t height, std::size_t width, std::size_t factor);
  /// Keeps the listed signal indices, in the given order.
  static LinearOperator box_mask(std::size_t dim, std::vector<std::size_t> kept);
  /// Removes the rectangle [row0, row0+box_h) x [col0, col0+box_w) from an image.
  static LinearOperator box_inpaint(std::size_t height, std::size_t width, std::size_t row0,
                                    std::size_t col0, std::size_t box_h, std::size_t box_w);
  /// Mean over channels.
  static LinearOperator grayscale(std::size_t channels, std::size_t pixels);
  /// Explicit matrix. Requires full row rank (the lift uses the pseudo-inverse).
  static LinearOperator dense(DenseMatrix matrix);

  OperatorKind kind() const { return kind_; }
  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }

  Vector apply(ConstSpan x) const;
  Vector adjoint(ConstSpan y) const;
  /// x-shaped surrogate of y. Identity for blur, replication for pooling and grayscale,
  /// zero-fill for masks, pseudo-inverse for dense. All but blur satisfy H lift(y) = y.
  Vector lift(ConstSpan y) const;

  DenseMatrix to_dense() const;

  const std::string& name() const { return name_; }

 private:
  LinearOperator(OperatorKind kind, std::size_t in_dim, std::size_t out_dim, std::string name);

  OperatorKind kind_;
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::string name_;

  // gaussian_blur / avgpool_sr
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  int radius_ = 0;
  Vector kernel_;  // (2r+1)^2, row-major
  std::size_t block_h_ = 1;
  std::size_t block_w_ = 1;
  // box_mask
  std::vector<std::size_t> kept_;
  // grayscale
  std::size_t channels_ = 1;
  // dense
  DenseMatrix matrix_;
  DenseMatrix pinv_;
};

enum class NoiseKind { gaussian, poisson };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma_y = 0.0;
  /// Photons per signal unit for Poisson synthesis.
  double photon_scale = 100.0;
};

struct Measurement {
  Vector y;
  double sigma_y = 0.0;
  NoiseKind noise_kind = NoiseKind::gaussian;
  OperatorKind operator_kind = OperatorKind::identity;
  /// Poisson bins whose intensity was negative and clamped to zero.
  std::size_t clamped_bins = 0;
};

/// y = H x0 + n with Gaussian n, or per-bin Poisson counts of scale * max(H x0, 0)
/// rescaled back to signal units.
Measurement apply_forward_model(const LinearOperator& op, ConstSpan x0, const NoiseModel& noise,
                                Rng& rng);
Measurement apply_forward_model(const LinearOperator& op, ConstSpan x0, const NoiseModel& noise,
                                std::uint64_t rng_seed);

double gaussian_neg_loglik(const LinearOperator& op, ConstSpan x0, ConstSpan y, double sigma_y);

/// (y - H x0)^T Lambda (y - H x0) with Lambda_ii = 1 / (2 y_i).
double poisson_weighted_residual(const LinearOperator& op, ConstSpan x0, ConstSpan y);

}  // namespace davi
