#pragma once

#include <functional>

#include "senti_levy/types.hpp"

namespace sentilevy::ukf {

// Van der Merwe scaled sigma points. lambda = alpha^2 (n + kappa) - n; for
// weight algebra use scale = n + lambda = alpha^2 (n + kappa) directly so the
// mean weights sum to 1 to machine precision.
struct SigmaConfig {
  double alpha = 0.5;
  double beta = 2.0;
  double kappa = 0.0;
  int n = kStateDim;

  double scale() const { return alpha * alpha * (static_cast<double>(n) + kappa); }

  void validate() const {
    if (n < 1) throw std::invalid_argument("sigma config: n must be at least 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("sigma config: alpha must be positive");
    if (!std::isfinite(beta)) throw std::invalid_argument("sigma config: beta must be finite");
    if (!(scale() > 0.0)) {
      throw std::invalid_argument("sigma config: alpha^2 (n + kappa) must be positive");
    }
  }
};

// 2n+1 points (columns) with mean and covariance weights. w_mean sums to 1;
// w_cov(0) carries the (1 - alpha^2 + beta) correction.
struct SigmaSet {
  Mat points;
  Vec w_mean;
  Vec w_cov;
};

struct Gaussian {
  Vec mean;
  Mat cov;
};

struct UpdateResult {
  Gaussian posterior;
  Vec innovation;  // z - predicted measurement mean
};

using VecMap = std::function<Vec(const Vec&)>;

// Lower Cholesky factor of m, escalating an additive diagonal jitter through
// {0, 1e-12, 1e-10, 1e-8} before giving up. Failure carries the matrix.
Mat cholesky_with_jitter(const Mat& m, const char* what);

SigmaSet sigma_points(const Vec& mean, const Mat& cov, const SigmaConfig& cfg);

// Unscented propagation of a belief through `dynamics`, plus additive q.
// The returned covariance is symmetrized.
Gaussian predict(const Gaussian& belief, const VecMap& dynamics, const Mat& q,
                 const SigmaConfig& cfg);

// Measurement update. Sigma points are redrawn from the prior belief, so the
// update is exact for affine measurement maps. Gains solve against the
// innovation covariance (with +r) via Cholesky with the same jitter ladder;
// the posterior covariance P - K S K^T is symmetrized.
UpdateResult update(const Gaussian& prior, const VecMap& measurement, const Vec& z,
                    const Mat& r, const SigmaConfig& cfg);

}  // namespace sentilevy::ukf
