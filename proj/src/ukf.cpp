#include "senti_levy/ukf.hpp"

#include <sstream>

namespace sentilevy::ukf {

namespace {

constexpr double kJitterLadder[] = {0.0, 1e-12, 1e-10, 1e-8};

Eigen::LLT<Mat> llt_with_jitter(const Mat& m, const char* what) {
  Mat trial = m;
  for (double jitter : kJitterLadder) {
    if (jitter > 0.0) trial.diagonal() = m.diagonal().array() + jitter;
    Eigen::LLT<Mat> llt(trial);
    if (llt.info() == Eigen::Success) return llt;
  }
  std::ostringstream os;
  os << what << ": covariance not PSD after jitter ladder; matrix:\n" << m;
  throw FilterError(os.str());
}

void check_columns_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw FilterError(std::string(what) + " produced non-finite values");
}

}  // namespace

Mat cholesky_with_jitter(const Mat& m, const char* what) {
  return llt_with_jitter(m, what).matrixL();
}

SigmaSet sigma_points(const Vec& mean, const Mat& cov, const SigmaConfig& cfg) {
  cfg.validate();
  const int n = cfg.n;
  if (mean.size() != n || cov.rows() != n || cov.cols() != n) {
    throw std::invalid_argument("sigma_points: mean/cov dimensions do not match config n");
  }
  const double s = cfg.scale();  // n + lambda
  Mat l = cholesky_with_jitter(s * cov, "sigma_points");

  SigmaSet set;
  set.points.resize(n, 2 * n + 1);
  set.points.col(0) = mean;
  for (int i = 0; i < n; ++i) {
    set.points.col(1 + i) = mean + l.col(i);
    set.points.col(1 + n + i) = mean - l.col(i);
  }
  const double wi = 1.0 / (2.0 * s);
  set.w_mean = Vec::Constant(2 * n + 1, wi);
  set.w_cov = Vec::Constant(2 * n + 1, wi);
  set.w_mean(0) = (s - static_cast<double>(n)) / s;  // lambda / (n + lambda)
  set.w_cov(0) = set.w_mean(0) + 1.0 - cfg.alpha * cfg.alpha + cfg.beta;
  return set;
}

Gaussian predict(const Gaussian& belief, const VecMap& dynamics, const Mat& q,
                 const SigmaConfig& cfg) {
  const int n = cfg.n;
  if (q.rows() != n || q.cols() != n) {
    throw std::invalid_argument("predict: q must be n x n");
  }
  SigmaSet set = sigma_points(belief.mean, belief.cov, cfg);

  Mat ys(n, 2 * n + 1);
  for (int i = 0; i < set.points.cols(); ++i) {
    Vec y = dynamics(set.points.col(i));
    if (y.size() != n) throw std::invalid_argument("predict: dynamics changed the dimension");
    ys.col(i) = y;
  }
  check_columns_finite(ys, "predict: dynamics");

  Gaussian out;
  out.mean = ys * set.w_mean;
  Mat d = ys.colwise() - out.mean;
  out.cov = d * set.w_cov.asDiagonal() * d.transpose() + q;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

UpdateResult update(const Gaussian& prior, const VecMap& measurement, const Vec& z,
                    const Mat& r, const SigmaConfig& cfg) {
  const int n = cfg.n;
  const auto m = z.size();
  if (r.rows() != m || r.cols() != m) {
    throw std::invalid_argument("update: r must match the measurement dimension");
  }
  SigmaSet set = sigma_points(prior.mean, prior.cov, cfg);

  Mat zs(m, 2 * n + 1);
  for (int i = 0; i < set.points.cols(); ++i) {
    Vec zi = measurement(set.points.col(i));
    if (zi.size() != m) throw std::invalid_argument("update: measurement dimension mismatch");
    zs.col(i) = zi;
  }
  check_columns_finite(zs, "update: measurement");

  Vec z_mean = zs * set.w_mean;
  Mat dz = zs.colwise() - z_mean;
  Mat s_innov = dz * set.w_cov.asDiagonal() * dz.transpose() + r;
  s_innov = 0.5 * (s_innov + s_innov.transpose()).eval();

  Mat dx = set.points.colwise() - prior.mean;
  Mat p_xz = dx * set.w_cov.asDiagonal() * dz.transpose();

  Eigen::LLT<Mat> llt = llt_with_jitter(s_innov, "update");
  Mat gain = llt.solve(p_xz.transpose()).transpose();  // K = P_xz S^-1

  UpdateResult out;
  out.innovation = z - z_mean;
  out.posterior.mean = prior.mean + gain * out.innovation;
  out.posterior.cov = prior.cov - gain * s_innov * gain.transpose();
  out.posterior.cov = 0.5 * (out.posterior.cov + out.posterior.cov.transpose()).eval();
  if (!out.posterior.mean.allFinite() || !out.posterior.cov.allFinite()) {
    throw FilterError("update produced a non-finite posterior");
  }
  return out;
}

}  // namespace sentilevy::ukf
