// Independent reference implementations the tests compare against. These are
// deliberately written from the textbook formulas, not by calling the library.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace oracles {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Closed-form linear-Gaussian Kalman filter for x' = A x + w, z = H x + v.
struct KalmanOracle {
  Vec mean;
  Mat cov;

  void predict(const Mat& a, const Mat& q) {
    mean = a * mean;
    cov = a * cov * a.transpose() + q;
    cov = 0.5 * (cov + cov.transpose()).eval();
  }

  void update(const Mat& h, const Vec& z, const Mat& r) {
    const Mat s = h * cov * h.transpose() + r;
    const Mat k = cov * h.transpose() * s.inverse();
    mean = mean + k * (z - h * mean);
    cov = cov - k * s * k.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
};

// Geometric-sum form of the decaying memory: starting from eta0 and applying
// steps with inputs s[0..m-1], the result is
//   p^m eta0 + (1 - p) sum_i p^(m-1-i) s[i].
inline double memory_closed_form(double p, double eta0, const std::vector<double>& s) {
  const auto m = s.size();
  double acc = eta0;
  for (std::size_t i = 0; i < m; ++i) acc *= p;  // p^m eta0, kept exact in double
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double w = 1.0 - p;
    for (std::size_t j = i + 1; j < m; ++j) w *= p;
    sum += w * s[i];
  }
  return acc + sum;
}

// AR(1) with constant innovation g: kappa(t) = phi^t kappa0 + g (1-phi^t)/(1-phi).
inline double ar1_closed_form(double phi, double kappa0, double g, int t) {
  double phi_t = 1.0;
  for (int i = 0; i < t; ++i) phi_t *= phi;
  return phi_t * kappa0 + g * (1.0 - phi_t) / (1.0 - phi);
}

// SplitMix64: a tiny deterministic generator for building random test cases.
// Unrelated to the library's generator on purpose.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Sum of 12 uniforms minus 6: mean 0, variance 1. Good enough to produce
  // generic test vectors; nothing in the tests relies on exact normality.
  double gaussish() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform();
    return s - 6.0;
  }

  Vec vector(int n, double scale = 1.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = scale * gaussish();
    return v;
  }

  Mat matrix(int rows, int cols, double scale = 1.0) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = scale * gaussish();
    }
    return m;
  }

  // Random SPD matrix B B^T + d I.
  Mat spd(int n, double diag_boost = 0.5) {
    const Mat b = matrix(n, n);
    Mat m = b * b.transpose();
    m.diagonal().array() += diag_boost;
    return m;
  }

 private:
  std::uint64_t state_;
};

}  // namespace oracles
