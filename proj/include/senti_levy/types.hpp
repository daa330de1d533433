#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sentilevy {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// State layout, fixed across the whole library:
//   x = [r, kappa, eta, eta_idio, eta_macro]
inline constexpr int kStateDim = 5;
using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;

// Malformed input (CSV rows, config keys, inconsistent files). CLI exit code 1.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
  DataError(const std::string& file, long line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg) {}
};

// A filter pass broke down (non-finite state, covariance not PSD after the
// jitter ladder). The grid search converts this into a failed lattice point.
class FilterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every lattice point failed, or the fit is otherwise unusable. CLI exit code 2.
class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// var(r_M) vanishes over the beta window; callers fall back to beta = 1.
class DegenerateMarketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DailyBar {
  int day_index = 0;   // position in the loaded series
  double close = 0.0;  // > 0
  double log_return = 0.0;  // ln(close_t / close_{t-1}); 0 for the first bar
};

// One day of aggregated sentiment for both streams.
// s = sum over messages of (1 - neutral) * compound, e = mean neutral.
// A day with no messages is (s, e) = (0, 1).
struct SentimentDay {
  int day_index = 0;
  double s_idio = 0.0;
  double s_macro = 0.0;
  double e_idio = 1.0;
  double e_macro = 1.0;
};

enum class Stream { Idiosyncratic, Macro };

struct ScoredMessage {
  int day_index = 0;
  Stream stream = Stream::Idiosyncratic;
  double compound = 0.0;  // [-1, 1]
  double neutral = 1.0;   // [0, 1]
};

struct MarketDay {
  int day_index = 0;
  double r = 0.0;        // asset log return
  double r_market = 0.0; // market log return
  double r_free = 0.0;   // risk-free daily rate
};

// Memory decay weight. p + a = 1 is structural: a is derived, never stored.
class MemoryParams {
 public:
  MemoryParams() = default;
  explicit MemoryParams(double p) : p_(p) {
    if (!(p >= 0.0 && p < 1.0)) {
      throw std::invalid_argument("memory coefficient p must lie in [0, 1)");
    }
  }
  double p() const { return p_; }
  double a() const { return 1.0 - p_; }

 private:
  double p_ = 0.5;
};

struct WeightPolicy {
  enum class Mode { JensenDynamic, Fixed };
  Mode mode = Mode::Fixed;
  double c_idio = 0.5;   // used when mode == Fixed
  double clamp_lo = 0.0; // bounds for the dynamic c_idio
  double clamp_hi = 1.0;

  void validate() const {
    if (!(c_idio >= 0.0 && c_idio <= 1.0)) {
      throw std::invalid_argument("fixed c_idio must lie in [0, 1]");
    }
    if (!(clamp_lo >= 0.0 && clamp_hi <= 1.0 && clamp_lo <= clamp_hi)) {
      throw std::invalid_argument("c_idio clamp bounds must satisfy 0 <= lo <= hi <= 1");
    }
  }
};

// Combined-memory weights for one day; c_idio + c_macro = 1.
struct Weights {
  double c_idio = 0.5;
  double c_macro = 0.5;
};

// All fitted and preset scalars of the model.
struct ModelParams {
  double mu = 0.0;      // drift
  double nu = 0.0;      // sentiment-term compensator
  double sigma = 0.01;  // return volatility, used for the 1.96 sigma jump threshold
  double phi = 0.5;     // AR(1) coefficient of kappa, in (0, 1)
  double g = 1.0;       // AR(1) intercept
  MemoryParams mem_idio{0.5};
  MemoryParams mem_macro{0.5};
  double kappa0 = 0.0;
  double rf_daily = 0.0;  // fallback risk-free rate when no series is given
  int beta_window = 60;   // trailing window for the market beta
  WeightPolicy weights{};

  // Noise levels; sigma_z and sigma_eps drive both the simulator and Q.
  double sigma_z = 0.01;   // Brownian return noise
  double sigma_eps = 0.1;  // AR(1) innovation
  double q_eta = 1e-4;     // process noise on the memory rows
  double r_floor = 1e-8;   // additive floor of the measurement noise
  double eps_eta = 1e-4;   // |eta| clamp used when inverting the sentiment term

  void validate() const {
    if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("phi must lie in (0, 1)");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(std::isfinite(mu) && std::isfinite(nu) && std::isfinite(g))) {
      throw std::invalid_argument("mu, nu, g must be finite");
    }
    if (!(sigma_z >= 0.0 && sigma_eps >= 0.0 && q_eta >= 0.0)) {
      throw std::invalid_argument("noise levels must be non-negative");
    }
    if (!(r_floor >= 0.0)) throw std::invalid_argument("r_floor must be non-negative");
    if (!(eps_eta > 0.0)) throw std::invalid_argument("eps_eta must be positive");
    if (beta_window < 2) throw std::invalid_argument("beta_window must be at least 2");
    weights.validate();
  }
};

struct ModelState {
  double r = 0.0;
  double kappa = 0.0;
  double eta = 0.0;
  double eta_idio = 0.0;
  double eta_macro = 0.0;

  StateVec to_vector() const {
    StateVec v;
    v << r, kappa, eta, eta_idio, eta_macro;
    return v;
  }
  static ModelState from_vector(const Eigen::Ref<const Vec>& v) {
    if (v.size() != kStateDim) throw std::invalid_argument("state vector must have 5 entries");
    return ModelState{v(0), v(1), v(2), v(3), v(4)};
  }
  bool finite() const {
    return std::isfinite(r) && std::isfinite(kappa) && std::isfinite(eta) &&
           std::isfinite(eta_idio) && std::isfinite(eta_macro);
  }
};

struct Belief {
  ModelState mean{};
  StateMat cov = StateMat::Zero();
};

inline bool all_finite(const Eigen::Ref<const Mat>& m) {
  return m.allFinite();
}

}  // namespace sentilevy
