#pragma once

#include <cstdint>
#include <vector>

#include "senti_levy/types.hpp"

namespace sentilevy {

// Classical compound-Poisson jump diffusion:
//   r(t) = mu + sigma_z W + (sum_{j<=N_t} J_j - lambda_j * kappa_j),
//   J ~ N(kappa_j, sigma_j^2), N_t ~ Poisson(lambda_j).
struct LevyParams {
  double mu = 0.0005;
  double sigma_z = 0.01;
  double lambda_j = 0.05;  // expected jumps per day
  double kappa_j = 0.0;    // mean jump size
  double sigma_j = 0.03;   // jump size spread

  void validate() const {
    if (!(sigma_z >= 0.0 && sigma_j >= 0.0 && lambda_j >= 0.0)) {
      throw std::invalid_argument("levy noise parameters must be non-negative");
    }
  }
};

// Sparse-spike sentiment generator. Each day and stream independently spikes
// with the given probability; magnitudes are N(0, spike_scale^2), quiet days
// are exactly 0. Confidence channels are the constant e_level.
struct SentimentGenSpec {
  double spike_prob_idio = 0.06;
  double spike_prob_macro = 0.04;
  double spike_scale = 0.08;
  double e_level = 0.3;

  void validate() const {
    if (!(spike_prob_idio >= 0.0 && spike_prob_idio <= 1.0 && spike_prob_macro >= 0.0 &&
          spike_prob_macro <= 1.0)) {
      throw std::invalid_argument("spike probabilities must lie in [0, 1]");
    }
    if (!(spike_scale >= 0.0)) throw std::invalid_argument("spike_scale must be non-negative");
    if (!(e_level >= 0.0 && e_level <= 1.0)) {
      throw std::invalid_argument("e_level must lie in [0, 1]");
    }
  }
};

// Latent paths behind a synthetic series, for recovery checks and plots.
// jump(t) in {-1, 0, +1} marks |r(t) - mu - Z_t| > 1.96 sigma by construction,
// i.e. whether the planted sentiment term alone crosses the threshold.
struct SyntheticTruth {
  std::vector<double> kappa;
  std::vector<double> eta;
  std::vector<double> eta_idio;
  std::vector<double> eta_macro;
  std::vector<int> jump;
};

struct ModifiedSimResult {
  std::vector<DailyBar> bars;
  std::vector<SentimentDay> sentiment;
  SyntheticTruth truth;
};

// Classical generator. Day 0 is the anchor bar at close 100 with zero return.
// Per-day draw order: Z, N, then N jump sizes.
std::vector<DailyBar> simulate_levy(const LevyParams& p, int t_len, std::uint64_t seed);

// Modified generator. Day 0: kappa = kappa0 exactly, memories seeded from the
// day-0 sentiment, anchor bar at 100. For t >= 1:
//   kappa(t) = phi kappa(t-1) + g + eps_t
//   r(t)     = mu + Z_t + kappa(t) eta(t-1) - nu
//   eta(t)   = p eta(t-1) + a S(t)  per stream, combined with gen_weights.
// Per-day draw order: eps, Z, idio spike (uniform, then magnitude if spiking),
// macro spike.
ModifiedSimResult simulate_modified(const ModelParams& p, const SentimentGenSpec& gen,
                                    int t_len, std::uint64_t seed,
                                    const Weights& gen_weights = Weights{0.5, 0.5});

struct Calibration {
  double mu = 0.0;
  double sigma = 0.0;
  double nu = 0.0;
};

// mu = mean log return of long_history, sigma = sample std (n-1) of the
// training returns, nu = mean training return - mu. First bars carry no
// return and are skipped. Throws OptimizationError when the training series
// has no spread (sigma would be 0) and std::invalid_argument on short input.
Calibration calibrate(const std::vector<DailyBar>& training,
                      const std::vector<DailyBar>& long_history);

}  // namespace sentilevy
