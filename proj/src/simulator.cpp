#include "senti_levy/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "senti_levy/model.hpp"
#include "senti_levy/rng.hpp"

namespace sentilevy {

namespace {

// Rebuild the bar list from accumulated log prices so that a written and
// re-read CSV reproduces the returns bit for bit.
std::vector<DailyBar> bars_from_log_prices(const std::vector<double>& log_price) {
  std::vector<DailyBar> bars(log_price.size());
  double prev_close = 0.0;
  for (std::size_t t = 0; t < log_price.size(); ++t) {
    const double close = std::exp(log_price[t]);
    bars[t].day_index = static_cast<int>(t);
    bars[t].close = close;
    bars[t].log_return = (t == 0) ? 0.0 : std::log(close) - std::log(prev_close);
    prev_close = close;
  }
  return bars;
}

double spike(Rng& rng, double prob, double scale) {
  const double u = rng.uniform();
  if (u >= prob) return 0.0;
  return scale * rng.normal();
}

}  // namespace

std::vector<DailyBar> simulate_levy(const LevyParams& p, int t_len, std::uint64_t seed) {
  p.validate();
  if (t_len < 1) throw std::invalid_argument("t_len must be at least 1");
  Rng rng(seed);

  std::vector<double> log_price(t_len);
  log_price[0] = std::log(100.0);
  const double compensator = p.lambda_j * p.kappa_j;
  for (int t = 1; t < t_len; ++t) {
    const double z = p.sigma_z * rng.normal();
    const int n = rng.poisson(p.lambda_j);
    double jumps = 0.0;
    for (int j = 0; j < n; ++j) jumps += p.kappa_j + p.sigma_j * rng.normal();
    const double r = p.mu + z + jumps - compensator;
    log_price[t] = log_price[t - 1] + r;
  }
  return bars_from_log_prices(log_price);
}

ModifiedSimResult simulate_modified(const ModelParams& p, const SentimentGenSpec& gen,
                                    int t_len, std::uint64_t seed,
                                    const Weights& gen_weights) {
  p.validate();
  gen.validate();
  if (t_len < 1) throw std::invalid_argument("t_len must be at least 1");
  Rng rng(seed);

  ModifiedSimResult out;
  out.sentiment.resize(t_len);
  out.truth.kappa.resize(t_len);
  out.truth.eta.resize(t_len);
  out.truth.eta_idio.resize(t_len);
  out.truth.eta_macro.resize(t_len);
  out.truth.jump.assign(t_len, 0);
  std::vector<double> log_price(t_len);

  const double threshold = 1.96 * p.sigma;

  // Day 0: anchor bar; kappa starts at kappa0 with no innovation, memories
  // take one step from zero on the day-0 sentiment.
  const double s_i0 = spike(rng, gen.spike_prob_idio, gen.spike_scale);
  const double s_m0 = spike(rng, gen.spike_prob_macro, gen.spike_scale);
  out.sentiment[0] = SentimentDay{0, s_i0, s_m0, gen.e_level, gen.e_level};
  out.truth.kappa[0] = p.kappa0;
  out.truth.eta_idio[0] = memory_step(0.0, s_i0, p.mem_idio);
  out.truth.eta_macro[0] = memory_step(0.0, s_m0, p.mem_macro);
  out.truth.eta[0] = combine_eta(out.truth.eta_idio[0], out.truth.eta_macro[0], gen_weights);
  log_price[0] = std::log(100.0);

  for (int t = 1; t < t_len; ++t) {
    const double eps = p.sigma_eps * rng.normal();
    const double z = p.sigma_z * rng.normal();
    const double s_i = spike(rng, gen.spike_prob_idio, gen.spike_scale);
    const double s_m = spike(rng, gen.spike_prob_macro, gen.spike_scale);

    const double kappa = p.phi * out.truth.kappa[t - 1] + p.g + eps;
    const double sentiment_term = kappa * out.truth.eta[t - 1] - p.nu;
    const double r = p.mu + z + sentiment_term;

    out.truth.kappa[t] = kappa;
    out.truth.eta_idio[t] = memory_step(out.truth.eta_idio[t - 1], s_i, p.mem_idio);
    out.truth.eta_macro[t] = memory_step(out.truth.eta_macro[t - 1], s_m, p.mem_macro);
    out.truth.eta[t] = combine_eta(out.truth.eta_idio[t], out.truth.eta_macro[t], gen_weights);
    if (sentiment_term > threshold) {
      out.truth.jump[t] = 1;
    } else if (sentiment_term < -threshold) {
      out.truth.jump[t] = -1;
    }
    out.sentiment[t] = SentimentDay{t, s_i, s_m, gen.e_level, gen.e_level};
    log_price[t] = log_price[t - 1] + r;
  }

  out.bars = bars_from_log_prices(log_price);
  return out;
}

Calibration calibrate(const std::vector<DailyBar>& training,
                      const std::vector<DailyBar>& long_history) {
  if (training.size() < 2 || long_history.size() < 2) {
    throw std::invalid_argument("calibrate needs at least 2 bars in each series");
  }
  Calibration cal;

  double sum = 0.0;
  for (std::size_t i = 1; i < long_history.size(); ++i) sum += long_history[i].log_return;
  cal.mu = sum / static_cast<double>(long_history.size() - 1);

  const auto n = static_cast<double>(training.size() - 1);
  double train_mean = 0.0;
  for (std::size_t i = 1; i < training.size(); ++i) train_mean += training[i].log_return;
  train_mean /= n;

  double ss = 0.0;
  for (std::size_t i = 1; i < training.size(); ++i) {
    const double d = training[i].log_return - train_mean;
    ss += d * d;
  }
  if (training.size() < 3 || !(ss > 0.0)) {
    throw OptimizationError("training returns have no spread, sigma would be zero");
  }
  cal.sigma = std::sqrt(ss / (n - 1.0));
  cal.nu = train_mean - cal.mu;
  return cal;
}

}  // namespace sentilevy
