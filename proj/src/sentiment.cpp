#include "senti_levy/sentiment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sentilevy {

DayAggregate aggregate_day(const std::vector<ScoredMessage>& messages) {
  DayAggregate agg;
  if (messages.empty()) return agg;  // (0, 1): silence is neutral
  double s = 0.0, e = 0.0;
  for (const auto& msg : messages) {
    if (!(msg.compound >= -1.0 && msg.compound <= 1.0)) {
      throw std::invalid_argument("compound score must lie in [-1, 1]");
    }
    if (!(msg.neutral >= 0.0 && msg.neutral <= 1.0)) {
      throw std::invalid_argument("neutral score must lie in [0, 1]");
    }
    s += (1.0 - msg.neutral) * msg.compound;
    e += msg.neutral;
  }
  agg.s = s;
  agg.e = e / static_cast<double>(messages.size());
  return agg;
}

double beta_market(const std::vector<MarketDay>& history, int window) {
  if (window < 2) throw std::invalid_argument("beta window must be at least 2");
  const auto n = static_cast<std::ptrdiff_t>(history.size());
  const std::ptrdiff_t take = std::min<std::ptrdiff_t>(n, window);
  if (take < 2) throw std::invalid_argument("need at least 2 market days for beta");

  const auto* first = history.data() + (n - take);
  double mr = 0.0, mm = 0.0;
  for (std::ptrdiff_t i = 0; i < take; ++i) {
    mr += first[i].r;
    mm += first[i].r_market;
  }
  mr /= static_cast<double>(take);
  mm /= static_cast<double>(take);

  double cov = 0.0, var = 0.0;
  for (std::ptrdiff_t i = 0; i < take; ++i) {
    const double dm = first[i].r_market - mm;
    cov += (first[i].r - mr) * dm;
    var += dm * dm;
  }
  cov /= static_cast<double>(take - 1);
  var /= static_cast<double>(take - 1);
  if (!(var > 1e-18)) {
    throw DegenerateMarketError("market variance vanishes over the beta window");
  }
  return cov / var;
}

double jensen_alpha(const MarketDay& day, double beta) {
  return day.r - (day.r_free + beta * (day.r_market - day.r_free));
}

WeightsResult weights_for_day(const MarketDay& day, double beta, const WeightPolicy& policy,
                              double tol) {
  policy.validate();
  WeightsResult out;
  if (policy.mode == WeightPolicy::Mode::Fixed) {
    out.w = Weights{policy.c_idio, 1.0 - policy.c_idio};
    return out;
  }
  if (std::abs(day.r) < tol) {
    out.degenerate = true;
    out.w = Weights{0.5, 0.5};
    return out;
  }
  const double alpha = jensen_alpha(day, beta);
  double c = alpha / day.r;
  if (c < policy.clamp_lo) {
    c = policy.clamp_lo;
    out.clamped = true;
  } else if (c > policy.clamp_hi) {
    c = policy.clamp_hi;
    out.clamped = true;
  }
  out.w = Weights{c, 1.0 - c};
  return out;
}

}  // namespace sentilevy
