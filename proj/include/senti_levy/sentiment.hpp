#pragma once

#include <cstddef>
#include <vector>

#include "senti_levy/types.hpp"

namespace sentilevy {

// Aggregate one day of scored messages for a single stream:
//   s = sum (1 - neutral_k) * compound_k,  e = mean neutral_k.
// An empty day is (0, 1). Scores outside [-1, 1] / [0, 1] are rejected.
struct DayAggregate {
  double s = 0.0;
  double e = 1.0;
};
DayAggregate aggregate_day(const std::vector<ScoredMessage>& messages);

// Trailing-window market beta, cov(r, r_M) / var(r_M) with n-1 normalization
// over the most recent `window` days of `history`. Throws
// DegenerateMarketError when var(r_M) vanishes, std::invalid_argument when
// fewer than 2 days are available.
double beta_market(const std::vector<MarketDay>& history, int window);

// Jensen's alpha for one day: r - (r_f + beta * (r_M - r_f)).
double jensen_alpha(const MarketDay& day, double beta);

struct WeightsResult {
  Weights w{};
  bool clamped = false;     // c_idio ran into the policy bounds
  bool degenerate = false;  // |r| below tol, fell back to c_idio = 0.5
};

// Daily combined-memory weights: c_idio = alpha / r clamped into the policy
// bounds, c_macro = 1 - c_idio. |r| < tol falls back to an even split.
WeightsResult weights_for_day(const MarketDay& day, double beta, const WeightPolicy& policy,
                              double tol = 1e-6);

}  // namespace sentilevy
