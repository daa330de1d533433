#pragma once

#include <set>
#include <vector>

#include "senti_levy/types.hpp"
#include "senti_levy/ukf.hpp"

namespace sentilevy {

// Signed jump days. Indices are positions in whatever series was scanned;
// run_filter shifts them to absolute day indices.
struct JumpSet {
  std::set<int> positive;
  std::set<int> negative;

  int total() const { return static_cast<int>(positive.size() + negative.size()); }
  JumpSet shifted(int offset) const;
};

// Strict threshold crossing: r - mu > 1.96 sigma goes to positive,
// r - mu < -1.96 sigma to negative.
JumpSet detect_jumps(const std::vector<double>& returns, double mu, double sigma);

// U = (hits - false positives) / t_len, where hits are same-sign, same-day
// matches and false positives are predicted days with no same-sign actual.
double objective_u(const JumpSet& predicted, const JumpSet& actual, int t_len);

// hits / predicted days; an empty prediction set returns 0 and sets the flag.
double precision(const JumpSet& predicted, const JumpSet& actual, bool* empty_flag = nullptr);

// Same-sign match within +-1 day. Secondary diagnostic only, never the
// objective.
double tolerant_precision(const JumpSet& predicted, const JumpSet& actual,
                          bool* empty_flag = nullptr);

struct Triple {
  double p_idio = 0.5;
  double p_macro = 0.5;
  double phi = 0.5;

  bool operator==(const Triple&) const = default;
};

struct FilterData {
  std::vector<DailyBar> bars;           // day 0 is the anchor, never predicted
  std::vector<SentimentDay> sentiment;  // same length as bars
  std::vector<MarketDay> market;        // empty, or same length as bars
};

struct FilterOptions {
  ukf::SigmaConfig sigma{};
  double innovation_gate = 0.0;  // 0 disables; otherwise skip updates whose
                                 // return innovation exceeds gate * sqrt(S_rr)
  double p0_r = -1.0;            // <= 0 means sigma^2
  double p0_kappa = 1.0;
  double p0_eta = 0.1;
  bool track_spectrum = false;   // record the smallest posterior eigenvalue
};

struct RunDiagnostics {
  int kappa_clamps = 0;           // eta pushed away from zero in kappa*
  int weight_clamps = 0;          // dynamic c_idio hit the policy bounds
  int weight_degenerate_days = 0; // |r| ~ 0 or too little market history
  int gate_skips = 0;
  double max_abs_innovation_r = 0.0;
  double max_abs_innovation_kappa = 0.0;
  double min_posterior_eigenvalue = 0.0;  // only when track_spectrum is set
  bool empty_prediction = false;
};

struct RunResult {
  // Indexed like bars; element 0 is unused (day 0 is the anchor).
  std::vector<double> predicted_returns;
  std::vector<double> eta_series;  // eta used for day t, i.e. eta(t-1)
  JumpSet jumps_pred;
  JumpSet jumps_actual;
  int t_len = 0;  // number of predicted days, bars.size() - 1
  double objective = 0.0;
  double precision = 0.0;
  RunDiagnostics diag{};
};

// One full filter pass at a fixed (p_idio, p_macro, phi). Day t >= 1:
//   1. weights from market information through day t-1 (or the fixed policy)
//   2. unscented predict through the forward map consuming the day-t
//      sentiment; the day-t return prediction depends only on the day t-1
//      posterior, whose memory holds sentiment through day t-1
//   3. measurement (r*, kappa*) with noise diag(rho, rho / max(eta^2, eps^2)),
//      rho = a_I^2 E_I(t)^2 + a_M^2 E_M(t)^2 + r_floor
//   4. update; jump sets and the objective over days 1..T-1.
RunResult run_filter(const FilterData& data, const ModelParams& params, const Triple& triple,
                     const FilterOptions& opt = {});

struct GridSpec {
  double coef_err = 0.1;
  // Optional inclusive narrowing of each axis; the lattice itself always
  // excludes 0 and 1.
  double p_idio_min = 0.0, p_idio_max = 1.0;
  double p_macro_min = 0.0, p_macro_max = 1.0;
  double phi_min = 0.0, phi_max = 1.0;

  std::vector<double> axis(double lo, double hi) const;
  void validate() const;
};

struct SurfacePoint {
  Triple triple{};
  double objective = 0.0;
  double precision = 0.0;
  bool failed = false;
};

struct GridResult {
  Triple best{};
  RunResult best_run{};
  std::vector<SurfacePoint> surface;  // lex order over (p_idio, p_macro, phi)
  int failed_points = 0;
};

// Exhaustive search over the lattice {k coef_err}^3 (clipped by the grid
// windows). Ties prefer the lexicographically smallest triple. Filter
// blow-ups score -inf and are marked failed; if every point fails an
// OptimizationError is thrown. threads = 0 uses the hardware count.
GridResult grid_search(const FilterData& data, const ModelParams& params, const GridSpec& grid,
                       const FilterOptions& opt = {}, int threads = 0);

}  // namespace sentilevy
