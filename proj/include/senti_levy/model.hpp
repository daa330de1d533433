#pragma once

#include "senti_levy/types.hpp"

namespace sentilevy {

// One step of the exponentially decaying memory: eta' = p * eta + (1 - p) * s.
double memory_step(double eta_prev, double s, const MemoryParams& mem);

// eta = c_idio * eta_idio + c_macro * eta_macro; weights must be finite,
// non-negative and sum to 1 (within 1e-12).
double combine_eta(double eta_idio, double eta_macro, const Weights& w);

// Forward map over one day. u holds the sentiment consumed by this step.
// The return row uses the incoming state's eta (information up to the previous
// day); the combined-memory row uses the freshly stepped memories.
//   r'         = mu + kappa * eta - nu
//   kappa'     = phi * kappa + g
//   eta_idio'  = p_I * eta_idio + a_I * s_idio
//   eta_macro' = p_M * eta_macro + a_M * s_macro
//   eta'       = c_I * eta_idio' + c_M * eta_macro'
ModelState transition(const ModelState& x, const SentimentDay& u, const Weights& w,
                      const ModelParams& p);

// Measurement projection h(x) = (r, kappa).
Eigen::Vector2d measure(const ModelState& x);

// Pseudo-measurement of kappa from an observed return:
//   kappa* = (r_obs - mu + nu) / eta_tilde
// where eta_tilde is eta pushed away from zero to at least eps_eta in
// magnitude (sign(0) taken as +). clamped reports whether that happened.
double kappa_star(double r_obs, double eta, const ModelParams& p, bool* clamped = nullptr);

// Initial belief: zero return and memories, kappa = kappa0, diagonal spread.
// p0_r <= 0 selects the default sigma^2.
Belief initial_belief(const ModelParams& p, double p0_r = -1.0, double p0_kappa = 1.0,
                      double p0_eta = 0.1);

// Process noise Q = diag(sigma_z^2, sigma_eps^2, q_eta, q_eta, q_eta).
StateMat process_noise(const ModelParams& p);

}  // namespace sentilevy
