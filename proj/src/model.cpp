#include "senti_levy/model.hpp"

#include <cmath>
#include <stdexcept>

namespace sentilevy {

double memory_step(double eta_prev, double s, const MemoryParams& mem) {
  return mem.p() * eta_prev + mem.a() * s;
}

double combine_eta(double eta_idio, double eta_macro, const Weights& w) {
  if (!(std::isfinite(w.c_idio) && std::isfinite(w.c_macro)) || w.c_idio < 0.0 ||
      w.c_macro < 0.0 || std::abs(w.c_idio + w.c_macro - 1.0) > 1e-12) {
    throw std::invalid_argument("combined-memory weights must be non-negative and sum to 1");
  }
  return w.c_idio * eta_idio + w.c_macro * eta_macro;
}

ModelState transition(const ModelState& x, const SentimentDay& u, const Weights& w,
                      const ModelParams& p) {
  ModelState out;
  out.r = p.mu + x.kappa * x.eta - p.nu;
  out.kappa = p.phi * x.kappa + p.g;
  out.eta_idio = memory_step(x.eta_idio, u.s_idio, p.mem_idio);
  out.eta_macro = memory_step(x.eta_macro, u.s_macro, p.mem_macro);
  out.eta = combine_eta(out.eta_idio, out.eta_macro, w);
  if (!out.finite()) throw FilterError("transition produced a non-finite state");
  return out;
}

Eigen::Vector2d measure(const ModelState& x) {
  return Eigen::Vector2d(x.r, x.kappa);
}

double kappa_star(double r_obs, double eta, const ModelParams& p, bool* clamped) {
  double eta_tilde = eta;
  bool hit = false;
  if (std::abs(eta_tilde) < p.eps_eta) {
    // sign(0) taken as +
    eta_tilde = (eta_tilde < 0.0) ? -p.eps_eta : p.eps_eta;
    hit = true;
  }
  if (clamped) *clamped = hit;
  return (r_obs - p.mu + p.nu) / eta_tilde;
}

Belief initial_belief(const ModelParams& p, double p0_r, double p0_kappa, double p0_eta) {
  if (p0_r <= 0.0) p0_r = p.sigma * p.sigma;
  if (!(p0_kappa > 0.0 && p0_eta > 0.0)) {
    throw std::invalid_argument("initial covariance entries must be positive");
  }
  Belief b;
  b.mean = ModelState{0.0, p.kappa0, 0.0, 0.0, 0.0};
  b.cov = StateMat::Zero();
  b.cov.diagonal() << p0_r, p0_kappa, p0_eta, p0_eta, p0_eta;
  return b;
}

StateMat process_noise(const ModelParams& p) {
  StateMat q = StateMat::Zero();
  q.diagonal() << p.sigma_z * p.sigma_z, p.sigma_eps * p.sigma_eps, p.q_eta, p.q_eta, p.q_eta;
  return q;
}

}  // namespace sentilevy
