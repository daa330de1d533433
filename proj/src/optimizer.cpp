#include "senti_levy/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "senti_levy/model.hpp"
#include "senti_levy/sentiment.hpp"

namespace sentilevy {

namespace {

int intersection_size(const std::set<int>& a, const std::set<int>& b) {
  int n = 0;
  for (int d : a) n += b.count(d);
  return n;
}

bool near_hit(const std::set<int>& actual, int day) {
  return actual.count(day - 1) || actual.count(day) || actual.count(day + 1);
}

}  // namespace

JumpSet JumpSet::shifted(int offset) const {
  JumpSet out;
  for (int d : positive) out.positive.insert(d + offset);
  for (int d : negative) out.negative.insert(d + offset);
  return out;
}

JumpSet detect_jumps(const std::vector<double>& returns, double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("detect_jumps: sigma must be positive");
  const double threshold = 1.96 * sigma;
  JumpSet out;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    const double dev = returns[i] - mu;
    if (dev > threshold) {
      out.positive.insert(static_cast<int>(i));
    } else if (dev < -threshold) {
      out.negative.insert(static_cast<int>(i));
    }
  }
  return out;
}

double objective_u(const JumpSet& predicted, const JumpSet& actual, int t_len) {
  if (t_len <= 0) throw std::invalid_argument("objective_u: t_len must be positive");
  const int hits = intersection_size(predicted.positive, actual.positive) +
                   intersection_size(predicted.negative, actual.negative);
  const int false_pos = predicted.total() - hits;
  return (static_cast<double>(hits) - static_cast<double>(false_pos)) /
         static_cast<double>(t_len);
}

double precision(const JumpSet& predicted, const JumpSet& actual, bool* empty_flag) {
  const int denom = predicted.total();
  if (empty_flag) *empty_flag = (denom == 0);
  if (denom == 0) return 0.0;
  const int hits = intersection_size(predicted.positive, actual.positive) +
                   intersection_size(predicted.negative, actual.negative);
  return static_cast<double>(hits) / static_cast<double>(denom);
}

double tolerant_precision(const JumpSet& predicted, const JumpSet& actual, bool* empty_flag) {
  const int denom = predicted.total();
  if (empty_flag) *empty_flag = (denom == 0);
  if (denom == 0) return 0.0;
  int hits = 0;
  for (int d : predicted.positive) hits += near_hit(actual.positive, d);
  for (int d : predicted.negative) hits += near_hit(actual.negative, d);
  return static_cast<double>(hits) / static_cast<double>(denom);
}

RunResult run_filter(const FilterData& data, const ModelParams& params, const Triple& triple,
                     const FilterOptions& opt) {
  const auto t_total = static_cast<int>(data.bars.size());
  if (t_total < 2) throw std::invalid_argument("run_filter needs at least 2 bars");
  if (data.sentiment.size() != data.bars.size()) {
    throw std::invalid_argument("sentiment series must align with bars");
  }
  if (!data.market.empty() && data.market.size() != data.bars.size()) {
    throw std::invalid_argument("market series must align with bars or be empty");
  }

  ModelParams p = params;
  p.mem_idio = MemoryParams(triple.p_idio);
  p.mem_macro = MemoryParams(triple.p_macro);
  p.phi = triple.phi;
  p.validate();
  if (p.weights.mode == WeightPolicy::Mode::JensenDynamic && data.market.empty()) {
    throw std::invalid_argument("dynamic weights need a market series");
  }

  ukf::SigmaConfig cfg = opt.sigma;
  cfg.n = kStateDim;
  cfg.validate();

  const Mat q = process_noise(p);
  const Belief b0 = initial_belief(p, opt.p0_r, opt.p0_kappa, opt.p0_eta);
  ukf::Gaussian belief{b0.mean.to_vector(), b0.cov};

  RunResult res;
  res.predicted_returns.assign(t_total, 0.0);
  res.eta_series.assign(t_total, 0.0);
  res.t_len = t_total - 1;
  res.diag.min_posterior_eigenvalue = std::numeric_limits<double>::infinity();

  std::vector<MarketDay> market_hist;
  market_hist.reserve(data.market.size());

  for (int t = 1; t < t_total; ++t) {
    const double eta_lag = belief.mean(2);

    Weights w{0.5, 0.5};
    if (p.weights.mode == WeightPolicy::Mode::Fixed) {
      w = Weights{p.weights.c_idio, 1.0 - p.weights.c_idio};
    } else {
      market_hist.push_back(data.market[t - 1]);
      if (market_hist.size() < 2) {
        ++res.diag.weight_degenerate_days;
      } else {
        double beta = 1.0;
        try {
          beta = beta_market(market_hist, p.beta_window);
        } catch (const DegenerateMarketError&) {
          beta = 1.0;
        }
        const WeightsResult wr = weights_for_day(data.market[t - 1], beta, p.weights);
        w = wr.w;
        res.diag.weight_clamps += wr.clamped;
        res.diag.weight_degenerate_days += wr.degenerate;
      }
    }

    const SentimentDay& u = data.sentiment[t];
    auto dynamics = [&](const Vec& x) -> Vec {
      return transition(ModelState::from_vector(x), u, w, p).to_vector();
    };
    const ukf::Gaussian prior = ukf::predict(belief, dynamics, q, cfg);

    res.predicted_returns[t] = prior.mean(0);
    res.eta_series[t] = eta_lag;

    const double a_i = p.mem_idio.a();
    const double a_m = p.mem_macro.a();
    const double rho =
        a_i * a_i * u.e_idio * u.e_idio + a_m * a_m * u.e_macro * u.e_macro + p.r_floor;
    Mat r_noise = Mat::Zero(2, 2);
    r_noise(0, 0) = rho;
    r_noise(1, 1) = rho / std::max(eta_lag * eta_lag, p.eps_eta * p.eps_eta);

    bool clamped = false;
    const double kap_star = kappa_star(data.bars[t].log_return, eta_lag, p, &clamped);
    res.diag.kappa_clamps += clamped;

    Vec z(2);
    z << data.bars[t].log_return, kap_star;
    auto h = [](const Vec& x) -> Vec {
      Vec out(2);
      out << x(0), x(1);
      return out;
    };
    const ukf::UpdateResult upd = ukf::update(prior, h, z, r_noise, cfg);

    bool gated = false;
    if (opt.innovation_gate > 0.0) {
      const double s_rr = prior.cov(0, 0) + r_noise(0, 0);
      gated = std::abs(upd.innovation(0)) > opt.innovation_gate * std::sqrt(s_rr);
    }
    if (gated) {
      ++res.diag.gate_skips;
      belief = prior;
    } else {
      belief = upd.posterior;
    }

    res.diag.max_abs_innovation_r =
        std::max(res.diag.max_abs_innovation_r, std::abs(upd.innovation(0)));
    res.diag.max_abs_innovation_kappa =
        std::max(res.diag.max_abs_innovation_kappa, std::abs(upd.innovation(1)));
    if (opt.track_spectrum) {
      Eigen::SelfAdjointEigenSolver<Mat> es(belief.cov, Eigen::EigenvaluesOnly);
      res.diag.min_posterior_eigenvalue =
          std::min(res.diag.min_posterior_eigenvalue, es.eigenvalues().minCoeff());
    }
  }
  if (!opt.track_spectrum) res.diag.min_posterior_eigenvalue = 0.0;

  std::vector<double> pred_slice(res.predicted_returns.begin() + 1, res.predicted_returns.end());
  std::vector<double> actual_slice(t_total - 1);
  for (int t = 1; t < t_total; ++t) actual_slice[t - 1] = data.bars[t].log_return;

  res.jumps_pred = detect_jumps(pred_slice, p.mu, p.sigma).shifted(1);
  res.jumps_actual = detect_jumps(actual_slice, p.mu, p.sigma).shifted(1);
  res.objective = objective_u(res.jumps_pred, res.jumps_actual, res.t_len);
  res.precision = precision(res.jumps_pred, res.jumps_actual, &res.diag.empty_prediction);
  return res;
}

std::vector<double> GridSpec::axis(double lo, double hi) const {
  std::vector<double> out;
  for (int k = 1;; ++k) {
    const double v = static_cast<double>(k) * coef_err;
    if (v > 1.0 - coef_err + 1e-12) break;
    if (v >= lo - 1e-12 && v <= hi + 1e-12) out.push_back(v);
  }
  return out;
}

void GridSpec::validate() const {
  if (!(coef_err > 0.0 && coef_err <= 1.0 / 3.0 + 1e-12)) {
    throw std::invalid_argument("coef_err must lie in (0, 1/3] so each axis has >= 2 points");
  }
  auto check = [](double lo, double hi, const char* name) {
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) {
      throw std::invalid_argument(std::string("grid bounds for ") + name +
                                  " must satisfy 0 <= lo <= hi <= 1");
    }
  };
  check(p_idio_min, p_idio_max, "p_idio");
  check(p_macro_min, p_macro_max, "p_macro");
  check(phi_min, phi_max, "phi");
}

GridResult grid_search(const FilterData& data, const ModelParams& params, const GridSpec& grid,
                       const FilterOptions& opt, int threads) {
  grid.validate();
  const std::vector<double> ax_i = grid.axis(grid.p_idio_min, grid.p_idio_max);
  const std::vector<double> ax_m = grid.axis(grid.p_macro_min, grid.p_macro_max);
  const std::vector<double> ax_f = grid.axis(grid.phi_min, grid.phi_max);
  if (ax_i.empty() || ax_m.empty() || ax_f.empty()) {
    throw std::invalid_argument("grid bounds exclude every lattice point");
  }

  std::vector<Triple> lattice;
  lattice.reserve(ax_i.size() * ax_m.size() * ax_f.size());
  for (double pi : ax_i) {
    for (double pm : ax_m) {
      for (double f : ax_f) lattice.push_back(Triple{pi, pm, f});
    }
  }

  GridResult out;
  out.surface.resize(lattice.size());

  auto evaluate = [&](std::size_t idx) {
    SurfacePoint& sp = out.surface[idx];
    sp.triple = lattice[idx];
    try {
      const RunResult run = run_filter(data, params, lattice[idx], opt);
      sp.objective = run.objective;
      sp.precision = run.precision;
    } catch (const FilterError&) {
      sp.failed = true;
      sp.objective = -std::numeric_limits<double>::infinity();
      sp.precision = 0.0;
    }
  };

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(lattice.size())));

  if (n_threads == 1) {
    for (std::size_t i = 0; i < lattice.size(); ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= lattice.size()) return;
        try {
          evaluate(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  // Lex iteration + strict improvement = lexicographically smallest argmax.
  std::size_t best_idx = lattice.size();
  double best_obj = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.surface.size(); ++i) {
    const SurfacePoint& sp = out.surface[i];
    out.failed_points += sp.failed;
    if (!sp.failed && sp.objective > best_obj) {
      best_obj = sp.objective;
      best_idx = i;
    }
  }
  if (best_idx == lattice.size()) {
    throw OptimizationError("every grid point failed the filter pass");
  }
  out.best = lattice[best_idx];
  out.best_run = run_filter(data, params, out.best, opt);
  return out;
}

}  // namespace sentilevy
