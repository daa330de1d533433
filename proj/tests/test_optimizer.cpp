#include "senti_levy/optimizer.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "senti_levy/simulator.hpp"

using namespace sentilevy;

namespace {

std::vector<DailyBar> bars_from_return_list(const std::vector<double>& r) {
  std::vector<DailyBar> bars(r.size());
  double lp = std::log(100.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    if (t > 0) lp += r[t];
    bars[t] = DailyBar{static_cast<int>(t), std::exp(lp), (t == 0) ? 0.0 : r[t]};
  }
  return bars;
}

std::vector<SentimentDay> quiet_sentiment(int n) {
  std::vector<SentimentDay> s(n);
  for (int t = 0; t < n; ++t) s[t] = SentimentDay{t, 0.0, 0.0, 1.0, 1.0};
  return s;
}

}  // namespace

TEST_CASE("detect_jumps classifies strict threshold crossings") {
  const JumpSet js = detect_jumps({0.1, 2.5, -3.0}, 0.0, 1.0);
  CHECK(js.positive == std::set<int>{1});
  CHECK(js.negative == std::set<int>{2});
  CHECK(js.total() == 2);

  // exactly 1.96 sigma is not a jump; strictly beyond is
  const JumpSet edge = detect_jumps({1.96, std::nextafter(1.96, 2.0)}, 0.0, 1.0);
  CHECK(edge.positive == std::set<int>{1});

  CHECK(detect_jumps(std::vector<double>(50, 0.37), 0.37, 1.0).total() == 0);
  CHECK_THROWS_AS(detect_jumps({1.0}, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("detect_jumps frequency is sane on heavy draws") {
  oracles::TestRng rng(8);
  std::vector<double> r(250);
  for (double& v : r) v = rng.gaussish();
  const JumpSet js = detect_jumps(r, 0.0, 1.0);
  const double freq = static_cast<double>(js.total()) / 250.0;
  CHECK(freq > 0.005);
  CHECK(freq < 0.12);
}

TEST_CASE("JumpSet::shifted translates both signs") {
  JumpSet js;
  js.positive = {1, 4};
  js.negative = {2};
  const JumpSet s = js.shifted(10);
  CHECK(s.positive == std::set<int>{11, 14});
  CHECK(s.negative == std::set<int>{12});
}

TEST_CASE("objective_u counts hits minus false positives over t_len") {
  JumpSet a, b;
  a.positive = {1};
  b.positive = {1};
  CHECK(objective_u(a, b, 3) == doctest::Approx(1.0 / 3.0));

  JumpSet only_pred;
  only_pred.positive = {1};
  CHECK(objective_u(only_pred, JumpSet{}, 2) == doctest::Approx(-0.5));

  // same day, opposite sign: not a hit, still a false positive
  JumpSet pos, neg;
  pos.positive = {3};
  neg.negative = {3};
  CHECK(objective_u(pos, neg, 4) == doctest::Approx(-0.25));

  CHECK_THROWS_AS(objective_u(a, b, 0), std::invalid_argument);
}

TEST_CASE("objective_u self-match equals set size over t_len") {
  oracles::TestRng rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    JumpSet a;
    const int t_len = rng.uniform_int(5, 400);
    const int k = rng.uniform_int(0, t_len / 2);
    for (int i = 0; i < k; ++i) {
      const int d = rng.uniform_int(0, t_len - 1);
      if (rng.uniform() < 0.5) {
        a.positive.insert(d);
        a.negative.erase(d);
      } else {
        a.negative.insert(d);
        a.positive.erase(d);
      }
    }
    CHECK(objective_u(a, a, t_len) ==
          doctest::Approx(static_cast<double>(a.total()) / t_len).epsilon(1e-14));
  }
}

TEST_CASE("objective_u moves by exactly 1/t_len per added hit or false positive") {
  JumpSet pred, actual;
  pred.positive = {2, 7};
  actual.positive = {2, 5};
  actual.negative = {9};
  const int t_len = 40;
  const double base = objective_u(pred, actual, t_len);

  JumpSet plus_hit = pred;
  plus_hit.negative.insert(9);
  CHECK(objective_u(plus_hit, actual, t_len) == doctest::Approx(base + 1.0 / t_len));

  JumpSet plus_fp = pred;
  plus_fp.positive.insert(11);
  CHECK(objective_u(plus_fp, actual, t_len) == doctest::Approx(base - 1.0 / t_len));
}

TEST_CASE("precision is hits over predictions") {
  JumpSet pred, actual;
  pred.positive = {1, 2};
  actual.positive = {1};
  CHECK(precision(pred, actual) == doctest::Approx(0.5));
  CHECK(precision(actual, actual) == doctest::Approx(1.0));

  JumpSet flipped;
  flipped.negative = {1, 2};
  CHECK(precision(pred, flipped) == doctest::Approx(0.0));

  bool empty = false;
  CHECK(precision(JumpSet{}, actual, &empty) == 0.0);
  CHECK(empty);
}

TEST_CASE("tolerant_precision accepts a one-day slip, nothing wider") {
  JumpSet pred, actual;
  pred.positive = {5};
  actual.positive = {4};
  CHECK(precision(pred, actual) == doctest::Approx(0.0));
  CHECK(tolerant_precision(pred, actual) == doctest::Approx(1.0));

  JumpSet far;
  far.positive = {7};
  CHECK(tolerant_precision(pred, far) == doctest::Approx(0.0));

  // slip never crosses signs
  JumpSet neg;
  neg.negative = {5};
  CHECK(tolerant_precision(pred, neg) == doctest::Approx(0.0));
}

TEST_CASE("run_filter validates its inputs") {
  ModelParams p;
  const Triple triple{0.5, 0.5, 0.5};

  FilterData short_data;
  short_data.bars = bars_from_return_list({0.0});
  short_data.sentiment = quiet_sentiment(1);
  CHECK_THROWS_AS(run_filter(short_data, p, triple), std::invalid_argument);

  FilterData misaligned;
  misaligned.bars = bars_from_return_list({0.0, 0.001, 0.002});
  misaligned.sentiment = quiet_sentiment(2);
  CHECK_THROWS_AS(run_filter(misaligned, p, triple), std::invalid_argument);

  FilterData no_market;
  no_market.bars = bars_from_return_list({0.0, 0.001, 0.002});
  no_market.sentiment = quiet_sentiment(3);
  ModelParams jensen = p;
  jensen.weights.mode = WeightPolicy::Mode::JensenDynamic;
  CHECK_THROWS_AS(run_filter(no_market, jensen, triple), std::invalid_argument);
}

TEST_CASE("run_filter with silent sentiment predicts the deterministic drift") {
  ModelParams p;
  p.nu = 0.0002;
  const int t_len = 100;
  FilterData data;
  data.bars = bars_from_return_list(std::vector<double>(t_len, p.mu - p.nu));
  data.sentiment = quiet_sentiment(t_len);

  const RunResult res = run_filter(data, p, Triple{0.5, 0.5, 0.5});
  for (int t = 1; t < t_len; ++t) {
    CHECK(std::abs(res.predicted_returns[t] - (p.mu - p.nu)) < 1e-6);
    CHECK(std::abs(res.eta_series[t]) < 1e-6);
  }
  CHECK(res.jumps_pred.total() == 0);
  CHECK(res.jumps_actual.total() == 0);
  CHECK(res.objective == 0.0);
  CHECK(res.precision == 0.0);
  CHECK(res.diag.empty_prediction);
  CHECK(res.t_len == t_len - 1);
}

TEST_CASE("run_filter day-t prediction cannot see day-t sentiment") {
  const auto sim = simulate_modified(ModelParams{}, SentimentGenSpec{}, 120, 640);
  FilterData data{sim.bars, sim.sentiment, {}};
  const Triple triple{0.3, 0.7, 0.6};

  const RunResult clean = run_filter(data, ModelParams{}, triple);

  FilterData tampered = data;
  tampered.sentiment.back().s_idio = 0.9;
  tampered.sentiment.back().s_macro = -0.9;
  const RunResult poked = run_filter(tampered, ModelParams{}, triple);

  // every prediction, the last day's included, is bit-identical
  for (std::size_t t = 1; t < clean.predicted_returns.size(); ++t) {
    CHECK(clean.predicted_returns[t] == poked.predicted_returns[t]);
  }
}

// Seed frozen after measuring the run: precision 0.979 on 95 predicted jump
// days at the generating triple, objective 0.364.
TEST_CASE("run_filter keeps high precision on a loud planted fixture") {
  ModelParams p;
  p.phi = 0.6;
  p.g = 1.0;
  p.kappa0 = 2.5;
  p.mem_idio = MemoryParams(0.3);
  p.mem_macro = MemoryParams(0.7);
  SentimentGenSpec gen;
  gen.spike_prob_idio = 0.1;
  gen.spike_prob_macro = 0.1;
  gen.spike_scale = 0.3;

  const std::uint64_t seed = 9;
  const auto sim = simulate_modified(p, gen, 251, seed);
  FilterData data{sim.bars, sim.sentiment, {}};

  const RunResult res = run_filter(data, p, Triple{0.3, 0.7, 0.6});
  REQUIRE(!res.diag.empty_prediction);
  CHECK(res.jumps_pred.total() >= 50);
  CHECK(res.precision >= 0.9);
  CHECK(res.objective > 0.25);
}

// Tolerances frozen from the measured run: max lagged error 2.8e-7 with the
// lagged alignment beating the unlagged one by ~6e12 in sse.
TEST_CASE("run_filter eta_series is the one-day-lagged memory") {
  ModelParams p;
  p.phi = 0.6;
  p.kappa0 = 2.5;
  p.sigma_eps = 0.0;  // noiseless latent so the truth is trackable
  p.sigma_z = 1e-6;
  p.mem_idio = MemoryParams(0.3);
  p.mem_macro = MemoryParams(0.7);
  SentimentGenSpec gen;
  gen.spike_prob_idio = 0.15;
  gen.spike_prob_macro = 0.15;
  gen.spike_scale = 0.3;

  const std::uint64_t seed = 3;
  const auto sim = simulate_modified(p, gen, 200, seed);
  REQUIRE(sim.sentiment[0].s_idio == 0.0);  // quiet day 0, no startup offset
  REQUIRE(sim.sentiment[0].s_macro == 0.0);

  FilterData data{sim.bars, sim.sentiment, {}};
  const RunResult res = run_filter(data, p, Triple{0.3, 0.7, 0.6});

  double max_err_lag = 0.0, sse_lag = 0.0, sse_unlag = 0.0;
  for (int t = 1; t < 200; ++t) {
    const double d_lag = res.eta_series[t] - sim.truth.eta[t - 1];
    const double d_unlag = res.eta_series[t] - sim.truth.eta[t];
    max_err_lag = std::max(max_err_lag, std::abs(d_lag));
    sse_lag += d_lag * d_lag;
    sse_unlag += d_unlag * d_unlag;
  }
  CHECK(max_err_lag < 1e-5);
  CHECK(sse_lag * 1e4 < sse_unlag);
}

TEST_CASE("run_filter innovation gate freezes the belief") {
  const auto sim = simulate_modified(ModelParams{}, SentimentGenSpec{}, 80, 17);
  FilterData data{sim.bars, sim.sentiment, {}};
  const Triple triple{0.3, 0.7, 0.6};

  FilterOptions open;
  const RunResult free_run = run_filter(data, ModelParams{}, triple, open);
  CHECK(free_run.diag.gate_skips == 0);

  FilterOptions tight;
  tight.innovation_gate = 1e-9;
  const RunResult gated = run_filter(data, ModelParams{}, triple, tight);
  CHECK(gated.diag.gate_skips > 60);
}

TEST_CASE("GridSpec axis and validation") {
  GridSpec g;
  const auto full = g.axis(0.0, 1.0);
  REQUIRE(full.size() == 9);
  CHECK(full.front() == doctest::Approx(0.1));
  CHECK(full.back() == doctest::Approx(0.9));

  const auto windowed = g.axis(0.35, 0.75);
  REQUIRE(windowed.size() == 4);
  CHECK(windowed.front() == doctest::Approx(0.4));
  CHECK(windowed.back() == doctest::Approx(0.7));

  GridSpec coarse;
  coarse.coef_err = 1.0 / 3.0;
  CHECK(coarse.axis(0.0, 1.0).size() == 2);

  GridSpec bad;
  bad.coef_err = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.coef_err = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  GridSpec crossed;
  crossed.p_idio_min = 0.8;
  crossed.p_idio_max = 0.2;
  CHECK_THROWS_AS(crossed.validate(), std::invalid_argument);
}

TEST_CASE("grid_search ties resolve to the lexicographically smallest triple") {
  // constant returns, silent sentiment: U = 0 at every point
  ModelParams p;
  const int t_len = 30;
  FilterData data;
  data.bars = bars_from_return_list(std::vector<double>(t_len, p.mu));
  data.sentiment = quiet_sentiment(t_len);

  GridSpec grid;
  grid.p_idio_max = 0.3;
  grid.p_macro_max = 0.3;
  grid.phi_max = 0.3;
  const GridResult res = grid_search(data, p, grid, FilterOptions{}, 1);
  CHECK(res.surface.size() == 27);
  CHECK(res.failed_points == 0);
  CHECK(res.best == Triple{0.1, 0.1, 0.1});
  CHECK(res.best_run.objective == 0.0);
}

TEST_CASE("grid_search honors single-point bounds") {
  const auto sim = simulate_modified(ModelParams{}, SentimentGenSpec{}, 60, 5);
  FilterData data{sim.bars, sim.sentiment, {}};

  GridSpec grid;
  grid.p_idio_min = grid.p_idio_max = 0.5;
  grid.p_macro_min = grid.p_macro_max = 0.5;
  grid.phi_min = grid.phi_max = 0.5;
  const GridResult res = grid_search(data, ModelParams{}, grid);
  CHECK(res.surface.size() == 1);
  CHECK(res.best == Triple{0.5, 0.5, 0.5});

  GridSpec empty;
  empty.p_idio_min = 0.11;
  empty.p_idio_max = 0.19;  // no lattice point in the window
  CHECK_THROWS_AS(grid_search(data, ModelParams{}, empty), std::invalid_argument);
}

TEST_CASE("grid_search worker pool matches the serial pass") {
  const auto sim = simulate_modified(ModelParams{}, SentimentGenSpec{}, 60, 23);
  FilterData data{sim.bars, sim.sentiment, {}};
  GridSpec grid;
  grid.p_idio_max = 0.3;
  grid.p_macro_max = 0.3;
  grid.phi_max = 0.3;

  const GridResult serial = grid_search(data, ModelParams{}, grid, FilterOptions{}, 1);
  const GridResult pooled = grid_search(data, ModelParams{}, grid, FilterOptions{}, 3);
  CHECK(serial.best == pooled.best);
  REQUIRE(serial.surface.size() == pooled.surface.size());
  for (std::size_t i = 0; i < serial.surface.size(); ++i) {
    CHECK(serial.surface[i].objective == pooled.surface[i].objective);
  }
}

TEST_CASE("grid_search reports when every point fails") {
  ModelParams p;
  p.q_eta = 1e308;  // covariance overflows on the first update
  const auto sim = simulate_modified(ModelParams{}, SentimentGenSpec{}, 40, 2);
  FilterData data{sim.bars, sim.sentiment, {}};
  GridSpec grid;
  grid.p_idio_min = grid.p_idio_max = 0.5;
  grid.p_macro_min = grid.p_macro_max = 0.5;
  grid.phi_min = grid.phi_max = 0.5;
  CHECK_THROWS_AS(grid_search(data, p, grid), OptimizationError);
}
