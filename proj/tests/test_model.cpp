#include "senti_levy/model.hpp"

#include "doctest.h"
#include "oracles.hpp"

using namespace sentilevy;

TEST_CASE("memory_step basic values") {
  CHECK(memory_step(0.0, 1.0, MemoryParams(0.5)) == doctest::Approx(0.5));
  CHECK(memory_step(3.0, 0.0, MemoryParams(0.9)) == doctest::Approx(2.7));
  // p + a = 1 makes prev = s a fixed point regardless of p
  CHECK(memory_step(1.0, 1.0, MemoryParams(0.11)) == doctest::Approx(1.0));
}

TEST_CASE("memory_step matches the geometric-sum oracle") {
  oracles::TestRng rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    const double p = rng.uniform(0.0, 0.999);
    const double eta0 = rng.uniform(-2.0, 2.0);
    const int m = rng.uniform_int(1, 40);
    std::vector<double> s(m);
    for (double& v : s) v = rng.uniform(-1.0, 1.0);

    double eta = eta0;
    const MemoryParams mem(p);
    for (double v : s) eta = memory_step(eta, v, mem);
    CHECK(eta == doctest::Approx(oracles::memory_closed_form(p, eta0, s)).epsilon(1e-10));
  }
}

TEST_CASE("MemoryParams rejects p outside [0, 1)") {
  CHECK_THROWS_AS(MemoryParams(1.0), std::invalid_argument);
  CHECK_THROWS_AS(MemoryParams(-0.1), std::invalid_argument);
  CHECK(MemoryParams(0.0).a() == doctest::Approx(1.0));
}

TEST_CASE("combine_eta selects and blends") {
  CHECK(combine_eta(2.0, 5.0, Weights{1.0, 0.0}) == doctest::Approx(2.0));
  CHECK(combine_eta(2.0, 5.0, Weights{0.0, 1.0}) == doctest::Approx(5.0));
  CHECK(combine_eta(1.0, 3.0, Weights{0.25, 0.75}) == doctest::Approx(2.5));
  CHECK_THROWS_AS(combine_eta(1.0, 1.0, Weights{0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(combine_eta(1.0, 1.0, Weights{-0.1, 1.1}), std::invalid_argument);
}

namespace {

ModelParams simple_params(double mu, double nu, double phi, double p_i, double p_m) {
  ModelParams p;
  p.mu = mu;
  p.nu = nu;
  p.phi = phi;
  p.g = 1.0;
  p.mem_idio = MemoryParams(p_i);
  p.mem_macro = MemoryParams(p_m);
  return p;
}

}  // namespace

TEST_CASE("transition from the zero state keeps only drift and innovation") {
  const ModelParams p = simple_params(0.002, 0.001, 0.5, 0.5, 0.5);
  const ModelState out =
      transition(ModelState{}, SentimentDay{0, 0.0, 0.0, 1.0, 1.0}, Weights{0.5, 0.5}, p);
  CHECK(out.r == doctest::Approx(p.mu - p.nu));
  CHECK(out.kappa == doctest::Approx(1.0));
  CHECK(out.eta == doctest::Approx(0.0));
  CHECK(out.eta_idio == doctest::Approx(0.0));
  CHECK(out.eta_macro == doctest::Approx(0.0));
}

TEST_CASE("transition hand evaluation") {
  // r uses the incoming kappa * eta; memories step first, then combine.
  const ModelParams p = simple_params(0.0, 0.0, 0.5, 0.5, 0.5);
  const ModelState in{0.0, 1.0, 1.0, 1.0, 1.0};
  const ModelState out =
      transition(in, SentimentDay{0, 0.0, 0.0, 1.0, 1.0}, Weights{0.5, 0.5}, p);
  CHECK(out.r == doctest::Approx(1.0));
  CHECK(out.kappa == doctest::Approx(1.5));
  CHECK(out.eta == doctest::Approx(0.5));
  CHECK(out.eta_idio == doctest::Approx(0.5));
  CHECK(out.eta_macro == doctest::Approx(0.5));
}

TEST_CASE("iterated transition reproduces geometric memory sums") {
  const ModelParams p = simple_params(0.0, 0.0, 0.5, 0.3, 0.8);
  const SentimentDay u{0, 1.0, 1.0, 1.0, 1.0};
  ModelState x{};
  for (int i = 0; i < 3; ++i) x = transition(x, u, Weights{0.5, 0.5}, p);

  const std::vector<double> ones{1.0, 1.0, 1.0};
  CHECK(x.eta_idio == doctest::Approx(oracles::memory_closed_form(0.3, 0.0, ones)).epsilon(1e-12));
  CHECK(x.eta_macro ==
        doctest::Approx(oracles::memory_closed_form(0.8, 0.0, ones)).epsilon(1e-12));
  CHECK(x.eta == doctest::Approx(0.5 * x.eta_idio + 0.5 * x.eta_macro));
}

TEST_CASE("transition rejects a blown-up state") {
  // kappa * eta overflows the r row to inf
  const ModelParams p = simple_params(0.0, 0.0, 0.5, 0.5, 0.5);
  const ModelState in{0.0, 1e308, 1e10, 1e10, 1e10};
  CHECK_THROWS_AS(transition(in, SentimentDay{}, Weights{0.5, 0.5}, p), FilterError);
}

TEST_CASE("measure projects the first two components") {
  const Eigen::Vector2d z = measure(ModelState{0.1, 2.0, 7.0, 8.0, 9.0});
  CHECK(z(0) == doctest::Approx(0.1));
  CHECK(z(1) == doctest::Approx(2.0));
  const Eigen::Vector2d zero = measure(ModelState{});
  CHECK(zero(0) == 0.0);
  CHECK(zero(1) == 0.0);
}

TEST_CASE("kappa_star handles the clamped denominator") {
  ModelParams p = simple_params(0.001, 0.0005, 0.5, 0.5, 0.5);

  bool clamped = true;
  CHECK(kappa_star(p.mu - p.nu, 0.5, p, &clamped) == doctest::Approx(0.0));
  CHECK_FALSE(clamped);

  CHECK(kappa_star(p.mu - p.nu + 0.02, 0.04, p, &clamped) == doctest::Approx(0.5));
  CHECK_FALSE(clamped);

  p.eps_eta = 1e-3;
  CHECK(kappa_star(p.mu - p.nu + 0.02, 0.0, p, &clamped) == doctest::Approx(20.0));
  CHECK(clamped);
  // sign is preserved for negative eta
  CHECK(kappa_star(p.mu - p.nu + 0.02, -1e-9, p, &clamped) == doctest::Approx(-20.0));
  CHECK(clamped);
}

TEST_CASE("initial belief and process noise diagonals") {
  ModelParams p = simple_params(0.0, 0.0, 0.5, 0.5, 0.5);
  p.sigma = 0.02;
  p.kappa0 = 1.5;
  p.sigma_z = 0.01;
  p.sigma_eps = 0.2;
  p.q_eta = 1e-3;

  const Belief b = initial_belief(p);
  CHECK(b.mean.kappa == doctest::Approx(1.5));
  CHECK(b.mean.r == 0.0);
  CHECK(b.mean.eta == 0.0);
  CHECK(b.cov(0, 0) == doctest::Approx(0.02 * 0.02));
  CHECK(b.cov(1, 1) == doctest::Approx(1.0));
  CHECK(b.cov(2, 2) == doctest::Approx(0.1));

  const StateMat q = process_noise(p);
  CHECK(q(0, 0) == doctest::Approx(1e-4));
  CHECK(q(1, 1) == doctest::Approx(0.04));
  CHECK(q(2, 2) == doctest::Approx(1e-3));
  CHECK(q(4, 4) == doctest::Approx(1e-3));
}

TEST_CASE("ModelParams validation") {
  ModelParams p;
  p.phi = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.phi = 0.5;
  p.sigma = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.sigma = 0.01;
  p.beta_window = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.beta_window = 60;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("state vector round trip") {
  const ModelState s{0.1, 0.2, 0.3, 0.4, 0.5};
  const ModelState back = ModelState::from_vector(s.to_vector());
  CHECK(back.r == s.r);
  CHECK(back.kappa == s.kappa);
  CHECK(back.eta == s.eta);
  CHECK(back.eta_idio == s.eta_idio);
  CHECK(back.eta_macro == s.eta_macro);
  CHECK_THROWS_AS(ModelState::from_vector(Vec::Zero(4)), std::invalid_argument);
}
