#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "senti_levy/model.hpp"
#include "senti_levy/optimizer.hpp"
#include "senti_levy/rng.hpp"
#include "senti_levy/sentiment.hpp"
#include "senti_levy/simulator.hpp"
#include "senti_levy/ukf.hpp"

namespace py = pybind11;
using namespace sentilevy;

PYBIND11_MODULE(_senti_levy, m) {
  m.doc() = "Jump prediction with exponentially decaying sentiment memory";
  m.attr("STATE_DIM") = kStateDim;

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<FilterError>(m, "FilterError");
  py::register_exception<OptimizationError>(m, "OptimizationError");
  py::register_exception<DegenerateMarketError>(m, "DegenerateMarketError");

  // ---- plain data ----

  py::class_<DailyBar>(m, "DailyBar")
      .def(py::init<>())
      .def(py::init([](int day_index, double close, double log_return) {
             return DailyBar{day_index, close, log_return};
           }),
           py::arg("day_index"), py::arg("close"), py::arg("log_return") = 0.0)
      .def_readwrite("day_index", &DailyBar::day_index)
      .def_readwrite("close", &DailyBar::close)
      .def_readwrite("log_return", &DailyBar::log_return);

  py::class_<SentimentDay>(m, "SentimentDay")
      .def(py::init<>())
      .def(py::init([](int day_index, double s_idio, double s_macro, double e_idio,
                       double e_macro) {
             return SentimentDay{day_index, s_idio, s_macro, e_idio, e_macro};
           }),
           py::arg("day_index"), py::arg("s_idio"), py::arg("s_macro"),
           py::arg("e_idio") = 1.0, py::arg("e_macro") = 1.0)
      .def_readwrite("day_index", &SentimentDay::day_index)
      .def_readwrite("s_idio", &SentimentDay::s_idio)
      .def_readwrite("s_macro", &SentimentDay::s_macro)
      .def_readwrite("e_idio", &SentimentDay::e_idio)
      .def_readwrite("e_macro", &SentimentDay::e_macro);

  py::enum_<Stream>(m, "Stream")
      .value("IDIOSYNCRATIC", Stream::Idiosyncratic)
      .value("MACRO", Stream::Macro);

  py::class_<ScoredMessage>(m, "ScoredMessage")
      .def(py::init<>())
      .def(py::init([](Stream stream, double compound, double neutral) {
             return ScoredMessage{0, stream, compound, neutral};
           }),
           py::arg("stream"), py::arg("compound"), py::arg("neutral"))
      .def_readwrite("day_index", &ScoredMessage::day_index)
      .def_readwrite("stream", &ScoredMessage::stream)
      .def_readwrite("compound", &ScoredMessage::compound)
      .def_readwrite("neutral", &ScoredMessage::neutral);

  py::class_<MarketDay>(m, "MarketDay")
      .def(py::init<>())
      .def(py::init([](int day_index, double r, double r_market, double r_free) {
             return MarketDay{day_index, r, r_market, r_free};
           }),
           py::arg("day_index"), py::arg("r"), py::arg("r_market"), py::arg("r_free") = 0.0)
      .def_readwrite("day_index", &MarketDay::day_index)
      .def_readwrite("r", &MarketDay::r)
      .def_readwrite("r_market", &MarketDay::r_market)
      .def_readwrite("r_free", &MarketDay::r_free);

  // ---- model configuration ----

  py::class_<MemoryParams>(m, "MemoryParams")
      .def(py::init<>())
      .def(py::init<double>(), py::arg("p"))
      .def_property_readonly("p", &MemoryParams::p)
      .def_property_readonly("a", &MemoryParams::a);

  py::class_<WeightPolicy> weight_policy(m, "WeightPolicy");
  py::enum_<WeightPolicy::Mode>(weight_policy, "Mode")
      .value("JENSEN_DYNAMIC", WeightPolicy::Mode::JensenDynamic)
      .value("FIXED", WeightPolicy::Mode::Fixed);
  weight_policy.def(py::init<>())
      .def_readwrite("mode", &WeightPolicy::mode)
      .def_readwrite("c_idio", &WeightPolicy::c_idio)
      .def_readwrite("clamp_lo", &WeightPolicy::clamp_lo)
      .def_readwrite("clamp_hi", &WeightPolicy::clamp_hi)
      .def("validate", &WeightPolicy::validate);

  py::class_<Weights>(m, "Weights")
      .def(py::init<>())
      .def(py::init([](double c_idio, double c_macro) {
             return Weights{c_idio, c_macro};
           }),
           py::arg("c_idio"), py::arg("c_macro"))
      .def_readwrite("c_idio", &Weights::c_idio)
      .def_readwrite("c_macro", &Weights::c_macro);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("mu", &ModelParams::mu)
      .def_readwrite("nu", &ModelParams::nu)
      .def_readwrite("sigma", &ModelParams::sigma)
      .def_readwrite("phi", &ModelParams::phi)
      .def_readwrite("g", &ModelParams::g)
      .def_readwrite("mem_idio", &ModelParams::mem_idio)
      .def_readwrite("mem_macro", &ModelParams::mem_macro)
      .def_readwrite("kappa0", &ModelParams::kappa0)
      .def_readwrite("rf_daily", &ModelParams::rf_daily)
      .def_readwrite("beta_window", &ModelParams::beta_window)
      .def_readwrite("weights", &ModelParams::weights)
      .def_readwrite("sigma_z", &ModelParams::sigma_z)
      .def_readwrite("sigma_eps", &ModelParams::sigma_eps)
      .def_readwrite("q_eta", &ModelParams::q_eta)
      .def_readwrite("r_floor", &ModelParams::r_floor)
      .def_readwrite("eps_eta", &ModelParams::eps_eta)
      .def("validate", &ModelParams::validate);

  py::class_<ModelState>(m, "ModelState")
      .def(py::init<>())
      .def(py::init([](double r, double kappa, double eta, double eta_idio, double eta_macro) {
             return ModelState{r, kappa, eta, eta_idio, eta_macro};
           }),
           py::arg("r"), py::arg("kappa"), py::arg("eta"), py::arg("eta_idio"),
           py::arg("eta_macro"))
      .def_readwrite("r", &ModelState::r)
      .def_readwrite("kappa", &ModelState::kappa)
      .def_readwrite("eta", &ModelState::eta)
      .def_readwrite("eta_idio", &ModelState::eta_idio)
      .def_readwrite("eta_macro", &ModelState::eta_macro)
      .def("to_vector", &ModelState::to_vector)
      .def_static("from_vector", &ModelState::from_vector)
      .def("finite", &ModelState::finite);

  py::class_<Belief>(m, "Belief")
      .def(py::init<>())
      .def_readwrite("mean", &Belief::mean)
      .def_readwrite("cov", &Belief::cov);

  // ---- core model ----

  m.def("memory_step", &memory_step, py::arg("eta_prev"), py::arg("s"), py::arg("mem"));
  m.def("combine_eta", &combine_eta, py::arg("eta_idio"), py::arg("eta_macro"),
        py::arg("weights"));
  m.def("transition", &transition, py::arg("x"), py::arg("u"), py::arg("weights"),
        py::arg("params"));
  m.def("measure", &measure, py::arg("x"));
  m.def(
      "kappa_star",
      [](double r_obs, double eta, const ModelParams& p) {
        bool clamped = false;
        const double v = kappa_star(r_obs, eta, p, &clamped);
        return py::make_tuple(v, clamped);
      },
      py::arg("r_obs"), py::arg("eta"), py::arg("params"),
      "Returns (kappa_star, eta_was_clamped).");
  m.def("initial_belief", &initial_belief, py::arg("params"), py::arg("p0_r") = -1.0,
        py::arg("p0_kappa") = 1.0, py::arg("p0_eta") = 0.1);
  m.def("process_noise", &process_noise, py::arg("params"));

  // ---- unscented transform ----

  py::class_<ukf::SigmaConfig>(m, "SigmaConfig")
      .def(py::init<>())
      .def(py::init([](double alpha, double beta, double kappa, int n) {
             return ukf::SigmaConfig{alpha, beta, kappa, n};
           }),
           py::arg("alpha") = 0.5, py::arg("beta") = 2.0, py::arg("kappa") = 0.0,
           py::arg("n") = kStateDim)
      .def_readwrite("alpha", &ukf::SigmaConfig::alpha)
      .def_readwrite("beta", &ukf::SigmaConfig::beta)
      .def_readwrite("kappa", &ukf::SigmaConfig::kappa)
      .def_readwrite("n", &ukf::SigmaConfig::n)
      .def("scale", &ukf::SigmaConfig::scale)
      .def("validate", &ukf::SigmaConfig::validate);

  py::class_<ukf::SigmaSet>(m, "SigmaSet")
      .def_readonly("points", &ukf::SigmaSet::points)
      .def_readonly("w_mean", &ukf::SigmaSet::w_mean)
      .def_readonly("w_cov", &ukf::SigmaSet::w_cov);

  py::class_<ukf::Gaussian>(m, "Gaussian")
      .def(py::init<>())
      .def(py::init([](const Vec& mean, const Mat& cov) {
             return ukf::Gaussian{mean, cov};
           }),
           py::arg("mean"), py::arg("cov"))
      .def_readwrite("mean", &ukf::Gaussian::mean)
      .def_readwrite("cov", &ukf::Gaussian::cov);

  py::class_<ukf::UpdateResult>(m, "UpdateResult")
      .def_readonly("posterior", &ukf::UpdateResult::posterior)
      .def_readonly("innovation", &ukf::UpdateResult::innovation);

  m.def(
      "cholesky_with_jitter",
      [](const Mat& mat, const std::string& what) {
        return ukf::cholesky_with_jitter(mat, what.c_str());
      },
      py::arg("m"), py::arg("what") = "matrix");
  m.def("sigma_points", &ukf::sigma_points, py::arg("mean"), py::arg("cov"), py::arg("config"));
  m.def("ukf_predict", &ukf::predict, py::arg("belief"), py::arg("dynamics"), py::arg("q"),
        py::arg("config"));
  m.def("ukf_update", &ukf::update, py::arg("prior"), py::arg("measurement"), py::arg("z"),
        py::arg("r"), py::arg("config"));

  // ---- sentiment aggregation and weights ----

  py::class_<DayAggregate>(m, "DayAggregate")
      .def(py::init<>())
      .def_readwrite("s", &DayAggregate::s)
      .def_readwrite("e", &DayAggregate::e);

  py::class_<WeightsResult>(m, "WeightsResult")
      .def_readonly("w", &WeightsResult::w)
      .def_readonly("clamped", &WeightsResult::clamped)
      .def_readonly("degenerate", &WeightsResult::degenerate);

  m.def("aggregate_day", &aggregate_day, py::arg("messages"));
  m.def("beta_market", &beta_market, py::arg("history"), py::arg("window"));
  m.def("jensen_alpha", &jensen_alpha, py::arg("day"), py::arg("beta"));
  m.def("weights_for_day", &weights_for_day, py::arg("day"), py::arg("beta"), py::arg("policy"),
        py::arg("tol") = 1e-6);

  // ---- deterministic rng ----

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal)
      .def("poisson", &Rng::poisson, py::arg("lam"))
      .def_readonly_static("TAG", &Rng::kTag);

  // ---- simulators ----

  py::class_<LevyParams>(m, "LevyParams")
      .def(py::init<>())
      .def_readwrite("mu", &LevyParams::mu)
      .def_readwrite("sigma_z", &LevyParams::sigma_z)
      .def_readwrite("lambda_j", &LevyParams::lambda_j)
      .def_readwrite("kappa_j", &LevyParams::kappa_j)
      .def_readwrite("sigma_j", &LevyParams::sigma_j)
      .def("validate", &LevyParams::validate);

  py::class_<SentimentGenSpec>(m, "SentimentGenSpec")
      .def(py::init<>())
      .def_readwrite("spike_prob_idio", &SentimentGenSpec::spike_prob_idio)
      .def_readwrite("spike_prob_macro", &SentimentGenSpec::spike_prob_macro)
      .def_readwrite("spike_scale", &SentimentGenSpec::spike_scale)
      .def_readwrite("e_level", &SentimentGenSpec::e_level)
      .def("validate", &SentimentGenSpec::validate);

  py::class_<SyntheticTruth>(m, "SyntheticTruth")
      .def_readonly("kappa", &SyntheticTruth::kappa)
      .def_readonly("eta", &SyntheticTruth::eta)
      .def_readonly("eta_idio", &SyntheticTruth::eta_idio)
      .def_readonly("eta_macro", &SyntheticTruth::eta_macro)
      .def_readonly("jump", &SyntheticTruth::jump);

  py::class_<ModifiedSimResult>(m, "ModifiedSimResult")
      .def_readonly("bars", &ModifiedSimResult::bars)
      .def_readonly("sentiment", &ModifiedSimResult::sentiment)
      .def_readonly("truth", &ModifiedSimResult::truth);

  py::class_<Calibration>(m, "Calibration")
      .def_readonly("mu", &Calibration::mu)
      .def_readonly("sigma", &Calibration::sigma)
      .def_readonly("nu", &Calibration::nu);

  m.def("simulate_levy", &simulate_levy, py::arg("params"), py::arg("t_len"), py::arg("seed"));
  m.def("simulate_modified", &simulate_modified, py::arg("params"), py::arg("gen"),
        py::arg("t_len"), py::arg("seed"), py::arg("gen_weights") = Weights{0.5, 0.5});
  m.def("calibrate", &calibrate, py::arg("training"), py::arg("long_history"));

  // ---- jump objective and grid search ----

  py::class_<JumpSet>(m, "JumpSet")
      .def(py::init<>())
      .def_readwrite("positive", &JumpSet::positive)
      .def_readwrite("negative", &JumpSet::negative)
      .def("total", &JumpSet::total)
      .def("shifted", &JumpSet::shifted, py::arg("offset"));

  m.def("detect_jumps", &detect_jumps, py::arg("returns"), py::arg("mu"), py::arg("sigma"));
  m.def("objective_u", &objective_u, py::arg("predicted"), py::arg("actual"), py::arg("t_len"));
  m.def(
      "precision",
      [](const JumpSet& predicted, const JumpSet& actual) {
        bool empty = false;
        const double v = precision(predicted, actual, &empty);
        return py::make_tuple(v, empty);
      },
      py::arg("predicted"), py::arg("actual"), "Returns (precision, prediction_set_is_empty).");
  m.def(
      "tolerant_precision",
      [](const JumpSet& predicted, const JumpSet& actual) {
        bool empty = false;
        const double v = tolerant_precision(predicted, actual, &empty);
        return py::make_tuple(v, empty);
      },
      py::arg("predicted"), py::arg("actual"),
      "Precision with a +-1 day slack; returns (value, prediction_set_is_empty).");

  py::class_<Triple>(m, "Triple")
      .def(py::init<>())
      .def(py::init([](double p_idio, double p_macro, double phi) {
             return Triple{p_idio, p_macro, phi};
           }),
           py::arg("p_idio"), py::arg("p_macro"), py::arg("phi"))
      .def_readwrite("p_idio", &Triple::p_idio)
      .def_readwrite("p_macro", &Triple::p_macro)
      .def_readwrite("phi", &Triple::phi)
      .def(py::self == py::self);

  py::class_<FilterData>(m, "FilterData")
      .def(py::init<>())
      .def_readwrite("bars", &FilterData::bars)
      .def_readwrite("sentiment", &FilterData::sentiment)
      .def_readwrite("market", &FilterData::market);

  py::class_<FilterOptions>(m, "FilterOptions")
      .def(py::init<>())
      .def_readwrite("sigma", &FilterOptions::sigma)
      .def_readwrite("innovation_gate", &FilterOptions::innovation_gate)
      .def_readwrite("p0_r", &FilterOptions::p0_r)
      .def_readwrite("p0_kappa", &FilterOptions::p0_kappa)
      .def_readwrite("p0_eta", &FilterOptions::p0_eta)
      .def_readwrite("track_spectrum", &FilterOptions::track_spectrum);

  py::class_<RunDiagnostics>(m, "RunDiagnostics")
      .def_readonly("kappa_clamps", &RunDiagnostics::kappa_clamps)
      .def_readonly("weight_clamps", &RunDiagnostics::weight_clamps)
      .def_readonly("weight_degenerate_days", &RunDiagnostics::weight_degenerate_days)
      .def_readonly("gate_skips", &RunDiagnostics::gate_skips)
      .def_readonly("max_abs_innovation_r", &RunDiagnostics::max_abs_innovation_r)
      .def_readonly("max_abs_innovation_kappa", &RunDiagnostics::max_abs_innovation_kappa)
      .def_readonly("min_posterior_eigenvalue", &RunDiagnostics::min_posterior_eigenvalue)
      .def_readonly("empty_prediction", &RunDiagnostics::empty_prediction);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("predicted_returns", &RunResult::predicted_returns)
      .def_readonly("eta_series", &RunResult::eta_series)
      .def_readonly("jumps_pred", &RunResult::jumps_pred)
      .def_readonly("jumps_actual", &RunResult::jumps_actual)
      .def_readonly("t_len", &RunResult::t_len)
      .def_readonly("objective", &RunResult::objective)
      .def_readonly("precision", &RunResult::precision)
      .def_readonly("diag", &RunResult::diag);

  m.def("run_filter", &run_filter, py::arg("data"), py::arg("params"), py::arg("triple"),
        py::arg("options") = FilterOptions{});

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("coef_err", &GridSpec::coef_err)
      .def_readwrite("p_idio_min", &GridSpec::p_idio_min)
      .def_readwrite("p_idio_max", &GridSpec::p_idio_max)
      .def_readwrite("p_macro_min", &GridSpec::p_macro_min)
      .def_readwrite("p_macro_max", &GridSpec::p_macro_max)
      .def_readwrite("phi_min", &GridSpec::phi_min)
      .def_readwrite("phi_max", &GridSpec::phi_max)
      .def("axis", &GridSpec::axis, py::arg("lo"), py::arg("hi"))
      .def("validate", &GridSpec::validate);

  py::class_<SurfacePoint>(m, "SurfacePoint")
      .def_readonly("triple", &SurfacePoint::triple)
      .def_readonly("objective", &SurfacePoint::objective)
      .def_readonly("precision", &SurfacePoint::precision)
      .def_readonly("failed", &SurfacePoint::failed);

  py::class_<GridResult>(m, "GridResult")
      .def_readonly("best", &GridResult::best)
      .def_readonly("best_run", &GridResult::best_run)
      .def_readonly("surface", &GridResult::surface)
      .def_readonly("failed_points", &GridResult::failed_points);

  m.def("grid_search", &grid_search, py::arg("data"), py::arg("params"), py::arg("grid"),
        py::arg("options") = FilterOptions{}, py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());
}
