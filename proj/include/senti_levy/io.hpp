#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "senti_levy/optimizer.hpp"
#include "senti_levy/simulator.hpp"

namespace sentilevy::io {

// ---- dates (ISO YYYY-MM-DD) ----

bool is_iso_date(const std::string& s);

// n consecutive Mon-Fri dates starting at `start` (moved forward to a weekday
// if it falls on a weekend).
std::vector<std::string> weekday_calendar(const std::string& start, int n);

// ---- formatting ----

// %.17g: shortest form that round-trips a double exactly.
std::string fmt_double(double v);

// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string file_digest(const std::string& path);

// ---- generic key=value files ----

// Lines of key=value; blank lines and '#' comments skipped. Keys must be
// unique. Used for both run configs and fitted-parameter files.
std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path);

// ---- run configuration ----

// All knobs of the tool. NaN-able fields mean "calibrate from data" (mu,
// sigma, nu), "track sigma" (sigma_z) or "use the documented default" (p0_r).
struct RunConfig {
  // input files
  std::string prices;
  std::string sentiment;
  std::string sentiment_mode = "aggregated";  // or "messages"
  std::string market;
  std::string riskfree;

  // date ranges; empty strings mean the bounds of the price file
  std::string history_start;
  std::string train_start;
  std::string train_end;
  std::string test_start;
  std::string test_end;

  // model scalars
  double mu = nan_value();
  double sigma = nan_value();
  double nu = nan_value();
  double p_idio = 0.5;
  double p_macro = 0.5;
  double phi = 0.5;
  double g = 1.0;
  double kappa0 = 0.0;
  double rf_daily = 0.0;
  int beta_window = 60;
  std::string weights_mode = "fixed";  // or "jensen"
  double c_idio = 0.5;

  // noise levels
  double sigma_z = nan_value();
  double sigma_eps = 0.1;
  double q_eta = 1e-4;
  double r_floor = 1e-8;
  double eps_eta = 1e-4;

  // filter
  double ukf_alpha = 0.5;
  double ukf_beta = 2.0;
  double ukf_kappa = 0.0;
  double innovation_gate = 0.0;
  double p0_r = nan_value();
  double p0_kappa = 1.0;
  double p0_eta = 0.1;

  // grid
  double coef_err = 0.1;
  double p_idio_min = 0.0, p_idio_max = 1.0;
  double p_macro_min = 0.0, p_macro_max = 1.0;
  double phi_min = 0.0, phi_max = 1.0;
  int threads = 0;

  // simulator
  std::string sim_kind = "modified";  // or "levy"
  int sim_days = 750;
  std::string sim_start_date = "2016-01-04";
  double lambda_j = 0.05;
  double kappa_j = 0.0;
  double sigma_j = 0.03;
  double spike_prob_idio = 0.06;
  double spike_prob_macro = 0.04;
  double spike_scale = 0.08;
  double e_level = 0.3;

  std::uint64_t seed = 1;
  std::string out_dir = ".";

  static double nan_value();

  static RunConfig from_file(const std::string& path);
  // "key=value" override, e.g. from a --set flag. Unknown keys are DataErrors.
  void apply_override(const std::string& kv);
  void set(const std::string& key, const std::string& value);

  ModelParams model_params() const;     // resolves NaN fields to defaults
  FilterOptions filter_options() const;
  GridSpec grid_spec() const;
};

// ---- datasets ----

// Full calendar of the price file with aligned sentiment/market series.
struct Dataset {
  std::vector<std::string> dates;
  FilterData data;  // market stays empty unless requested
};

struct PriceSeries {
  std::vector<std::string> dates;
  std::vector<DailyBar> bars;
};

// CSV "date,close": ISO dates strictly increasing, closes positive. Returns
// are recomputed from the closes, so write/load round-trips bit-exactly.
PriceSeries load_prices(const std::string& path);

// Sentiment aligned to the price calendar. Aggregated mode reads
// "date,s_idio,s_macro,e_idio,e_macro"; messages mode reads
// "date,stream,compound,neutral" (stream in {idio, macro}) and aggregates per
// day. Price dates with no sentiment get (0, 0, 1, 1); dates outside the
// price calendar are errors.
std::vector<SentimentDay> load_sentiment(const std::string& path, const std::string& mode,
                                         const std::vector<std::string>& price_dates);

// Market series aligned to the price calendar from a "date,close" file that
// must cover every price date (extra dates are ignored). Risk-free rates come
// from an optional "date,rate" file, else the constant rf_daily.
std::vector<MarketDay> load_market(const std::string& market_path,
                                   const std::string& riskfree_path, double rf_daily,
                                   const PriceSeries& prices);

// Loads everything named by the config. with_market controls whether the
// market/riskfree files are read (needed only for jensen weights).
Dataset load_dataset(const RunConfig& cfg, bool with_market);

// `comments` lines are written first as '#' comments (loaders skip them).
void write_prices(const std::string& path, const std::vector<std::string>& dates,
                  const std::vector<DailyBar>& bars,
                  const std::vector<std::string>& comments = {});
void write_sentiment(const std::string& path, const std::vector<std::string>& dates,
                     const std::vector<SentimentDay>& days,
                     const std::vector<std::string>& comments = {});
void write_truth(const std::string& path, const std::vector<std::string>& dates,
                 const SyntheticTruth& truth, const std::vector<std::string>& comments = {});

// ---- predictions ----

struct PredictionRow {
  int day_index = 0;  // absolute position in the price file
  std::string date;
  double r_actual = 0.0;
  double r_pred = 0.0;
  double eta_lag = 0.0;  // eta(t-1), the value the day-t prediction used
  int jump_pred = 0;     // -1, 0, +1
  int jump_actual = 0;
};

struct PredictionFile {
  double mu = 0.0;
  double sigma = 0.0;
  double nu = 0.0;
  std::vector<PredictionRow> rows;
};

void write_predictions(const std::string& path, const PredictionFile& pf);
PredictionFile load_predictions(const std::string& path);

// ---- surfaces and fitted parameters ----

void write_surface(const std::string& path, const std::vector<SurfacePoint>& surface);

struct TrainReport {
  RunConfig cfg;  // effective values (calibration applied)
  Triple best{};
  double objective = 0.0;
  double precision_train = 0.0;
  int grid_points = 0;
  int failed_points = 0;
  std::string digest_prices;
  std::string digest_sentiment;
  std::string digest_market;
  std::string surface_file;
};

void write_params(const std::string& path, const TrainReport& report);

// Applies the model/filter keys of a fitted-parameter file on top of `cfg`;
// metadata keys (objective, digests, ...) are ignored.
void apply_params_file(RunConfig& cfg, const std::string& path);

// ---- commands (throw on error; main maps exceptions to exit codes) ----

int cmd_simulate(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg, const std::string& params_path);
int cmd_evaluate(const RunConfig& cfg, const std::string& predictions_path);

}  // namespace sentilevy::io
