#include "senti_levy/io.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "senti_levy/model.hpp"
#include "senti_levy/rng.hpp"
#include "senti_levy/sentiment.hpp"

namespace sentilevy::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(what + ": expected a finite number, got '" + s + "'");
  }
}

long long parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(what + ": expected an integer, got '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(what + ": expected a non-negative integer, got '" + s + "'");
  }
}

std::chrono::sys_days parse_date(const std::string& s, const std::string& what) {
  if (!is_iso_date(s)) throw DataError(what + ": expected an ISO date, got '" + s + "'");
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  return std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{m} /
                               std::chrono::day{d}};
}

std::string format_date(std::chrono::sys_days d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

bool is_weekend(std::chrono::sys_days d) {
  const std::chrono::weekday wd{d};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

// Reads data lines of a CSV file: skips blanks and '#' comments, strips CR,
// validates the header, hands (line_no, fields) to the row callback.
template <typename RowFn>
void read_csv(const std::string& path, const std::string& header, RowFn&& row) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  long line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!saw_header) {
      if (t != header) {
        throw DataError(path, line_no, "expected header '" + header + "', got '" + t + "'");
      }
      saw_header = true;
      continue;
    }
    row(line_no, split_csv(t));
  }
  if (!saw_header) throw DataError(path + ": missing header '" + header + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw DataError("failed writing " + path);
}

template <typename T>
std::vector<T> slice(const std::vector<T>& v, int first, int last) {
  return std::vector<T>(v.begin() + first, v.begin() + last + 1);
}

struct Range {
  int first = 0;
  int last = 0;
};

Range select_range(const std::vector<std::string>& dates, const std::string& start,
                   const std::string& end, const std::string& what) {
  Range r{0, static_cast<int>(dates.size()) - 1};
  if (!start.empty()) {
    if (!is_iso_date(start)) throw DataError(what + " start: bad date '" + start + "'");
    r.first = static_cast<int>(std::lower_bound(dates.begin(), dates.end(), start) -
                               dates.begin());
  }
  if (!end.empty()) {
    if (!is_iso_date(end)) throw DataError(what + " end: bad date '" + end + "'");
    r.last = static_cast<int>(std::upper_bound(dates.begin(), dates.end(), end) -
                              dates.begin()) -
             1;
  }
  if (r.first > r.last || r.first >= static_cast<int>(dates.size()) || r.last < 0) {
    throw DataError(what + " range selects no days");
  }
  return r;
}

// Keys in a fitted-parameter file that describe the fit rather than the model.
const std::unordered_set<std::string>& params_metadata_keys() {
  static const std::unordered_set<std::string> keys = {
      "objective",      "precision_train", "grid_points",   "failed_points",
      "digest_prices",  "digest_sentiment", "digest_market", "surface_file",
  };
  return keys;
}

}  // namespace

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  return std::chrono::year_month_day(std::chrono::year{y}, std::chrono::month{m},
                                     std::chrono::day{d})
      .ok();
}

std::vector<std::string> weekday_calendar(const std::string& start, int n) {
  if (n < 1) throw std::invalid_argument("calendar length must be positive");
  auto d = parse_date(start, "calendar start");
  while (is_weekend(d)) d += std::chrono::days{1};
  std::vector<std::string> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(format_date(d));
    do {
      d += std::chrono::days{1};
    } while (is_weekend(d));
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::unordered_set<std::string> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw DataError(path, line_no, "expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw DataError(path, line_no, "empty key");
    if (!seen.insert(key).second) throw DataError(path, line_no, "duplicate key '" + key + "'");
    out.emplace_back(key, value);
  }
  return out;
}

double RunConfig::nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

RunConfig RunConfig::from_file(const std::string& path) {
  RunConfig cfg;
  for (const auto& [key, value] : read_kv_file(path)) cfg.set(key, value);
  return cfg;
}

void RunConfig::apply_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw DataError("override must be key=value, got '" + kv + "'");
  set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto num = [&] { return parse_double(value, "config " + key); };
  auto integer = [&] { return static_cast<int>(parse_int(value, "config " + key)); };

  if (key == "prices") { prices = value; return; }
  if (key == "sentiment") { sentiment = value; return; }
  if (key == "sentiment_mode") {
    if (value != "aggregated" && value != "messages") {
      throw DataError("sentiment_mode must be 'aggregated' or 'messages'");
    }
    sentiment_mode = value;
    return;
  }
  if (key == "market") { market = value; return; }
  if (key == "riskfree") { riskfree = value; return; }
  if (key == "history_start") { history_start = value; return; }
  if (key == "train_start") { train_start = value; return; }
  if (key == "train_end") { train_end = value; return; }
  if (key == "test_start") { test_start = value; return; }
  if (key == "test_end") { test_end = value; return; }
  if (key == "mu") { mu = num(); return; }
  if (key == "sigma") { sigma = num(); return; }
  if (key == "nu") { nu = num(); return; }
  if (key == "p_idio") { p_idio = num(); return; }
  if (key == "p_macro") { p_macro = num(); return; }
  if (key == "phi") { phi = num(); return; }
  if (key == "g") { g = num(); return; }
  if (key == "kappa0") { kappa0 = num(); return; }
  if (key == "rf_daily") { rf_daily = num(); return; }
  if (key == "beta_window") { beta_window = integer(); return; }
  if (key == "weights_mode") {
    if (value != "fixed" && value != "jensen") {
      throw DataError("weights_mode must be 'fixed' or 'jensen'");
    }
    weights_mode = value;
    return;
  }
  if (key == "c_idio") { c_idio = num(); return; }
  if (key == "sigma_z") { sigma_z = num(); return; }
  if (key == "sigma_eps") { sigma_eps = num(); return; }
  if (key == "q_eta") { q_eta = num(); return; }
  if (key == "r_floor") { r_floor = num(); return; }
  if (key == "eps_eta") { eps_eta = num(); return; }
  if (key == "ukf_alpha") { ukf_alpha = num(); return; }
  if (key == "ukf_beta") { ukf_beta = num(); return; }
  if (key == "ukf_kappa") { ukf_kappa = num(); return; }
  if (key == "innovation_gate") { innovation_gate = num(); return; }
  if (key == "p0_r") { p0_r = num(); return; }
  if (key == "p0_kappa") { p0_kappa = num(); return; }
  if (key == "p0_eta") { p0_eta = num(); return; }
  if (key == "coef_err") { coef_err = num(); return; }
  if (key == "p_idio_min") { p_idio_min = num(); return; }
  if (key == "p_idio_max") { p_idio_max = num(); return; }
  if (key == "p_macro_min") { p_macro_min = num(); return; }
  if (key == "p_macro_max") { p_macro_max = num(); return; }
  if (key == "phi_min") { phi_min = num(); return; }
  if (key == "phi_max") { phi_max = num(); return; }
  if (key == "threads") { threads = integer(); return; }
  if (key == "sim_kind") {
    if (value != "levy" && value != "modified") {
      throw DataError("sim_kind must be 'levy' or 'modified'");
    }
    sim_kind = value;
    return;
  }
  if (key == "sim_days") { sim_days = integer(); return; }
  if (key == "sim_start_date") { sim_start_date = value; return; }
  if (key == "lambda_j") { lambda_j = num(); return; }
  if (key == "kappa_j") { kappa_j = num(); return; }
  if (key == "sigma_j") { sigma_j = num(); return; }
  if (key == "spike_prob_idio") { spike_prob_idio = num(); return; }
  if (key == "spike_prob_macro") { spike_prob_macro = num(); return; }
  if (key == "spike_scale") { spike_scale = num(); return; }
  if (key == "e_level") { e_level = num(); return; }
  if (key == "seed") { seed = parse_u64(value, "config seed"); return; }
  if (key == "out_dir") { out_dir = value; return; }
  throw DataError("unknown config key '" + key + "'");
}

ModelParams RunConfig::model_params() const {
  ModelParams p;
  p.mu = std::isnan(mu) ? 0.0005 : mu;
  p.sigma = std::isnan(sigma) ? 0.01 : sigma;
  p.nu = std::isnan(nu) ? 0.0 : nu;
  p.phi = phi;
  p.g = g;
  p.mem_idio = MemoryParams(p_idio);
  p.mem_macro = MemoryParams(p_macro);
  p.kappa0 = kappa0;
  p.rf_daily = rf_daily;
  p.beta_window = beta_window;
  p.weights.mode = weights_mode == "jensen" ? WeightPolicy::Mode::JensenDynamic
                                            : WeightPolicy::Mode::Fixed;
  p.weights.c_idio = c_idio;
  p.sigma_z = std::isnan(sigma_z) ? p.sigma : sigma_z;
  p.sigma_eps = sigma_eps;
  p.q_eta = q_eta;
  p.r_floor = r_floor;
  p.eps_eta = eps_eta;
  p.validate();
  return p;
}

FilterOptions RunConfig::filter_options() const {
  FilterOptions opt;
  opt.sigma = ukf::SigmaConfig{ukf_alpha, ukf_beta, ukf_kappa, kStateDim};
  opt.innovation_gate = innovation_gate;
  opt.p0_r = std::isnan(p0_r) ? -1.0 : p0_r;
  opt.p0_kappa = p0_kappa;
  opt.p0_eta = p0_eta;
  return opt;
}

GridSpec RunConfig::grid_spec() const {
  GridSpec grid;
  grid.coef_err = coef_err;
  grid.p_idio_min = p_idio_min;
  grid.p_idio_max = p_idio_max;
  grid.p_macro_min = p_macro_min;
  grid.p_macro_max = p_macro_max;
  grid.phi_min = phi_min;
  grid.phi_max = phi_max;
  return grid;
}

PriceSeries load_prices(const std::string& path) {
  PriceSeries out;
  std::vector<double> closes;
  read_csv(path, "date,close", [&](long line_no, const std::vector<std::string>& f) {
    if (f.size() != 2) throw DataError(path, line_no, "expected 2 fields");
    if (!is_iso_date(f[0])) throw DataError(path, line_no, "bad date '" + f[0] + "'");
    if (!out.dates.empty() && f[0] <= out.dates.back()) {
      throw DataError(path, line_no, "dates must be strictly increasing");
    }
    const double close = parse_double(f[1], path + ":" + std::to_string(line_no));
    if (!(close > 0.0)) throw DataError(path, line_no, "close must be positive");
    out.dates.push_back(f[0]);
    closes.push_back(close);
  });
  if (closes.empty()) throw DataError(path + ": no data rows");
  if (closes.size() == 1) {
    std::fprintf(stderr, "warning: %s has a single row, the return series is empty\n",
                 path.c_str());
  }
  out.bars.resize(closes.size());
  for (std::size_t i = 0; i < closes.size(); ++i) {
    out.bars[i].day_index = static_cast<int>(i);
    out.bars[i].close = closes[i];
    out.bars[i].log_return = (i == 0) ? 0.0 : std::log(closes[i]) - std::log(closes[i - 1]);
  }
  return out;
}

std::vector<SentimentDay> load_sentiment(const std::string& path, const std::string& mode,
                                         const std::vector<std::string>& price_dates) {
  std::unordered_set<std::string> calendar(price_dates.begin(), price_dates.end());
  std::unordered_map<std::string, SentimentDay> by_date;

  if (mode == "aggregated") {
    read_csv(path, "date,s_idio,s_macro,e_idio,e_macro",
             [&](long line_no, const std::vector<std::string>& f) {
               if (f.size() != 5) throw DataError(path, line_no, "expected 5 fields");
               if (!is_iso_date(f[0])) throw DataError(path, line_no, "bad date '" + f[0] + "'");
               if (!calendar.count(f[0])) {
                 throw DataError(path, line_no, "date " + f[0] + " is not a price date");
               }
               if (by_date.count(f[0])) throw DataError(path, line_no, "duplicate date " + f[0]);
               const std::string ctx = path + ":" + std::to_string(line_no);
               SentimentDay day;
               day.s_idio = parse_double(f[1], ctx);
               day.s_macro = parse_double(f[2], ctx);
               day.e_idio = parse_double(f[3], ctx);
               day.e_macro = parse_double(f[4], ctx);
               if (!(day.e_idio >= 0.0 && day.e_idio <= 1.0 && day.e_macro >= 0.0 &&
                     day.e_macro <= 1.0)) {
                 throw DataError(path, line_no, "e values must lie in [0, 1]");
               }
               by_date.emplace(f[0], day);
             });
  } else if (mode == "messages") {
    std::map<std::string, std::pair<std::vector<ScoredMessage>, std::vector<ScoredMessage>>>
        msgs;
    read_csv(path, "date,stream,compound,neutral",
             [&](long line_no, const std::vector<std::string>& f) {
               if (f.size() != 4) throw DataError(path, line_no, "expected 4 fields");
               if (!is_iso_date(f[0])) throw DataError(path, line_no, "bad date '" + f[0] + "'");
               if (!calendar.count(f[0])) {
                 throw DataError(path, line_no, "date " + f[0] + " is not a price date");
               }
               const std::string ctx = path + ":" + std::to_string(line_no);
               ScoredMessage m;
               if (f[1] == "idio") {
                 m.stream = Stream::Idiosyncratic;
               } else if (f[1] == "macro") {
                 m.stream = Stream::Macro;
               } else {
                 throw DataError(path, line_no, "stream must be 'idio' or 'macro'");
               }
               m.compound = parse_double(f[2], ctx);
               m.neutral = parse_double(f[3], ctx);
               if (!(m.compound >= -1.0 && m.compound <= 1.0)) {
                 throw DataError(path, line_no, "compound must lie in [-1, 1]");
               }
               if (!(m.neutral >= 0.0 && m.neutral <= 1.0)) {
                 throw DataError(path, line_no, "neutral must lie in [0, 1]");
               }
               auto& streams = msgs[f[0]];
               (m.stream == Stream::Idiosyncratic ? streams.first : streams.second).push_back(m);
             });
    for (const auto& [date, streams] : msgs) {
      const DayAggregate idio = aggregate_day(streams.first);
      const DayAggregate macro = aggregate_day(streams.second);
      by_date.emplace(date, SentimentDay{0, idio.s, macro.s, idio.e, macro.e});
    }
  } else {
    throw DataError("sentiment mode must be 'aggregated' or 'messages'");
  }

  std::vector<SentimentDay> out(price_dates.size());
  for (std::size_t i = 0; i < price_dates.size(); ++i) {
    const auto it = by_date.find(price_dates[i]);
    out[i] = (it != by_date.end()) ? it->second : SentimentDay{0, 0.0, 0.0, 1.0, 1.0};
    out[i].day_index = static_cast<int>(i);
  }
  return out;
}

std::vector<MarketDay> load_market(const std::string& market_path,
                                   const std::string& riskfree_path, double rf_daily,
                                   const PriceSeries& prices) {
  std::map<std::string, double> close_by_date;
  {
    std::string prev;
    read_csv(market_path, "date,close", [&](long line_no, const std::vector<std::string>& f) {
      if (f.size() != 2) throw DataError(market_path, line_no, "expected 2 fields");
      if (!is_iso_date(f[0])) throw DataError(market_path, line_no, "bad date '" + f[0] + "'");
      if (!prev.empty() && f[0] <= prev) {
        throw DataError(market_path, line_no, "dates must be strictly increasing");
      }
      const double close = parse_double(f[1], market_path + ":" + std::to_string(line_no));
      if (!(close > 0.0)) throw DataError(market_path, line_no, "close must be positive");
      close_by_date.emplace(f[0], close);
      prev = f[0];
    });
  }

  std::map<std::string, double> rate_by_date;
  if (!riskfree_path.empty()) {
    read_csv(riskfree_path, "date,rate", [&](long line_no, const std::vector<std::string>& f) {
      if (f.size() != 2) throw DataError(riskfree_path, line_no, "expected 2 fields");
      if (!is_iso_date(f[0])) throw DataError(riskfree_path, line_no, "bad date '" + f[0] + "'");
      rate_by_date[f[0]] =
          parse_double(f[1], riskfree_path + ":" + std::to_string(line_no));
    });
  }

  std::vector<MarketDay> out(prices.dates.size());
  double prev_close = 0.0;
  for (std::size_t i = 0; i < prices.dates.size(); ++i) {
    const auto it = close_by_date.find(prices.dates[i]);
    if (it == close_by_date.end()) {
      throw DataError(market_path + ": no market close for price date " + prices.dates[i]);
    }
    out[i].day_index = static_cast<int>(i);
    out[i].r = prices.bars[i].log_return;
    out[i].r_market = (i == 0) ? 0.0 : std::log(it->second) - std::log(prev_close);
    if (!riskfree_path.empty()) {
      const auto rit = rate_by_date.find(prices.dates[i]);
      if (rit == rate_by_date.end()) {
        throw DataError(riskfree_path + ": no rate for price date " + prices.dates[i]);
      }
      out[i].r_free = rit->second;
    } else {
      out[i].r_free = rf_daily;
    }
    prev_close = it->second;
  }
  return out;
}

Dataset load_dataset(const RunConfig& cfg, bool with_market) {
  if (cfg.prices.empty()) throw DataError("config: prices file is required");
  if (cfg.sentiment.empty()) throw DataError("config: sentiment file is required");
  PriceSeries prices = load_prices(cfg.prices);
  Dataset ds;
  ds.data.sentiment = load_sentiment(cfg.sentiment, cfg.sentiment_mode, prices.dates);
  if (with_market) {
    if (cfg.market.empty()) {
      throw DataError("config: market file is required for jensen weights");
    }
    ds.data.market = load_market(cfg.market, cfg.riskfree, cfg.rf_daily, prices);
  }
  ds.dates = std::move(prices.dates);
  ds.data.bars = std::move(prices.bars);
  return ds;
}

namespace {

void write_comments(std::ofstream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
}

}  // namespace

void write_prices(const std::string& path, const std::vector<std::string>& dates,
                  const std::vector<DailyBar>& bars, const std::vector<std::string>& comments) {
  auto out = open_out(path);
  write_comments(out, comments);
  out << "date,close\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    out << dates[i] << ',' << fmt_double(bars[i].close) << '\n';
  }
  finish_out(out, path);
}

void write_sentiment(const std::string& path, const std::vector<std::string>& dates,
                     const std::vector<SentimentDay>& days,
                     const std::vector<std::string>& comments) {
  auto out = open_out(path);
  write_comments(out, comments);
  out << "date,s_idio,s_macro,e_idio,e_macro\n";
  for (std::size_t i = 0; i < days.size(); ++i) {
    out << dates[i] << ',' << fmt_double(days[i].s_idio) << ',' << fmt_double(days[i].s_macro)
        << ',' << fmt_double(days[i].e_idio) << ',' << fmt_double(days[i].e_macro) << '\n';
  }
  finish_out(out, path);
}

void write_truth(const std::string& path, const std::vector<std::string>& dates,
                 const SyntheticTruth& truth, const std::vector<std::string>& comments) {
  auto out = open_out(path);
  write_comments(out, comments);
  out << "date,kappa,eta,eta_idio,eta_macro,jump\n";
  for (std::size_t i = 0; i < truth.kappa.size(); ++i) {
    out << dates[i] << ',' << fmt_double(truth.kappa[i]) << ',' << fmt_double(truth.eta[i])
        << ',' << fmt_double(truth.eta_idio[i]) << ',' << fmt_double(truth.eta_macro[i]) << ','
        << truth.jump[i] << '\n';
  }
  finish_out(out, path);
}

void write_predictions(const std::string& path, const PredictionFile& pf) {
  auto out = open_out(path);
  out << "# mu=" << fmt_double(pf.mu) << '\n';
  out << "# sigma=" << fmt_double(pf.sigma) << '\n';
  out << "# nu=" << fmt_double(pf.nu) << '\n';
  out << "day_index,date,r_actual,r_pred,eta_lag,jump_pred,jump_actual\n";
  for (const auto& row : pf.rows) {
    out << row.day_index << ',' << row.date << ',' << fmt_double(row.r_actual) << ','
        << fmt_double(row.r_pred) << ',' << fmt_double(row.eta_lag) << ',' << row.jump_pred
        << ',' << row.jump_actual << '\n';
  }
  finish_out(out, path);
}

PredictionFile load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  PredictionFile pf;
  bool have_mu = false, have_sigma = false, have_nu = false, saw_header = false;
  std::string line;
  long line_no = 0;
  const std::string header = "day_index,date,r_actual,r_pred,eta_lag,jump_pred,jump_actual";
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto eq = t.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(t.substr(1, eq - 1));
      const std::string value = trim(t.substr(eq + 1));
      const std::string ctx = path + ":" + std::to_string(line_no);
      if (key == "mu") { pf.mu = parse_double(value, ctx); have_mu = true; }
      if (key == "sigma") { pf.sigma = parse_double(value, ctx); have_sigma = true; }
      if (key == "nu") { pf.nu = parse_double(value, ctx); have_nu = true; }
      continue;
    }
    if (!saw_header) {
      if (t != header) throw DataError(path, line_no, "expected the predictions header");
      saw_header = true;
      continue;
    }
    const auto f = split_csv(t);
    if (f.size() != 7) throw DataError(path, line_no, "expected 7 fields");
    const std::string ctx = path + ":" + std::to_string(line_no);
    PredictionRow row;
    row.day_index = static_cast<int>(parse_int(f[0], ctx));
    if (!is_iso_date(f[1])) throw DataError(path, line_no, "bad date '" + f[1] + "'");
    row.date = f[1];
    row.r_actual = parse_double(f[2], ctx);
    row.r_pred = parse_double(f[3], ctx);
    row.eta_lag = parse_double(f[4], ctx);
    row.jump_pred = static_cast<int>(parse_int(f[5], ctx));
    row.jump_actual = static_cast<int>(parse_int(f[6], ctx));
    if (std::abs(row.jump_pred) > 1 || std::abs(row.jump_actual) > 1) {
      throw DataError(path, line_no, "jump flags must be -1, 0 or 1");
    }
    if (!pf.rows.empty() && row.day_index <= pf.rows.back().day_index) {
      throw DataError(path, line_no, "day_index must be strictly increasing");
    }
    pf.rows.push_back(row);
  }
  if (!saw_header) throw DataError(path + ": missing the predictions header");
  if (!(have_mu && have_sigma && have_nu)) {
    throw DataError(path + ": missing '# mu=', '# sigma=' or '# nu=' metadata");
  }
  if (!(pf.sigma > 0.0)) throw DataError(path + ": sigma must be positive");
  return pf;
}

void write_surface(const std::string& path, const std::vector<SurfacePoint>& surface) {
  auto out = open_out(path);
  out << "p_idio,p_macro,phi,objective,precision,failed\n";
  for (const auto& sp : surface) {
    out << fmt_double(sp.triple.p_idio) << ',' << fmt_double(sp.triple.p_macro) << ','
        << fmt_double(sp.triple.phi) << ',' << fmt_double(sp.objective) << ','
        << fmt_double(sp.precision) << ',' << (sp.failed ? 1 : 0) << '\n';
  }
  finish_out(out, path);
}

void write_params(const std::string& path, const TrainReport& report) {
  const RunConfig& cfg = report.cfg;
  auto out = open_out(path);
  out << "# fitted parameters written by senti-levy train\n";
  out << "mu=" << fmt_double(cfg.mu) << '\n';
  out << "nu=" << fmt_double(cfg.nu) << '\n';
  out << "sigma=" << fmt_double(cfg.sigma) << '\n';
  out << "p_idio=" << fmt_double(report.best.p_idio) << '\n';
  out << "p_macro=" << fmt_double(report.best.p_macro) << '\n';
  out << "phi=" << fmt_double(report.best.phi) << '\n';
  out << "g=" << fmt_double(cfg.g) << '\n';
  out << "kappa0=" << fmt_double(cfg.kappa0) << '\n';
  out << "rf_daily=" << fmt_double(cfg.rf_daily) << '\n';
  out << "beta_window=" << cfg.beta_window << '\n';
  out << "weights_mode=" << cfg.weights_mode << '\n';
  out << "c_idio=" << fmt_double(cfg.c_idio) << '\n';
  out << "sigma_z=" << fmt_double(std::isnan(cfg.sigma_z) ? cfg.sigma : cfg.sigma_z) << '\n';
  out << "sigma_eps=" << fmt_double(cfg.sigma_eps) << '\n';
  out << "q_eta=" << fmt_double(cfg.q_eta) << '\n';
  out << "r_floor=" << fmt_double(cfg.r_floor) << '\n';
  out << "eps_eta=" << fmt_double(cfg.eps_eta) << '\n';
  out << "ukf_alpha=" << fmt_double(cfg.ukf_alpha) << '\n';
  out << "ukf_beta=" << fmt_double(cfg.ukf_beta) << '\n';
  out << "ukf_kappa=" << fmt_double(cfg.ukf_kappa) << '\n';
  out << "innovation_gate=" << fmt_double(cfg.innovation_gate) << '\n';
  if (!std::isnan(cfg.p0_r)) out << "p0_r=" << fmt_double(cfg.p0_r) << '\n';
  out << "p0_kappa=" << fmt_double(cfg.p0_kappa) << '\n';
  out << "p0_eta=" << fmt_double(cfg.p0_eta) << '\n';
  out << "coef_err=" << fmt_double(cfg.coef_err) << '\n';
  out << "objective=" << fmt_double(report.objective) << '\n';
  out << "precision_train=" << fmt_double(report.precision_train) << '\n';
  out << "grid_points=" << report.grid_points << '\n';
  out << "failed_points=" << report.failed_points << '\n';
  out << "digest_prices=" << report.digest_prices << '\n';
  out << "digest_sentiment=" << report.digest_sentiment << '\n';
  if (!report.digest_market.empty()) out << "digest_market=" << report.digest_market << '\n';
  out << "surface_file=" << report.surface_file << '\n';
  finish_out(out, path);
}

void apply_params_file(RunConfig& cfg, const std::string& path) {
  for (const auto& [key, value] : read_kv_file(path)) {
    if (params_metadata_keys().count(key)) continue;
    cfg.set(key, value);
  }
}

namespace {

ModelParams effective_params(RunConfig& cfg, const Dataset& ds, const Range& hist,
                             const Range& train) {
  if (std::isnan(cfg.mu) || std::isnan(cfg.sigma) || std::isnan(cfg.nu)) {
    const Calibration cal = calibrate(slice(ds.data.bars, train.first, train.last),
                                      slice(ds.data.bars, hist.first, hist.last));
    if (std::isnan(cfg.mu)) cfg.mu = cal.mu;
    if (std::isnan(cfg.sigma)) cfg.sigma = cal.sigma;
    if (std::isnan(cfg.nu)) cfg.nu = cal.nu;
  }
  if (std::isnan(cfg.sigma_z)) cfg.sigma_z = cfg.sigma;
  return cfg.model_params();
}

FilterData slice_data(const Dataset& ds, const Range& r) {
  FilterData fd;
  fd.bars = slice(ds.data.bars, r.first, r.last);
  fd.sentiment = slice(ds.data.sentiment, r.first, r.last);
  if (!ds.data.market.empty()) fd.market = slice(ds.data.market, r.first, r.last);
  return fd;
}

// Jump sets over prediction rows (positional), rebuilt from the stored flags.
std::pair<JumpSet, JumpSet> row_jump_sets(const std::vector<PredictionRow>& rows) {
  JumpSet pred, actual;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int pos = static_cast<int>(i);
    if (rows[i].jump_pred > 0) pred.positive.insert(pos);
    if (rows[i].jump_pred < 0) pred.negative.insert(pos);
    if (rows[i].jump_actual > 0) actual.positive.insert(pos);
    if (rows[i].jump_actual < 0) actual.negative.insert(pos);
  }
  return {pred, actual};
}

void write_row_metrics(std::ofstream& out, const std::vector<PredictionRow>& rows) {
  const auto [pred, actual] = row_jump_sets(rows);
  bool empty_pred = false;
  const double prec = precision(pred, actual, &empty_pred);
  const double tol = tolerant_precision(pred, actual);
  const double u = objective_u(pred, actual, static_cast<int>(rows.size()));
  int hits = 0;
  for (int d : pred.positive) hits += actual.positive.count(d);
  for (int d : pred.negative) hits += actual.negative.count(d);
  out << "test_days=" << rows.size() << '\n';
  out << "jumps_pred_pos=" << pred.positive.size() << '\n';
  out << "jumps_pred_neg=" << pred.negative.size() << '\n';
  out << "jumps_actual_pos=" << actual.positive.size() << '\n';
  out << "jumps_actual_neg=" << actual.negative.size() << '\n';
  out << "hits=" << hits << '\n';
  out << "false_positives=" << (pred.total() - hits) << '\n';
  out << "precision=" << fmt_double(prec) << '\n';
  out << "objective=" << fmt_double(u) << '\n';
  out << "tolerant_precision=" << fmt_double(tol) << '\n';
  out << "empty_prediction=" << (empty_pred ? 1 : 0) << '\n';
}

}  // namespace

int cmd_simulate(const RunConfig& cfg) {
  if (cfg.sim_days < 2) throw DataError("sim_days must be at least 2");
  std::filesystem::create_directories(cfg.out_dir);
  const std::vector<std::string> dates = weekday_calendar(cfg.sim_start_date, cfg.sim_days);
  const std::string prices_path = cfg.out_dir + "/prices.csv";

  const std::vector<std::string> stamp = {"seed=" + std::to_string(cfg.seed),
                                          std::string("rng=") + Rng::kTag};

  if (cfg.sim_kind == "levy") {
    LevyParams lp;
    lp.mu = std::isnan(cfg.mu) ? 0.0005 : cfg.mu;
    lp.sigma_z = std::isnan(cfg.sigma_z) ? (std::isnan(cfg.sigma) ? 0.01 : cfg.sigma)
                                         : cfg.sigma_z;
    lp.lambda_j = cfg.lambda_j;
    lp.kappa_j = cfg.kappa_j;
    lp.sigma_j = cfg.sigma_j;
    const std::vector<DailyBar> bars = simulate_levy(lp, cfg.sim_days, cfg.seed);
    write_prices(prices_path, dates, bars, stamp);
    std::printf("simulate levy: wrote %s (%d days, seed %llu, rng %s)\n", prices_path.c_str(),
                cfg.sim_days, static_cast<unsigned long long>(cfg.seed), Rng::kTag);
    return 0;
  }

  const ModelParams p = cfg.model_params();
  SentimentGenSpec gen;
  gen.spike_prob_idio = cfg.spike_prob_idio;
  gen.spike_prob_macro = cfg.spike_prob_macro;
  gen.spike_scale = cfg.spike_scale;
  gen.e_level = cfg.e_level;
  const Weights gen_weights = cfg.weights_mode == "fixed"
                                  ? Weights{cfg.c_idio, 1.0 - cfg.c_idio}
                                  : Weights{0.5, 0.5};
  const ModifiedSimResult sim = simulate_modified(p, gen, cfg.sim_days, cfg.seed, gen_weights);
  write_prices(prices_path, dates, sim.bars, stamp);
  write_sentiment(cfg.out_dir + "/sentiment.csv", dates, sim.sentiment, stamp);
  write_truth(cfg.out_dir + "/truth.csv", dates, sim.truth, stamp);
  int planted = 0;
  for (int j : sim.truth.jump) planted += (j != 0);
  std::printf(
      "simulate modified: wrote %s, sentiment.csv, truth.csv (%d days, %d planted jumps, "
      "seed %llu, rng %s)\n",
      prices_path.c_str(), cfg.sim_days, planted, static_cast<unsigned long long>(cfg.seed),
      Rng::kTag);
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const bool jensen = cfg.weights_mode == "jensen";
  Dataset ds = load_dataset(cfg, jensen);
  const Range hist = select_range(ds.dates, cfg.history_start, cfg.train_end, "history");
  const Range train = select_range(ds.dates, cfg.train_start, cfg.train_end, "train");

  RunConfig eff = cfg;
  const ModelParams params = effective_params(eff, ds, hist, train);
  const FilterData fd = slice_data(ds, train);

  const GridResult gr =
      grid_search(fd, params, eff.grid_spec(), eff.filter_options(), eff.threads);

  std::filesystem::create_directories(eff.out_dir);
  const std::string surface_path = eff.out_dir + "/surface.csv";
  write_surface(surface_path, gr.surface);

  TrainReport report;
  report.cfg = eff;
  report.best = gr.best;
  report.objective = gr.best_run.objective;
  report.precision_train = gr.best_run.precision;
  report.grid_points = static_cast<int>(gr.surface.size());
  report.failed_points = gr.failed_points;
  report.digest_prices = file_digest(eff.prices);
  report.digest_sentiment = file_digest(eff.sentiment);
  if (jensen) report.digest_market = file_digest(eff.market);
  report.surface_file = "surface.csv";
  write_params(eff.out_dir + "/params.txt", report);

  std::printf("train: best p_idio=%s p_macro=%s phi=%s objective=%s precision=%s "
              "(%d grid points, %d failed)\n",
              fmt_double(gr.best.p_idio).c_str(), fmt_double(gr.best.p_macro).c_str(),
              fmt_double(gr.best.phi).c_str(), fmt_double(gr.best_run.objective).c_str(),
              fmt_double(gr.best_run.precision).c_str(), report.grid_points,
              report.failed_points);
  return 0;
}

int cmd_predict(const RunConfig& cfg, const std::string& params_path) {
  RunConfig eff = cfg;
  apply_params_file(eff, params_path);
  if (std::isnan(eff.mu) || std::isnan(eff.sigma) || std::isnan(eff.nu)) {
    throw DataError(params_path + ": missing calibrated mu/sigma/nu");
  }
  if (std::isnan(eff.sigma_z)) eff.sigma_z = eff.sigma;

  const bool jensen = eff.weights_mode == "jensen";
  Dataset ds = load_dataset(eff, jensen);
  const Range warm = select_range(ds.dates, eff.train_start, eff.test_end, "warm-up");
  const Range test = select_range(ds.dates, eff.test_start, eff.test_end, "test");
  if (test.first <= warm.first) {
    throw DataError("test range must start after the warm-up anchor day");
  }

  const ModelParams params = eff.model_params();
  const Triple triple{eff.p_idio, eff.p_macro, eff.phi};
  const FilterData fd = slice_data(ds, warm);
  const RunResult run = run_filter(fd, params, triple, eff.filter_options());

  PredictionFile pf;
  pf.mu = params.mu;
  pf.sigma = params.sigma;
  pf.nu = params.nu;
  pf.rows.reserve(test.last - test.first + 1);
  for (int idx = test.first; idx <= test.last; ++idx) {
    const int pos = idx - warm.first;
    PredictionRow row;
    row.day_index = idx;
    row.date = ds.dates[idx];
    row.r_actual = ds.data.bars[idx].log_return;
    row.r_pred = run.predicted_returns[pos];
    row.eta_lag = run.eta_series[pos];
    row.jump_pred = run.jumps_pred.positive.count(pos)   ? 1
                    : run.jumps_pred.negative.count(pos) ? -1
                                                         : 0;
    row.jump_actual = run.jumps_actual.positive.count(pos)   ? 1
                      : run.jumps_actual.negative.count(pos) ? -1
                                                             : 0;
    pf.rows.push_back(row);
  }

  std::filesystem::create_directories(eff.out_dir);
  write_predictions(eff.out_dir + "/predictions.csv", pf);

  const std::string summary_path = eff.out_dir + "/summary.txt";
  auto out = open_out(summary_path);
  write_row_metrics(out, pf.rows);
  out << "kappa_clamps=" << run.diag.kappa_clamps << '\n';
  out << "weight_clamps=" << run.diag.weight_clamps << '\n';
  out << "weight_degenerate_days=" << run.diag.weight_degenerate_days << '\n';
  out << "gate_skips=" << run.diag.gate_skips << '\n';
  out << "max_abs_innovation_r=" << fmt_double(run.diag.max_abs_innovation_r) << '\n';
  out << "max_abs_innovation_kappa=" << fmt_double(run.diag.max_abs_innovation_kappa) << '\n';
  finish_out(out, summary_path);

  const auto [pred, actual] = row_jump_sets(pf.rows);
  bool empty_pred = false;
  const double prec = precision(pred, actual, &empty_pred);
  std::printf("predict: %zu test days, precision=%s objective=%s%s\n", pf.rows.size(),
              fmt_double(prec).c_str(),
              fmt_double(objective_u(pred, actual, static_cast<int>(pf.rows.size()))).c_str(),
              empty_pred ? " (no predicted jumps)" : "");
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& predictions_path) {
  const PredictionFile pf = load_predictions(predictions_path);
  if (pf.rows.empty()) throw DataError(predictions_path + ": no prediction rows");

  std::vector<double> r_pred(pf.rows.size()), r_actual(pf.rows.size());
  for (std::size_t i = 0; i < pf.rows.size(); ++i) {
    r_pred[i] = pf.rows[i].r_pred;
    r_actual[i] = pf.rows[i].r_actual;
  }
  const JumpSet pred = detect_jumps(r_pred, pf.mu, pf.sigma);
  const JumpSet actual = detect_jumps(r_actual, pf.mu, pf.sigma);
  const auto [stored_pred, stored_actual] = row_jump_sets(pf.rows);
  if (pred.positive != stored_pred.positive || pred.negative != stored_pred.negative ||
      actual.positive != stored_actual.positive || actual.negative != stored_actual.negative) {
    throw DataError(predictions_path +
                    ": stored jump flags disagree with recomputation from the returns");
  }

  std::filesystem::create_directories(cfg.out_dir);
  const std::string metrics_path = cfg.out_dir + "/metrics.txt";
  auto out = open_out(metrics_path);
  write_row_metrics(out, pf.rows);
  finish_out(out, metrics_path);

  const std::string plot_path = cfg.out_dir + "/plotdata.csv";
  auto plot = open_out(plot_path);
  plot << "day_index,date,r_actual,r_pred,eta_lag,jump_pred,jump_actual\n";
  for (const auto& row : pf.rows) {
    plot << row.day_index << ',' << row.date << ',' << fmt_double(row.r_actual) << ','
         << fmt_double(row.r_pred) << ',' << fmt_double(row.eta_lag) << ',' << row.jump_pred
         << ',' << row.jump_actual << '\n';
  }
  finish_out(plot, plot_path);

  bool empty_pred = false;
  const double prec = precision(pred, actual, &empty_pred);
  std::printf("evaluate: %zu days, precision=%s objective=%s tolerant=%s%s\n", pf.rows.size(),
              fmt_double(prec).c_str(),
              fmt_double(objective_u(pred, actual, static_cast<int>(pf.rows.size()))).c_str(),
              fmt_double(tolerant_precision(pred, actual)).c_str(),
              empty_pred ? " (no predicted jumps)" : "");
  return 0;
}

}  // namespace sentilevy::io
