// senti-levy: simulate, train, predict and evaluate sentiment-driven jump
// models. Exit codes: 0 success, 1 data error, 2 optimization failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "senti_levy/io.hpp"

namespace {

sentilevy::io::RunConfig make_config(const std::string& config_path,
                                     const std::vector<std::string>& overrides,
                                     const std::string& out_dir) {
  sentilevy::io::RunConfig cfg;
  if (!config_path.empty()) cfg = sentilevy::io::RunConfig::from_file(config_path);
  for (const auto& kv : overrides) cfg.apply_override(kv);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentiment-memory jump model toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string params_path;
  std::string predictions_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    cmd->add_option("--set", overrides, "override a config key, e.g. --set seed=7")
        ->take_all();
    cmd->add_option("--out", out_dir, "output directory (overrides out_dir)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  add_common(sim);
  CLI::App* train = app.add_subcommand("train", "grid-search (p_idio, p_macro, phi)");
  add_common(train);
  CLI::App* predict = app.add_subcommand("predict", "filter a test range with fitted params");
  add_common(predict);
  predict->add_option("--params", params_path, "fitted parameter file from train")
      ->required();
  CLI::App* evaluate = app.add_subcommand("evaluate", "recompute metrics from predictions");
  add_common(evaluate);
  evaluate->add_option("--predictions", predictions_path, "predictions.csv from predict")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const sentilevy::io::RunConfig cfg = make_config(config_path, overrides, out_dir);
    if (sim->parsed()) return sentilevy::io::cmd_simulate(cfg);
    if (train->parsed()) return sentilevy::io::cmd_train(cfg);
    if (predict->parsed()) return sentilevy::io::cmd_predict(cfg, params_path);
    if (evaluate->parsed()) return sentilevy::io::cmd_evaluate(cfg, predictions_path);
  } catch (const sentilevy::OptimizationError& e) {
    std::fprintf(stderr, "optimization error: %s\n", e.what());
    return 2;
  } catch (const sentilevy::FilterError& e) {
    std::fprintf(stderr, "filter error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
