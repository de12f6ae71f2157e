#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gibbsforge/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gibbsforge: transfer-operator experiments for non-uniformly expanding maps"};
  std::string config_path;
  std::string output_dir;
  long grid_n = 0;
  long long seed = -1;
  bool timestamp = false;
  app.add_option("config", config_path, "experiment config file")->required();
  app.add_option("--output-dir", output_dir, "directory for output files");
  app.add_option("--grid-n", grid_n, "number of grid bins");
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--timestamp", timestamp, "add a timestamp line to output metadata");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : gibbsforge::exit_config;
  }

  gibbsforge::ExperimentConfig cfg;
  try {
    cfg = gibbsforge::load_config(config_path);
  } catch (const gibbsforge::Error& e) {
    std::cerr << e.what() << '\n';
    return gibbsforge::exit_config;
  }
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (grid_n > 0) cfg.grid_n = static_cast<std::size_t>(grid_n);
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (timestamp) cfg.timestamp = true;

  gibbsforge::RunResult r = gibbsforge::run(cfg);
  for (const auto& f : r.files) std::cout << f << '\n';
  if (!r.message.empty()) std::cerr << r.message << '\n';
  return r.exit_code;
}
