#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "dispatchlab/commands.hpp"

using namespace dispatchlab;

int main(int argc, char** argv) {
  CLI::App app{"Adaptive dispatching-interval laboratory"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;

  using Command = int (*)(const ExperimentConfig&, const std::filesystem::path&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"cluster", "build the shareability graph and spatial clusters", cmd_cluster},
      {"simulate", "run one simulation", cmd_simulate},
      {"sweep", "run a seeded parameter sweep", cmd_sweep},
      {"estimate", "estimate backward-induction value tables", cmd_estimate},
      {"adversary", "run the hard-instance suite", cmd_adversary},
      {"gen-data", "write synthetic orders, history and drivers", cmd_gen_data},
  };
  std::map<CLI::App*, Command> handlers;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override [sim] seed; shifts sweep seeds to start here");
    sub->add_option("--out", out_dir, "output directory (default [output] dir)");
    handlers[sub] = fn;
  }
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open " + config_path);
    ExperimentConfig cfg = parse_config(in);
    if (seed) {
      cfg.sim.seed = *seed;
      for (std::size_t i = 0; i < cfg.sweep.seeds.size(); ++i) cfg.sweep.seeds[i] = *seed + i;
    }
    if (out_dir) cfg.out_dir = *out_dir;
    for (auto& [sub, fn] : handlers) {
      if (sub->parsed()) return fn(cfg, cfg.out_dir, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
