#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "graphmcmc/config.hpp"
#include "graphmcmc/experiment.hpp"

namespace {

void add_common_options(CLI::App* cmd, graphmcmc::CliOptions* opts,
                        std::uint64_t* seed, bool* has_seed) {
  cmd->add_option("--config", opts->config_path, "Experiment config file")
      ->required();
  cmd->add_option("--out", opts->out_dir, "Output directory (default: .)");
  auto* seed_opt = cmd->add_option("--seed", *seed,
                                   "Master seed overriding every config seed");
  cmd->add_flag("--transcript", opts->transcript,
                "Write a JSONL record of every graph jump proposal");
  cmd->parse_complete_callback([seed_opt, has_seed]() {
    *has_seed = seed_opt->count() > 0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-accelerated MCMC experiment driver"};
  app.require_subcommand(1);

  graphmcmc::CliOptions opts;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string command;

  const struct {
    const char* name;
    const char* help;
  } commands[] = {
      {"simulate", "Write simulated data for the configured target"},
      {"build-graph", "Acquire approximate samples and build the jump graph"},
      {"run", "Run the (accelerated) chain and write samples and diagnostics"},
      {"diagnose", "Compute diagnostics for an existing sample CSV"},
      {"scaling-experiment", "Jump acceptance rates across (n, m) settings"},
      {"optimize-walk", "Optimize the node-selection walk over a built graph"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common_options(sub, &opts, &seed, &has_seed);
    sub->callback([&command, sub]() { command = sub->get_name(); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (has_seed) opts.seed = seed;

  try {
    graphmcmc::run_command(command, opts);
  } catch (const graphmcmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
