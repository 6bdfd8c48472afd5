#include <CLI11.hpp>

#include "cvqkd/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Security analysis of Gaussian CV-QKD with semitrusted side channels"};
  app.require_subcommand(1);

  cvqkd::cli::Options opt;
  std::string attack = "collective";

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* c = cmd->add_option("--config", opt.config_path, "scenario configuration file");
    if (config_required) c->required();
    cmd->add_option("--output", opt.output_path, "output path (default: stdout)");
    cmd->add_option("--format", opt.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--attack", attack, "individual|collective")
        ->check(CLI::IsMember({"individual", "collective"}));
    cmd->add_option("--seed", opt.seed, "sampling seed");
    cmd->add_option("--samples", opt.samples, "Monte Carlo sample count");
    cmd->add_option("--threads", opt.threads, "worker threads");
  };

  auto* keyrate = app.add_subcommand("keyrate", "key rate for one scenario");
  add_common(keyrate, true);
  auto* threshold = app.add_subcommand("threshold", "bisect a security threshold");
  add_common(threshold, true);
  threshold->add_option("--target", opt.target, "eps_max|vn_max|max_distance");
  auto* optimize = app.add_subcommand("optimize", "maximize the key rate over one setting");
  add_common(optimize, true);
  optimize->add_option("--target", opt.target, "modulation|monitor_weight");
  auto* sweep = app.add_subcommand("sweep", "evaluate a parameter grid");
  add_common(sweep, true);
  auto* verify = app.add_subcommand("verify", "Monte Carlo validation of the analytic statistics");
  add_common(verify, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cvqkd::cli::kValidationExit;
  }

  opt.attack = attack == "individual" ? cvqkd::Attack::Individual : cvqkd::Attack::Collective;
  for (auto* cmd : {keyrate, threshold, optimize, sweep, verify})
    if (cmd->parsed()) opt.command = cmd->get_name();
  return cvqkd::cli::dispatch(opt);
}
