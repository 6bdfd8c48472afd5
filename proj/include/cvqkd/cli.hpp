#pragma once

#include <fstream>
#include <iostream>

#include "config.hpp"
#include "io.hpp"
#include "mc_oracle.hpp"

namespace cvqkd {
namespace cli {

// exit codes
constexpr int kOkExit = 0;
constexpr int kValidationExit = 1;
constexpr int kNumericalExit = 2;
constexpr int kVerificationExit = 3;

struct Options {
  std::string command;      // keyrate | threshold | optimize | sweep | verify
  std::string config_path;  // empty: verify uses the canned scenarios
  std::string output_path;  // empty: stdout
  std::string format = "csv";
  Attack attack = Attack::Collective;
  std::string target;  // threshold/optimize target override
  std::uint64_t seed = 1;
  std::uint64_t samples = 1000000;
  int threads = 1;
};

namespace detail_cli {

inline std::string flags_text(const std::vector<std::string>& flags) {
  std::string s;
  for (const auto& f : flags) {
    if (!s.empty()) s += '|';
    s += f;
  }
  return s;
}

inline void append_report(OutputRecord& rec, const KeyRateReport& rep) {
  rec.results.emplace_back("I_AB", ParamValue::number(rep.i_ab));
  rec.results.emplace_back("eve_bound", ParamValue::number(rep.eve_bound));
  rec.results.emplace_back("key_rate", ParamValue::number(rep.key_rate));
  rec.results.emplace_back("attack", ParamValue::str(attack_name(rep.attack)));
  rec.results.emplace_back("flags", ParamValue::str(flags_text(rep.flags)));
}

inline int emit(const Options& opt, const std::vector<OutputRecord>& records) {
  const std::string text = opt.format == "json" ? to_json(records) : to_csv(records);
  if (opt.output_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opt.output_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot open output file: " << opt.output_path << "\n";
      return kValidationExit;
    }
    out << text;
  }
  return kOkExit;
}

}  // namespace detail_cli

inline int run_keyrate(const Options& opt, const RunConfig& cfg) {
  OutputRecord rec;
  rec.params = scenario_to_params(cfg.scenario);
  detail_cli::append_report(rec, evaluate_key_rate(cfg.scenario, opt.attack));
  return detail_cli::emit(opt, {rec});
}

inline int run_threshold(const Options& opt, const RunConfig& cfg) {
  const std::string target = !opt.target.empty() ? opt.target : cfg.threshold_target;
  if (target.empty()) {
    std::cerr << "threshold: no target given (--target or threshold.target)\n";
    return kValidationExit;
  }
  ThresholdResult res;
  if (target == "eps_max") res = find_eps_max(cfg.scenario, opt.attack);
  else if (target == "vn_max") res = find_vn_max(cfg.scenario, opt.attack);
  else if (target == "max_distance") res = find_max_distance(cfg.scenario, opt.attack);
  else {
    std::cerr << "threshold: unknown target '" << target << "'\n";
    return kValidationExit;
  }
  OutputRecord rec;
  rec.params = scenario_to_params(cfg.scenario);
  rec.results.emplace_back("parameter", ParamValue::str(res.parameter));
  rec.results.emplace_back("critical", ParamValue::number(res.critical));
  rec.results.emplace_back("bracket_lo", ParamValue::number(res.bracket_lo));
  rec.results.emplace_back("bracket_hi", ParamValue::number(res.bracket_hi));
  rec.results.emplace_back("iterations", ParamValue::number(res.iterations));
  rec.results.emplace_back("attack", ParamValue::str(attack_name(res.attack)));
  rec.results.emplace_back("flags", ParamValue::str(detail_cli::flags_text(res.flags)));
  return detail_cli::emit(opt, {rec});
}

inline int run_optimize(const Options& opt, const RunConfig& cfg) {
  const std::string target = !opt.target.empty() ? opt.target : cfg.optimize_target;
  if (target.empty()) {
    std::cerr << "optimize: no target given (--target or optimize.target)\n";
    return kValidationExit;
  }
  OptimizeResult res;
  std::string param;
  if (target == "modulation") {
    res = optimize_modulation(cfg.scenario, opt.attack);
    param = "protocol.v_m";
  } else if (target == "monitor_weight") {
    res = optimize_monitor_weight(cfg.scenario, opt.attack);
    param = "side_b.g_prime";
  } else {
    std::cerr << "optimize: unknown target '" << target << "'\n";
    return kValidationExit;
  }
  OutputRecord rec;
  rec.params = scenario_to_params(cfg.scenario);
  rec.results.emplace_back("parameter", ParamValue::str(param));
  rec.results.emplace_back("optimum", ParamValue::number(res.x));
  rec.results.emplace_back("key_rate", ParamValue::number(res.value));
  rec.results.emplace_back("attack", ParamValue::str(attack_name(opt.attack)));
  std::vector<std::string> flags;
  if (res.at_boundary) flags.push_back("bracket_edge");
  if (res.multimodal) flags.push_back("multimodal");
  rec.results.emplace_back("flags", ParamValue::str(detail_cli::flags_text(flags)));
  return detail_cli::emit(opt, {rec});
}

inline int run_sweep_command(const Options& opt, const RunConfig& cfg) {
  if (cfg.axes.empty()) {
    std::cerr << "sweep: no axes configured (sweep.axis1.* keys)\n";
    return kValidationExit;
  }
  SweepGrid grid;
  grid.axes = cfg.axes;
  grid.base = cfg.scenario;
  const auto records = run_sweep(grid, opt.attack);
  std::vector<OutputRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    OutputRecord rec;
    rec.params = r.params;
    detail_cli::append_report(rec, r.report);
    rec.results.emplace_back("error", ParamValue::str(r.error));
    out.push_back(std::move(rec));
  }
  return detail_cli::emit(opt, out);
}

inline int run_verify(const Options& opt, const RunConfig* cfg) {
  std::vector<std::pair<std::string, Scenario>> scenarios;
  if (cfg) scenarios.emplace_back("config", cfg->scenario);
  else scenarios = canned_verification_scenarios();
  const SeededRun run{opt.seed, opt.samples};
  const auto rep = run_verification(scenarios, run, opt.threads);

  std::string text = "{\n  \"seed\": " + std::to_string(rep.seed) +
                     ",\n  \"n_samples\": " + std::to_string(rep.n_samples) +
                     ",\n  \"sigma_limit\": " + format_value(rep.sigma_limit) +
                     ",\n  \"all_pass\": " + (rep.all_pass ? "true" : "false") +
                     ",\n  \"checks\": [";
  bool first = true;
  for (const auto& c : rep.checks) {
    if (!first) text += ',';
    text += "\n    {\"scenario\": \"" + c.scenario + "\", \"field\": \"" + c.field +
            "\", \"analytic\": " + format_value(c.analytic) +
            ", \"empirical\": " + format_value(c.empirical) + ", \"se\": " + format_value(c.se) +
            ", \"n_sigma\": " + format_value(c.n_sigma) +
            ", \"pass\": " + (c.pass ? "true" : "false") + "}";
    first = false;
  }
  text += "\n  ]\n}\n";
  if (opt.output_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opt.output_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot open output file: " << opt.output_path << "\n";
      return kValidationExit;
    }
    out << text;
  }
  return rep.all_pass ? kOkExit : kVerificationExit;
}

inline int dispatch(const Options& opt) {
  try {
    std::optional<RunConfig> cfg;
    if (!opt.config_path.empty()) {
      std::ifstream in(opt.config_path, std::ios::binary);
      if (!in) {
        std::cerr << "cannot read config file: " << opt.config_path << "\n";
        return kValidationExit;
      }
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      cfg = parse_config(text);
      if (!cfg->ok()) {
        for (const auto& e : cfg->errors) std::cerr << "config error: " << e << "\n";
        return kValidationExit;
      }
    }
    if (opt.command == "verify") return run_verify(opt, cfg ? &*cfg : nullptr);
    if (!cfg) {
      std::cerr << opt.command << ": --config required\n";
      return kValidationExit;
    }
    if (opt.command == "keyrate") return run_keyrate(opt, *cfg);
    if (opt.command == "threshold") return run_threshold(opt, *cfg);
    if (opt.command == "optimize") return run_optimize(opt, *cfg);
    if (opt.command == "sweep") return run_sweep_command(opt, *cfg);
    std::cerr << "unknown command: " << opt.command << "\n";
    return kValidationExit;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalExit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return kValidationExit;
  } catch (const std::domain_error& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalExit;
  }
}

}  // namespace cli
}  // namespace cvqkd
