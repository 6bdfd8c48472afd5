#pragma once

#include <cstdlib>
#include <sstream>

#include "analysis.hpp"
#include "params.hpp"

namespace cvqkd {

// Parsed `key = value` configuration. Errors are collected, not fail-fast.
struct RunConfig {
  Scenario scenario;
  std::vector<SweepAxis> axes;
  std::string threshold_target;  // eps_max | vn_max | max_distance
  std::string optimize_target;   // modulation | monitor_weight
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

namespace detail {

struct RawEntry {
  std::string value;
  int line = 0;
};

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

inline bool parse_number(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && end != s.c_str();
}

struct ConfigReader {
  std::map<std::string, RawEntry> entries;
  std::vector<std::string>* errors;
  std::vector<std::string> consumed;

  bool has(const std::string& key) const { return entries.count(key) > 0; }

  std::optional<std::string> take(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    consumed.push_back(key);
    return it->second.value;
  }

  std::optional<double> take_number(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    double d;
    if (!parse_number(*v, d)) {
      errors->push_back(key + ": not a number: '" + *v + "' (line " +
                        std::to_string(entries.at(key).line) + ")");
      return std::nullopt;
    }
    return d;
  }

  std::optional<bool> take_bool(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    if (*v == "true") return true;
    if (*v == "false") return false;
    errors->push_back(key + ": expected true or false, got '" + *v + "'");
    return std::nullopt;
  }

  void finish_unknown() {
    for (const auto& [key, entry] : entries) {
      bool used = false;
      for (const auto& c : consumed)
        if (c == key) used = true;
      if (!used)
        errors->push_back(key + ": unknown key (line " + std::to_string(entry.line) + ")");
    }
  }
};

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  detail::ConfigReader rd;
  rd.errors = &cfg.errors;

  std::istringstream in(text);
  std::string raw_line;
  int lineno = 0;
  while (std::getline(in, raw_line)) {
    ++lineno;
    std::string line = raw_line;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      cfg.errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      cfg.errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    auto it = rd.entries.find(key);
    if (it != rd.entries.end()) {
      cfg.errors.push_back(key + ": duplicate key (lines " + std::to_string(it->second.line) +
                           " and " + std::to_string(lineno) + ")");
      continue;
    }
    rd.entries[key] = {value, lineno};
  }

  Scenario& sc = cfg.scenario;

  // protocol
  if (auto fam = rd.take("protocol.family")) {
    if (*fam == "squeezed") sc.protocol.family = Family::Squeezed;
    else if (*fam == "coherent") sc.protocol.family = Family::Coherent;
    else cfg.errors.push_back("protocol.family: expected squeezed or coherent");
  } else {
    cfg.errors.push_back("protocol.family: required");
  }
  if (auto mode = rd.take("protocol.modulation")) {
    if (*mode == "standard") sc.protocol.modulation = ModulationMode::Standard;
    else if (*mode == "optimized") sc.protocol.modulation = ModulationMode::Optimized;
    else cfg.errors.push_back("protocol.modulation: expected standard or optimized");
  }
  if (sc.protocol.family == Family::Squeezed) {
    if (auto vs = rd.take_number("protocol.v_s")) sc.protocol.v_s = *vs;
    else if (!rd.has("protocol.v_s"))
      cfg.errors.push_back("protocol.v_s: required for the squeezed protocol");
  } else {
    sc.protocol.v_s = 1.0;
    if (auto vs = rd.take_number("protocol.v_s")) sc.protocol.v_s = *vs;
  }
  if (auto vm = rd.take_number("protocol.v_m")) sc.protocol.v_m = *vm;
  else if (sc.protocol.modulation == ModulationMode::Standard)
    sc.protocol.v_m = 1.0 / sc.protocol.v_s - sc.protocol.v_s;
  else
    cfg.errors.push_back("protocol.v_m: required for optimized modulation");
  if (auto b = rd.take_number("protocol.beta")) sc.protocol.beta = *b;

  // channel
  const bool has_eta = rd.has("channel.eta"), has_dist = rd.has("channel.distance_km");
  if (has_eta && has_dist)
    cfg.errors.push_back("channel.eta and channel.distance_km are mutually exclusive");
  if (auto eta = rd.take_number("channel.eta")) sc.channel.eta = *eta;
  if (auto d = rd.take_number("channel.distance_km")) {
    if (*d >= 0.0) sc.channel.eta = distance_to_transmittance(*d);
    else cfg.errors.push_back("channel.distance_km: must be >= 0");
  }
  if (!has_eta && !has_dist)
    cfg.errors.push_back("channel.eta (or channel.distance_km): required");
  if (auto e = rd.take_number("channel.epsilon")) sc.channel.epsilon = *e;

  // type-A side channel
  {
    bool any = false;
    for (const auto& k :
         {"side_a.eta_a", "side_a.input", "side_a.v_ns", "side_a.v_nm", "side_a.k",
          "side_a.correlated_input"})
      any = any || rd.has(k);
    auto present = rd.take_bool("side_a.present");
    sc.side_a.present = present.value_or(any);
    if (auto ea = rd.take_number("side_a.eta_a")) sc.side_a.eta_a = *ea;
    else if (sc.side_a.present) cfg.errors.push_back("side_a.eta_a: required");
    if (auto inp = rd.take("side_a.input")) {
      if (*inp == "vacuum") sc.side_a.input = SideInputA::Vacuum;
      else if (*inp == "thermal") sc.side_a.input = SideInputA::Thermal;
      else if (*inp == "uncorrelated_modulation")
        sc.side_a.input = SideInputA::UncorrelatedModulation;
      else if (*inp == "correlated_modulation") sc.side_a.input = SideInputA::CorrelatedModulation;
      else
        cfg.errors.push_back(
            "side_a.input: expected vacuum, thermal, uncorrelated_modulation or "
            "correlated_modulation");
    }
    if (auto v = rd.take_number("side_a.v_ns")) sc.side_a.v_ns = *v;
    else if (sc.side_a.input == SideInputA::Thermal)
      cfg.errors.push_back("side_a.v_ns: required for the thermal input");
    if (auto v = rd.take_number("side_a.v_nm")) sc.side_a.v_nm = *v;
    else if (sc.side_a.input == SideInputA::UncorrelatedModulation)
      cfg.errors.push_back("side_a.v_nm: required for uncorrelated modulation");
    if (auto kv = rd.take("side_a.k")) {
      if (*kv == "optimal") {
        sc.side_a.k = sc.side_a.eta_a > 0.0 ? optimal_k(sc.side_a.eta_a) : 0.0;
      } else {
        double d;
        if (detail::parse_number(*kv, d)) sc.side_a.k = d;
        else cfg.errors.push_back("side_a.k: expected a number or 'optimal'");
      }
    } else if (sc.side_a.input == SideInputA::CorrelatedModulation) {
      cfg.errors.push_back("side_a.k: required for correlated modulation");
    }
    if (auto ci = rd.take("side_a.correlated_input")) {
      if (*ci == "vacuum") sc.side_a.correlated_input = CorrelatedInput::Vacuum;
      else if (*ci == "matched_squeezed")
        sc.side_a.correlated_input = CorrelatedInput::MatchedSqueezed;
      else cfg.errors.push_back("side_a.correlated_input: expected vacuum or matched_squeezed");
    }
  }

  // type-B side channel
  {
    bool any = false;
    for (const auto& k : {"side_b.topology", "side_b.eta_b", "side_b.eta_b1", "side_b.eta_b2",
                          "side_b.phi", "side_b.v_n", "side_b.monitoring", "side_b.g",
                          "side_b.g_prime"})
      any = any || rd.has(k);
    auto present = rd.take_bool("side_b.present");
    sc.side_b.present = present.value_or(any);
    if (auto topo = rd.take("side_b.topology")) {
      if (*topo == "single_coupler") sc.side_b.topology = TopologyB::SingleCoupler;
      else if (*topo == "interferometer") sc.side_b.topology = TopologyB::Interferometer;
      else cfg.errors.push_back("side_b.topology: expected single_coupler or interferometer");
    }
    if (auto v = rd.take_number("side_b.v_n")) sc.side_b.v_n = *v;
    else if (sc.side_b.present) cfg.errors.push_back("side_b.v_n: required");
    if (sc.side_b.topology == TopologyB::SingleCoupler) {
      if (auto v = rd.take_number("side_b.eta_b")) sc.side_b.eta_b = *v;
      else if (sc.side_b.present) cfg.errors.push_back("side_b.eta_b: required");
    } else {
      if (auto v = rd.take_number("side_b.eta_b1")) sc.side_b.eta_b1 = *v;
      else if (sc.side_b.present)
        cfg.errors.push_back("side_b.eta_b1: required for the interferometer topology");
      if (auto v = rd.take_number("side_b.eta_b2")) sc.side_b.eta_b2 = *v;
      else if (sc.side_b.present)
        cfg.errors.push_back("side_b.eta_b2: required for the interferometer topology");
      if (auto v = rd.take_number("side_b.phi")) sc.side_b.phi = *v;
      else if (sc.side_b.present)
        cfg.errors.push_back("side_b.phi: required for the interferometer topology");
    }
    if (auto mon = rd.take("side_b.monitoring")) {
      if (*mon == "off") sc.side_b.monitoring = Monitoring::Off;
      else if (*mon == "weighted") sc.side_b.monitoring = Monitoring::Weighted;
      else if (*mon == "optimal") sc.side_b.monitoring = Monitoring::Optimal;
      else cfg.errors.push_back("side_b.monitoring: expected off, weighted or optimal");
    }
    if (auto v = rd.take_number("side_b.g")) sc.side_b.g = *v;
    if (auto v = rd.take_number("side_b.g_prime")) sc.side_b.g_prime = *v;
    else if (sc.side_b.monitoring == Monitoring::Weighted)
      cfg.errors.push_back("side_b.g_prime: required for weighted monitoring");
  }

  // detectors
  if (auto v = rd.take_number("detector.eta_d")) sc.detector.eta_d = *v;
  if (auto v = rd.take_number("detector.v_d")) sc.detector.v_d = *v;

  // command options
  if (auto v = rd.take("threshold.target")) {
    if (*v == "eps_max" || *v == "vn_max" || *v == "max_distance") cfg.threshold_target = *v;
    else cfg.errors.push_back("threshold.target: expected eps_max, vn_max or max_distance");
  }
  if (auto v = rd.take("optimize.target")) {
    if (*v == "modulation" || *v == "monitor_weight") cfg.optimize_target = *v;
    else cfg.errors.push_back("optimize.target: expected modulation or monitor_weight");
  }

  // sweep axes
  for (int i = 1; i <= 8; ++i) {
    const std::string base = "sweep.axis" + std::to_string(i) + ".";
    if (!rd.has(base + "param") && !rd.has(base + "min") && !rd.has(base + "max") &&
        !rd.has(base + "steps") && !rd.has(base + "scale"))
      continue;
    SweepAxis ax;
    bool axis_ok = true;
    if (auto p = rd.take(base + "param")) {
      ax.param = *p;
      Scenario probe = sc;
      try {
        apply_param(probe, ax.param, ax.param == "side_b.v_n" ? 1.0 : 0.5);
      } catch (const std::invalid_argument& e) {
        cfg.errors.push_back(base + "param: " + e.what());
        axis_ok = false;
      }
    } else {
      cfg.errors.push_back(base + "param: required");
      axis_ok = false;
    }
    auto lo = rd.take_number(base + "min"), hi = rd.take_number(base + "max");
    auto st = rd.take_number(base + "steps");
    if (!lo || !hi || !st) {
      cfg.errors.push_back(base + "{min,max,steps}: required");
      axis_ok = false;
    } else {
      ax.min = *lo;
      ax.max = *hi;
      ax.steps = static_cast<int>(*st);
      if (ax.steps < 1 || *st != ax.steps) {
        cfg.errors.push_back(base + "steps: must be a positive integer");
        axis_ok = false;
      }
      if (ax.min > ax.max) {
        cfg.errors.push_back(base + "min: must not exceed max");
        axis_ok = false;
      }
    }
    if (auto scv = rd.take(base + "scale")) {
      if (*scv == "linear") ax.log_spaced = false;
      else if (*scv == "log") ax.log_spaced = true;
      else {
        cfg.errors.push_back(base + "scale: expected linear or log");
        axis_ok = false;
      }
    }
    if (axis_ok) cfg.axes.push_back(ax);
  }

  rd.finish_unknown();

  for (const auto& e : sc.validation_errors()) cfg.errors.push_back(e);
  return cfg;
}

}  // namespace cvqkd
