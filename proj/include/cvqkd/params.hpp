#pragma once

#include <map>
#include <string>

#include "scenario.hpp"

namespace cvqkd {

// Fiber model: 0.2 dB/km attenuation, eta = 10^(-0.02 d).
inline double distance_to_transmittance(double km) {
  if (km < 0.0) throw std::invalid_argument("distance must be >= 0");
  return std::pow(10.0, -0.02 * km);
}

inline double transmittance_to_distance(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must be in (0,1]");
  return -50.0 * std::log10(eta);
}

struct ParamValue {
  enum class Kind { Number, Text } kind = Kind::Number;
  double num = 0.0;
  std::string text;

  static ParamValue number(double v) { return {Kind::Number, v, {}}; }
  static ParamValue str(std::string s) { return {Kind::Text, 0.0, std::move(s)}; }
};

using ParamMap = std::map<std::string, ParamValue>;

// Sets one numeric scenario field by its dotted name; used by sweeps.
inline void apply_param(Scenario& sc, const std::string& name, double value) {
  auto& p = sc.protocol;
  if (name == "channel.eta") sc.channel.eta = value;
  else if (name == "channel.distance_km") sc.channel.eta = distance_to_transmittance(value);
  else if (name == "channel.epsilon") sc.channel.epsilon = value;
  else if (name == "protocol.v_s") {
    p.v_s = value;
    if (p.modulation == ModulationMode::Standard) p.v_m = 1.0 / value - value;
  } else if (name == "protocol.v_m") {
    if (p.modulation == ModulationMode::Standard)
      throw std::invalid_argument("protocol.v_m is fixed under standard modulation");
    p.v_m = value;
  } else if (name == "protocol.beta") p.beta = value;
  else if (name == "side_a.eta_a") sc.side_a.eta_a = value;
  else if (name == "side_a.v_ns") sc.side_a.v_ns = value;
  else if (name == "side_a.v_nm") sc.side_a.v_nm = value;
  else if (name == "side_a.k") sc.side_a.k = value;
  else if (name == "side_b.eta_b") sc.side_b.eta_b = value;
  else if (name == "side_b.eta_b1") sc.side_b.eta_b1 = value;
  else if (name == "side_b.eta_b2") sc.side_b.eta_b2 = value;
  else if (name == "side_b.phi") sc.side_b.phi = value;
  else if (name == "side_b.v_n") sc.side_b.v_n = value;
  else if (name == "side_b.g") sc.side_b.g = value;
  else if (name == "side_b.g_prime") sc.side_b.g_prime = value;
  else if (name == "detector.eta_d") sc.detector.eta_d = value;
  else if (name == "detector.v_d") sc.detector.v_d = value;
  else throw std::invalid_argument("unknown sweep parameter: " + name);
}

inline const char* family_name(Family f) { return f == Family::Squeezed ? "squeezed" : "coherent"; }
inline const char* modulation_name(ModulationMode m) {
  return m == ModulationMode::Standard ? "standard" : "optimized";
}
inline const char* input_a_name(SideInputA i) {
  switch (i) {
    case SideInputA::Vacuum: return "vacuum";
    case SideInputA::Thermal: return "thermal";
    case SideInputA::UncorrelatedModulation: return "uncorrelated_modulation";
    case SideInputA::CorrelatedModulation: return "correlated_modulation";
  }
  return "";
}
inline const char* topology_name(TopologyB t) {
  return t == TopologyB::SingleCoupler ? "single_coupler" : "interferometer";
}
inline const char* monitoring_name(Monitoring m) {
  switch (m) {
    case Monitoring::Off: return "off";
    case Monitoring::Weighted: return "weighted";
    case Monitoring::Optimal: return "optimal";
  }
  return "";
}

// Full flattened view of a scenario; every record emitted by the tools echoes
// these so that rows are self-describing.
inline ParamMap scenario_to_params(const Scenario& sc) {
  ParamMap m;
  m["protocol.family"] = ParamValue::str(family_name(sc.protocol.family));
  m["protocol.v_s"] = ParamValue::number(sc.protocol.v_s);
  m["protocol.modulation"] = ParamValue::str(modulation_name(sc.protocol.modulation));
  m["protocol.v_m"] = ParamValue::number(sc.protocol.v_m);
  m["protocol.beta"] = ParamValue::number(sc.protocol.beta);
  m["channel.eta"] = ParamValue::number(sc.channel.eta);
  m["channel.distance_km"] = ParamValue::number(transmittance_to_distance(sc.channel.eta));
  m["channel.epsilon"] = ParamValue::number(sc.channel.epsilon);
  m["side_a.present"] = ParamValue::str(sc.side_a.present ? "true" : "false");
  m["side_a.eta_a"] = ParamValue::number(sc.side_a.eta_a);
  m["side_a.input"] = ParamValue::str(sc.side_a.present ? input_a_name(sc.side_a.input) : "none");
  m["side_a.v_ns"] = ParamValue::number(sc.side_a.v_ns);
  m["side_a.v_nm"] = ParamValue::number(sc.side_a.v_nm);
  m["side_a.k"] = ParamValue::number(sc.side_a.k);
  m["side_b.present"] = ParamValue::str(sc.side_b.present ? "true" : "false");
  m["side_b.topology"] =
      ParamValue::str(sc.side_b.present ? topology_name(sc.side_b.topology) : "none");
  m["side_b.eta_b"] = ParamValue::number(sc.side_b.eta_b);
  m["side_b.eta_b1"] = ParamValue::number(sc.side_b.eta_b1);
  m["side_b.eta_b2"] = ParamValue::number(sc.side_b.eta_b2);
  m["side_b.phi"] = ParamValue::number(sc.side_b.phi);
  m["side_b.v_n"] = ParamValue::number(sc.side_b.v_n);
  m["side_b.monitoring"] =
      ParamValue::str(sc.side_b.present ? monitoring_name(sc.side_b.monitoring) : "none");
  m["side_b.g"] = ParamValue::number(sc.side_b.g);
  m["side_b.g_prime"] = ParamValue::number(sc.side_b.g_prime);
  m["detector.eta_d"] = ParamValue::number(sc.detector.eta_d);
  m["detector.v_d"] = ParamValue::number(sc.detector.v_d);
  return m;
}

}  // namespace cvqkd
