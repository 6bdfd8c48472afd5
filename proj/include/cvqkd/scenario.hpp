#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvqkd {

enum class Family { Squeezed, Coherent };
enum class ModulationMode { Standard, Optimized };
enum class SideInputA { Vacuum, Thermal, UncorrelatedModulation, CorrelatedModulation };
enum class CorrelatedInput { Vacuum, MatchedSqueezed };
enum class TopologyB { SingleCoupler, Interferometer };
enum class Monitoring { Off, Weighted, Optimal };

// lambda = 1 for the squeezed-state protocol, 1/2 for the coherent-state one
inline double protocol_lambda(Family f) { return f == Family::Squeezed ? 1.0 : 0.5; }

struct ProtocolParams {
  Family family = Family::Coherent;
  double v_s = 1.0;  // signal variance; coherent forces 1
  ModulationMode modulation = ModulationMode::Standard;
  double v_m = 0.0;  // modulation variance; derived under Standard
  double beta = 0.95;

  double total_variance() const { return v_s + v_m; }
};

struct ChannelParams {
  double eta = 1.0;
  double epsilon = 0.0;
};

struct SideChannelA {
  bool present = false;
  double eta_a = 1.0;
  SideInputA input = SideInputA::Vacuum;
  double v_ns = 1.0;  // Thermal input variance
  double v_nm = 0.0;  // UncorrelatedModulation variance
  double k = 0.0;     // CorrelatedModulation weight
  CorrelatedInput correlated_input = CorrelatedInput::Vacuum;
};

struct SideChannelB {
  bool present = false;
  TopologyB topology = TopologyB::SingleCoupler;
  double eta_b = 1.0;
  double eta_b1 = 1.0;
  double eta_b2 = 1.0;
  double phi = 0.0;
  double v_n = 1.0;
  Monitoring monitoring = Monitoring::Off;
  double g = 1.0;
  double g_prime = 0.0;
};

struct DetectorParams {
  double eta_d = 1.0;
  double v_d = 1.0;
};

struct Scenario {
  ProtocolParams protocol;
  ChannelParams channel;
  SideChannelA side_a;
  SideChannelB side_b;
  DetectorParams detector;

  // Collects every invariant violation instead of stopping at the first.
  std::vector<std::string> validation_errors() const {
    std::vector<std::string> errs;
    auto bad = [&errs](const std::string& m) { errs.push_back(m); };

    if (protocol.family == Family::Coherent) {
      if (std::fabs(protocol.v_s - 1.0) > 1e-12)
        bad("protocol.v_s: coherent protocol requires v_s = 1");
    } else if (!(protocol.v_s > 0.0 && protocol.v_s <= 1.0)) {
      bad("protocol.v_s: squeezed protocol requires 0 < v_s <= 1");
    }
    if (protocol.modulation == ModulationMode::Standard) {
      const double fixed = 1.0 / protocol.v_s - protocol.v_s;
      if (std::fabs(protocol.v_m - fixed) > 1e-9 * std::max(1.0, fixed))
        bad("protocol.v_m: standard modulation fixes v_m = 1/v_s - v_s");
    } else if (protocol.v_m < 0.0) {
      bad("protocol.v_m: must be >= 0");
    }
    if (!(protocol.beta > 0.0 && protocol.beta <= 1.0)) bad("protocol.beta: must be in (0,1]");

    if (!(channel.eta > 0.0 && channel.eta <= 1.0)) bad("channel.eta: must be in (0,1]");
    if (channel.epsilon < 0.0) bad("channel.epsilon: must be >= 0");

    if (side_a.present) {
      if (!(side_a.eta_a > 0.0 && side_a.eta_a <= 1.0)) bad("side_a.eta_a: must be in (0,1]");
      if (side_a.input == SideInputA::Thermal && side_a.v_ns < 1.0)
        bad("side_a.v_ns: thermal input variance must be >= 1");
      if (side_a.input == SideInputA::UncorrelatedModulation && side_a.v_nm < 0.0)
        bad("side_a.v_nm: must be >= 0");
    }
    if (side_b.present) {
      if (side_b.v_n < 1.0) bad("side_b.v_n: noise variance must be >= 1");
      if (side_b.topology == TopologyB::SingleCoupler) {
        if (!(side_b.eta_b > 0.0 && side_b.eta_b <= 1.0)) bad("side_b.eta_b: must be in (0,1]");
      } else {
        if (!(side_b.eta_b1 > 0.0 && side_b.eta_b1 <= 1.0)) bad("side_b.eta_b1: must be in (0,1]");
        if (!(side_b.eta_b2 > 0.0 && side_b.eta_b2 <= 1.0)) bad("side_b.eta_b2: must be in (0,1]");
        if (side_b.monitoring == Monitoring::Optimal && side_b.phi != 0.0)
          bad("side_b.monitoring: optimal monitoring requires phi = 0 for the interferometer");
      }
      if (side_b.monitoring == Monitoring::Weighted && side_b.g == 0.0 && side_b.g_prime == 0.0)
        bad("side_b.g/g_prime: weights must not both be zero");
    }
    if (!(detector.eta_d > 0.0 && detector.eta_d <= 1.0)) bad("detector.eta_d: must be in (0,1]");
    if (detector.v_d < 1.0) bad("detector.v_d: must be >= 1");
    return errs;
  }

  void validate() const {
    auto errs = validation_errors();
    if (!errs.empty()) {
      std::string all;
      for (const auto& e : errs) {
        if (!all.empty()) all += "; ";
        all += e;
      }
      throw std::invalid_argument(all);
    }
  }
};

// Chained construction; finish() validates.
class ScenarioBuilder {
 public:
  ScenarioBuilder& squeezed(double v_s) {
    s_.protocol.family = Family::Squeezed;
    s_.protocol.v_s = v_s;
    if (s_.protocol.modulation == ModulationMode::Standard)
      s_.protocol.v_m = 1.0 / v_s - v_s;
    return *this;
  }
  ScenarioBuilder& coherent() {
    s_.protocol.family = Family::Coherent;
    s_.protocol.v_s = 1.0;
    if (s_.protocol.modulation == ModulationMode::Standard) s_.protocol.v_m = 0.0;
    return *this;
  }
  ScenarioBuilder& modulation(double v_m) {
    s_.protocol.modulation = ModulationMode::Optimized;
    s_.protocol.v_m = v_m;
    return *this;
  }
  ScenarioBuilder& standard_modulation() {
    s_.protocol.modulation = ModulationMode::Standard;
    s_.protocol.v_m = 1.0 / s_.protocol.v_s - s_.protocol.v_s;
    return *this;
  }
  ScenarioBuilder& beta(double b) {
    s_.protocol.beta = b;
    return *this;
  }
  ScenarioBuilder& channel(double eta, double epsilon = 0.0) {
    s_.channel = {eta, epsilon};
    return *this;
  }
  ScenarioBuilder& leakage(double eta_a) {
    s_.side_a.present = true;
    s_.side_a.eta_a = eta_a;
    s_.side_a.input = SideInputA::Vacuum;
    return *this;
  }
  ScenarioBuilder& leakage_thermal_input(double v_ns) {
    s_.side_a.input = SideInputA::Thermal;
    s_.side_a.v_ns = v_ns;
    return *this;
  }
  ScenarioBuilder& leakage_uncorrelated_modulation(double v_nm) {
    s_.side_a.input = SideInputA::UncorrelatedModulation;
    s_.side_a.v_nm = v_nm;
    return *this;
  }
  ScenarioBuilder& leakage_correlated_modulation(double k, CorrelatedInput in) {
    s_.side_a.input = SideInputA::CorrelatedModulation;
    s_.side_a.k = k;
    s_.side_a.correlated_input = in;
    return *this;
  }
  ScenarioBuilder& noise_infusion(double eta_b, double v_n) {
    s_.side_b.present = true;
    s_.side_b.topology = TopologyB::SingleCoupler;
    s_.side_b.eta_b = eta_b;
    s_.side_b.v_n = v_n;
    return *this;
  }
  ScenarioBuilder& noise_infusion_interferometer(double eta_b1, double eta_b2, double phi,
                                                 double v_n) {
    s_.side_b.present = true;
    s_.side_b.topology = TopologyB::Interferometer;
    s_.side_b.eta_b1 = eta_b1;
    s_.side_b.eta_b2 = eta_b2;
    s_.side_b.phi = phi;
    s_.side_b.v_n = v_n;
    return *this;
  }
  ScenarioBuilder& monitoring_optimal() {
    s_.side_b.monitoring = Monitoring::Optimal;
    return *this;
  }
  ScenarioBuilder& monitoring_weighted(double g, double g_prime) {
    s_.side_b.monitoring = Monitoring::Weighted;
    s_.side_b.g = g;
    s_.side_b.g_prime = g_prime;
    return *this;
  }
  ScenarioBuilder& detectors(double eta_d, double v_d) {
    s_.detector = {eta_d, v_d};
    return *this;
  }

  Scenario finish() const {
    s_.validate();
    return s_;
  }
  Scenario finish_unchecked() const { return s_; }

 private:
  mutable Scenario s_;
};

}  // namespace cvqkd
