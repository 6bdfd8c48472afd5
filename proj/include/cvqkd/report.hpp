#pragma once

#include <map>
#include <string>
#include <vector>

namespace cvqkd {

enum class Attack { Individual, Collective };

inline const char* attack_name(Attack a) {
  return a == Attack::Individual ? "individual" : "collective";
}

// Result of one key-rate evaluation. eve_bound is the Shannon information
// I_BE for individual attacks and the Holevo bound chi_BE for collective
// ones; key_rate = beta * I_AB - eve_bound (beta = 1 under individual
// attacks, which assume perfect postprocessing).
struct KeyRateReport {
  double i_ab = 0.0;
  double eve_bound = 0.0;
  double key_rate = 0.0;
  Attack attack = Attack::Collective;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const {
    for (const auto& x : flags)
      if (x == f) return true;
    return false;
  }
};

}  // namespace cvqkd
