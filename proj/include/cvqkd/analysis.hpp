#pragma once

#include <functional>

#include "collective.hpp"
#include "countermeasures.hpp"
#include "params.hpp"

namespace cvqkd {

inline KeyRateReport evaluate_key_rate(const Scenario& sc, Attack attack,
                                       const PurificationConfig& cfg = {}) {
  return attack == Attack::Individual ? key_rate_individual(sc) : key_rate_collective(sc, cfg);
}

struct OptimizeResult {
  double x = 0.0;
  double value = 0.0;
  bool at_boundary = false;
  bool multimodal = false;
  int evaluations = 0;
};

namespace detail {

// Coarse grid followed by golden-section refinement. The objective involves
// eigen-decompositions, so everything stays derivative-free.
inline OptimizeResult maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                      bool log_spaced, int coarse = 64, double rel_tol = 1e-6) {
  OptimizeResult res;
  if (lo > hi) std::swap(lo, hi);
  if (hi - lo < 1e-300 || coarse < 2) {
    res.x = lo;
    res.value = f(lo);
    res.evaluations = 1;
    res.at_boundary = true;
    return res;
  }
  auto to_x = [&](double u) { return log_spaced ? std::exp(u) : u; };
  const double ulo = log_spaced ? std::log(lo) : lo;
  const double uhi = log_spaced ? std::log(hi) : hi;
  std::vector<double> us(coarse), vs(coarse);
  for (int i = 0; i < coarse; ++i) {
    us[i] = ulo + (uhi - ulo) * i / (coarse - 1);
    vs[i] = f(to_x(us[i]));
    ++res.evaluations;
  }
  int best = 0;
  for (int i = 1; i < coarse; ++i)
    if (vs[i] > vs[best]) best = i;

  // flag genuinely distinct interior peaks instead of silently picking one
  double second = -std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < coarse; ++i)
    if (vs[i] > vs[i - 1] && vs[i] > vs[i + 1] && i != best) second = std::max(second, vs[i]);
  if (std::isfinite(second) && vs[best] - second > 1e-6 &&
      (best == 0 || best == coarse - 1 || (vs[best] > vs[best - 1] && vs[best] > vs[best + 1])))
    res.multimodal = true;

  if (best == 0 || best == coarse - 1) {
    res.at_boundary = true;
    res.x = to_x(us[best]);
    res.value = vs[best];
    return res;
  }
  double a = us[best - 1], b = us[best + 1];
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = f(to_x(c)), fd = f(to_x(d));
  res.evaluations += 2;
  const double span = std::max(std::fabs(us[best]), 1.0);
  while (std::fabs(b - a) > rel_tol * span) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(to_x(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(to_x(d));
    }
    ++res.evaluations;
  }
  const double ux = fc > fd ? c : d;
  res.x = to_x(ux);
  res.value = std::max(fc, fd);
  if (vs[best] > res.value) {  // refinement never loses the grid point
    res.x = to_x(us[best]);
    res.value = vs[best];
  }
  return res;
}

}  // namespace detail

struct ModulationBounds {
  double lo = 1e-3;
  double hi = 1e3;
};

// Maximizes the key rate over the modulation variance on a log-spaced bracket.
inline OptimizeResult optimize_modulation(const Scenario& sc, Attack attack,
                                          const PurificationConfig& cfg = {},
                                          ModulationBounds bounds = {}) {
  if (sc.protocol.modulation != ModulationMode::Optimized)
    throw std::invalid_argument("optimize_modulation: protocol modulation is not optimized");
  auto f = [&](double v_m) {
    Scenario s = sc;
    s.protocol.v_m = v_m;
    return evaluate_key_rate(s, attack, cfg).key_rate;
  };
  return detail::maximize_scalar(f, bounds.lo, bounds.hi, /*log_spaced=*/true);
}

// Maximizes the key rate over the monitoring weight g' (g fixed to 1) for the
// interferometric type-B coupling; reproduces the partial compensation
// available when the phase shift prevents full decoupling.
inline OptimizeResult optimize_monitor_weight(const Scenario& sc, Attack attack,
                                              const PurificationConfig& cfg = {}, double lo = -10.0,
                                              double hi = 10.0) {
  if (!sc.side_b.present)
    throw std::invalid_argument("optimize_monitor_weight: no type-B side channel to monitor");
  if (sc.side_b.topology != TopologyB::Interferometer)
    throw std::invalid_argument("optimize_monitor_weight: interferometer topology required");
  auto f = [&](double gp) {
    Scenario s = sc;
    s.side_b.monitoring = Monitoring::Weighted;
    s.side_b.g = 1.0;
    s.side_b.g_prime = gp;
    return evaluate_key_rate(s, attack, cfg).key_rate;
  };
  return detail::maximize_scalar(f, lo, hi, /*log_spaced=*/false);
}

struct ThresholdResult {
  std::string parameter;
  double critical = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int iterations = 0;
  Attack attack = Attack::Collective;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const {
    for (const auto& x : flags)
      if (x == f) return true;
    return false;
  }
};

struct ThresholdOptions {
  // re-optimize the modulation at every probed point; defaults to doing so
  // exactly when the protocol declares optimized modulation
  std::optional<bool> reoptimize_modulation;
  double param_tol = 1e-8;
  double rate_tol = 1e-10;
};

namespace detail {

inline ThresholdResult bisect_threshold(const Scenario& sc, Attack attack,
                                        const PurificationConfig& cfg, const std::string& param,
                                        double lo, double hi, const ThresholdOptions& opt,
                                        const std::function<Scenario(double)>& at) {
  ThresholdResult res;
  res.parameter = param;
  res.attack = attack;
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  const bool reopt = opt.reoptimize_modulation.value_or(sc.protocol.modulation ==
                                                        ModulationMode::Optimized);
  auto rate = [&](double x) {
    const Scenario s = at(x);
    if (reopt) return optimize_modulation(s, attack, cfg).value;
    return evaluate_key_rate(s, attack, cfg).key_rate;
  };
  if (rate(lo) <= 0.0) {
    res.critical = lo;
    res.flags.push_back("insecure_at_bracket_start");
    return res;
  }
  if (rate(hi) > 0.0) {
    res.critical = hi;
    res.flags.push_back("bracket_exhausted");
    return res;
  }
  while (hi - lo > opt.param_tol) {
    const double mid = 0.5 * (lo + hi);
    const double k = rate(mid);
    ++res.iterations;
    if (std::fabs(k) <= opt.rate_tol) {
      res.critical = mid;
      res.bracket_lo = lo;
      res.bracket_hi = hi;
      return res;
    }
    (k > 0.0 ? lo : hi) = mid;
  }
  res.critical = 0.5 * (lo + hi);
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  return res;
}

}  // namespace detail

// Maximum tolerable channel excess noise.
inline ThresholdResult find_eps_max(const Scenario& sc, Attack attack,
                                    const PurificationConfig& cfg = {},
                                    const ThresholdOptions& opt = {}) {
  auto res = detail::bisect_threshold(sc, attack, cfg, "channel.epsilon", 0.0, 10.0, opt,
                                      [&](double e) {
                                        Scenario s = sc;
                                        s.channel.epsilon = e;
                                        return s;
                                      });
  if (res.has_flag("insecure_at_bracket_start")) {
    res.flags.push_back("insecure_at_zero_noise");
    res.critical = 0.0;
  }
  return res;
}

// Maximum tolerable type-B side-channel noise variance.
inline ThresholdResult find_vn_max(const Scenario& sc, Attack attack,
                                   const PurificationConfig& cfg = {},
                                   const ThresholdOptions& opt = {}) {
  if (!sc.side_b.present)
    throw std::invalid_argument("find_vn_max: no type-B side channel present");
  return detail::bisect_threshold(sc, attack, cfg, "side_b.v_n", 1.0, 1e3, opt, [&](double v) {
    Scenario s = sc;
    s.side_b.v_n = v;
    return s;
  });
}

// Maximum secure distance in km over standard telecom fiber.
inline ThresholdResult find_max_distance(const Scenario& sc, Attack attack,
                                         const PurificationConfig& cfg = {},
                                         const ThresholdOptions& opt = {}) {
  auto res = detail::bisect_threshold(sc, attack, cfg, "channel.distance_km", 0.0, 500.0, opt,
                                      [&](double d) {
                                        Scenario s = sc;
                                        s.channel.eta = distance_to_transmittance(d);
                                        return s;
                                      });
  if (res.has_flag("insecure_at_bracket_start"))
    throw std::domain_error("find_max_distance: insecure at zero distance");
  return res;
}

struct SweepAxis {
  std::string param;
  double min = 0.0;
  double max = 0.0;
  int steps = 1;
  bool log_spaced = false;
};

struct SweepGrid {
  std::vector<SweepAxis> axes;
  Scenario base;
};

struct SweepRecord {
  ParamMap params;
  KeyRateReport report;
  std::string error;  // empty on success
};

struct SweepOptions {
  std::optional<bool> reoptimize_modulation;
};

// Evaluates the key rate on the cartesian grid, first axis outermost.
// Per-point failures are recorded and the sweep continues.
inline std::vector<SweepRecord> run_sweep(const SweepGrid& grid, Attack attack,
                                          const PurificationConfig& cfg = {},
                                          const SweepOptions& opt = {}) {
  for (const auto& ax : grid.axes) {
    if (ax.steps < 1) throw std::invalid_argument("sweep axis needs steps >= 1");
    if (ax.min > ax.max) throw std::invalid_argument("sweep axis with min > max");
    if (ax.log_spaced && ax.min <= 0.0)
      throw std::invalid_argument("log-spaced sweep axis needs min > 0");
  }
  bool sweeps_modulation = false;
  for (const auto& ax : grid.axes)
    if (ax.param == "protocol.v_m") sweeps_modulation = true;
  const bool reopt = opt.reoptimize_modulation.value_or(
      grid.base.protocol.modulation == ModulationMode::Optimized && !sweeps_modulation);

  std::vector<SweepRecord> out;
  if (grid.axes.empty()) return out;
  std::vector<int> idx(grid.axes.size(), 0);
  while (true) {
    SweepRecord rec;
    Scenario s = grid.base;
    try {
      for (size_t a = 0; a < grid.axes.size(); ++a) {
        const auto& ax = grid.axes[a];
        double v = ax.min;
        if (ax.steps > 1) {
          const double t = static_cast<double>(idx[a]) / (ax.steps - 1);
          v = ax.log_spaced ? ax.min * std::pow(ax.max / ax.min, t)
                            : ax.min + (ax.max - ax.min) * t;
        }
        apply_param(s, ax.param, v);
      }
      rec.params = scenario_to_params(s);
      if (reopt) {
        const auto o = optimize_modulation(s, attack, cfg);
        s.protocol.v_m = o.x;
        rec.params = scenario_to_params(s);
        rec.report = evaluate_key_rate(s, attack, cfg);
        if (o.at_boundary) rec.report.flags.push_back("modulation_at_bracket_edge");
        if (o.multimodal) rec.report.flags.push_back("modulation_multimodal");
      } else {
        rec.report = evaluate_key_rate(s, attack, cfg);
      }
    } catch (const std::exception& e) {
      rec.error = e.what();
      if (rec.params.empty()) rec.params = scenario_to_params(grid.base);
    }
    out.push_back(std::move(rec));
    int a = static_cast<int>(grid.axes.size()) - 1;
    while (a >= 0) {
      if (++idx[a] < grid.axes[a].steps) break;
      idx[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return out;
}

}  // namespace cvqkd
