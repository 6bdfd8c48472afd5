#pragma once

#include <numbers>

#include "gaussian.hpp"
#include "individual.hpp"

namespace cvqkd {

// Finite emulation of the singular limits in the entanglement-based schemes:
// near-unity couplers inject noise and modulation losslessly, a near-zero
// squeezer emulates Alice's detection of the displacement.
struct PurificationConfig {
  double t1 = 1.0 - 1e-6;  // transmittance of the injection couplers, T1 -> 1
  double v0 = 1e-6;        // squeezing of the detection-emulation source, V0 -> 0
  double t0 = 0.0;         // full reflection feeding the type-B noise mode

  void validate() const {
    if (!(1.0 - t1 > 0.0 && 1.0 - t1 <= 1e-4))
      throw std::invalid_argument("PurificationConfig: need 0 < 1-t1 <= 1e-4");
    if (!(v0 > 0.0 && v0 <= 1e-4))
      throw std::invalid_argument("PurificationConfig: need 0 < v0 <= 1e-4");
    if (t0 != 0.0) throw std::invalid_argument("PurificationConfig: t0 is fixed at 0");
  }

  // Monitoring-equivalent recombination coupler for the type-B schemes.
  double monitor_coupler(double g, double g_prime) const {
    return g * g / (g * g + g_prime * g_prime);
  }
};

struct PurifiedState {
  detail::SquareMat<detail::wide> state;
  int bob_mode = 0;
  std::vector<int> trusted_modes;
  std::vector<int> eve_modes;  // populated by the cloner variant only

  int n_modes() const { return state.size() / 2; }

  // Double-precision view of the full state.
  CovarianceMatrix covariance() const {
    const int d = state.size();
    std::vector<double> e(static_cast<size_t>(d) * d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        const double v = 0.5 * (detail::to_double(state(r, c)) + detail::to_double(state(c, r)));
        e[static_cast<size_t>(r) * d + c] = v;
      }
    return CovarianceMatrix::from_entries(d / 2, e);
  }
};

namespace detail {

using WMat = SquareMat<wide>;

inline WMat wsqueezed(wide v) {
  WMat g(2);
  g(0, 0) = v;
  g(1, 1) = wide(1) / v;
  return g;
}

inline WMat wthermal(wide v) {
  WMat g(2);
  g(0, 0) = v;
  g(1, 1) = v;
  return g;
}

inline WMat wepr(wide v) {
  if (v < wide(1)) throw std::invalid_argument("EPR variance must be >= 1");
  WMat g(4);
  const wide c = generic_sqrt(v * v - wide(1));
  for (int i = 0; i < 4; ++i) g(i, i) = v;
  g(0, 2) = g(2, 0) = c;
  g(1, 3) = g(3, 1) = -c;
  return g;
}

// Appends `piece` and returns the index of its first mode.
inline int append_modes(WMat& g, const WMat& piece) {
  const int first = g.size() / 2;
  g = direct_sum(g, piece);
  return first;
}

struct Preparation {
  WMat g;
  int bob = 0;
  int alice = -1;              // mode whose homodyne realizes Alice's data (-1: none)
  std::vector<int> eve;        // side-channel output, when kept
};

// Trusted source construction. Standard protocols and the coherent family use
// the two-mode squeezed vacuum of the total variance; the squeezed protocol
// with free modulation uses the generalized preparation (detection-emulating
// squeezer plus an EPR modulator coupled at t1 into both the measured mode
// and the signal path). The correlated-modulation countermeasure at the
// optimal weight is purified through its equivalent scheme: the side channel
// attacks the bare signal state and the modulation is rescaled to v_m/eta_a.
inline Preparation build_preparation(const Scenario& sc, const PurificationConfig& cfg,
                                     bool keep_side_output) {
  const auto& pr = sc.protocol;
  const wide t1 = cfg.t1;
  Preparation out;

  const bool correlated =
      sc.side_a.present && sc.side_a.input == SideInputA::CorrelatedModulation;

  if (correlated) {
    const double kopt = std::sqrt((1.0 - sc.side_a.eta_a) / sc.side_a.eta_a);
    if (std::fabs(sc.side_a.k - kopt) > 1e-9 * std::max(1.0, kopt))
      throw std::domain_error(
          "collective bound for correlated modulation is defined at the optimal weight only");
    out.g = wsqueezed(wide(cfg.v0));                      // 0: detection emulation
    append_modes(out.g, wsqueezed(wide(pr.v_s)));         // 1: signal source
    const bool matched = sc.side_a.correlated_input == CorrelatedInput::MatchedSqueezed;
    const int sca = append_modes(out.g, matched ? wsqueezed(wide(pr.v_s)) : WMat::identity(2));
    beamsplitter_inplace(out.g, 1, sca, wide(sc.side_a.eta_a));
    if (keep_side_output) {
      out.eve.push_back(sca);
    } else {
      out.g = keep_modes(out.g, {0, 1});
    }
    const wide n_mn = wide(pr.v_m) / (wide(sc.side_a.eta_a) * (wide(1) - t1));
    if (n_mn >= wide(1)) {
      const int m = append_modes(out.g, wepr(n_mn));
      beamsplitter_inplace(out.g, 0, m, t1);
      beamsplitter_inplace(out.g, 1, m + 1, t1);
    }
    out.bob = 1;
    out.alice = 0;
    return out;
  }

  if (pr.family == Family::Squeezed && pr.modulation == ModulationMode::Optimized) {
    out.g = wsqueezed(wide(cfg.v0));                   // 0: detection emulation
    append_modes(out.g, wsqueezed(wide(pr.v_s)));      // 1: signal source
    const wide n_mn = wide(pr.v_m) / (wide(1) - t1);
    if (n_mn >= wide(1)) {
      const int m = append_modes(out.g, wepr(n_mn));   // 2,3: modulation pair
      beamsplitter_inplace(out.g, 0, m, t1);
      beamsplitter_inplace(out.g, 1, m + 1, t1);
    }
    out.bob = 1;
    out.alice = 0;
  } else {
    out.g = wepr(wide(pr.total_variance()));
    out.bob = 1;
    out.alice = 0;
  }

  if (sc.side_a.present) {
    const auto& a = sc.side_a;
    int input = -1;
    switch (a.input) {
      case SideInputA::Vacuum:
        input = append_modes(out.g, WMat::identity(2));
        break;
      case SideInputA::Thermal: {
        input = append_modes(out.g, WMat::identity(2));
        // couple in an EPR half so that the input variance is exactly v_ns
        const wide n_t = (wide(a.v_ns) - t1) / (wide(1) - t1);
        if (n_t > wide(1)) {
          const int p = append_modes(out.g, wepr(n_t));
          beamsplitter_inplace(out.g, input, p, t1);
        }
        break;
      }
      case SideInputA::UncorrelatedModulation: {
        input = append_modes(out.g, WMat::identity(2));
        const wide n_u = wide(a.v_nm) / (wide(1) - t1);
        if (n_u >= wide(1)) {
          const int p = append_modes(out.g, wepr(n_u));
          beamsplitter_inplace(out.g, input, p, t1);       // shift the side input
          beamsplitter_inplace(out.g, out.alice, p + 1, t1);  // and Alice's record
        }
        break;
      }
      case SideInputA::CorrelatedModulation:
        break;  // handled above
    }
    beamsplitter_inplace(out.g, out.bob, input, wide(a.eta_a));
    if (keep_side_output) {
      out.eve.push_back(input);
    } else {
      std::vector<int> keep;
      for (int m = 0; m < out.g.size() / 2; ++m)
        if (m != input) keep.push_back(m);
      out.g = keep_modes(out.g, keep);
    }
  }
  return out;
}

// Receiver-side chain shared by both state constructions: interferometric
// side-channel coupling, trusted detector purification, and the data
// manipulation represented as a recombination coupler.
inline void apply_receiver(WMat& g, int bob, int cmode, const Scenario& sc) {
  const auto& b = sc.side_b;
  if (cmode >= 0) {
    if (b.topology == TopologyB::SingleCoupler) {
      beamsplitter_inplace(g, bob, cmode, wide(b.eta_b));
    } else {
      beamsplitter_inplace(g, bob, cmode, wide(b.eta_b1));
      phase_inplace(g, cmode, wide(b.phi));
      beamsplitter_inplace(g, bob, cmode, wide(b.eta_b2));
    }
  }
  const bool imperfect = sc.detector.eta_d < 1.0 || sc.detector.v_d > 1.0;
  const bool monitored = cmode >= 0 && b.monitoring != Monitoring::Off;
  if (imperfect) {
    const int d2 = append_modes(g, wepr(wide(sc.detector.v_d))) + 1;
    beamsplitter_inplace(g, bob, d2, wide(sc.detector.eta_d));
    if (monitored) {
      const int m2 = append_modes(g, wepr(wide(sc.detector.v_d))) + 1;
      beamsplitter_inplace(g, cmode, m2, wide(sc.detector.eta_d));
    }
  }
  if (monitored) {
    double gw = b.g, gp = b.g_prime;
    if (b.monitoring == Monitoring::Optimal) {
      if (b.topology == TopologyB::SingleCoupler)
        optimal_weights_single(b.eta_b, gw, gp);
      else
        optimal_weights_interferometer(b.eta_b1, b.eta_b2, gw, gp);
    }
    if (gw < 0.0) {
      gw = -gw;
      gp = -gp;
    }
    if (gp < 0.0) {
      phase_inplace(g, cmode, wide(std::numbers::pi));
      gp = -gp;
    }
    const wide t = (wide(gw) * wide(gw)) / (wide(gw) * wide(gw) + wide(gp) * wide(gp));
    beamsplitter_inplace(g, cmode, bob, t);  // Bob keeps -sqrt(1-t) C + sqrt(t) B
  }
}

inline double clamp_chi(double chi) {
  if (chi < 0.0) {
    if (chi < -1e-9) throw NumericalError("negative Holevo bound: " + std::to_string(chi));
    return 0.0;
  }
  return chi;
}

}  // namespace detail

// Trusted-side purification: every mode the trusted parties hold, with all
// impurity attributed to the eavesdropper.
inline PurifiedState build_purification(const Scenario& sc, const PurificationConfig& cfg = {}) {
  sc.validate();
  cfg.validate();
  auto prep = detail::build_preparation(sc, cfg, /*keep_side_output=*/false);
  detail::loss_channel_inplace(prep.g, prep.bob, detail::wide(sc.channel.eta),
                               detail::wide(sc.channel.epsilon));
  int cmode = -1;
  if (sc.side_b.present)
    cmode = detail::append_modes(prep.g, detail::wthermal(detail::wide(sc.side_b.v_n)));
  detail::apply_receiver(prep.g, prep.bob, cmode, sc);
  PurifiedState ps;
  ps.state = std::move(prep.g);
  ps.bob_mode = prep.bob;
  for (int m = 0; m < ps.n_modes(); ++m) ps.trusted_modes.push_back(m);
  return ps;
}

// Entangling-cloner construction: Eve's modes are kept explicitly (side-channel
// outputs, channel cloner pair of variance 1 + eta eps/(1-eta), purifying half
// of the type-B noise).
inline PurifiedState build_cloner_state(const Scenario& sc, const PurificationConfig& cfg = {}) {
  sc.validate();
  cfg.validate();
  if (sc.channel.eta >= 1.0 && sc.channel.epsilon > 0.0)
    throw std::invalid_argument("eta = 1 with excess noise: cloner variance diverges");
  auto prep = detail::build_preparation(sc, cfg, /*keep_side_output=*/true);
  const double eta = sc.channel.eta;
  if (eta < 1.0) {
    const double n_cl = 1.0 + eta * sc.channel.epsilon / (1.0 - eta);
    const int e1 = detail::append_modes(prep.g, detail::wepr(detail::wide(n_cl)));
    detail::beamsplitter_inplace(prep.g, prep.bob, e1, detail::wide(eta));
    prep.eve.push_back(e1);
    prep.eve.push_back(e1 + 1);
  }
  int cmode = -1;
  if (sc.side_b.present) {
    cmode = detail::append_modes(prep.g, detail::wepr(detail::wide(sc.side_b.v_n)));
    prep.eve.push_back(cmode + 1);
  }
  detail::apply_receiver(prep.g, prep.bob, cmode, sc);
  PurifiedState ps;
  ps.state = std::move(prep.g);
  ps.bob_mode = prep.bob;
  ps.eve_modes = prep.eve;
  for (int m = 0; m < ps.n_modes(); ++m)
    if (std::find(ps.eve_modes.begin(), ps.eve_modes.end(), m) == ps.eve_modes.end())
      ps.trusted_modes.push_back(m);
  return ps;
}

// chi_BE = S(trusted) - S(trusted minus B | Bob's x homodyne).
inline double holevo_bound(const Scenario& sc, const PurificationConfig& cfg = {}) {
  const auto ps = build_purification(sc, cfg);
  const double s1 = detail::entropy_bits(ps.state);
  double s2 = 0.0;
  if (ps.n_modes() > 1)
    s2 = detail::entropy_bits(detail::condition_homodyne(ps.state, ps.bob_mode, Quadrature::X));
  return detail::clamp_chi(s1 - s2);
}

// chi_BE = S(gamma_E) - S(gamma_E | Bob's x homodyne) from Eve's explicit
// modes; mathematically equal to holevo_bound, computed along a different
// route.
inline double entangling_cloner_holevo(const Scenario& sc, const PurificationConfig& cfg = {}) {
  const auto ps = build_cloner_state(sc, cfg);
  if (ps.eve_modes.empty()) return 0.0;
  const auto g_e = detail::keep_modes(ps.state, ps.eve_modes);
  const double s1 = detail::entropy_bits(g_e);
  const auto cond = detail::condition_homodyne(ps.state, ps.bob_mode, Quadrature::X);
  std::vector<int> eve_after;
  for (int m : ps.eve_modes) eve_after.push_back(m > ps.bob_mode ? m - 1 : m);
  const double s2 = detail::entropy_bits(detail::keep_modes(cond, eve_after));
  return detail::clamp_chi(s1 - s2);
}

inline KeyRateReport key_rate_collective(const Scenario& sc, const PurificationConfig& cfg = {}) {
  KeyRateReport rep;
  rep.attack = Attack::Collective;
  const auto st = pm_statistics(sc);
  rep.i_ab = mutual_information(st);
  rep.eve_bound = holevo_bound(sc, cfg);
  rep.key_rate = sc.protocol.beta * rep.i_ab - rep.eve_bound;
  rep.diagnostics["v_a"] = st.v_a;
  rep.diagnostics["v_b"] = st.v_b;
  rep.diagnostics["c_ab"] = st.c_ab;
  rep.diagnostics["v_b_given_a"] = st.v_b - st.c_ab * st.c_ab / std::max(st.v_a, 1e-300);
  if (sc.side_a.present && sc.side_b.present) rep.flags.push_back("no_paper_fixture");
  return rep;
}

}  // namespace cvqkd
