#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "gaussian.hpp"
#include "scenario.hpp"

namespace cvqkd {

// Which decomposition the main channel uses during propagation. Trusted-party
// statistics are identical in both; the Cloner picture additionally exposes
// the eavesdropper's modes.
enum class ChannelPicture { NoiseModes, Cloner };

namespace detail {

// Every primitive fluctuation is an independent standard normal; scales live
// in the coefficients. The slot set is fixed so that disabled components
// contribute exact zeros and leave shared coefficients bit-identical.
constexpr int kSlots = 20;
enum Slot : int {
  kSigX = 0, kSigP,       // signal source
  kModX, kModP,           // Gaussian modulation
  kScaX, kScaP,           // type-A side-channel input state
  kNcmX, kNcmP,           // uncorrelated modulation on the type-A input
  kChAX, kChAP,           // channel: excess noise / first cloner half
  kChBX, kChBP,           // channel: loss vacuum / second cloner half
  kSbInX, kSbInP,         // type-B side-channel input
  kSbKeepX, kSbKeepP,     // purifying half of the type-B input (Cloner picture)
  kDetMainX, kDetMainP,   // main detector noise
  kDetMonX, kDetMonP,     // monitoring detector noise
};

struct QuadForm {
  std::array<double, kSlots> c{};

  double variance() const {
    double s = 0.0;
    for (double v : c) s += v * v;
    return s;
  }
  double covariance(const QuadForm& o) const {
    double s = 0.0;
    for (int i = 0; i < kSlots; ++i) s += c[i] * o.c[i];
    return s;
  }
  QuadForm& add(double w, const QuadForm& o) {
    for (int i = 0; i < kSlots; ++i) c[i] += w * o.c[i];
    return *this;
  }
  friend QuadForm combine(double a, const QuadForm& f, double b, const QuadForm& g) {
    QuadForm out;
    for (int i = 0; i < kSlots; ++i) out.c[i] = a * f.c[i] + b * g.c[i];
    return out;
  }
};

inline QuadForm unit(Slot s, double scale = 1.0) {
  QuadForm f;
  f.c[s] = scale;
  return f;
}

inline void beamsplit(QuadForm& ri, QuadForm& rj, double t) {
  const double ct = std::sqrt(t), cr = std::sqrt(1.0 - t);
  QuadForm out_i = combine(ct, ri, cr, rj);
  QuadForm out_j = combine(-cr, ri, ct, rj);
  ri = out_i;
  rj = out_j;
}

// EPR pair of variance n over two iid normals: x1 = a u + b v, x2 = a u - b v
// (p-partner signs flipped to carry the -sqrt(n^2-1) correlation).
struct EprCoeffs {
  double a, b;
};
inline EprCoeffs epr_split(double n) {
  const double c = std::sqrt(n * n - 1.0);
  return {std::sqrt((n + c) / 2.0), std::sqrt((n - c) / 2.0)};
}

// The standard (EPR-purified) squeezed protocol displaces only the measured
// quadrature; generalized preparation and the coherent protocol modulate both.
inline bool modulates_p(const ProtocolParams& p) {
  return !(p.family == Family::Squeezed && p.modulation == ModulationMode::Standard);
}

inline void optimal_weights_single(double eta_b, double& g, double& gp) {
  g = std::sqrt(eta_b);
  gp = std::sqrt(1.0 - eta_b);
}

// Interferometer cancellation weights for phi = 0, with g fixed to 1:
// g' = a/b, a = sqrt(eta2(1-eta1)) + sqrt(eta1(1-eta2)),
//           b = sqrt(eta1 eta2) - sqrt((1-eta1)(1-eta2)).
inline void optimal_weights_interferometer(double e1, double e2, double& g, double& gp) {
  const double a = std::sqrt(e2 * (1.0 - e1)) + std::sqrt(e1 * (1.0 - e2));
  const double b = std::sqrt(e1 * e2) - std::sqrt((1.0 - e1) * (1.0 - e2));
  if (std::fabs(b) < 1e-14)
    throw NumericalError("monitoring weights singular: eta_b1 + eta_b2 = 1");
  g = 1.0;
  gp = a / b;
}

struct PropagatedForms {
  QuadForm alice;  // variable Alice records
  QuadForm bob;    // variable Bob keys on (after detectors and weighting)

  bool has_side_a = false;
  QuadForm signal_after_a_x;  // x'_A entering the main channel
  QuadForm sca_out_x, sca_out_p;

  QuadForm chan_out_x, chan_out_p;  // channel output, before receiver optics

  bool has_cloner_modes = false;
  QuadForm e1_x, e1_p, e2_x, e2_p;

  bool has_side_b = false;
  QuadForm bob_arm_x;  // main-detector reading x'_B
  QuadForm mon_arm_x;  // monitoring-detector reading x'_SCB
  bool has_sb_keep = false;
  QuadForm sb_keep_x, sb_keep_p;

  double weight_g = 1.0, weight_gp = 0.0;
};

inline PropagatedForms propagate(const Scenario& sc, ChannelPicture picture) {
  const auto& pr = sc.protocol;
  PropagatedForms out;

  QuadForm x = unit(kSigX, std::sqrt(pr.v_s));
  QuadForm p = unit(kSigP, std::sqrt(1.0 / pr.v_s));
  const QuadForm mod_x = unit(kModX, std::sqrt(pr.v_m));
  const QuadForm mod_p = unit(kModP, modulates_p(pr) ? std::sqrt(pr.v_m) : 0.0);
  x.add(1.0, mod_x);
  p.add(1.0, mod_p);
  out.alice = mod_x;

  if (sc.side_a.present) {
    const auto& a = sc.side_a;
    QuadForm xin, pin;
    switch (a.input) {
      case SideInputA::Thermal:
        xin = unit(kScaX, std::sqrt(a.v_ns));
        pin = unit(kScaP, std::sqrt(a.v_ns));
        break;
      case SideInputA::CorrelatedModulation:
        if (a.correlated_input == CorrelatedInput::MatchedSqueezed) {
          xin = unit(kScaX, std::sqrt(pr.v_s));
          pin = unit(kScaP, std::sqrt(1.0 / pr.v_s));
        } else {
          xin = unit(kScaX);
          pin = unit(kScaP);
        }
        break;
      default:
        xin = unit(kScaX);
        pin = unit(kScaP);
        break;
    }
    if (a.input == SideInputA::UncorrelatedModulation) {
      const QuadForm nm_x = unit(kNcmX, std::sqrt(a.v_nm));
      xin.add(1.0, nm_x);
      pin.add(1.0, unit(kNcmP, std::sqrt(a.v_nm)));
      out.alice.add(1.0, nm_x);  // the shift is known to Alice and joins her data
    }
    if (a.input == SideInputA::CorrelatedModulation) {
      xin.add(a.k, mod_x);
      pin.add(a.k, mod_p);
    }
    beamsplit(x, xin, a.eta_a);
    beamsplit(p, pin, a.eta_a);
    out.has_side_a = true;
    out.signal_after_a_x = x;
    out.sca_out_x = xin;
    out.sca_out_p = pin;
  }

  const double eta = sc.channel.eta, eps = sc.channel.epsilon;
  if (picture == ChannelPicture::NoiseModes) {
    x.add(1.0, unit(kChAX, std::sqrt(eps)));
    p.add(1.0, unit(kChAP, std::sqrt(eps)));
    QuadForm vac_x = unit(kChBX), vac_p = unit(kChBP);
    beamsplit(x, vac_x, eta);
    beamsplit(p, vac_p, eta);
  } else {
    if (eta >= 1.0) {
      if (eps > 0.0)
        throw std::invalid_argument("cloner picture undefined for eta = 1 with excess noise");
      // lossless and noiseless: nothing interacts, no cloner modes
    } else {
      const double n_cloner = 1.0 + eta * eps / (1.0 - eta);
      const auto [ca, cb] = epr_split(n_cloner);
      QuadForm e1x = combine(ca, unit(kChAX), cb, unit(kChBX));
      QuadForm e1p = combine(ca, unit(kChAP), cb, unit(kChBP));
      out.e2_x = combine(ca, unit(kChAX), -cb, unit(kChBX));
      out.e2_p = combine(-ca, unit(kChAP), cb, unit(kChBP));
      beamsplit(x, e1x, eta);
      beamsplit(p, e1p, eta);
      out.e1_x = e1x;
      out.e1_p = e1p;
      out.has_cloner_modes = true;
    }
  }
  out.chan_out_x = x;
  out.chan_out_p = p;

  const double td = std::sqrt(sc.detector.eta_d);
  const double rd = std::sqrt(1.0 - sc.detector.eta_d);
  const double sd = std::sqrt(sc.detector.v_d);

  if (sc.side_b.present) {
    const auto& b = sc.side_b;
    const auto [na, nb] = epr_split(b.v_n);
    QuadForm nx = combine(na, unit(kSbInX), nb, unit(kSbKeepX));
    QuadForm np = combine(na, unit(kSbInP), nb, unit(kSbKeepP));
    out.sb_keep_x = combine(na, unit(kSbInX), -nb, unit(kSbKeepX));
    out.sb_keep_p = combine(-na, unit(kSbInP), nb, unit(kSbKeepP));
    out.has_sb_keep = true;
    if (b.topology == TopologyB::SingleCoupler) {
      beamsplit(x, nx, b.eta_b);
      beamsplit(p, np, b.eta_b);
    } else {
      beamsplit(x, nx, b.eta_b1);
      beamsplit(p, np, b.eta_b1);
      // phase shift on the reflected arm between the couplers
      const double cph = std::cos(b.phi), sph = std::sin(b.phi);
      QuadForm nx2 = combine(cph, nx, sph, np);
      QuadForm np2 = combine(-sph, nx, cph, np);
      nx = nx2;
      np = np2;
      beamsplit(x, nx, b.eta_b2);
      beamsplit(p, np, b.eta_b2);
    }
    out.has_side_b = true;
    QuadForm main_arm = combine(td, x, rd, unit(kDetMainX, sd));
    QuadForm mon_arm = combine(td, nx, rd, unit(kDetMonX, sd));
    out.bob_arm_x = main_arm;
    out.mon_arm_x = mon_arm;
    double g = 1.0, gp = 0.0;
    switch (b.monitoring) {
      case Monitoring::Off:
        out.bob = main_arm;
        break;
      case Monitoring::Weighted:
        g = b.g;
        gp = b.g_prime;
        out.bob = combine(g, main_arm, -gp, mon_arm);
        break;
      case Monitoring::Optimal:
        if (b.topology == TopologyB::SingleCoupler)
          optimal_weights_single(b.eta_b, g, gp);
        else
          optimal_weights_interferometer(b.eta_b1, b.eta_b2, g, gp);
        out.bob = combine(g, main_arm, -gp, mon_arm);
        break;
    }
    out.weight_g = g;
    out.weight_gp = gp;
  } else {
    out.bob = combine(td, x, rd, unit(kDetMainX, sd));
  }
  return out;
}

}  // namespace detail

// Analytic prepare-and-measure statistics of the measured (x) quadrature.
struct PMStatistics {
  double v_a = 0.0;   // Alice's data variance
  double v_b = 0.0;   // Bob's measured variance (after monitoring if enabled)
  double c_ab = 0.0;  // Alice-Bob covariance

  // Type-A diagnostics (present when the side channel is enabled). The
  // covariance is reported for the output port oriented so that it equals
  // sqrt(eta_a(1-eta_a)) (V_S - Var(input)) for the plain side channel; the
  // modulation coefficient for the opposite orientation, matching
  // k sqrt(eta_a) - sqrt(1-eta_a). Both vanish together at the optimal k.
  std::optional<double> v_sca_out;
  std::optional<double> c_signal_sca;
  std::optional<double> mod_coeff_sca;
};

inline PMStatistics pm_statistics(const Scenario& sc) {
  sc.validate();
  const auto f = detail::propagate(sc, ChannelPicture::NoiseModes);
  PMStatistics st;
  st.v_a = f.alice.variance();
  st.v_b = f.bob.variance();
  st.c_ab = f.alice.covariance(f.bob);
  if (f.has_side_a) {
    st.v_sca_out = f.sca_out_x.variance();
    st.c_signal_sca = -f.signal_after_a_x.covariance(f.sca_out_x);
    const double vm = sc.protocol.v_m;
    if (vm > 0.0) {
      st.mod_coeff_sca = f.sca_out_x.c[detail::kModX] / std::sqrt(vm);
    } else {
      const double k = sc.side_a.input == SideInputA::CorrelatedModulation ? sc.side_a.k : 0.0;
      st.mod_coeff_sca = k * std::sqrt(sc.side_a.eta_a) - std::sqrt(1.0 - sc.side_a.eta_a);
    }
  }
  return st;
}

}  // namespace cvqkd
