#pragma once

#include <optional>

#include "propagation.hpp"

namespace cvqkd {

// Thrown when no linear data manipulation can cancel the side-channel noise
// (interferometric coupling with a nonzero phase shift); the caller should
// fall back to numeric optimization of the weight.
struct NotFullyDecouplable : std::domain_error {
  explicit NotFullyDecouplable(const std::string& what) : std::domain_error(what) {}
};

struct MonitoringWeights {
  double g = 1.0;
  double g_prime = 0.0;
};

// Correlated-modulation weight that removes the modulation from the
// side-channel output: k = sqrt((1-eta_a)/eta_a).
inline double optimal_k(double eta_a) {
  if (!(eta_a > 0.0 && eta_a <= 1.0))
    throw std::invalid_argument("optimal_k: eta_a must be in (0,1]");
  return std::sqrt((1.0 - eta_a) / eta_a);
}

struct DecouplingReport {
  double mod_coeff_sca = 0.0;   // coefficient of x_M in the side-channel output
  double c_signal_sca = 0.0;    // side-channel output / signal covariance
  std::optional<double> residual_scb_x_coeff;  // x_SCB coefficient in delta-x
  std::optional<double> residual_scb_p_coeff;  // p_SCB coefficient (phase-shifted coupling)
};

namespace detail {

// Coefficient of the physical side-B input quadrature inside a propagated
// form. The input enters as an EPR half spread over two primitive slots; the
// first carries weight a >= 1/sqrt(2), so the ratio recovers the coefficient.
inline double scb_coefficient(const QuadForm& f, double v_n, Quadrature q) {
  const auto [a, b] = epr_split(v_n);
  (void)b;
  return f.c[q == Quadrature::X ? kSbInX : kSbInP] / a;
}

}  // namespace detail

inline DecouplingReport decoupling_check(const Scenario& sc) {
  if (!sc.side_a.present)
    throw std::invalid_argument("decoupling_check: type-A side channel not present");
  const auto st = pm_statistics(sc);
  DecouplingReport rep;
  rep.mod_coeff_sca = *st.mod_coeff_sca;
  rep.c_signal_sca = *st.c_signal_sca;
  if (sc.side_b.present) {
    const auto f = detail::propagate(sc, ChannelPicture::NoiseModes);
    rep.residual_scb_x_coeff = detail::scb_coefficient(f.bob, sc.side_b.v_n, Quadrature::X);
    rep.residual_scb_p_coeff = detail::scb_coefficient(f.bob, sc.side_b.v_n, Quadrature::P);
  }
  return rep;
}

// Weights that remove the side-channel noise from the weighted difference.
inline MonitoringWeights monitoring_weights(const SideChannelB& sb) {
  if (!sb.present) throw std::invalid_argument("monitoring_weights: side channel not present");
  MonitoringWeights w;
  if (sb.topology == TopologyB::SingleCoupler) {
    detail::optimal_weights_single(sb.eta_b, w.g, w.g_prime);
  } else {
    if (sb.phi != 0.0)
      throw NotFullyDecouplable(
          "interferometric coupling with phase shift admits no fully decoupling weights");
    detail::optimal_weights_interferometer(sb.eta_b1, sb.eta_b2, w.g, w.g_prime);
  }
  return w;
}

struct WeightedDifferenceStats {
  double var_delta = 0.0;   // Var(delta-x)
  double c_a_delta = 0.0;   // Cov(Alice, delta-x)
  double residual_scb_x_coeff = 0.0;
  double residual_scb_p_coeff = 0.0;
  double signal_coeff = 0.0;  // coefficient of the channel-output x in delta-x
};

inline WeightedDifferenceStats weighted_difference_stats(const Scenario& sc,
                                                         const MonitoringWeights& w) {
  if (!sc.side_b.present)
    throw std::invalid_argument("weighted_difference_stats: type-B side channel not present");
  Scenario s = sc;
  s.side_b.monitoring = Monitoring::Weighted;
  s.side_b.g = w.g;
  s.side_b.g_prime = w.g_prime;
  s.validate();
  const auto f = detail::propagate(s, ChannelPicture::NoiseModes);
  WeightedDifferenceStats out;
  out.var_delta = f.bob.variance();
  out.c_a_delta = f.alice.covariance(f.bob);
  out.residual_scb_x_coeff = detail::scb_coefficient(f.bob, s.side_b.v_n, Quadrature::X);
  out.residual_scb_p_coeff = detail::scb_coefficient(f.bob, s.side_b.v_n, Quadrature::P);
  // the channel-output quadratures are orthogonal to every other constituent
  // of delta-x, so a projection recovers the exact coefficient
  out.signal_coeff = f.bob.covariance(f.chan_out_x) / f.chan_out_x.variance();
  return out;
}

}  // namespace cvqkd
