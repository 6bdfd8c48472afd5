#pragma once

#include "propagation.hpp"
#include "report.hpp"

namespace cvqkd {

// Shannon mutual information of two jointly Gaussian zero-mean variables,
// 1/2 log2(V_A / (V_A - C^2/V_B)), in bits.
inline double mutual_information(const PMStatistics& st) {
  if (st.c_ab == 0.0) return 0.0;
  if (!(st.v_a > 0.0 && st.v_b > 0.0))
    throw std::invalid_argument("mutual_information: variances must be positive");
  const double r2 = st.c_ab * st.c_ab / (st.v_a * st.v_b);
  if (r2 > 1.0 + 1e-12) throw NumericalError("mutual_information: Cauchy-Schwarz violated");
  return -0.5 * std::log2(std::max(1.0 - r2, 1e-300));
}

inline double mutual_information(const Scenario& sc) { return mutual_information(pm_statistics(sc)); }

namespace detail {

// Conditional variance of `target` given joint Gaussian measurements of
// `given`: V - c^T Gamma^{-1} c via Cholesky.
inline double conditional_variance(const QuadForm& target, const std::vector<QuadForm>& given) {
  const double v = target.variance();
  const int m = static_cast<int>(given.size());
  if (m == 0) return v;
  SquareMat<double> gamma(m);
  std::vector<double> c(m);
  for (int i = 0; i < m; ++i) {
    c[i] = given[i].covariance(target);
    for (int j = 0; j < m; ++j) gamma(i, j) = given[i].covariance(given[j]);
  }
  const auto L = cholesky(gamma);
  std::vector<double> y(m);
  for (int i = 0; i < m; ++i) {  // L y = c
    double s = c[i];
    for (int k = 0; k < i; ++k) s -= L(i, k) * y[k];
    y[i] = s / L(i, i);
  }
  for (int i = m - 1; i >= 0; --i) {  // L^T z = y
    double s = y[i];
    for (int k = i + 1; k < m; ++k) s -= L(k, i) * y[k];
    y[i] = s / L(i, i);
  }
  double red = 0.0;
  for (int i = 0; i < m; ++i) red += c[i] * y[i];
  return v - red;
}

}  // namespace detail

// Upper bound on Eve's information under individual attacks: the mutual
// information between Bob's key variable and the optimal Gaussian measurement
// on every mode Eve holds (side-channel outputs plus the entangling-cloner
// pair purifying the channel noise).
inline double eve_information_individual(const Scenario& sc) {
  sc.validate();
  if (sc.side_a.present && sc.side_b.present)
    throw std::domain_error(
        "individual attacks with both side channels are unsupported; use the collective engine");
  if (sc.channel.eta >= 1.0 && sc.channel.epsilon > 0.0)
    throw std::invalid_argument("eta = 1 with excess noise: cloner variance diverges");
  const auto f = detail::propagate(sc, ChannelPicture::Cloner);
  std::vector<detail::QuadForm> eve;
  if (f.has_side_a) {
    eve.push_back(f.sca_out_x);
    eve.push_back(f.sca_out_p);
  }
  if (f.has_cloner_modes) {
    eve.push_back(f.e1_x);
    eve.push_back(f.e1_p);
    eve.push_back(f.e2_x);
    eve.push_back(f.e2_p);
  }
  if (f.has_sb_keep) {
    eve.push_back(f.sb_keep_x);
    eve.push_back(f.sb_keep_p);
  }
  if (eve.empty()) return 0.0;
  const double v_b = f.bob.variance();
  const double v_cond = detail::conditional_variance(f.bob, eve);
  if (!(v_cond > 0.0)) throw NumericalError("eve_information_individual: degenerate conditioning");
  return 0.5 * std::log2(v_b / v_cond);
}

inline KeyRateReport key_rate_individual(const Scenario& sc) {
  KeyRateReport rep;
  rep.attack = Attack::Individual;
  const auto st = pm_statistics(sc);
  rep.i_ab = mutual_information(st);
  rep.eve_bound = eve_information_individual(sc);
  rep.key_rate = rep.i_ab - rep.eve_bound;  // perfect postprocessing
  rep.diagnostics["v_a"] = st.v_a;
  rep.diagnostics["v_b"] = st.v_b;
  rep.diagnostics["c_ab"] = st.c_ab;
  rep.diagnostics["v_b_given_a"] = st.v_b - st.c_ab * st.c_ab / std::max(st.v_a, 1e-300);
  return rep;
}

// Key rate in the limit of infinite squeezing and modulation over a pure-loss
// channel: lambda log2(1/(1 - eta_a eta)).
inline double asymptotic_key_rate(double eta, double eta_a, Family family) {
  const double t = eta_a * eta;
  if (t <= 0.0) return 0.0;
  return protocol_lambda(family) * std::log2(1.0 / (1.0 - t));
}

// Maximum tolerable channel noise in the strong-modulation, strong-loss limit
// under individual attacks.
inline double eps_max_limit(double eta_a, Family family) {
  return family == Family::Coherent ? eta_a / 2.0 : eta_a;
}

// Bound on the type-B side-channel noise in the same limit.
inline double vn_max_limit(double eta_b) {
  if (eta_b >= 1.0) throw std::invalid_argument("vn_max_limit: unbounded at eta_b = 1");
  return 1.0 / (1.0 - eta_b);
}

}  // namespace cvqkd
