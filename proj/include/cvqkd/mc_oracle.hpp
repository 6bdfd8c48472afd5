#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <thread>

#include "propagation.hpp"

namespace cvqkd {

struct SeededRun {
  std::uint64_t seed = 1;
  std::uint64_t n_samples = 1000000;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// One substream per (seed, block, variable). The Box-Muller transform over
// explicitly constructed uniforms keeps the stream identical across standard
// libraries and thread counts.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t block, int variable)
      : rng_(splitmix64(splitmix64(splitmix64(seed) ^ (block + 1)) ^
                        (0x517cc1b727220a95ull + static_cast<std::uint64_t>(variable)))) {}

  double next() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0,1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    have_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 rng_;
  bool have_ = false;
  double cached_ = 0.0;
};

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

constexpr std::uint64_t kMcBlock = 65536;

// Raw second moments of one sample block. Kept per block and reduced in block
// order so the result is byte-identical for any thread count.
struct BlockMoments {
  double aa = 0, bb = 0, ab = 0;
  double ss = 0, fs = 0, sm = 0, mm = 0;  // side-A output, signal*output, output*mod, mod*mod
};

// Hand-written sampling of the quadrature chain; deliberately independent of
// the analytic linear-form propagation it validates.
inline BlockMoments sample_block(const Scenario& sc, std::uint64_t seed, std::uint64_t block,
                                 std::uint64_t count) {
  NormalStream s_sig_x(seed, block, kSigX), s_sig_p(seed, block, kSigP);
  NormalStream s_mod_x(seed, block, kModX), s_mod_p(seed, block, kModP);
  NormalStream s_sca_x(seed, block, kScaX), s_sca_p(seed, block, kScaP);
  NormalStream s_ncm_x(seed, block, kNcmX), s_ncm_p(seed, block, kNcmP);
  NormalStream s_chn_x(seed, block, kChAX), s_chn_p(seed, block, kChAP);
  NormalStream s_ch0_x(seed, block, kChBX), s_ch0_p(seed, block, kChBP);
  NormalStream s_sb_x(seed, block, kSbInX), s_sb_p(seed, block, kSbInP);
  NormalStream s_dm_x(seed, block, kDetMainX), s_dn_x(seed, block, kDetMonX);

  const auto& pr = sc.protocol;
  const double sv_s = std::sqrt(pr.v_s), sv_sp = std::sqrt(1.0 / pr.v_s);
  const double sv_m = std::sqrt(pr.v_m);
  const double sv_mp = modulates_p(pr) ? sv_m : 0.0;
  const double eta = sc.channel.eta, eps = sc.channel.epsilon;
  const double ce = std::sqrt(eta), cr = std::sqrt(1.0 - eta), cn = std::sqrt(eps);
  const double dd = std::sqrt(sc.detector.eta_d), dr = std::sqrt(1.0 - sc.detector.eta_d);
  const double dv = std::sqrt(sc.detector.v_d);

  KahanSum aa, bb, ab, ss, fs, sm, mm;
  for (std::uint64_t i = 0; i < count; ++i) {
    const double xm = sv_m * s_mod_x.next();
    const double pm = sv_mp * s_mod_p.next();
    double x = sv_s * s_sig_x.next() + xm;
    double p = sv_sp * s_sig_p.next() + pm;
    double alice = xm;
    double x_ap = 0, sca_out = 0;
    if (sc.side_a.present) {
      const auto& a = sc.side_a;
      double xin, pin;
      switch (a.input) {
        case SideInputA::Thermal:
          xin = std::sqrt(a.v_ns) * s_sca_x.next();
          pin = std::sqrt(a.v_ns) * s_sca_p.next();
          break;
        case SideInputA::CorrelatedModulation:
          if (a.correlated_input == CorrelatedInput::MatchedSqueezed) {
            xin = sv_s * s_sca_x.next();
            pin = sv_sp * s_sca_p.next();
          } else {
            xin = s_sca_x.next();
            pin = s_sca_p.next();
          }
          break;
        default:
          xin = s_sca_x.next();
          pin = s_sca_p.next();
          break;
      }
      if (a.input == SideInputA::UncorrelatedModulation) {
        const double xnm = std::sqrt(a.v_nm) * s_ncm_x.next();
        xin += xnm;
        pin += std::sqrt(a.v_nm) * s_ncm_p.next();
        alice += xnm;
      } else if (a.input == SideInputA::CorrelatedModulation) {
        xin += a.k * xm;
        pin += a.k * pm;
      }
      const double t = std::sqrt(a.eta_a), r = std::sqrt(1.0 - a.eta_a);
      x_ap = t * x + r * xin;
      sca_out = -r * x + t * xin;
      const double pp = t * p + r * pin;
      x = x_ap;
      p = pp;
    }
    x = ce * (x + cn * s_chn_x.next()) + cr * s_ch0_x.next();
    p = ce * (p + cn * s_chn_p.next()) + cr * s_ch0_p.next();

    double bob;
    if (sc.side_b.present) {
      const auto& b = sc.side_b;
      double xn = std::sqrt(b.v_n) * s_sb_x.next();
      double pn = std::sqrt(b.v_n) * s_sb_p.next();
      if (b.topology == TopologyB::SingleCoupler) {
        const double t = std::sqrt(b.eta_b), r = std::sqrt(1.0 - b.eta_b);
        const double u = t * x + r * xn, w = -r * x + t * xn;
        x = u;
        xn = w;
      } else {
        const double t1 = std::sqrt(b.eta_b1), r1 = std::sqrt(1.0 - b.eta_b1);
        double ux = t1 * x + r1 * xn, wx = -r1 * x + t1 * xn;
        double up = t1 * p + r1 * pn, wp = -r1 * p + t1 * pn;
        const double cph = std::cos(b.phi), sph = std::sin(b.phi);
        const double wxr = cph * wx + sph * wp, wpr = -sph * wx + cph * wp;
        wx = wxr;
        wp = wpr;
        const double t2 = std::sqrt(b.eta_b2), r2 = std::sqrt(1.0 - b.eta_b2);
        x = t2 * ux + r2 * wx;
        xn = -r2 * ux + t2 * wx;
        p = t2 * up + r2 * wp;
      }
      const double main_arm = dd * x + dr * dv * s_dm_x.next();
      const double mon_arm = dd * xn + dr * dv * s_dn_x.next();
      double g = 1.0, gp = 0.0;
      switch (b.monitoring) {
        case Monitoring::Off:
          break;
        case Monitoring::Weighted:
          g = b.g;
          gp = b.g_prime;
          break;
        case Monitoring::Optimal:
          if (b.topology == TopologyB::SingleCoupler)
            optimal_weights_single(b.eta_b, g, gp);
          else
            optimal_weights_interferometer(b.eta_b1, b.eta_b2, g, gp);
          break;
      }
      bob = b.monitoring == Monitoring::Off ? main_arm : g * main_arm - gp * mon_arm;
    } else {
      bob = dd * x + dr * dv * s_dm_x.next();
    }

    aa.add(alice * alice);
    bb.add(bob * bob);
    ab.add(alice * bob);
    if (sc.side_a.present) {
      ss.add(sca_out * sca_out);
      fs.add(x_ap * sca_out);
      sm.add(sca_out * xm);
      mm.add(xm * xm);
    }
  }
  return {aa.sum, bb.sum, ab.sum, ss.sum, fs.sum, sm.sum, mm.sum};
}

}  // namespace detail

struct EmpiricalValue {
  double value = 0.0;
  double se = 0.0;
};

struct EmpiricalPMStatistics {
  std::uint64_t n = 0;
  EmpiricalValue v_a, v_b, c_ab;
  std::optional<EmpiricalValue> v_sca_out, c_signal_sca, mod_coeff_sca;
};

// Empirical second moments of the measured quadratures (known-zero-mean
// estimators) with analytic standard errors.
inline EmpiricalPMStatistics sample_statistics(const Scenario& sc, const SeededRun& run,
                                               int n_threads = 1) {
  sc.validate();
  if (run.n_samples < 1000) throw std::invalid_argument("sample_statistics: need >= 1000 samples");
  const std::uint64_t n_blocks = (run.n_samples + detail::kMcBlock - 1) / detail::kMcBlock;
  std::vector<detail::BlockMoments> parts(n_blocks);
  auto work = [&](std::uint64_t b0, std::uint64_t stride) {
    for (std::uint64_t b = b0; b < n_blocks; b += stride) {
      const std::uint64_t count =
          b + 1 < n_blocks ? detail::kMcBlock : run.n_samples - b * detail::kMcBlock;
      parts[b] = detail::sample_block(sc, run.seed, b, count);
    }
  };
  if (n_threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
    for (auto& t : pool) t.join();
  }
  detail::BlockMoments tot;
  for (const auto& p : parts) {  // fixed order: independent of thread count
    tot.aa += p.aa;
    tot.bb += p.bb;
    tot.ab += p.ab;
    tot.ss += p.ss;
    tot.fs += p.fs;
    tot.sm += p.sm;
    tot.mm += p.mm;
  }
  const double n = static_cast<double>(run.n_samples);
  const double rn = std::sqrt(2.0 / n);
  EmpiricalPMStatistics st;
  st.n = run.n_samples;
  st.v_a = {tot.aa / n, tot.aa / n * rn};
  st.v_b = {tot.bb / n, tot.bb / n * rn};
  const double va = st.v_a.value, vb = st.v_b.value, cab = tot.ab / n;
  st.c_ab = {cab, std::sqrt((va * vb + cab * cab) / n)};
  if (sc.side_a.present) {
    const double vs = tot.ss / n;
    st.v_sca_out = {vs, vs * rn};
    const double sig_var = detail::propagate(sc, ChannelPicture::NoiseModes)
                               .signal_after_a_x.variance();
    const double cfs = tot.fs / n;
    // reported in the orientation that matches sqrt(eta_a(1-eta_a))(V_S - Var_in)
    st.c_signal_sca = {-cfs, std::sqrt((vs * sig_var + cfs * cfs) / n)};
    if (sc.protocol.v_m > 0.0) {
      const double vm = tot.mm / n;
      const double csm = tot.sm / n;
      st.mod_coeff_sca = {csm / vm, std::sqrt((vs * vm + csm * csm) / n) / vm};
    }
  }
  return st;
}

// Gaussian mutual information from the empirical covariance; no density
// estimation involved.
inline EmpiricalValue estimate_mutual_information(const Scenario& sc, const SeededRun& run,
                                                  int n_threads = 1) {
  const auto st = sample_statistics(sc, run, n_threads);
  if (!(st.v_a.value > 0.0) || !(st.v_b.value > 0.0))
    throw NumericalError("estimate_mutual_information: degenerate empirical covariance");
  const double n = static_cast<double>(st.n);
  const double rho = st.c_ab.value / std::sqrt(st.v_a.value * st.v_b.value);
  const double r2 = std::min(rho * rho, 1.0 - 1e-15);
  const double mi = -0.5 * std::log2(1.0 - r2);
  const double se = std::max(std::fabs(rho), 1.0 / std::sqrt(n)) / (std::numbers::ln2 * std::sqrt(n));
  return {mi, se};
}

struct VerificationCheck {
  std::string scenario;
  std::string field;
  double analytic = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  double n_sigma = 0.0;
  bool pass = true;
};

struct VerificationReport {
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  double sigma_limit = 5.0;
  std::vector<VerificationCheck> checks;
  bool all_pass = true;
};

inline void verify_one(VerificationReport& rep, const std::string& name, const Scenario& sc,
                       const SeededRun& run, int n_threads) {
  const auto ana = pm_statistics(sc);
  const auto emp = sample_statistics(sc, run, n_threads);
  auto push = [&](const std::string& field, double a, const EmpiricalValue& e) {
    VerificationCheck c;
    c.scenario = name;
    c.field = field;
    c.analytic = a;
    c.empirical = e.value;
    c.se = e.se;
    if (a == 0.0 && e.value == 0.0) {
      c.n_sigma = 0.0;
    } else if (e.se == 0.0) {
      c.n_sigma = std::numeric_limits<double>::infinity();
    } else {
      c.n_sigma = std::fabs(e.value - a) / e.se;
    }
    c.pass = c.n_sigma <= rep.sigma_limit;
    rep.all_pass = rep.all_pass && c.pass;
    rep.checks.push_back(c);
  };
  push("v_a", ana.v_a, emp.v_a);
  push("v_b", ana.v_b, emp.v_b);
  push("c_ab", ana.c_ab, emp.c_ab);
  if (sc.side_a.present) {
    push("v_sca_out", *ana.v_sca_out, *emp.v_sca_out);
    push("c_signal_sca", *ana.c_signal_sca, *emp.c_signal_sca);
    if (emp.mod_coeff_sca) push("mod_coeff_sca", *ana.mod_coeff_sca, *emp.mod_coeff_sca);
  }
  const auto mi_emp = estimate_mutual_information(sc, run, n_threads);
  push("mutual_information", mutual_information(ana), mi_emp);
}

inline std::vector<std::pair<std::string, Scenario>> canned_verification_scenarios() {
  std::vector<std::pair<std::string, Scenario>> out;
  out.emplace_back("coherent_clean",
                   ScenarioBuilder().coherent().modulation(3.0).channel(0.5).finish());
  out.emplace_back("squeezed_standard_noisy",
                   ScenarioBuilder().squeezed(0.1).channel(0.6, 0.03).finish());
  out.emplace_back("leakage_vacuum",
                   ScenarioBuilder().squeezed(0.1).channel(0.5).leakage(0.9).finish());
  out.emplace_back("leakage_thermal", ScenarioBuilder()
                                          .coherent()
                                          .modulation(9.0)
                                          .channel(0.5)
                                          .leakage(0.5)
                                          .leakage_thermal_input(1.8)
                                          .finish());
  out.emplace_back("leakage_uncorrelated", ScenarioBuilder()
                                               .coherent()
                                               .modulation(5.0)
                                               .channel(0.4, 0.05)
                                               .leakage(0.4)
                                               .leakage_uncorrelated_modulation(2.0)
                                               .finish());
  out.emplace_back("leakage_correlated_matched",
                   ScenarioBuilder()
                       .squeezed(0.1)
                       .modulation(4.0)
                       .channel(0.5)
                       .leakage(0.5)
                       .leakage_correlated_modulation(1.0, CorrelatedInput::MatchedSqueezed)
                       .finish());
  out.emplace_back("infusion_plain",
                   ScenarioBuilder().coherent().modulation(9.0).channel(0.5).noise_infusion(
                       0.8, 1.5).finish());
  out.emplace_back("infusion_monitored_detectors", ScenarioBuilder()
                                                       .squeezed(0.2)
                                                       .modulation(20.0)
                                                       .channel(0.7, 0.02)
                                                       .noise_infusion(0.7, 1.3)
                                                       .monitoring_optimal()
                                                       .detectors(0.6, 1.2)
                                                       .finish());
  out.emplace_back("infusion_interferometer",
                   ScenarioBuilder()
                       .coherent()
                       .modulation(10.0)
                       .channel(0.1)
                       .noise_infusion_interferometer(0.9, 0.8, 1.5, 1.05)
                       .monitoring_weighted(1.0, 0.7)
                       .finish());
  out.emplace_back("combined_sides", ScenarioBuilder()
                                         .coherent()
                                         .modulation(8.0)
                                         .channel(0.5, 0.02)
                                         .leakage(0.8)
                                         .noise_infusion(0.9, 1.2)
                                         .detectors(0.9, 1.1)
                                         .finish());
  return out;
}

inline VerificationReport run_verification(
    const std::vector<std::pair<std::string, Scenario>>& scenarios, const SeededRun& run,
    int n_threads = 1, double sigma_limit = 5.0) {
  VerificationReport rep;
  rep.seed = run.seed;
  rep.n_samples = run.n_samples;
  rep.sigma_limit = sigma_limit;
  for (const auto& [name, sc] : scenarios) verify_one(rep, name, sc, run, n_threads);
  return rep;
}

}  // namespace cvqkd
