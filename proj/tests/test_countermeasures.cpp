#include <catch_amalgamated.hpp>

#include "cvqkd/countermeasures.hpp"
#include "test_helpers.hpp"

using namespace cvqkd;
using Catch::Approx;

TEST_CASE("optimal correlated-modulation weight") {
  CHECK(optimal_k(0.5) == Approx(1.0));
  CHECK(optimal_k(1.0) == Approx(0.0));
  CHECK(optimal_k(0.37) == Approx(1.3048765086025201).margin(1e-12));
  CHECK_THROWS_AS(optimal_k(0.0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_k(-0.2), std::invalid_argument);
}

TEST_CASE("optimal k removes the modulation from the side-channel output") {
  const auto sc = ScenarioBuilder()
                      .coherent()
                      .modulation(4.0)
                      .channel(0.5)
                      .leakage(0.37)
                      .leakage_correlated_modulation(optimal_k(0.37), CorrelatedInput::Vacuum)
                      .finish();
  const auto st = pm_statistics(sc);
  CHECK(*st.mod_coeff_sca == Approx(0.0).margin(1e-14));
  CHECK(*st.c_signal_sca == Approx(0.0).margin(1e-14));  // coherent: V_S = Var(input) = 1
}

TEST_CASE("decoupling diagnostics") {
  SECTION("coherent protocol with the optimal weight is fully decoupled") {
    const auto sc = ScenarioBuilder()
                        .coherent()
                        .modulation(4.0)
                        .channel(0.5)
                        .leakage(0.5)
                        .leakage_correlated_modulation(1.0, CorrelatedInput::Vacuum)
                        .finish();
    const auto rep = decoupling_check(sc);
    CHECK(rep.mod_coeff_sca == Approx(0.0).margin(1e-14));
    CHECK(rep.c_signal_sca == Approx(0.0).margin(1e-14));
  }
  SECTION("squeezed protocol with a vacuum input stays correlated") {
    const auto sc = ScenarioBuilder()
                        .squeezed(0.1)
                        .modulation(4.0)
                        .channel(0.5)
                        .leakage(0.5)
                        .leakage_correlated_modulation(1.0, CorrelatedInput::Vacuum)
                        .finish();
    const auto rep = decoupling_check(sc);
    CHECK(rep.mod_coeff_sca == Approx(0.0).margin(1e-14));
    CHECK(rep.c_signal_sca == Approx(std::sqrt(0.25) * (0.1 - 1.0)).margin(1e-13));  // -0.45
  }
  SECTION("matched squeezed input removes the residual correlation") {
    const auto sc = ScenarioBuilder()
                        .squeezed(0.1)
                        .modulation(4.0)
                        .channel(0.5)
                        .leakage(0.5)
                        .leakage_correlated_modulation(1.0, CorrelatedInput::MatchedSqueezed)
                        .finish();
    const auto rep = decoupling_check(sc);
    CHECK(rep.mod_coeff_sca == Approx(0.0).margin(1e-14));
    CHECK(rep.c_signal_sca == Approx(0.0).margin(1e-14));
  }
  SECTION("requires the type-A side channel") {
    const auto sc = ScenarioBuilder().coherent().modulation(2.0).channel(0.5).finish();
    CHECK_THROWS_AS(decoupling_check(sc), std::invalid_argument);
  }
}

TEST_CASE("monitoring weights") {
  SECTION("balanced single coupler") {
    SideChannelB sb;
    sb.present = true;
    sb.topology = TopologyB::SingleCoupler;
    sb.eta_b = 0.5;
    const auto w = monitoring_weights(sb);
    CHECK(w.g == Approx(std::sqrt(0.5)).margin(1e-15));
    CHECK(w.g_prime == Approx(std::sqrt(0.5)).margin(1e-15));
  }
  SECTION("unbalanced single coupler cancels the noise and keeps the signal") {
    SideChannelB sb;
    sb.present = true;
    sb.topology = TopologyB::SingleCoupler;
    sb.eta_b = 0.9;
    sb.v_n = 1.4;
    const auto w = monitoring_weights(sb);
    CHECK(w.g == Approx(0.9486832980505138).margin(1e-14));
    CHECK(w.g_prime == Approx(0.31622776601683794).margin(1e-14));
    auto sc = ScenarioBuilder().coherent().modulation(3.0).channel(0.5).noise_infusion(0.9, 1.4)
                  .finish();
    const auto st = weighted_difference_stats(sc, w);
    CHECK(st.residual_scb_x_coeff == Approx(0.0).margin(1e-14));
    CHECK(st.signal_coeff == Approx(1.0).margin(1e-14));
  }
  SECTION("interferometer at phi = 0") {
    SideChannelB sb;
    sb.present = true;
    sb.topology = TopologyB::Interferometer;
    sb.eta_b1 = 0.9;
    sb.eta_b2 = 0.8;
    sb.phi = 0.0;
    sb.v_n = 1.05;
    const auto w = monitoring_weights(sb);
    CHECK(w.g == 1.0);
    CHECK(w.g_prime == Approx(1.0).margin(1e-12));
    auto sc = ScenarioBuilder()
                  .coherent()
                  .modulation(10.0)
                  .channel(0.1)
                  .noise_infusion_interferometer(0.9, 0.8, 0.0, 1.05)
                  .finish();
    const auto st = weighted_difference_stats(sc, w);
    CHECK(st.residual_scb_x_coeff == Approx(0.0).margin(1e-14));
    CHECK(st.signal_coeff == Approx(std::sqrt(2.0)).margin(1e-12));
  }
  SECTION("interferometer cancellation on random couplings") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    int done = 0;
    while (done < 100) {
      const double e1 = u(rng), e2 = u(rng);
      if (std::fabs(e1 + e2 - 1.0) < 1e-3) continue;
      SideChannelB sb;
      sb.present = true;
      sb.topology = TopologyB::Interferometer;
      sb.eta_b1 = e1;
      sb.eta_b2 = e2;
      sb.phi = 0.0;
      sb.v_n = 1.3;
      const auto w = monitoring_weights(sb);
      auto sc = ScenarioBuilder()
                    .coherent()
                    .modulation(5.0)
                    .channel(0.4)
                    .noise_infusion_interferometer(e1, e2, 0.0, 1.3)
                    .finish();
      const auto st = weighted_difference_stats(sc, w);
      CHECK(std::fabs(st.residual_scb_x_coeff) < 1e-12);
      ++done;
    }
  }
  SECTION("phase shift blocks full decoupling") {
    SideChannelB sb;
    sb.present = true;
    sb.topology = TopologyB::Interferometer;
    sb.eta_b1 = 0.9;
    sb.eta_b2 = 0.8;
    sb.phi = 1.5;
    CHECK_THROWS_AS(monitoring_weights(sb), NotFullyDecouplable);
  }
  SECTION("degenerate coupler pair") {
    SideChannelB sb;
    sb.present = true;
    sb.topology = TopologyB::Interferometer;
    sb.eta_b1 = 0.3;
    sb.eta_b2 = 0.7;
    sb.phi = 0.0;
    CHECK_THROWS_AS(monitoring_weights(sb), NumericalError);
  }
}

TEST_CASE("weighted difference with imperfect detectors") {
  SECTION("optimal weights with perfect detectors return Bob's bare variance") {
    auto sc = ScenarioBuilder().coherent().modulation(9.0).channel(0.5).noise_infusion(0.7, 1.5)
                  .finish();
    const auto w = monitoring_weights(sc.side_b);
    const auto st = weighted_difference_stats(sc, w);
    const double v_b_bare = 0.5 * 10.0 + 0.5;
    CHECK(st.var_delta == Approx(v_b_bare).margin(1e-12));
  }
  SECTION("detector loss and noise enter as eta_d Var + (1-eta_d) V_D") {
    // Var(x_B) = 3 from eta = 0.5, V = 5
    auto sc = ScenarioBuilder()
                  .coherent()
                  .modulation(4.0)
                  .channel(0.5)
                  .noise_infusion(0.7, 1.5)
                  .detectors(0.6, 1.2)
                  .finish();
    const auto w = monitoring_weights(sc.side_b);
    const auto st = weighted_difference_stats(sc, w);
    CHECK(st.var_delta == Approx(0.6 * 3.0 + 0.4 * 1.2).margin(1e-13));  // 2.28
    CHECK(st.residual_scb_x_coeff == Approx(0.0).margin(1e-14));
  }
  SECTION("phase-shifted interferometer leaks the p quadrature") {
    auto sc = ScenarioBuilder()
                  .coherent()
                  .modulation(10.0)
                  .channel(0.1)
                  .noise_infusion_interferometer(0.9, 0.8, 1.5, 1.05)
                  .finish();
    for (double gp : {-1.0, 0.3, 1.0, 2.0}) {
      const auto st = weighted_difference_stats(sc, {1.0, gp});
      CHECK(std::fabs(st.residual_scb_p_coeff) > 1e-6);
    }
  }
}

TEST_CASE("the whole g/g' ray restores the statistics") {
  // any pair with g/g' = sqrt(eta_b/(1-eta_b)) leaves delta-x proportional to x_B
  auto sc = ScenarioBuilder().coherent().modulation(9.0).channel(0.5).noise_infusion(0.6, 2.0)
                .finish();
  const double ratio = std::sqrt(0.6 / 0.4);
  for (double scale : {0.5, 1.0, 2.7}) {
    const MonitoringWeights w{scale * ratio, scale};
    const auto st = weighted_difference_stats(sc, w);
    CHECK(std::fabs(st.residual_scb_x_coeff) < 1e-14);
    const double v_b_bare = 0.5 * 10.0 + 0.5;
    CHECK(st.var_delta / (st.signal_coeff * st.signal_coeff) == Approx(v_b_bare).margin(1e-10));
  }
}
