#include <catch_amalgamated.hpp>

#include "cvqkd/individual.hpp"
#include "test_helpers.hpp"

using namespace cvqkd;
using Catch::Approx;

namespace {

Scenario eq2_scenario() {
  return ScenarioBuilder().squeezed(0.1).channel(0.5).leakage(0.9).finish();
}

Scenario eq5_scenario() {
  return ScenarioBuilder().coherent().modulation(9.0).channel(0.5).noise_infusion(0.8, 1.5)
      .finish();
}

}  // namespace

TEST_CASE("mutual information basics") {
  PMStatistics st;
  st.v_a = 3.0;
  st.v_b = 2.0;
  st.c_ab = 0.0;
  CHECK(mutual_information(st) == 0.0);
  st.c_ab = 5.0;  // violates Cauchy-Schwarz
  CHECK_THROWS_AS(mutual_information(st), NumericalError);
}

TEST_CASE("leakage mutual information matches the printed closed form") {
  // 1/2 log2(1 / (1 - eta_a eta V_M / (eta_a eta (V-1) + 1)))
  const double direct = 0.5 * std::log2(1.0 / (1.0 - 0.45 * 9.9 / (0.45 * 9.0 + 1.0)));
  CHECK(mutual_information(eq2_scenario()) == Approx(direct).margin(1e-12));
  CHECK(direct == Approx(1.5426609071656068).margin(1e-12));
}

TEST_CASE("infusion mutual information matches the printed closed form") {
  const double v_b = 0.8 * (0.5 * 10.0 + 0.5) + 0.2 * 1.5;
  const double direct = 0.5 * std::log2(1.0 / (1.0 - 0.5 * 0.8 * 9.0 / v_b));
  CHECK(mutual_information(eq5_scenario()) == Approx(direct).margin(1e-12));
  CHECK(direct == Approx(1.0475786165201701).margin(1e-12));
}

TEST_CASE("thermal-input mutual information matches the printed closed form") {
  // 1/2 log2(1/(1 - eta_a eta V_M / (eta[eta_a V + (1-eta_a) V_NS] + 1 - eta)))
  const auto sc = ScenarioBuilder()
                      .squeezed(0.2)
                      .channel(0.45)
                      .leakage(0.7)
                      .leakage_thermal_input(1.6)
                      .finish();
  const double v = sc.protocol.total_variance();
  const double vm = sc.protocol.v_m;
  const double denom = 0.45 * (0.7 * v + 0.3 * 1.6) + 0.55;
  const double direct = 0.5 * std::log2(1.0 / (1.0 - 0.7 * 0.45 * vm / denom));
  CHECK(mutual_information(sc) == Approx(direct).margin(1e-12));
}

TEST_CASE("Eve's individual information reproduces the leakage bound") {
  // 1/2 log2([eta_a eta (V-1) + 1][V - eta_a eta (V-1)] / V) at eps = 0
  const double printed = 0.5 * std::log2((0.45 * 9.0 + 1.0) * (10.0 - 0.45 * 9.0) / 10.0);
  CHECK(printed == Approx(0.7936224806988256).margin(1e-12));
  CHECK(eve_information_individual(eq2_scenario()) == Approx(printed).margin(1e-9));
}

TEST_CASE("Eve's individual information reproduces the infusion bound") {
  // 1/2 log2(V_B / (eta_b V / (eta + (1-eta)V) + (1-eta_b)/V_N)) at eps = 0
  const double v_b = 0.8 * (0.5 * 10.0 + 0.5) + 0.2 * 1.5;
  const double printed = 0.5 * std::log2(v_b / (0.8 * 10.0 / (0.5 + 0.5 * 10.0) + 0.2 / 1.5));
  CHECK(printed == Approx(0.7827799847493203).margin(1e-12));
  CHECK(eve_information_individual(eq5_scenario()) == Approx(printed).margin(1e-9));
}

TEST_CASE("lossless noiseless channel leaks nothing") {
  const auto sc = ScenarioBuilder().coherent().modulation(5.0).channel(1.0).finish();
  CHECK(eve_information_individual(sc) == 0.0);
  const auto rep = key_rate_individual(sc);
  CHECK(rep.key_rate == Approx(rep.i_ab));
  CHECK(rep.eve_bound == 0.0);
}

TEST_CASE("individual engine restrictions") {
  auto both = ScenarioBuilder()
                  .coherent()
                  .modulation(5.0)
                  .channel(0.5)
                  .leakage(0.8)
                  .noise_infusion(0.9, 1.2)
                  .finish();
  CHECK_THROWS_AS(eve_information_individual(both), std::domain_error);
  auto diverging = ScenarioBuilder().coherent().modulation(5.0).channel(1.0, 0.1).finish();
  CHECK_THROWS_AS(eve_information_individual(diverging), std::invalid_argument);
}

TEST_CASE("monitoring removes the side channel from Eve's individual bound") {
  auto off = ScenarioBuilder().coherent().modulation(9.0).channel(0.5).noise_infusion(0.7, 2.5)
                 .finish();
  auto mon = off;
  mon.side_b.monitoring = Monitoring::Optimal;
  const auto clean = ScenarioBuilder().coherent().modulation(9.0).channel(0.5).finish();
  CHECK(key_rate_individual(mon).key_rate ==
        Approx(key_rate_individual(clean).key_rate).margin(1e-12));
  CHECK(key_rate_individual(off).key_rate < key_rate_individual(clean).key_rate);
}

TEST_CASE("asymptotic key rate") {
  CHECK(asymptotic_key_rate(0.5, 0.5, Family::Squeezed) ==
        Approx(0.4150374992788438).margin(1e-14));
  CHECK(asymptotic_key_rate(0.5, 0.5, Family::Coherent) ==
        Approx(0.2075187496394219).margin(1e-14));
  CHECK(asymptotic_key_rate(0.5, 0.0, Family::Squeezed) == 0.0);
}

TEST_CASE("printed noise limits") {
  CHECK(eps_max_limit(0.6, Family::Coherent) == Approx(0.3));
  CHECK(eps_max_limit(0.6, Family::Squeezed) == Approx(0.6));
  CHECK(eps_max_limit(1.0, Family::Coherent) == Approx(0.5));
  CHECK(vn_max_limit(0.5) == Approx(2.0));
  CHECK(vn_max_limit(0.9) == Approx(10.0).margin(1e-12));
  CHECK(vn_max_limit(1e-9) == Approx(1.0).margin(1e-8));
  CHECK_THROWS_AS(vn_max_limit(1.0), std::invalid_argument);
}

TEST_CASE("individual bound never exceeds the collective bound") {
  // checked in test_collective.cpp against the Holevo bound; here only the
  // internal consistency that conditioning on more modes cannot hurt Eve
  std::mt19937 rng(7);
  testutil::RandomScenarioSpec spec;
  for (int i = 0; i < 50; ++i) {
    const auto sc = testutil::random_scenario(rng, spec);
    const double i_be = eve_information_individual(sc);
    CHECK(i_be >= -1e-12);
    CHECK(std::isfinite(i_be));
  }
}
