#include <random>

#include <catch_amalgamated.hpp>

#include "cvqkd/gaussian.hpp"

using namespace cvqkd;
using Catch::Approx;

namespace {

// Reference symplectic matrices, built independently of the library ops.
std::vector<std::vector<double>> bs_matrix(int n, int i, int j, double t) {
  std::vector<std::vector<double>> s(2 * n, std::vector<double>(2 * n, 0.0));
  for (int k = 0; k < 2 * n; ++k) s[k][k] = 1.0;
  const double ct = std::sqrt(t), cr = std::sqrt(1.0 - t);
  for (int q = 0; q < 2; ++q) {
    s[2 * i + q][2 * i + q] = ct;
    s[2 * i + q][2 * j + q] = cr;
    s[2 * j + q][2 * i + q] = -cr;
    s[2 * j + q][2 * j + q] = ct;
  }
  return s;
}

std::vector<std::vector<double>> phase_matrix(int n, int i, double phi) {
  std::vector<std::vector<double>> s(2 * n, std::vector<double>(2 * n, 0.0));
  for (int k = 0; k < 2 * n; ++k) s[k][k] = 1.0;
  s[2 * i][2 * i] = std::cos(phi);
  s[2 * i][2 * i + 1] = std::sin(phi);
  s[2 * i + 1][2 * i] = -std::sin(phi);
  s[2 * i + 1][2 * i + 1] = std::cos(phi);
  return s;
}

double sandwich(const std::vector<std::vector<double>>& s, const SymplecticForm& om, int r,
                int c) {
  const int n = static_cast<int>(s.size());
  double acc = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) acc += s[r][a] * om(a, b) * s[c][b];
  return acc;
}

CovarianceMatrix random_physical_state(std::mt19937& rng, int n_modes) {
  std::uniform_real_distribution<double> u01(0.05, 0.95);
  std::uniform_real_distribution<double> th(1.0, 5.0);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  CovarianceMatrix g = CovarianceMatrix::squeezed_state(u01(rng));
  for (int m = 1; m < n_modes; ++m) {
    g = (m % 2 == 0) ? g.direct_sum(CovarianceMatrix::thermal_state(th(rng)))
                     : g.direct_sum(CovarianceMatrix::squeezed_state(u01(rng)));
  }
  for (int step = 0; step < 3 * n_modes; ++step) {
    const int i = static_cast<int>(rng() % n_modes);
    int j = static_cast<int>(rng() % n_modes);
    if (j == i) j = (j + 1) % n_modes;
    g = g.apply_beamsplitter(i, j, u01(rng)).apply_phase(i, ang(rng));
  }
  return g;
}

}  // namespace

TEST_CASE("vacuum states") {
  const auto v1 = CovarianceMatrix::vacuum(1);
  CHECK(v1(0, 0) == 1.0);
  CHECK(v1(1, 1) == 1.0);
  CHECK(v1(0, 1) == 0.0);
  const auto v2 = CovarianceMatrix::vacuum(2);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) CHECK(v2(r, c) == (r == c ? 1.0 : 0.0));
  const auto nu = v1.symplectic_eigenvalues();
  REQUIRE(nu.size() == 1);
  CHECK(nu[0] == Approx(1.0).margin(1e-14));
  CHECK_THROWS_AS(CovarianceMatrix::vacuum(0), std::invalid_argument);
}

TEST_CASE("squeezed states") {
  const auto c = CovarianceMatrix::squeezed_state(1.0);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(1, 1) == 1.0);
  const auto s = CovarianceMatrix::squeezed_state(0.1);
  CHECK(s(0, 0) == Approx(0.1));
  CHECK(s(1, 1) == Approx(10.0));
  CHECK(s.symplectic_eigenvalues()[0] == Approx(1.0).margin(1e-12));
  CHECK_THROWS_AS(CovarianceMatrix::squeezed_state(0.0), std::invalid_argument);
  CHECK_THROWS_AS(CovarianceMatrix::squeezed_state(-1.0), std::invalid_argument);
}

TEST_CASE("EPR states") {
  const auto v = CovarianceMatrix::epr_state(1.0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) CHECK(v(r, c) == Approx(r == c ? 1.0 : 0.0).margin(1e-15));
  const auto e = CovarianceMatrix::epr_state(2.0);
  CHECK(e(0, 2) == Approx(std::sqrt(3.0)));
  CHECK(e(1, 3) == Approx(-std::sqrt(3.0)));
  const auto nu = CovarianceMatrix::epr_state(5.0).symplectic_eigenvalues();
  REQUIRE(nu.size() == 2);
  CHECK(nu[0] == Approx(1.0).margin(1e-12));
  CHECK(nu[1] == Approx(1.0).margin(1e-12));
  CHECK_THROWS_AS(CovarianceMatrix::epr_state(0.99), std::invalid_argument);
}

TEST_CASE("thermal states") {
  const auto v = CovarianceMatrix::thermal_state(1.0);
  CHECK(v(0, 0) == 1.0);
  const auto t = CovarianceMatrix::thermal_state(3.0);
  CHECK(t.von_neumann_entropy() == Approx(2.0).margin(1e-12));  // G(1) = 2 bits
  CHECK(CovarianceMatrix::thermal_state(1.5).symplectic_eigenvalues()[0] == Approx(1.5));
  CHECK_THROWS_AS(CovarianceMatrix::thermal_state(0.5), std::invalid_argument);
}

TEST_CASE("beamsplitter on covariance matrices") {
  const auto in = CovarianceMatrix::thermal_state(3.0).direct_sum(CovarianceMatrix::vacuum(1));

  SECTION("T = 1 leaves the state unchanged") {
    const auto out = in.apply_beamsplitter(0, 1, 1.0);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) CHECK(out(r, c) == Approx(in(r, c)).margin(1e-15));
  }
  SECTION("T = 0 swaps the modes") {
    const auto out = in.apply_beamsplitter(0, 1, 0.0);
    CHECK(out(0, 0) == Approx(1.0));
    CHECK(out(2, 2) == Approx(3.0));
    CHECK(out(0, 2) == Approx(0.0).margin(1e-15));
  }
  SECTION("T = 0.7 mixes variances and builds correlations") {
    const auto out = in.apply_beamsplitter(0, 1, 0.7);
    CHECK(out(0, 0) == Approx(2.4).margin(1e-14));
    CHECK(out(2, 2) == Approx(1.6).margin(1e-14));
    // -2 sqrt(0.21), from the Monte Carlo propagation of x quadratures
    CHECK(out(0, 2) == Approx(-0.916515138991168).margin(1e-13));
  }
  SECTION("input validation") {
    CHECK_THROWS_AS(in.apply_beamsplitter(0, 1, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(in.apply_beamsplitter(0, 1, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(in.apply_beamsplitter(1, 1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(in.apply_beamsplitter(0, 2, 0.5), std::invalid_argument);
  }
}

TEST_CASE("phase rotations") {
  const auto t = CovarianceMatrix::thermal_state(2.5);
  const auto r = t.apply_phase(0, 3.14159265358979);
  CHECK(r(0, 0) == Approx(2.5).margin(1e-12));
  CHECK(r(0, 1) == Approx(0.0).margin(1e-12));
  const auto s = CovarianceMatrix::squeezed_state(0.1).apply_phase(0, 1.5707963267948966);
  CHECK(s(0, 0) == Approx(10.0).margin(1e-9));
  CHECK(s(1, 1) == Approx(0.1).margin(1e-10));
  const auto id = CovarianceMatrix::squeezed_state(0.3).apply_phase(0, 0.0);
  CHECK(id(0, 0) == Approx(0.3));
}

TEST_CASE("homodyne conditioning") {
  SECTION("EPR remote state preparation") {
    const auto c = CovarianceMatrix::epr_state(2.0).condition_on_homodyne(1, Quadrature::X);
    REQUIRE(c.n_modes() == 1);
    CHECK(c(0, 0) == Approx(0.5).margin(1e-14));  // squeezed to 1/V
    CHECK(c(1, 1) == Approx(2.0).margin(1e-14));
  }
  SECTION("conditioning on an uncorrelated mode changes nothing") {
    const auto g = CovarianceMatrix::epr_state(3.0).direct_sum(CovarianceMatrix::thermal_state(2.0));
    const auto c = g.condition_on_homodyne(2, Quadrature::X);
    for (int r = 0; r < 4; ++r)
      for (int col = 0; col < 4; ++col) CHECK(c(r, col) == Approx(g(r, col)).margin(1e-15));
  }
  SECTION("degenerate measured variance is rejected") {
    std::vector<double> entries = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
    const auto g = CovarianceMatrix::from_entries(2, entries);
    CHECK_THROWS_AS(g.condition_on_homodyne(1, Quadrature::X), std::invalid_argument);
  }
}

TEST_CASE("heterodyne conditioning") {
  SECTION("EPR(V) heterodyne prepares the coherent-state conditional") {
    for (double v : {1.0, 3.0}) {
      const auto c = CovarianceMatrix::epr_state(v).condition_on_heterodyne(1);
      REQUIRE(c.n_modes() == 1);
      // direct two-quadrature Gaussian conditioning: gamma_A - C (gamma_B+I)^-1 C^T
      const double expect = v - (v * v - 1.0) / (v + 1.0);
      CHECK(c(0, 0) == Approx(expect).margin(1e-12));
      CHECK(c(1, 1) == Approx(expect).margin(1e-12));
    }
  }
  SECTION("heterodyne of an uncorrelated mode changes nothing") {
    const auto g = CovarianceMatrix::epr_state(3.0).direct_sum(CovarianceMatrix::thermal_state(2.0));
    const auto c = g.condition_on_heterodyne(2);
    for (int r = 0; r < 4; ++r)
      for (int col = 0; col < 4; ++col) CHECK(c(r, col) == Approx(g(r, col)).margin(1e-12));
  }
}

TEST_CASE("symplectic eigenvalues") {
  SECTION("multimode vacuum") {
    const auto nu = CovarianceMatrix::vacuum(3).symplectic_eigenvalues();
    REQUIRE(nu.size() == 3);
    for (double v : nu) CHECK(v == Approx(1.0).margin(1e-13));
  }
  SECTION("the two-mode state of the leakage scenario") {
    // EPR(4), leakage coupler 0.9, channel eta 0.5 eps 0.1
    auto g = CovarianceMatrix::epr_state(4.0)
                 .direct_sum(CovarianceMatrix::vacuum(1))
                 .apply_beamsplitter(1, 2, 0.9)
                 .marginal({0, 1});
    // apply the channel manually: thermal noise mode of variance N, coupler eta
    const double eta = 0.5, eps = 0.1;
    const double n_env = 1.0 + eta * eps / (1.0 - eta);
    g = g.direct_sum(CovarianceMatrix::thermal_state(n_env)).apply_beamsplitter(1, 2, eta)
            .marginal({0, 1});
    const auto nu = g.symplectic_eigenvalues();
    REQUIRE(nu.size() == 2);
    CHECK(nu[0] == Approx(2.6681541692269404).margin(1e-10));
    CHECK(nu[1] == Approx(1.0681541692269404).margin(1e-10));
    // conditional state after Bob's x measurement
    const auto cond = g.condition_on_homodyne(1, Quadrature::X);
    CHECK(cond(0, 0) == Approx(1.1875).margin(1e-12));
    CHECK(cond(1, 1) == Approx(4.0).margin(1e-12));
  }
  SECTION("two-mode closed form on random states") {
    std::mt19937 rng(12345);
    for (int trial = 0; trial < 50; ++trial) {
      const auto g = random_physical_state(rng, 2);
      const double det_a = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
      const double det_b = g(2, 2) * g(3, 3) - g(2, 3) * g(3, 2);
      const double det_c = g(0, 2) * g(1, 3) - g(0, 3) * g(1, 2);
      double det_g = 0.0;
      {
        // 4x4 determinant by cofactor expansion
        auto m = [&](int r, int c) { return g(r, c); };
        auto det3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
          return m(r0, c0) * (m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)) -
                 m(r0, c1) * (m(r1, c0) * m(r2, c2) - m(r1, c2) * m(r2, c0)) +
                 m(r0, c2) * (m(r1, c0) * m(r2, c1) - m(r1, c1) * m(r2, c0));
        };
        det_g = m(0, 0) * det3(1, 2, 3, 1, 2, 3) - m(0, 1) * det3(1, 2, 3, 0, 2, 3) +
                m(0, 2) * det3(1, 2, 3, 0, 1, 3) - m(0, 3) * det3(1, 2, 3, 0, 1, 2);
      }
      const double delta = det_a + det_b + 2.0 * det_c;
      const double root = std::sqrt(std::max(delta * delta - 4.0 * det_g, 0.0));
      const double nu_p = std::sqrt((delta + root) / 2.0);
      const double nu_m = std::sqrt(std::max((delta - root) / 2.0, 0.0));
      const auto nu = g.symplectic_eigenvalues();
      CHECK(nu[0] == Approx(nu_p).margin(1e-10 * std::max(1.0, nu_p)));
      CHECK(nu[1] == Approx(std::max(nu_m, 1.0)).margin(1e-10 * std::max(1.0, nu_m)));
    }
  }
}

TEST_CASE("von Neumann entropy") {
  CHECK(CovarianceMatrix::epr_state(7.0).von_neumann_entropy() == Approx(0.0).margin(1e-9));
  CHECK(CovarianceMatrix::squeezed_state(0.02).von_neumann_entropy() == Approx(0.0).margin(1e-9));
  CHECK(CovarianceMatrix::thermal_state(3.0).von_neumann_entropy() == Approx(2.0).margin(1e-12));
  CHECK(bosonic_entropy(0.5) == Approx(1.3774437510817343).margin(1e-13));
  CHECK(bosonic_entropy(0.0) == 0.0);
  SECTION("unphysical states are rejected") {
    std::vector<double> entries = {0.5, 0, 0, 0.5};
    const auto g = CovarianceMatrix::from_entries(1, entries);
    CHECK_THROWS_AS(g.von_neumann_entropy(), NumericalError);
  }
}

TEST_CASE("symmetry is enforced on construction") {
  std::vector<double> bad = {1, 0.1, 0.2, 1};
  CHECK_THROWS_AS(CovarianceMatrix::from_entries(1, bad), std::invalid_argument);
  std::vector<double> wrong_size = {1, 0, 0, 1, 0};
  CHECK_THROWS_AS(CovarianceMatrix::from_entries(1, wrong_size), std::invalid_argument);
}

TEST_CASE("beamsplitter and phase preserve the symplectic form") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> ang(-6.3, 6.3);
  const SymplecticForm om{3};
  for (int trial = 0; trial < 40; ++trial) {
    const double t = u01(rng);
    const auto s = bs_matrix(3, 0, 2, t);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) CHECK(sandwich(s, om, r, c) == Approx(om(r, c)).margin(1e-12));
    const auto sp = phase_matrix(3, 1, ang(rng));
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) CHECK(sandwich(sp, om, r, c) == Approx(om(r, c)).margin(1e-12));
  }
  SECTION("library ops agree with explicit congruence") {
    std::mt19937 rng2(4242);
    const auto g = random_physical_state(rng2, 3);
    const double t = 0.37;
    const auto lib = g.apply_beamsplitter(0, 2, t);
    const auto s = bs_matrix(3, 0, 2, t);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) {
        double acc = 0.0;
        for (int a = 0; a < 6; ++a)
          for (int b = 0; b < 6; ++b) acc += s[r][a] * g(a, b) * s[c][b];
        CHECK(lib(r, c) == Approx(acc).margin(1e-12));
      }
  }
}

TEST_CASE("random op compositions keep states physical") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = random_physical_state(rng, 4);
    for (double nu : g.symplectic_eigenvalues()) CHECK(nu >= 1.0 - 1e-9);
  }
}

TEST_CASE("entropy is additive over direct sums") {
  std::mt19937 rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_physical_state(rng, 2);
    const auto b = random_physical_state(rng, 2);
    // mix in thermal noise so the parts are not all pure
    const auto am = a.direct_sum(CovarianceMatrix::thermal_state(2.0))
                        .apply_beamsplitter(0, 2, 0.6)
                        .marginal({0, 1});
    const auto bm = b.direct_sum(CovarianceMatrix::thermal_state(1.5))
                        .apply_beamsplitter(1, 2, 0.3)
                        .marginal({0, 1});
    CHECK(am.direct_sum(bm).von_neumann_entropy() ==
          Approx(am.von_neumann_entropy() + bm.von_neumann_entropy()).margin(1e-10));
  }
}

TEST_CASE("conditioning one mode of a pure two-mode state leaves a pure state") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = CovarianceMatrix::squeezed_state(u(rng))
                       .direct_sum(CovarianceMatrix::squeezed_state(u(rng)))
                       .apply_beamsplitter(0, 1, u(rng))
                       .apply_phase(0, 2.0 * u(rng));
    CHECK(g.condition_on_homodyne(0, Quadrature::X).von_neumann_entropy() ==
          Approx(0.0).margin(1e-9));
    CHECK(g.condition_on_homodyne(1, Quadrature::P).von_neumann_entropy() ==
          Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("mode-and-quadrature addressing") {
  const auto g = CovarianceMatrix::epr_state(2.0);
  const auto a = g.condition_on_homodyne(ModeIndex{1, Quadrature::P});
  const auto b = g.condition_on_homodyne(1, Quadrature::P);
  CHECK(a(0, 0) == b(0, 0));
  CHECK(a(1, 1) == Approx(0.5).margin(1e-14));  // p-homodyne squeezes the partner in p
}
