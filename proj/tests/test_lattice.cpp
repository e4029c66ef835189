#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qwalk/decoherence.hpp"
#include "qwalk/lattice.hpp"

using namespace qwalk;

namespace {
const double kPi = std::numbers::pi;
}

TEST_CASE("lattice walk, first steps") {
  const double alpha = 0.7;
  const CoinMatrix c = coin_matrix(0.0);
  LatticeAmplitudes a = lattice_initial(alpha);
  CHECK(lattice_moments(a).variance == 0.0);

  a = lattice_step(a, c);
  const auto p1 = a.probabilities();
  REQUIRE(p1.size() == 3);
  CHECK(p1[0] == doctest::Approx(0.5));
  CHECK(p1[1] == doctest::Approx(0.0));
  CHECK(p1[2] == doctest::Approx(0.5));
  CHECK(a.position(0) == doctest::Approx(-alpha));
  CHECK(lattice_moments(a).mean == doctest::Approx(0.0));
  CHECK(lattice_moments(a).variance == doctest::Approx(alpha * alpha));

  // Two steps of C(0) from (1,1)/sqrt2, enumerated by hand:
  // site +1: up (1-i)/2; site -1: down (1-i)/2; then
  // +2: |(1-i)/(2 sqrt2)|^2, 0: two paths of 1/4 each, -2: 1/4.
  a = lattice_step(a, c);
  const auto p2 = a.probabilities();
  REQUIRE(p2.size() == 5);
  CHECK(p2[0] == doctest::Approx(0.25));
  CHECK(p2[1] == doctest::Approx(0.0));
  CHECK(p2[2] == doctest::Approx(0.5));
  CHECK(p2[3] == doctest::Approx(0.0));
  CHECK(p2[4] == doctest::Approx(0.25));

  // Third step separates the quantum walk from the binomial (1,3,3,1)/8.
  a = lattice_step(a, c);
  const auto p3 = a.probabilities();
  CHECK(p3[0] == doctest::Approx(0.125));
  CHECK(p3[2] == doctest::Approx(0.375));
  CHECK(p3[4] == doctest::Approx(0.375));
  CHECK(p3[6] == doctest::Approx(0.125));
  a = lattice_step(a, c);
  const auto p4 = a.probabilities();
  // Hand enumeration of step 4: (1/16, 5/8 split as 1/8 + ... ) sums checked below.
  double total = 0.0;
  for (double p : p4) total += p;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("lattice conservation and light cone") {
  LatticeAmplitudes a = lattice_initial(1.0);
  for (int n = 0; n < 100; ++n) a = lattice_step(a, coin_matrix(kPi / 2));
  CHECK(std::abs(a.total_probability() - 1.0) < 1e-12);
  CHECK(a.up.size() == 201);
  // Parity: only sites with the parity of N are occupied.
  const auto p = a.probabilities();
  for (std::size_t i = 1; i < p.size(); i += 2) CHECK(p[i] == 0.0);
}

TEST_CASE("lattice variance grows ballistically") {
  LatticeAmplitudes a = lattice_initial(1.0);
  std::vector<double> ns, sig;
  for (int n = 1; n <= 64; ++n) {
    a = lattice_step(a, coin_matrix(kPi / 2));
    if (n >= 8) {
      ns.push_back(n);
      sig.push_back(std::sqrt(lattice_moments(a).variance));
    }
  }
  const PowerLawFit f = power_law_fit(ns, sig);
  CHECK(f.slope > 0.95);
  CHECK(f.slope < 1.05);
  const double ratio_32 = std::pow(sig[32 - 8], 2) / (32.0 * 32.0);
  const double ratio_64 = std::pow(sig.back(), 2) / (64.0 * 64.0);
  CHECK(std::abs(ratio_64 - ratio_32) / ratio_64 < 0.05);
}

TEST_CASE("classical random walk") {
  const SiteDistribution d2 = classical_rw(2, 0.5);
  REQUIRE(d2.probabilities.size() == 3);
  CHECK(d2.probabilities[0] == doctest::Approx(0.25));
  CHECK(d2.probabilities[1] == doctest::Approx(0.5));
  CHECK(d2.probabilities[2] == doctest::Approx(0.25));
  CHECK(d2.positions[0] == doctest::Approx(1.0));  // alpha_k = (N - 2k) alpha
  for (int n : {0, 1, 7, 40}) {
    const LatticeMoments m = distribution_moments(classical_rw(n, 0.3));
    CHECK(std::abs(m.mean) < 1e-12);
    CHECK(m.variance == doctest::Approx(n * 0.09).epsilon(1e-12));
  }
  std::vector<double> ns, sig;
  for (int n = 8; n <= 64; ++n) {
    ns.push_back(n);
    sig.push_back(std::sqrt(distribution_moments(classical_rw(n, 1.0)).variance));
  }
  CHECK(power_law_fit(ns, sig).slope == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("Fock walk reproduces the lattice walk for well separated branches") {
  // Coherent branches 2 alpha apart overlap by e^{-2 alpha^2}; alpha = 3 makes
  // them effectively orthogonal. Position in x is sqrt2 * alpha per site.
  const double alpha = 3.0;
  const std::size_t dim = 1280;
  const TruncationConfig cfg{dim};
  const StepOperators ops{displacement_analytic(alpha, dim), displacement_analytic(-alpha, dim)};
  CoinWalkerState s = initial_state(cfg);
  LatticeAmplitudes a = lattice_initial(std::sqrt(2.0) * alpha);
  for (int n = 1; n <= 10; ++n) {
    const CoinMatrix c = coin_matrix(kPi / 2);
    s = apply_step(s, c, ops);
    a = lattice_step(a, c);
    const double fock = walker_moments(s, cfg).excess_var_x();
    const double lattice = lattice_moments(a).variance;
    INFO("N=" << n << " fock=" << fock << " lattice=" << lattice);
    CHECK(std::abs(fock - lattice) < 1e-3 * lattice + 1e-9);
    CHECK(walker_moments(s, cfg).mean_x == doctest::Approx(lattice_moments(a).mean).epsilon(1e-6));
  }
}
