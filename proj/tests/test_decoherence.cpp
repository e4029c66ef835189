#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "qwalk/decoherence.hpp"
#include "qwalk/errors.hpp"

using namespace qwalk;

namespace {

const double kPi = std::numbers::pi;

DecoherenceConfig small_config(double q, int n_traj) {
  DecoherenceConfig c;
  c.q = q;
  c.n_traj = n_traj;
  c.n_steps = 8;
  c.jackknife_blocks = 4;
  return c;
}

}  // namespace

TEST_CASE("phase sampling") {
  std::mt19937_64 a(trajectory_seed(42, 3)), b(trajectory_seed(42, 3));
  const auto pa = sample_phases(1.0, 1000, a);
  const auto pb = sample_phases(1.0, 1000, b);
  CHECK(pa == pb);
  double lo = 0.0, hi = 0.0;
  for (double phi : pa) {
    CHECK(phi > -kPi);
    CHECK(phi < kPi);
    lo = std::min(lo, phi);
    hi = std::max(hi, phi);
  }
  CHECK(lo < -3.0);
  CHECK(hi > 3.0);

  std::mt19937_64 c(1);
  for (double phi : sample_phases(5.0, 500, c)) CHECK(std::abs(phi) < kPi / 5.0);
  for (double phi : sample_phases(kQInfinity, 17, c)) CHECK(phi == 0.0);
  CHECK_THROWS_AS(sample_phases(0.5, 3, c), DomainError);

  // Streams for different trajectories differ.
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(trajectory_seed(7, i));
  CHECK(seeds.size() == 1000);
}

TEST_CASE("mixture identities") {
  SUBCASE("two trajectories with opposite means") {
    EnsembleAccumulator acc(1, 4, 1);
    const double m = 1.7;
    for (double sign : {-1.0, 1.0}) {
      MomentSet s;
      s.mean_x = sign * m;
      s.var_x = 0.0;
      s.mean_n = 2.0;
      std::vector<double> pn = {0.5, 0.0, 0.5, 0.0};
      acc.add({MomentSet{}, s}, {{1.0, 0, 0, 0}, pn}, 0);
    }
    const auto obs = mixture_observables(acc);
    CHECK(obs[1].var_x == doctest::Approx(m * m));
    CHECK(obs[1].mean_x == doctest::Approx(0.0));
    CHECK(obs[1].mean_n == doctest::Approx(2.0));
  }

  SUBCASE("single trajectory reduces to the pure walk") {
    const TruncationConfig cfg{128};
    DecoherenceConfig c = small_config(3.0, 1);
    const EnsembleAccumulator acc = run_ensemble(c, cfg);
    std::mt19937_64 rng(trajectory_seed(c.master_seed, 0));
    const auto phases = sample_phases(c.q, c.n_steps, rng);
    const WalkTrace tr = run_walk(ideal_step_operators(c.alpha_step, cfg), phases, cfg);
    const auto obs = mixture_observables(acc);
    for (int k = 0; k <= c.n_steps; ++k) {
      const MomentSet& m = tr.moments[static_cast<std::size_t>(k)];
      CHECK(obs[k].var_x == doctest::Approx(m.var_x).epsilon(1e-12));
      CHECK(obs[k].var_p == doctest::Approx(m.var_p).epsilon(1e-12));
      CHECK(obs[k].mean_n == doctest::Approx(m.mean_n).epsilon(1e-12));
    }
  }

  SUBCASE("q = infinity ensemble equals the pure walk exactly") {
    const TruncationConfig cfg{128};
    const EnsembleAccumulator acc = run_ensemble(small_config(kQInfinity, 5), cfg);
    const std::vector<double> zeros(8, 0.0);
    const WalkTrace tr = run_walk(ideal_step_operators(0.565, cfg), zeros, cfg);
    const auto obs = mixture_observables(acc);
    for (int k = 0; k <= 8; ++k) {
      CHECK(std::abs(obs[k].var_x - tr.moments[static_cast<std::size_t>(k)].var_x) < 1e-12);
      CHECK(std::abs(obs[k].mean_n - tr.moments[static_cast<std::size_t>(k)].mean_n) < 1e-12);
    }
  }

  SUBCASE("mixture n-bar is linear in the state") {
    const TruncationConfig cfg{128};
    const EnsembleAccumulator acc = run_ensemble(small_config(2.0, 30), cfg);
    const auto obs = mixture_observables(acc);
    for (int k = 0; k <= 8; ++k) {
      const auto pn = mixture_populations(acc, k);
      double total = 0.0, mean = 0.0;
      for (std::size_t n = 0; n < pn.size(); ++n) {
        total += pn[n];
        mean += static_cast<double>(n) * pn[n];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(std::abs(mean - obs[k].mean_n) < 1e-12 * (1.0 + mean));
      CHECK(obs[k].var_x >= 0.0);
      // Mixture variance is at least the mean of the trajectory variances.
      CHECK(obs[k].var_x + 1e-12 >= 0.5);
    }
  }
}

TEST_CASE("ensembles are reproducible across thread counts") {
  const TruncationConfig cfg{128};
  DecoherenceConfig c = small_config(2.0, 70);
  c.threads = 1;
  const EnsembleAccumulator a = run_ensemble(c, cfg);
  c.threads = 3;
  const EnsembleAccumulator b = run_ensemble(c, cfg);
  CHECK(a.sums() == b.sums());
  CHECK(a.block_sums() == b.block_sums());
  CHECK(a.population_sums(8) == b.population_sums(8));
  CHECK(a.count() == 70);

  c.master_seed += 1;
  const EnsembleAccumulator d = run_ensemble(c, cfg);
  CHECK(d.sums() != a.sums());
}

TEST_CASE("ion ensembles") {
  const TruncationConfig cfg{128};
  DecoherenceConfig c = small_config(kQInfinity, 2);
  c.walk_kind = WalkKind::ion;
  c.ion.include_B = false;
  c.ion.include_Uoff = false;
  c.alpha_step = 99.0;  // ignored for ion walks
  const auto obs = mixture_observables(run_ensemble(c, cfg));
  const std::vector<double> zeros(8, 0.0);
  const WalkTrace tr = run_walk(ideal_step_operators(c.ion.step_amplitude(), cfg), zeros, cfg);
  CHECK(obs[8].var_x == doctest::Approx(tr.moments[8].var_x).epsilon(1e-9));
}

TEST_CASE("configuration checks") {
  DecoherenceConfig c;
  c.q = 0.9;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = DecoherenceConfig{};
  c.n_traj = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("power-law fits") {
  std::vector<double> ns, sq, root;
  for (int n = 3; n <= 17; ++n) {
    ns.push_back(n);
    sq.push_back(double(n) * n);
    root.push_back(2.5 * std::sqrt(double(n)));
  }
  const PowerLawFit f2 = power_law_fit(ns, sq);
  CHECK(f2.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f2.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f2.slope_se < 1e-10);
  const PowerLawFit fr = power_law_fit(ns, root);
  CHECK(fr.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::exp(fr.intercept) == doctest::Approx(2.5).epsilon(1e-12));

  CHECK_THROWS_AS(power_law_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DomainError);
  CHECK_THROWS_AS(power_law_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0, 2}), DomainError);
  CHECK(linear_slope(std::vector<double>{0, 1, 2}, std::vector<double>{1, 3, 5}) == doctest::Approx(2.0));
}

TEST_CASE("exponents increase with q") {
  const TruncationConfig cfg{256};
  DecoherenceConfig c;
  c.n_traj = 200;
  c.jackknife_blocks = 20;
  const StepOperators ops = ideal_step_operators(c.alpha_step, cfg);
  std::vector<EnsembleExponents> ex;
  for (double q : {1.0, 2.0, 5.0, 10.0, 20.0}) {
    c.q = q;
    ex.push_back(ensemble_exponents(run_ensemble(c, ops, cfg)));
  }
  for (std::size_t k = 1; k < ex.size(); ++k) {
    const double se_xi = std::hypot(ex[k].xi_jackknife_se, ex[k - 1].xi_jackknife_se);
    const double se_vs = std::hypot(ex[k].varsigma_jackknife_se, ex[k - 1].varsigma_jackknife_se);
    CHECK(ex[k].xi.slope > ex[k - 1].xi.slope - 2.0 * se_xi);
    CHECK(ex[k].varsigma.slope > ex[k - 1].varsigma.slope - 2.0 * se_vs);
  }
  // Random-walk end: n-bar grows linearly and the excess spread as sqrt(N).
  CHECK(std::abs(ex[0].xi.slope - 1.0) < 0.15);
  CHECK(std::abs(ex[0].varsigma.slope - 0.5) < 0.1);
  CHECK(ex[0].xi_jackknife_se > 0.0);
  CHECK(ex[0].xi_jackknife_se < 0.05);
}
