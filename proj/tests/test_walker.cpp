#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qwalk/errors.hpp"
#include "qwalk/walker.hpp"

using namespace qwalk;

namespace {

const double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const cplx kI(0.0, 1.0);

CoinWalkerState coin_basis(bool up, std::size_t dim) {
  CoinWalkerState s{StateVector::Zero(dim), StateVector::Zero(dim)};
  (up ? s.up : s.down)(0) = 1.0;
  return s;
}

}  // namespace

TEST_CASE("coin matrix") {
  const CoinMatrix c = coin_matrix(kPi / 2);
  CHECK(std::abs(c(0, 0) - kInvSqrt2) < 1e-15);
  CHECK(std::abs(c(0, 1) - kInvSqrt2) < 1e-15);
  CHECK(std::abs(c(1, 0) + kInvSqrt2) < 1e-15);
  CHECK(std::abs(c(1, 1) - kInvSqrt2) < 1e-15);

  const CoinMatrix r = coin_matrix(kPi);
  CHECK(std::abs(r(0, 1) - kI * kInvSqrt2) < 1e-15);
  CHECK(std::abs(r(1, 0) - kI * kInvSqrt2) < 1e-15);
  CHECK(std::abs(r(0, 0) - kInvSqrt2) < 1e-15);

  // (1 - i sx cos phi + i sy sin phi)/sqrt2 built from Pauli matrices.
  CoinMatrix sx, sy;
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 100; ++k) {
    const double phi = u(rng);
    const CoinMatrix ref =
        (CoinMatrix::Identity() - kI * std::cos(phi) * sx + kI * std::sin(phi) * sy) * kInvSqrt2;
    const CoinMatrix m = coin_matrix(phi);
    CHECK((m - ref).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((m * m.adjoint() - CoinMatrix::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("conditional translation") {
  const TruncationConfig cfg{64};
  const double alpha = 0.565;
  const CompositeOperator t = conditional_translation(alpha, cfg);
  const MomentSet up = walker_moments(t.apply(coin_basis(true, 64)), cfg);
  const MomentSet down = walker_moments(t.apply(coin_basis(false, 64)), cfg);
  // |up> steps toward +x by the coherent amplitude alpha (x shift sqrt2 alpha).
  CHECK(up.mean_x == doctest::Approx(std::sqrt(2.0) * alpha).epsilon(1e-10));
  CHECK(down.mean_x == doctest::Approx(-std::sqrt(2.0) * alpha).epsilon(1e-10));
  CHECK(up.var_x == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(t.unitarity_defect(cfg.guard_levels()) < 1e-10);
  const CompositeOperator tt = t * t.adjoint();
  const CompositeOperator id = CompositeOperator::coin_diagonal(OperatorMatrix::Identity(64, 64),
                                                                OperatorMatrix::Identity(64, 64));
  const Eigen::Index keep = 40;
  CHECK((tt.uu - id.uu).topLeftCorner(keep, keep).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((tt.dd - id.dd).topLeftCorner(keep, keep).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(tt.ud.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ideal step") {
  const TruncationConfig cfg{64};
  const double alpha = 0.565;
  const CoinWalkerState s0 = initial_state(cfg);

  SUBCASE("one step by hand") {
    for (double phi : {0.0, kPi / 2, 1.1}) {
      const CoinWalkerState s1 = ideal_step(s0, phi, alpha, cfg);
      const CoinMatrix c = coin_matrix(phi);
      const cplx cu = (c(0, 0) + c(0, 1)) * kInvSqrt2;
      const cplx cd = (c(1, 0) + c(1, 1)) * kInvSqrt2;
      // Coherent amplitudes e^{-|a|^2/2} a^n / sqrt(n!).
      for (Eigen::Index n = 0; n < 20; ++n) {
        const double mag = std::exp(-alpha * alpha / 2 + n * std::log(alpha) - 0.5 * std::lgamma(n + 1.0));
        CHECK(std::abs(s1.up(n) - cu * mag) < 1e-12);
        CHECK(std::abs(s1.down(n) - cd * mag * (n % 2 ? -1.0 : 1.0)) < 1e-12);
      }
    }
  }

  SUBCASE("zero step size only rotates the coin") {
    CoinWalkerState s = s0;
    s.up(3) = 0.2;
    const double norm = std::sqrt(s.norm_squared());
    s.up /= norm;
    s.down /= norm;
    const CoinWalkerState t = ideal_step(s, 0.7, 0.0, cfg);
    const CoinMatrix c = coin_matrix(0.7);
    const StateVector up = c(0, 0) * s.up + c(0, 1) * s.down;
    const StateVector down = c(1, 0) * s.up + c(1, 1) * s.down;
    CHECK((t.up - up).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((t.down - down).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("norm over 17 steps") {
    const TruncationConfig big{256};
    const std::vector<double> phases(17, kPi / 2);
    const WalkTrace tr = run_walk(ideal_step_operators(alpha, big), phases, big);
    CHECK(std::abs(tr.final_state.norm_squared() - 1.0) < 1e-8);
    CHECK(tr.moments.size() == 18);
  }

  SUBCASE("run_walk agrees with repeated ideal_step") {
    CoinWalkerState s = s0;
    const std::vector<double> phases = {0.3, -1.0, 2.0, kPi / 2};
    for (double phi : phases) s = ideal_step(s, phi, alpha, cfg);
    const WalkTrace tr = run_walk(ideal_step_operators(alpha, cfg), phases, cfg);
    CHECK((tr.final_state.up - s.up).norm() + (tr.final_state.down - s.down).norm() < 1e-12);
  }

  SUBCASE("guard band") {
    const std::vector<double> phases(12, 0.0);
    CHECK_THROWS_AS(run_walk(ideal_step_operators(1.0, TruncationConfig{24}), phases, TruncationConfig{24}),
                    TruncationError);
  }
}

TEST_CASE("initial state") {
  const TruncationConfig cfg{32};
  const CoinWalkerState s = initial_state(cfg);
  const MomentSet m = walker_moments(s, cfg);
  CHECK(m.mean_x == 0.0);
  CHECK(m.var_x == doctest::Approx(0.5));
  CHECK(m.var_p == doctest::Approx(0.5));
  CHECK(m.mean_n == 0.0);
  CHECK(s.coin_populations().first == doctest::Approx(0.5));
  CHECK(s.coin_populations().second == doctest::Approx(0.5));
}

TEST_CASE("reduce_walker") {
  const TruncationConfig cfg{64};
  const FockState r0 = reduce_walker(initial_state(cfg));
  CHECK(r0.purity() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r0.density_matrix()(0, 0) - 1.0) < 1e-14);

  // (|b1>|up> + |b2>|down>)/sqrt2: purity (1 + e^{-|b1-b2|^2})/2.
  const cplx b1(0.9, 0.2), b2(-0.6, 0.1);
  CoinWalkerState s{displacement(b1, cfg).col(0) * kInvSqrt2, displacement(b2, cfg).col(0) * kInvSqrt2};
  const FockState r = reduce_walker(s);
  CHECK(r.purity() == doctest::Approx((1.0 + std::exp(-std::norm(b1 - b2))) / 2.0).epsilon(1e-10));
  CHECK(r.trace() == doctest::Approx(1.0).epsilon(1e-9));

  const std::vector<double> phases(6, kPi / 2);
  const WalkTrace tr = run_walk(ideal_step_operators(0.565, cfg), phases, cfg);
  const MomentSet direct = tr.moments.back();
  const MomentSet reduced = moments(reduce_walker(tr.final_state), cfg);
  CHECK(std::abs(direct.mean_x - reduced.mean_x) < 1e-10);
  CHECK(std::abs(direct.var_x - reduced.var_x) < 1e-10);
  CHECK(std::abs(direct.var_p - reduced.var_p) < 1e-10);
  CHECK(std::abs(direct.cov_xp - reduced.cov_xp) < 1e-10);
  CHECK(std::abs(direct.mean_n - reduced.mean_n) < 1e-10);

  const auto grid = linspace(-12.0, 12.0, 481);
  const auto a = walker_position_distribution(tr.final_state, grid);
  const auto b = position_distribution(reduce_walker(tr.final_state), grid);
  for (std::size_t i = 0; i < grid.size(); i += 10) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  CHECK(trapezoid(grid, a) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("position symmetry of the walk") {
  const TruncationConfig cfg{256};
  const auto grid = linspace(-20.0, 20.0, 801);
  // C(0) from the balanced initial state keeps P(x) mirror symmetric.
  {
    const std::vector<double> phases(17, 0.0);
    const WalkTrace tr = run_walk(ideal_step_operators(0.565, cfg), phases, cfg);
    const auto px = walker_position_distribution(tr.final_state, grid);
    CHECK(position_asymmetry(grid, px) < 1e-9);
    CHECK(std::abs(tr.moments.back().mean_x) < 1e-9);
  }
  // C(pi/2) from the same state drifts; the asymmetry is measured, not bounded by zero.
  {
    const std::vector<double> phases(17, kPi / 2);
    const WalkTrace tr = run_walk(ideal_step_operators(0.565, cfg), phases, cfg);
    const auto px = walker_position_distribution(tr.final_state, grid);
    const double a = position_asymmetry(grid, px);
    CHECK(a > 0.0);
    CHECK(a <= 2.0);
  }
  CHECK_THROWS_AS(position_asymmetry(linspace(-1.0, 2.0, 11), std::vector<double>(11, 0.0)), DomainError);
}
