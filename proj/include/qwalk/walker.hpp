#pragma once

// Coin (x) oscillator composite space. Coin basis order is (up, down) with
// sigma_z |up> = +|up>; the up branch steps toward +x.

#include <Eigen/Dense>

#include "qwalk/fock.hpp"

namespace qwalk {

using CoinMatrix = Eigen::Matrix2cd;

/// Walker state as two oscillator branches, |psi> = |up>|u> + |down>|d>.
struct CoinWalkerState {
  StateVector up;
  StateVector down;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(up.size()); }
  double norm_squared() const { return up.squaredNorm() + down.squaredNorm(); }
  /// (P_up, P_down).
  std::pair<double, double> coin_populations() const {
    return {up.squaredNorm(), down.squaredNorm()};
  }
  /// Oscillator populations traced over the coin.
  std::vector<double> populations() const;
};

/// (1 - i sigma_x cos(phi) + i sigma_y sin(phi)) / sqrt2.
CoinMatrix coin_matrix(double phi);
CoinMatrix pauli_x();

/// Block operator on coin (x) oscillator:
///   [[uu, ud], [du, dd]] acting on (up, down).
struct CompositeOperator {
  OperatorMatrix uu;
  OperatorMatrix ud;
  OperatorMatrix du;
  OperatorMatrix dd;

  /// up_op (x) |up><up| + down_op (x) |down><down|.
  static CompositeOperator coin_diagonal(const OperatorMatrix& up_op, const OperatorMatrix& down_op);
  /// 1 (x) C.
  static CompositeOperator coin(const CoinMatrix& c, std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(uu.rows()); }
  CoinWalkerState apply(const CoinWalkerState& s) const;
  CompositeOperator adjoint() const;
  CompositeOperator operator*(const CompositeOperator& rhs) const;
  /// Largest entrywise deviation of U^dag U from 1, ignoring guard-band levels.
  double unitarity_defect(std::size_t guard_levels) const;
};

/// max |A_ij - B_ij| over all four blocks.
double operator_distance(const CompositeOperator& a, const CompositeOperator& b);

/// Coin-diagonal parts of one walk step, applied after the coin. Stored
/// row-major for the matvec kernel.
struct StepOperators {
  RowMajorMatrix up;
  RowMajorMatrix down;
};

/// Conditional translation: D(+alpha) on the up branch, D(-alpha) on down.
/// alpha is the coherent amplitude, so |up>|0> goes to mean_x = +sqrt2 alpha.
CompositeOperator conditional_translation(double alpha_step, const TruncationConfig& cfg);
StepOperators ideal_step_operators(double alpha_step, const TruncationConfig& cfg);

/// Q(phi) = T [1 (x) C(phi)]: coin first, then translation.
CoinWalkerState apply_step(const CoinWalkerState& s, const CoinMatrix& coin,
                           const StepOperators& ops);
CoinWalkerState ideal_step(const CoinWalkerState& s, double phi, double alpha_step,
                           const TruncationConfig& cfg);

/// |0> (|down> + |up>) / sqrt2.
CoinWalkerState initial_state(const TruncationConfig& cfg);

/// rho = |u><u| + |d><d|.
FockState reduce_walker(const CoinWalkerState& s);

/// Moments of the reduced walker state, without forming rho. Throws
/// TruncationError on guard-band leakage.
MomentSet walker_moments(const CoinWalkerState& s, const TruncationConfig& cfg);

/// P(x) of the reduced walker state.
std::vector<double> walker_position_distribution(const CoinWalkerState& s,
                                                 std::span<const double> grid);

/// Walk from initial_state with coin phases phases[0..N-1]. moments[k] is
/// the reduced-state MomentSet after k steps (k = 0..N).
struct WalkTrace {
  std::vector<MomentSet> moments;
  CoinWalkerState final_state;
};
WalkTrace run_walk(const StepOperators& ops, std::span<const double> phases,
                   const TruncationConfig& cfg);

/// sum_i |P(x_i) - P(-x_i)| dx on a grid symmetric about 0.
double position_asymmetry(std::span<const double> grid, std::span<const double> density);

}  // namespace qwalk
