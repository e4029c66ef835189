#pragma once

// Trapped-ion walk step. Per coin branch s the interaction Hamiltonian is
//
//   H_s(t) = Omega_s [ e^{-i(delta t - phi_L)} D(i eta e^{i omega_z t}) + h.c. ],
//
// with Omega_up the carrier Rabi frequency and Omega_down = -2 Omega_up.
// The Lamb-Dicke product form of one pulse is U_s = D(l eta t) B(-l eta^3 t) U_off,
// l = Omega_s e^{i phi_L}, and the symmetric step is
//
//   U_tot = (1 (x) X) U^dag (1 (x) X) U (1 (x) C(phi)).

#include <numbers>
#include <string>
#include <vector>

#include "qwalk/walker.hpp"

namespace qwalk {

/// How the antiderivatives of the off-resonant terms are evaluated.
enum class OffResonantTiming {
  interval,   ///< F(t) - F(0): integral over the pulse
  pulse_end,  ///< F(t) alone, each oscillating factor taken at t
};

std::string timing_name(OffResonantTiming t);
OffResonantTiming parse_timing(const std::string& s);

/// Which groups of U_off are kept; a disabled group is replaced by 1.
struct UoffFactors {
  bool displacement = true;  ///< eta a e^{-2i w t}
  bool squeeze = true;       ///< eta^2 a^dag^2, a^2
  bool cubic = true;         ///< off-resonant eta^3 (a^dag^2 a + ...)^dag
  bool phase = true;         ///< eta^2 (2n+1) and eta^3 a^dag^3, a^3
};

struct IonParams {
  double delta = 2.0 * std::numbers::pi * 4e6;     ///< rad/s
  double omega_z = 2.0 * std::numbers::pi * 4e6;   ///< rad/s
  double omega_up = 2.0 * std::numbers::pi * 0.3e6;  ///< rad/s
  double eta = 0.1;
  double pulse_t = 1e-6;  ///< s
  double laser_phase = 0.0;
  bool include_B = true;
  bool include_Uoff = true;
  OffResonantTiming timing = OffResonantTiming::interval;
  UoffFactors factors;

  /// Throws ConfigError unless eta, pulse_t, omega_z > 0 and all fields finite.
  void validate() const;
  double omega_down() const noexcept { return -2.0 * omega_up; }
  /// Symmetric step amplitude 3 Omega_up eta t.
  double step_amplitude() const noexcept { return 3.0 * omega_up * eta * pulse_t; }
};

struct StepDiagnostics {
  double displacement_magnitude = 0.0;  ///< 3 Omega_up eta t
  double ld_margin = 0.0;
  double guard_population = 0.0;
  bool valid() const noexcept { return ld_margin > 1.0; }
};

/// margin = (2/3)^{1/4} / sqrt(N_max Omega_up t) / eta.
StepDiagnostics ld_validity(const IonParams& p, int n_max_steps);

/// D(l eta t) B(-l eta^3 t) for l = coefficient * e^{i phi_L}.
OperatorMatrix resonant_factor(double coefficient, const IonParams& p, const TruncationConfig& cfg);

/// Off-resonant part of one pulse for branch Rabi frequency `coefficient`
/// (Omega_up or -2 Omega_up): D_off S B_off Phase, times the carrier phase.
/// Requires delta == omega_z.
OperatorMatrix u_off(double coefficient, const IonParams& p, const TruncationConfig& cfg);

/// zeta of the squeeze factor S(zeta) = exp((zeta^* a^2 - zeta a^dag^2)/2) in u_off.
cplx uoff_squeeze_parameter(double coefficient, const IonParams& p);

/// Full single-pulse propagator of one branch, honouring the toggles.
OperatorMatrix branch_operator(double coefficient, const IonParams& p, const TruncationConfig& cfg);

struct IonStepOperator {
  CompositeOperator u;  ///< U_down (x) |d><d| + U_up (x) |u><u|
  StepDiagnostics diagnostics;
};

/// Lamb-Dicke product U. diagnostics.ld_margin uses n_max_steps.
IonStepOperator step_operator_product(const IonParams& p, const TruncationConfig& cfg,
                                      int n_max_steps = 17);

/// Coin-diagonal parts of U_tot: up gets U_down^dag U_up, down gets U_up^dag U_down.
StepOperators ion_step_operators(const IonParams& p, const TruncationConfig& cfg);

/// U_tot for coin phase phi.
CompositeOperator full_step(const IonParams& p, double phi, const TruncationConfig& cfg);

// --- direct integration ----------------------------------------------------

struct IntegratorOptions {
  /// Substep; 0 selects (2 pi / omega_z) / 200.
  double dt = 0.0;
  /// Re-run at dt/2 and require the states to agree.
  bool check_convergence = true;
  double tolerance = 1e-8;
};

/// Applies the pulse propagator U = T exp(-i int_0^t H dt') to s by a
/// fourth-order commutator-free Magnus scheme on the full displacement form
/// of H. Throws ConvergenceError if dt > 2 pi/(50 omega_z) or if the halving
/// check fails.
CoinWalkerState direct_integrate(const IonParams& p, const CoinWalkerState& s,
                                 const IntegratorOptions& opt = {});
/// Applies U^dag.
CoinWalkerState direct_integrate_adjoint(const IonParams& p, const CoinWalkerState& s,
                                         const IntegratorOptions& opt = {});
/// U_tot applied with the integrated U.
CoinWalkerState direct_full_step(const IonParams& p, double phi, const CoinWalkerState& s,
                                 const IntegratorOptions& opt = {});

/// |<a|b>|^2 over the composite space.
double state_fidelity(const CoinWalkerState& a, const CoinWalkerState& b);

// --- term attribution ------------------------------------------------------

struct AttributionRow {
  std::string label;
  double sigma_x = 0.0;        ///< sqrt(var_x) after n_steps
  double var_p_slope = 0.0;    ///< least-squares slope of var_p over N = 1..n_steps
  double asymmetry = 0.0;      ///< position_asymmetry after n_steps
  double sideband_energy = 0.0;
};

struct AttributionSpec {
  int n_steps = 10;
  /// C(0) keeps the ideal P(x) mirror symmetric, so asymmetry measures the terms.
  double phi = 0.0;
  double grid_half_width = 14.0;
  std::size_t grid_points = 281;
  double band_lo = 2.0;  ///< |p| window for the sideband energy
  double band_hi = 14.0;
};

/// Re-runs the walk with each U_off group (and B) forced to the identity in
/// turn. Rows: full, no_Uoff, no_B, no_displacement, no_squeeze, no_cubic,
/// no_phase.
std::vector<AttributionRow> attribution_harness(const IonParams& p, const AttributionSpec& spec,
                                                const TruncationConfig& cfg);

}  // namespace qwalk
