#pragma once

// Phonon-number readout from Rabi flopping. A drive on channel c with
// phonon distribution P_n gives
//
//   P_down(t) = 1/2 [1 + sum_n P_n cos(Omega_n t)],
//
// carrier:        Omega_n = w0 e^{-eta^2/2} L_n^0(eta^2)
// blue sideband:  Omega_n = w0 e^{-eta^2/2} eta L_n^1(eta^2) / sqrt(n+1)
//
// and P_n is recovered by nonnegative least squares against that dictionary.

#include <Eigen/Dense>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace qwalk {

enum class Channel { carrier, blue_sideband };

std::string channel_name(Channel c);
Channel parse_channel(const std::string& s);

struct ReadoutConfig {
  double eta = 0.2;
  double omega0 = 2.0 * std::numbers::pi * 0.3e6;  ///< rad/s
  std::vector<double> sample_times;                ///< s, strictly increasing
  double noise_sigma = 0.0;
  int n_max = 25;
  std::uint64_t seed = 1;
  /// Levels solved from the carrier in hybrid mode; the sideband covers the rest.
  int carrier_levels = 25;
  double condition_limit = 1e8;

  /// Throws ConfigError on invalid fields.
  void validate() const;
  /// Default sampling: `count` uniform samples on [0, 200 pi / omega0].
  static std::vector<double> default_times(double omega0, std::size_t count = 2048,
                                           double duration_rad = 200.0 * std::numbers::pi);
};

/// Generalized Laguerre polynomial L_n^m(x) by the upward three-term recurrence.
double laguerre(int n, int m, double x);

/// Signed Rabi frequency of level n.
double rabi_freq(Channel c, int n, double eta, double omega0);
double rabi_freq(Channel c, int n, const ReadoutConfig& cfg);

struct SignalTrace {
  std::vector<double> times;
  std::vector<double> p_down;
  Channel channel = Channel::carrier;
};

/// Forward model. p_n must sum to 1 within 1e-6 (DomainError). With
/// cfg.noise_sigma > 0, Gaussian noise from a stream seeded by cfg.seed is
/// added and the result clamped to [0, 1].
SignalTrace synthesize_signal(std::span<const double> p_n, Channel c, const ReadoutConfig& cfg);

struct ReconstructionResult {
  std::vector<double> p_n_hat;
  double residual_norm = 0.0;
  std::vector<bool> ambiguity_flags;
  double condition_number = 0.0;
  bool ill_conditioned = false;
  /// 1 - sum p_n_hat: weight the fit places outside the solved levels.
  double deficit = 0.0;

  bool any_ambiguous() const;
};

/// min ||A p - (2 P_down - 1)|| subject to p >= 0, sum p <= 1, with
/// A[i,n] = cos(Omega_n t_i), n < cfg.n_max. Throws ResolvabilityError if the
/// trace is empty, zero length, undersampled for the fastest tone, or shorter
/// than four of its periods.
ReconstructionResult reconstruct(const SignalTrace& sig, const ReadoutConfig& cfg);

/// Carrier for n < cfg.carrier_levels, then the blue sideband for the
/// remaining n < cfg.n_max with the carrier values held fixed.
ReconstructionResult hybrid_reconstruct(const SignalTrace& carrier, const SignalTrace& bsb,
                                        const ReadoutConfig& cfg);

/// Largest n* with |Omega_n| of the carrier strictly decreasing for all
/// n <= n*, ending at the first sign change. Returns scan_limit if no turn is
/// found.
int monotonic_range(double eta, int scan_limit = 2000);

struct NnlsResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Lawson-Hanson active-set solver for min ||A x - b|| with x >= 0.
NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations = 0);

}  // namespace qwalk
