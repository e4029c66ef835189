#pragma once

// Phase-randomised walks. Each trajectory draws its coin phases uniformly
// from (-pi/q, pi/q); averaging over trajectories gives the mixed state whose
// spread interpolates between the random walk (q = 1) and the quantum walk
// (q -> infinity).

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "qwalk/iontrap.hpp"

namespace qwalk {

inline constexpr double kQInfinity = std::numeric_limits<double>::infinity();

enum class WalkKind { ideal, ion };

struct DecoherenceConfig {
  double q = kQInfinity;
  int n_traj = 400;
  std::uint64_t master_seed = 20090101;
  int n_steps = 17;
  WalkKind walk_kind = WalkKind::ideal;
  double alpha_step = 0.565;
  IonParams ion;
  /// 0 uses std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// Contiguous trajectory blocks for jackknife errors.
  int jackknife_blocks = 20;

  void validate() const;
};

/// Seed of trajectory `index`'s private stream.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

/// Uniform phases on the open interval (-pi/q, pi/q); all zero for q = inf.
/// Throws DomainError for q < 1.
std::vector<double> sample_phases(double q, int n_steps, std::mt19937_64& stream);

/// Streaming sums of per-trajectory observables, indexed by step 0..n_steps.
class EnsembleAccumulator {
 public:
  static constexpr int kFields = 5;  // <x>, <x^2>, <p>, <p^2>, <n>
  using Sums = std::vector<double>;  // (n_steps + 1) * kFields

  EnsembleAccumulator(int n_steps, std::size_t dim, int n_blocks);

  /// moments[k] and populations[k] for k = 0..n_steps.
  void add(const std::vector<MomentSet>& moments,
           const std::vector<std::vector<double>>& populations, int block);

  int n_steps() const noexcept { return n_steps_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return count_; }
  const Sums& sums() const noexcept { return sums_; }
  const std::vector<Sums>& block_sums() const noexcept { return block_sums_; }
  const std::vector<std::size_t>& block_counts() const noexcept { return block_counts_; }
  /// Summed P_n after step k.
  const std::vector<double>& population_sums(int step) const { return pn_[static_cast<std::size_t>(step)]; }

 private:
  int n_steps_;
  std::size_t dim_;
  std::size_t count_ = 0;
  Sums sums_;
  std::vector<Sums> block_sums_;
  std::vector<std::size_t> block_counts_;
  std::vector<std::vector<double>> pn_;
};

/// Runs all trajectories. The result depends only on the config, not on the
/// thread count: streams come from (master_seed, index) and trajectories are
/// merged in index order.
EnsembleAccumulator run_ensemble(const DecoherenceConfig& cfg, const TruncationConfig& trunc);

/// Same, reusing precomputed step operators.
EnsembleAccumulator run_ensemble(const DecoherenceConfig& cfg, const StepOperators& ops,
                                 const TruncationConfig& trunc);

struct MixtureStep {
  int step = 0;
  double mean_x = 0.0;
  double mean_p = 0.0;
  double var_x = 0.0;  ///< E<x^2> - E<x>^2 of the averaged state
  double var_p = 0.0;
  double mean_n = 0.0;
  double sigma_x() const;
  double sigma_p() const;
  /// sqrt(var_x - 1/2), the spread above the vacuum width.
  double excess_sigma_x() const;
};

std::vector<MixtureStep> mixture_observables(const EnsembleAccumulator& acc);
/// Averaged P_n after `step`.
std::vector<double> mixture_populations(const EnsembleAccumulator& acc, int step);

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;  ///< OLS standard error of the slope
};

/// Least squares of ln y on ln N. Needs >= 3 points and y > 0 (DomainError).
PowerLawFit power_law_fit(std::span<const double> n_values, std::span<const double> y_values);

/// Ordinary least-squares slope of y on x.
double linear_slope(std::span<const double> x, std::span<const double> y);

struct EnsembleExponents {
  PowerLawFit xi;        ///< mean phonon number vs N
  PowerLawFit varsigma;  ///< excess position spread vs N
  double xi_jackknife_se = 0.0;
  double varsigma_jackknife_se = 0.0;
};

/// Exponents fitted over N in [n_lo, n_hi] (n_hi <= 0 means n_steps).
EnsembleExponents ensemble_exponents(const EnsembleAccumulator& acc, int n_lo = 3, int n_hi = 0);

}  // namespace qwalk
