#pragma once

// Truncated Fock-space linear algebra for a single harmonic oscillator.
//
// Conventions used throughout the project:
//   x = (a + a^dag)/sqrt2,  p = (a - a^dag)/(i sqrt2),  [x, p] = i,
//   vacuum variances 1/2,  D(alpha) = exp(alpha a^dag - alpha^* a),
//   S(z) = exp((z^* a^2 - z a^dag^2)/2)  (real z > 0 squeezes x).

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace qwalk {

using cplx = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using RowMajorMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultDim = 256;
inline constexpr double kDefaultEdgeGuard = 1e-6;

struct TruncationConfig {
  std::size_t dim = kDefaultDim;
  /// Largest tolerated population in the top guard band.
  double edge_guard = kDefaultEdgeGuard;

  /// Throws ConfigError unless dim >= 2 and 0 < edge_guard < 1.
  void validate() const;
  /// Width of the guard band: ceil(0.1 * dim) top levels.
  std::size_t guard_levels() const;
};

/// Pure or mixed oscillator state.
class FockState {
 public:
  static FockState pure(StateVector amplitudes);
  static FockState mixed(OperatorMatrix rho);
  static FockState vacuum(std::size_t dim);
  static FockState number(std::size_t n, std::size_t dim);

  bool is_pure() const noexcept { return std::holds_alternative<StateVector>(data_); }
  std::size_t dim() const noexcept;
  const StateVector& amplitudes() const;  // pure only
  const OperatorMatrix& rho() const;      // mixed only
  /// Density matrix for either representation.
  OperatorMatrix density_matrix() const;
  /// Diagonal of the density matrix.
  std::vector<double> populations() const;
  double trace() const;
  double purity() const;

 private:
  explicit FockState(std::variant<StateVector, OperatorMatrix> data) : data_(std::move(data)) {}
  std::variant<StateVector, OperatorMatrix> data_;
};

struct MomentSet {
  double mean_x = 0.0;
  double mean_p = 0.0;
  double var_x = 0.0;
  double var_p = 0.0;
  double cov_xp = 0.0;
  double mean_n = 0.0;

  /// Position variance above the vacuum value 1/2.
  double excess_var_x() const noexcept { return var_x - 0.5; }
};

// --- operators -------------------------------------------------------------

/// (a, a^dag) with a(n-1, n) = sqrt(n).
std::pair<OperatorMatrix, OperatorMatrix> ladder_ops(const TruncationConfig& cfg);
OperatorMatrix number_op(const TruncationConfig& cfg);
OperatorMatrix position_op(const TruncationConfig& cfg);
OperatorMatrix momentum_op(const TruncationConfig& cfg);

OperatorMatrix displacement(cplx alpha, const TruncationConfig& cfg);
OperatorMatrix squeeze(cplx z, const TruncationConfig& cfg);

/// The two algebraically equal exponents of the cubic operator B(beta).
enum class CubicForm {
  normal,       ///< beta/2 a^dag (n+1) - h.c.
  symmetrized,  ///< beta/6 [a^dag^2 a + a^dag a a^dag + a a^dag^2] - h.c.
};
OperatorMatrix cubic_b(cplx beta, const TruncationConfig& cfg,
                       CubicForm form = CubicForm::normal);

/// Displacement from closed-form matrix elements
///   <m|D(g)|n> = sqrt(n!/m!) g^{m-n} e^{-|g|^2/2} L_n^{m-n}(|g|^2),  m >= n,
/// i.e. the untruncated operator restricted to the first dim levels. Cheap
/// (O(dim^2)) and independent of the exponential route.
OperatorMatrix displacement_analytic(cplx alpha, std::size_t dim);

/// General matrix exponential: Pade-13 scaling and squaring.
OperatorMatrix expm(const OperatorMatrix& m);

/// exp(G) for anti-Hermitian G through the eigendecomposition of the
/// Hermitian matrix iG; the result is unitary to rounding.
OperatorMatrix expm_skew_hermitian(const OperatorMatrix& g);

/// max |(U^dag U - 1)_{ij}| over indices below the guard band.
double unitarity_defect(const OperatorMatrix& u, std::size_t guard_levels);

// --- states and observables ------------------------------------------------

/// Population in the top guard band.
double guard_population(const FockState& s, const TruncationConfig& cfg);
double guard_population(std::span<const double> populations, const TruncationConfig& cfg);
/// Throws TruncationError when the guard band holds more than cfg.edge_guard.
void check_guard(std::span<const double> populations, const TruncationConfig& cfg,
                 const char* context);

/// Expectation values under the quadrature conventions above. Throws
/// TruncationError on guard-band leakage.
MomentSet moments(const FockState& s, const TruncationConfig& cfg);
MomentSet moments(const FockState& s);

/// P_n = <n|rho|n>.
std::vector<double> number_distribution(const FockState& s);

/// P(x_i) = sum_nm rho_nm psi_n(x_i) psi_m(x_i). The grid must be strictly
/// increasing and the density at both ends below 1e-6 (CoverageError).
std::vector<double> position_distribution(const FockState& s, std::span<const double> grid);

/// Uniform grid helper: count points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Trapezoid rule on a (possibly non-uniform) grid.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace qwalk
