#pragma once

// Inner-loop kernels. Every kernel has a portable scalar reference
// implementation and, on x86-64, an AVX2+FMA variant. The variant is picked
// once at startup from CPUID; tests force each path explicitly and check that
// they agree.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace qwalk::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best instruction set supported by this CPU and build.
Isa detected_isa() noexcept;

/// Instruction set used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Force a path. Throws ConfigError if the CPU cannot run it. The environment
/// variable QWALK_ISA=scalar selects the reference path at startup.
void set_active_isa(Isa isa);

/// RAII override of the active path, restores the previous one on exit.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
  ~ScopedIsa() { set_active_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

// ---------------------------------------------------------------------------
// Dense complex matrix-vector product y = A x. A is row-major rows x cols.

void cmatvec(std::span<const cplx> a, std::size_t rows, std::size_t cols,
             std::span<const cplx> x, std::span<cplx> y);

// ---------------------------------------------------------------------------
// Normalised Hermite functions psi_n(x_i) for n < n_levels, written row-major
// into out[n * xs.size() + i]. Uses the three-term recurrence
//   psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}.

void hermite_functions(std::span<const double> xs, std::size_t n_levels,
                       std::span<double> out);

// ---------------------------------------------------------------------------
// Displaced-parity Wigner evaluation.
//
// W(x,p) = (1/pi) sum_n (-1)^n <n| D(b)^dag rho D(b) |n>,  b = (x + i p)/sqrt2,
// expanded over the diagonals of rho with normalised associated-Laguerre
// functions g_n^k(y) = sqrt(n!/(n+k)!) y^{k/2} e^{-y/2} L_n^k(y), y = 2(x^2+p^2).

struct WignerCoefficients {
  std::size_t dim = 0;
  // Diagonal k stored at offset[k], length dim - k:
  //   c_k[n] = (-1)^n rho(n, n+k).
  std::vector<std::size_t> offset;
  std::vector<double> re;
  std::vector<double> im;
  // Recurrence factors for diagonal k, same layout:
  //   lower[n] = sqrt(n (n+k)),  inv_norm[n] = 1 / sqrt((n+1)(n+k+1)).
  std::vector<double> lower;
  std::vector<double> inv_norm;
};

/// Packs a Hermitian dim x dim row-major density matrix.
WignerCoefficients make_wigner_coefficients(std::span<const cplx> rho,
                                            std::size_t dim);

void wigner_points(const WignerCoefficients& coeffs, std::span<const double> xs,
                   std::span<const double> ps, std::span<double> out);

// ---------------------------------------------------------------------------
// Per-ISA entry points, exposed for equivalence tests and benchmarks.

namespace scalar {
void cmatvec(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x,
             cplx* y);
void hermite_functions(const double* xs, std::size_t count,
                       std::size_t n_levels, double* out);
void wigner_points(const WignerCoefficients& coeffs, const double* xs,
                   const double* ps, std::size_t count, double* out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define QWALK_HAVE_AVX2_KERNELS 1
namespace avx2 {
void cmatvec(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x,
             cplx* y);
void hermite_functions(const double* xs, std::size_t count,
                       std::size_t n_levels, double* out);
void wigner_points(const WignerCoefficients& coeffs, const double* xs,
                   const double* ps, std::size_t count, double* out);
}  // namespace avx2
#endif

}  // namespace qwalk::kernels
