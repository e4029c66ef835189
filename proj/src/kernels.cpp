#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "qwalk/errors.hpp"
#include "qwalk/kernels.hpp"

namespace qwalk::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(QWALK_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("QWALK_ISA"); env != nullptr && std::string(env) == "scalar")
    return Isa::scalar;
  return detected_isa();
}

std::atomic<Isa>& active() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

void check_size(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("kernel argument size mismatch: ") + what);
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

Isa detected_isa() noexcept { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2())
    throw ConfigError("AVX2/FMA kernels requested but not supported by this CPU");
  active().store(isa, std::memory_order_relaxed);
}

void cmatvec(std::span<const cplx> a, std::size_t rows, std::size_t cols,
             std::span<const cplx> x, std::span<cplx> y) {
  check_size(a.size() == rows * cols && x.size() == cols && y.size() == rows, "cmatvec");
#ifdef QWALK_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2) return avx2::cmatvec(a.data(), rows, cols, x.data(), y.data());
#endif
  scalar::cmatvec(a.data(), rows, cols, x.data(), y.data());
}

void hermite_functions(std::span<const double> xs, std::size_t n_levels,
                       std::span<double> out) {
  check_size(out.size() == xs.size() * n_levels, "hermite_functions");
#ifdef QWALK_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2)
    return avx2::hermite_functions(xs.data(), xs.size(), n_levels, out.data());
#endif
  scalar::hermite_functions(xs.data(), xs.size(), n_levels, out.data());
}

WignerCoefficients make_wigner_coefficients(std::span<const cplx> rho, std::size_t dim) {
  check_size(rho.size() == dim * dim, "make_wigner_coefficients");
  WignerCoefficients c;
  c.dim = dim;
  c.offset.resize(dim);
  const std::size_t total = dim * (dim + 1) / 2;
  c.re.reserve(total);
  c.im.reserve(total);
  c.lower.reserve(total);
  c.inv_norm.reserve(total);
  for (std::size_t k = 0; k < dim; ++k) {
    c.offset[k] = c.re.size();
    for (std::size_t n = 0; n + k < dim; ++n) {
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      const cplx v = rho[n * dim + n + k];
      c.re.push_back(sign * v.real());
      c.im.push_back(sign * v.imag());
      const double dn = static_cast<double>(n);
      const double dk = static_cast<double>(k);
      c.lower.push_back(std::sqrt(dn * (dn + dk)));
      c.inv_norm.push_back(1.0 / std::sqrt((dn + 1.0) * (dn + dk + 1.0)));
    }
  }
  return c;
}

void wigner_points(const WignerCoefficients& coeffs, std::span<const double> xs,
                   std::span<const double> ps, std::span<double> out) {
  check_size(xs.size() == ps.size() && out.size() == xs.size(), "wigner_points");
#ifdef QWALK_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2)
    return avx2::wigner_points(coeffs, xs.data(), ps.data(), xs.size(), out.data());
#endif
  scalar::wigner_points(coeffs, xs.data(), ps.data(), xs.size(), out.data());
}

}  // namespace qwalk::kernels
