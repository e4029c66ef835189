#include <cmath>
#include <numbers>

#include "qwalk/kernels.hpp"

namespace qwalk::kernels::scalar {

void cmatvec(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x,
             cplx* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const cplx* row = a + r * cols;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      re += row[c].real() * x[c].real() - row[c].imag() * x[c].imag();
      im += row[c].real() * x[c].imag() + row[c].imag() * x[c].real();
    }
    y[r] = {re, im};
  }
}

void hermite_functions(const double* xs, std::size_t count,
                       std::size_t n_levels, double* out) {
  if (n_levels == 0) return;
  const double norm0 = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
  for (std::size_t i = 0; i < count; ++i) {
    const double x = xs[i];
    double prev = 0.0;
    double cur = norm0 * std::exp(-0.5 * x * x);
    out[i] = cur;
    for (std::size_t n = 0; n + 1 < n_levels; ++n) {
      const double dn = static_cast<double>(n);
      const double next =
          std::sqrt(2.0 / (dn + 1.0)) * x * cur - std::sqrt(dn / (dn + 1.0)) * prev;
      prev = cur;
      cur = next;
      out[(n + 1) * count + i] = cur;
    }
  }
}

void wigner_points(const WignerCoefficients& coeffs, const double* xs,
                   const double* ps, std::size_t count, double* out) {
  const std::size_t dim = coeffs.dim;
  for (std::size_t i = 0; i < count; ++i) {
    const double r2 = xs[i] * xs[i] + ps[i] * ps[i];
    const double y = 2.0 * r2;
    const double r = std::sqrt(r2);
    const double ct = r > 0.0 ? xs[i] / r : 1.0;
    const double st = r > 0.0 ? ps[i] / r : 0.0;

    double total = 0.0;
    double log_g0 = -0.5 * y;
    double ek_re = 1.0;
    double ek_im = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      if (k > 0) {
        if (y == 0.0) break;
        log_g0 += 0.5 * std::log(y / static_cast<double>(k));
        const double t = ek_re * ct - ek_im * st;
        ek_im = ek_re * st + ek_im * ct;
        ek_re = t;
      }
      const std::size_t len = dim - k;
      const std::size_t off = coeffs.offset[k];
      const double* cre = coeffs.re.data() + off;
      const double* cim = coeffs.im.data() + off;
      const double* low = coeffs.lower.data() + off;
      const double* inv = coeffs.inv_norm.data() + off;
      const double base = static_cast<double>(k) + 1.0 - y;

      double g_prev = 0.0;
      double g = std::exp(log_g0);
      double s_re = 0.0;
      double s_im = 0.0;
      for (std::size_t n = 0; n < len; ++n) {
        s_re += cre[n] * g;
        s_im += cim[n] * g;
        const double g_next =
            ((2.0 * static_cast<double>(n) + base) * g - low[n] * g_prev) * inv[n];
        g_prev = g;
        g = g_next;
      }
      total += k == 0 ? s_re : 2.0 * (ek_re * s_re - ek_im * s_im);
    }
    out[i] = total / std::numbers::pi;
  }
}

}  // namespace qwalk::kernels::scalar
