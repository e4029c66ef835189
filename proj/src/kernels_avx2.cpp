// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "qwalk/kernels.hpp"

namespace qwalk::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void cmatvec(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x,
             cplx* y) {
  const double* xd = reinterpret_cast<const double*>(x);
  // Sign mask that negates the odd (imaginary*imaginary) lanes.
  const __m256d odd_sign = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = reinterpret_cast<const double*>(a + r * cols);
    __m256d acc_re0 = _mm256_setzero_pd();
    __m256d acc_im0 = _mm256_setzero_pd();
    __m256d acc_re1 = _mm256_setzero_pd();
    __m256d acc_im1 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d a0 = _mm256_loadu_pd(row + 2 * c);
      const __m256d x0 = _mm256_loadu_pd(xd + 2 * c);
      const __m256d a1 = _mm256_loadu_pd(row + 2 * c + 4);
      const __m256d x1 = _mm256_loadu_pd(xd + 2 * c + 4);
      // [ar*xr, ai*xi, ...] and [ar*xi, ai*xr, ...]
      acc_re0 = _mm256_fmadd_pd(a0, x0, acc_re0);
      acc_im0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(x0, 0b0101), acc_im0);
      acc_re1 = _mm256_fmadd_pd(a1, x1, acc_re1);
      acc_im1 = _mm256_fmadd_pd(a1, _mm256_permute_pd(x1, 0b0101), acc_im1);
    }
    const __m256d acc_re = _mm256_xor_pd(_mm256_add_pd(acc_re0, acc_re1), odd_sign);
    double re = hsum(acc_re);
    double im = hsum(_mm256_add_pd(acc_im0, acc_im1));
    const cplx* rowc = a + r * cols;
    for (; c < cols; ++c) {
      re += rowc[c].real() * x[c].real() - rowc[c].imag() * x[c].imag();
      im += rowc[c].real() * x[c].imag() + rowc[c].imag() * x[c].real();
    }
    y[r] = {re, im};
  }
}

void hermite_functions(const double* xs, std::size_t count,
                       std::size_t n_levels, double* out) {
  if (n_levels == 0) return;
  const double norm0 = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    alignas(32) std::array<double, 4> g0{};
    for (int l = 0; l < 4; ++l) g0[l] = norm0 * std::exp(-0.5 * xs[i + l] * xs[i + l]);
    const __m256d x = _mm256_loadu_pd(xs + i);
    __m256d prev = _mm256_setzero_pd();
    __m256d cur = _mm256_load_pd(g0.data());
    _mm256_storeu_pd(out + i, cur);
    for (std::size_t n = 0; n + 1 < n_levels; ++n) {
      const double dn = static_cast<double>(n);
      const __m256d up = _mm256_set1_pd(std::sqrt(2.0 / (dn + 1.0)));
      const __m256d down = _mm256_set1_pd(std::sqrt(dn / (dn + 1.0)));
      const __m256d next =
          _mm256_fmsub_pd(_mm256_mul_pd(up, x), cur, _mm256_mul_pd(down, prev));
      prev = cur;
      cur = next;
      _mm256_storeu_pd(out + (n + 1) * count + i, cur);
    }
  }
  if (i < count) {
    // Tail columns go through the reference path into a scratch block.
    const std::size_t rest = count - i;
    std::array<double, 4> xt{};
    for (std::size_t l = 0; l < rest; ++l) xt[l] = xs[i + l];
    std::vector<double> tmp(n_levels * rest);
    scalar::hermite_functions(xt.data(), rest, n_levels, tmp.data());
    for (std::size_t n = 0; n < n_levels; ++n)
      for (std::size_t l = 0; l < rest; ++l) out[n * count + i + l] = tmp[n * rest + l];
  }
}

void wigner_points(const WignerCoefficients& coeffs, const double* xs,
                   const double* ps, std::size_t count, double* out) {
  const std::size_t dim = coeffs.dim;
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    alignas(32) std::array<double, 4> yv{};
    alignas(32) std::array<double, 4> g0{};
    std::array<double, 4> log_g0{};
    std::array<double, 4> ct{};
    std::array<double, 4> st{};
    std::array<double, 4> ek_re{1.0, 1.0, 1.0, 1.0};
    std::array<double, 4> ek_im{};
    std::array<double, 4> total{};
    for (int l = 0; l < 4; ++l) {
      const double r2 = xs[i + l] * xs[i + l] + ps[i + l] * ps[i + l];
      const double r = std::sqrt(r2);
      yv[l] = 2.0 * r2;
      log_g0[l] = -0.5 * yv[l];
      ct[l] = r > 0.0 ? xs[i + l] / r : 1.0;
      st[l] = r > 0.0 ? ps[i + l] / r : 0.0;
    }
    const __m256d y = _mm256_load_pd(yv.data());
    for (std::size_t k = 0; k < dim; ++k) {
      for (int l = 0; l < 4; ++l) {
        if (k > 0) {
          if (yv[l] == 0.0) {
            g0[l] = 0.0;
            continue;
          }
          log_g0[l] += 0.5 * std::log(yv[l] / static_cast<double>(k));
          const double t = ek_re[l] * ct[l] - ek_im[l] * st[l];
          ek_im[l] = ek_re[l] * st[l] + ek_im[l] * ct[l];
          ek_re[l] = t;
        }
        g0[l] = std::exp(log_g0[l]);
      }
      const std::size_t len = dim - k;
      const std::size_t off = coeffs.offset[k];
      const double* cre = coeffs.re.data() + off;
      const double* cim = coeffs.im.data() + off;
      const double* low = coeffs.lower.data() + off;
      const double* inv = coeffs.inv_norm.data() + off;
      const __m256d base = _mm256_sub_pd(_mm256_set1_pd(static_cast<double>(k) + 1.0), y);

      __m256d g_prev = _mm256_setzero_pd();
      __m256d g = _mm256_load_pd(g0.data());
      __m256d s_re = _mm256_setzero_pd();
      __m256d s_im = _mm256_setzero_pd();
      for (std::size_t n = 0; n < len; ++n) {
        s_re = _mm256_fmadd_pd(_mm256_set1_pd(cre[n]), g, s_re);
        s_im = _mm256_fmadd_pd(_mm256_set1_pd(cim[n]), g, s_im);
        const __m256d lin = _mm256_add_pd(_mm256_set1_pd(2.0 * static_cast<double>(n)), base);
        const __m256d g_next = _mm256_mul_pd(
            _mm256_fmsub_pd(lin, g, _mm256_mul_pd(_mm256_set1_pd(low[n]), g_prev)),
            _mm256_set1_pd(inv[n]));
        g_prev = g;
        g = g_next;
      }
      alignas(32) std::array<double, 4> sr{};
      alignas(32) std::array<double, 4> si{};
      _mm256_store_pd(sr.data(), s_re);
      _mm256_store_pd(si.data(), s_im);
      for (int l = 0; l < 4; ++l)
        total[l] += k == 0 ? sr[l] : 2.0 * (ek_re[l] * sr[l] - ek_im[l] * si[l]);
    }
    for (int l = 0; l < 4; ++l) out[i + l] = total[l] / std::numbers::pi;
  }
  if (i < count) scalar::wigner_points(coeffs, xs + i, ps + i, count - i, out + i);
}

}  // namespace qwalk::kernels::avx2

#endif
