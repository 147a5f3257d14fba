// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace tnli::kernels::detail {
namespace {

void mix_streams(const double* coeffs, std::size_t n_streams, const double* streams,
                 std::size_t stride, double offset, double* out, std::size_t n) {
  std::size_t i = 0;
  const __m256d voff = _mm256_set1_pd(offset);
  for (; i + 4 <= n; i += 4) {
    __m256d acc = voff;
    for (std::size_t j = 0; j < n_streams; ++j) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(coeffs[j]), _mm256_loadu_pd(streams + j * stride + i), acc);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double acc = offset;
    for (std::size_t j = 0; j < n_streams; ++j) acc = std::fma(coeffs[j], streams[j * stride + i], acc);
    out[i] = acc;
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  const __m256d va = _mm256_set1_pd(a);
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void multiply(const double* w, const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = w[i] * x[i];
}

void accumulate_power(const double* interleaved, double scale, double* acc, std::size_t n) {
  std::size_t k = 0;
  const __m256d vs = _mm256_set1_pd(scale);
  for (; k + 4 <= n; k += 4) {
    // Two loads of (re0 im0 re1 im1), (re2 im2 re3 im3) -> de-interleave.
    const __m256d a = _mm256_loadu_pd(interleaved + 2 * k);
    const __m256d b = _mm256_loadu_pd(interleaved + 2 * k + 4);
    const __m256d lo = _mm256_permute2f128_pd(a, b, 0x20);  // re0 im0 re2 im2
    const __m256d hi = _mm256_permute2f128_pd(a, b, 0x31);  // re1 im1 re3 im3
    const __m256d re = _mm256_unpacklo_pd(lo, hi);          // re0 re1 re2 re3
    const __m256d im = _mm256_unpackhi_pd(lo, hi);          // im0 im1 im2 im3
    const __m256d p = _mm256_fmadd_pd(re, re, _mm256_mul_pd(im, im));
    _mm256_storeu_pd(acc + k, _mm256_fmadd_pd(vs, p, _mm256_loadu_pd(acc + k)));
  }
  for (; k < n; ++k) {
    const double re = interleaved[2 * k];
    const double im = interleaved[2 * k + 1];
    acc[k] = std::fma(scale, std::fma(re, re, im * im), acc[k]);
  }
}

Moments moments(const double* x, std::size_t n) {
  __m256d s = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    s = _mm256_add_pd(s, v);
    s2 = _mm256_fmadd_pd(v, v, s2);
  }
  alignas(32) double ls[4];
  alignas(32) double ls2[4];
  _mm256_store_pd(ls, s);
  _mm256_store_pd(ls2, s2);
  double sum = (ls[0] + ls[1]) + (ls[2] + ls[3]);
  double sum_sq = (ls2[0] + ls2[1]) + (ls2[2] + ls2[3]);
  for (; i < n; ++i) {
    sum += x[i];
    sum_sq += x[i] * x[i];
  }
  return {sum, sum_sq};
}

}  // namespace

const KernelTable kAvx2Table{"avx2", mix_streams, axpy, multiply, accumulate_power, moments};

}  // namespace tnli::kernels::detail
