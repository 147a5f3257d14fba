#pragma once

// Data-parallel inner loops of the photocurrent synthesiser and the
// periodogram. Each kernel has a scalar reference and, on x86-64, an AVX2/FMA
// variant; the variant is chosen once at first use from CPUID.
//
// Elementwise kernels evaluate the same fused multiply-add chain in both
// variants and are bit-identical. Reductions (moments) differ only by
// summation order.
//
// Setting TNLI_KERNELS=scalar in the environment forces the reference path.

#include <cstddef>
#include <string_view>

namespace tnli::kernels {

struct Moments {
  double sum;
  double sum_sq;
};

struct KernelTable {
  std::string_view name;

  /// out[i] = offset + sum_j coeffs[j] * streams[j * stride + i], for i < n.
  /// Accumulation runs j = 0, 1, ... as a chain of fused multiply-adds.
  void (*mix_streams)(const double* coeffs, std::size_t n_streams, const double* streams,
                      std::size_t stride, double offset, double* out, std::size_t n);

  /// y[i] = fma(a, x[i], y[i]).
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  /// out[i] = w[i] * x[i].
  void (*multiply)(const double* w, const double* x, double* out, std::size_t n);

  /// acc[k] = fma(scale, fma(re, re, im * im), acc[k]) for interleaved (re, im) pairs.
  void (*accumulate_power)(const double* interleaved, double scale, double* acc, std::size_t n);

  /// Sum and sum of squares.
  Moments (*moments)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

/// The dispatched table.
const KernelTable& active();

}  // namespace tnli::kernels
