#include <cmath>

#include "kernels_impl.hpp"

namespace tnli::kernels::detail {
namespace {

void mix_streams(const double* coeffs, std::size_t n_streams, const double* streams,
                 std::size_t stride, double offset, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = offset;
    for (std::size_t j = 0; j < n_streams; ++j) acc = std::fma(coeffs[j], streams[j * stride + i], acc);
    out[i] = acc;
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void multiply(const double* w, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = w[i] * x[i];
}

void accumulate_power(const double* interleaved, double scale, double* acc, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double re = interleaved[2 * k];
    const double im = interleaved[2 * k + 1];
    acc[k] = std::fma(scale, std::fma(re, re, im * im), acc[k]);
  }
}

Moments moments(const double* x, std::size_t n) {
  double s = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += x[i];
    s2 += x[i] * x[i];
  }
  return {s, s2};
}

}  // namespace

const KernelTable kScalarTable{"scalar", mix_streams, axpy, multiply, accumulate_power, moments};

}  // namespace tnli::kernels::detail
