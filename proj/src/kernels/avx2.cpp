// AVX2 kernel variants. This translation unit is compiled with -mavx2 -mfma;
// nothing here may run before cpu_supports(Backend::Avx2) has been checked.
//
// Elementwise kernels use separate multiply and add (no FMA) so their results
// match the scalar reference bit for bit.

#include <immintrin.h>

#include <cmath>

#include "adaphrase/kernels.hpp"

namespace adaphrase::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void hadamard_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void blend_avx2(double alpha, const double* c, const double* nvec, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d nv = _mm256_loadu_pd(nvec + i);
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(c + i), nv);
    _mm256_storeu_pd(out + i, _mm256_add_pd(nv, _mm256_mul_pd(va, diff)));
  }
  for (; i < n; ++i) out[i] = nvec[i] + alpha * (c[i] - nvec[i]);
}

void gemv_avx2(const double* m, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(m + r * cols, x, cols);
}

void gemv_t_acc_avx2(const double* m, const double* x, double scale, double* y, std::size_t rows,
                     std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_avx2(scale * x[r], m + r * cols, y, cols);
}

void ger_avx2(double* m, double scale, const double* x, const double* y, std::size_t rows,
              std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_avx2(scale * x[r], y, m + r * cols, cols);
}

void adagrad_avx2(double* param, double* acc, const double* grad, std::size_t n, double count,
                  double lr, double l2) {
  const __m256d vcount = _mm256_set1_pd(count);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d vl2 = _mm256_set1_pd(l2);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_loadu_pd(param + i);
    const __m256d a = _mm256_loadu_pd(acc + i);
    __m256d g = _mm256_div_pd(_mm256_loadu_pd(grad + i), vcount);
    if (l2 != 0.0) g = _mm256_add_pd(g, _mm256_mul_pd(vl2, p));
    // unordered compare so NaN gradients propagate like the scalar path
    const __m256d live = _mm256_cmp_pd(g, zero, _CMP_NEQ_UQ);
    if (_mm256_movemask_pd(live) == 0) continue;
    const __m256d a_new = _mm256_add_pd(a, _mm256_mul_pd(g, g));
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, g), _mm256_sqrt_pd(a_new));
    _mm256_storeu_pd(acc + i, _mm256_blendv_pd(a, a_new, live));
    _mm256_storeu_pd(param + i, _mm256_blendv_pd(p, _mm256_sub_pd(p, step), live));
  }
  for (; i < n; ++i) {
    double g = grad[i] / count;
    if (l2 != 0.0) g += l2 * param[i];
    if (g == 0.0) continue;
    acc[i] += g * g;
    param[i] -= lr * g / std::sqrt(acc[i]);
  }
}

constexpr KernelTable kAvx2{
    Backend::Avx2, "avx2",    dot_avx2,        axpy_avx2, hadamard_avx2,
    blend_avx2,    gemv_avx2, gemv_t_acc_avx2, ger_avx2,  adagrad_avx2,
};

}  // namespace

const KernelTable* avx2_table_impl() noexcept { return &kAvx2; }

}  // namespace adaphrase::kernels
