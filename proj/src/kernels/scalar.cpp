#include <cmath>

#include "adaphrase/kernels.hpp"

namespace adaphrase::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void blend_scalar(double alpha, const double* c, const double* nvec, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = nvec[i] + alpha * (c[i] - nvec[i]);
}

void gemv_scalar(const double* m, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(m + r * cols, x, cols);
}

void gemv_t_acc_scalar(const double* m, const double* x, double scale, double* y,
                       std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(scale * x[r], m + r * cols, y, cols);
}

void ger_scalar(double* m, double scale, const double* x, const double* y, std::size_t rows,
                std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(scale * x[r], y, m + r * cols, cols);
}

void adagrad_scalar(double* param, double* acc, const double* grad, std::size_t n, double count,
                    double lr, double l2) {
  for (std::size_t i = 0; i < n; ++i) {
    double g = grad[i] / count;
    if (l2 != 0.0) g += l2 * param[i];
    if (g == 0.0) continue;
    acc[i] += g * g;
    param[i] -= lr * g / std::sqrt(acc[i]);
  }
}

constexpr KernelTable kScalar{
    Backend::Scalar, "scalar",     dot_scalar,        axpy_scalar, hadamard_scalar,
    blend_scalar,    gemv_scalar,  gemv_t_acc_scalar, ger_scalar,  adagrad_scalar,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace adaphrase::kernels
