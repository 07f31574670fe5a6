#pragma once

// Dense double-precision kernels used by the forward and backward passes.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2 variant selected at startup when the CPU supports it. Elementwise
// kernels (axpy, hadamard, blend, ger, gemv_t_acc, adagrad) produce results
// bit-identical to the scalar reference. Reductions (dot, gemv) use four
// accumulator lanes and may differ from the scalar result in the last bits.
//
// Setting ADAPHRASE_KERNELS=scalar in the environment forces the reference
// backend.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace adaphrase::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out = a .* b
  void (*hadamard)(const double* a, const double* b, double* out, std::size_t n);
  // out = n + alpha * (c - n)
  void (*blend)(double alpha, const double* c, const double* nvec, double* out, std::size_t n);
  // y = M x, M row-major rows x cols
  void (*gemv)(const double* m, const double* x, double* y, std::size_t rows, std::size_t cols);
  // y += scale * M^T x
  void (*gemv_t_acc)(const double* m, const double* x, double scale, double* y,
                     std::size_t rows, std::size_t cols);
  // M += scale * x y^T
  void (*ger)(double* m, double scale, const double* x, const double* y, std::size_t rows,
              std::size_t cols);
  // For each i with g = grad[i] / count + l2 * param[i] != 0:
  //   acc[i] += g*g;  param[i] -= lr * g / sqrt(acc[i])
  void (*adagrad)(double* param, double* acc, const double* grad, std::size_t n, double count,
                  double lr, double l2);
};

const KernelTable& scalar_table() noexcept;
// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_table() noexcept;

bool cpu_supports(Backend backend) noexcept;

// The table used by the library. Chosen once on first use.
const KernelTable& active() noexcept;

// Switches the active table. Returns false (and leaves the selection alone)
// when the backend is unavailable on this machine.
bool select(Backend backend) noexcept;

std::string_view backend_name(Backend backend) noexcept;

// Span wrappers over the active table.

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(a, x.data(), y.data(), x.size());
}

inline void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active().hadamard(a.data(), b.data(), out.data(), a.size());
}

inline void gemv(std::span<const double> m, std::span<const double> x, std::span<double> y) {
  assert(m.size() == x.size() * y.size());
  active().gemv(m.data(), x.data(), y.data(), y.size(), x.size());
}

inline void gemv_t_acc(std::span<const double> m, std::span<const double> x, double scale,
                       std::span<double> y) {
  assert(m.size() == x.size() * y.size());
  active().gemv_t_acc(m.data(), x.data(), scale, y.data(), x.size(), y.size());
}

inline void ger(std::span<double> m, double scale, std::span<const double> x,
                std::span<const double> y) {
  assert(m.size() == x.size() * y.size());
  active().ger(m.data(), scale, x.data(), y.data(), x.size(), y.size());
}

}  // namespace adaphrase::kernels
