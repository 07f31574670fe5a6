#include <atomic>
#include <cstdlib>
#include <string_view>

#include "adaphrase/kernels.hpp"

namespace adaphrase::kernels {

#if defined(ADAPHRASE_HAVE_AVX2)
const KernelTable* avx2_table_impl() noexcept;
const KernelTable* avx2_table() noexcept { return avx2_table_impl(); }
#else
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

bool cpu_supports(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(ADAPHRASE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("ADAPHRASE_KERNELS")) {
    if (std::string_view(env) == "scalar") return &scalar_table();
  }
  if (cpu_supports(Backend::Avx2)) return avx2_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

bool select(Backend backend) noexcept {
  if (!cpu_supports(backend)) return false;
  slot().store(backend == Backend::Avx2 ? avx2_table() : &scalar_table(),
               std::memory_order_release);
  return true;
}

std::string_view backend_name(Backend backend) noexcept {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

}  // namespace adaphrase::kernels
