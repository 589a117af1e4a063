#include <atomic>
#include <cstdlib>
#include <string>

#include "hypernca/kernels.hpp"

namespace hypernca::kernels {

#if !defined(HYPERNCA_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !defined(HYPERNCA_HAVE_NEON)
const KernelTable* neon_table() { return nullptr; }
#endif

namespace {

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(HYPERNCA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(HYPERNCA_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Backend b) {
  if (!cpu_supports(b)) return nullptr;
  switch (b) {
    case Backend::Scalar:
      return &scalar_table();
    case Backend::Avx2:
      return avx2_table();
    case Backend::Neon:
      return neon_table();
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("HYPERNCA_KERNELS")) {
    const std::string want(env);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
      if (want == backend_name(b)) {
        if (const auto* t = table_for(b)) return t;
      }
    }
  }
  for (Backend b : {Backend::Avx2, Backend::Neon}) {
    if (const auto* t = table_for(b)) return t;
  }
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
    if (table_for(b)) out.push_back(b);
  }
  return out;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool set_backend(Backend b) {
  const KernelTable* t = table_for(b);
  if (!t) return false;
  current().store(t, std::memory_order_release);
  return true;
}

}  // namespace hypernca::kernels
