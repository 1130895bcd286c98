#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernels/kernels.hpp"

namespace fastwave {
namespace {

bool cpu_has_avx2() {
#if defined(FASTWAVE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

KernelBackend initial_backend() {
  if (const char* env = std::getenv("FASTWAVE_KERNELS"); env && std::string_view(env) == "scalar") {
    return KernelBackend::kScalar;
  }
  return cpu_has_avx2() ? KernelBackend::kAvx2 : KernelBackend::kScalar;
}

std::atomic<KernelBackend>& backend_slot() {
  static std::atomic<KernelBackend> slot{initial_backend()};
  return slot;
}

constexpr kernels::KernelTable kScalarTable{kernels::matvec_f32_scalar, kernels::matvec_fx_scalar};
#if defined(FASTWAVE_HAVE_AVX2)
constexpr kernels::KernelTable kAvx2Table{kernels::matvec_f32_avx2, kernels::matvec_fx_avx2};
#endif

}  // namespace

const char* backend_name(KernelBackend b) {
  switch (b) {
    case KernelBackend::kScalar: return "scalar";
    case KernelBackend::kAvx2: return "avx2";
  }
  return "unknown";
}

bool backend_available(KernelBackend b) {
  return b == KernelBackend::kScalar || (b == KernelBackend::kAvx2 && cpu_has_avx2());
}

KernelBackend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(KernelBackend b) {
  if (!backend_available(b)) {
    fail(ErrorCode::kInvalidArgument, std::string("kernel backend '") + backend_name(b) +
                                          "' is not available on this machine");
  }
  backend_slot().store(b, std::memory_order_relaxed);
}

namespace kernels {

const KernelTable& active_table() {
#if defined(FASTWAVE_HAVE_AVX2)
  if (active_backend() == KernelBackend::kAvx2) return kAvx2Table;
#endif
  return kScalarTable;
}

}  // namespace kernels
}  // namespace fastwave
