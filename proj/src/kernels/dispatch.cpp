#include "ilpcm/errors.hpp"
#include "ilpcm/kernels.hpp"

#include <string>

namespace ilpcm::kernels {

#if defined(ILPCM_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

const KernelTable* avx2() {
#if defined(ILPCM_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& best() {
  if (const KernelTable* t = avx2()) return *t;
  return scalar();
}

const KernelTable& select(std::string_view name) {
  if (name.empty() || name == "auto") return best();
  if (name == "scalar") return scalar();
  if (name == "avx2") {
    if (const KernelTable* t = avx2()) return *t;
    throw UsageError("kernel 'avx2' is not available on this CPU/build");
  }
  throw UsageError("unknown kernel '" + std::string(name) + "' (expected auto, scalar or avx2)");
}

std::vector<std::string_view> available() {
  std::vector<std::string_view> names{"scalar"};
  if (avx2() != nullptr) names.emplace_back("avx2");
  return names;
}

}  // namespace ilpcm::kernels
