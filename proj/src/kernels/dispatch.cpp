#include <cstdlib>
#include <string>
#include <string_view>

#include "stdgr/error.hpp"
#include "stdgr/kernels.hpp"

namespace stdgr::kernels {

#if defined(STDGR_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(STDGR_HAVE_NEON)
const KernelTable& neon_table();
#endif

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(STDGR_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(STDGR_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) {
    throw UsageError("kernel set '" + std::string(name(isa)) + "' is not available on this CPU");
  }
  switch (isa) {
#if defined(STDGR_HAVE_AVX2)
    case Isa::avx2:
      return avx2_table();
#endif
#if defined(STDGR_HAVE_NEON)
    case Isa::neon:
      return neon_table();
#endif
    default:
      return scalar_table();
  }
}

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("STDGR_KERNELS")) {
    const std::string_view want(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == name(isa) && available(isa)) return table(isa);
    }
  }
  if (available(Isa::avx2)) return table(Isa::avx2);
  if (available(Isa::neon)) return table(Isa::neon);
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace stdgr::kernels
