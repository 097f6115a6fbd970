#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ebshrink/kernels.hpp"
#include "kernels/tables.hpp"

namespace ebshrink::kernels {
namespace {

Isa initial_isa() {
  if (const char* env = std::getenv("EBSHRINK_ISA")) {
    const std::string name(env);
    if (name == "scalar") return Isa::Scalar;
    if (name == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return best_isa();
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(EBSHRINK_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa best_isa() { return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::runtime_error("instruction set not supported on this CPU: " +
                             std::string(isa_name(isa)));
  }
  selected().store(isa, std::memory_order_relaxed);
}

const KernelTable& table(Isa isa) {
#if defined(EBSHRINK_HAVE_AVX2)
  if (isa == Isa::Avx2) return avx2_table();
#endif
  return scalar_table();
}

const KernelTable& active() { return table(active_isa()); }

}  // namespace ebshrink::kernels
