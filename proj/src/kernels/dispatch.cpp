#include <atomic>
#include <cstdlib>
#include <string>

#include "sinkbond/error.hpp"
#include "sinkbond/kernels.hpp"

namespace sinkbond::kernels {

namespace {

Isa detect() {
  if (const char* forced = std::getenv("SINKBOND_ISA")) {
    if (std::string(forced) == "scalar") return Isa::scalar;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(SINKBOND_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ValidationError("instruction set " + std::string(isa_name(isa)) + " not supported");
  }
  current().store(isa, std::memory_order_relaxed);
}

void stage_candidates(const LayerView& layer, const double* next, const StageTerms& terms,
                      double* out) {
#if defined(SINKBOND_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::stage_candidates(layer, next, terms, out);
#endif
  scalar::stage_candidates(layer, next, terms, out);
}

void argmin_update(std::span<const double> cand, std::int32_t action, std::span<double> best,
                   std::span<std::int32_t> arg) {
  if (best.size() != cand.size() || arg.size() != cand.size()) {
    throw ValidationError("argmin_update: mismatched span sizes");
  }
#if defined(SINKBOND_HAVE_AVX2)
  if (active_isa() == Isa::avx2) {
    return avx2::argmin_update(cand.data(), cand.size(), action, best.data(), arg.data());
  }
#endif
  scalar::argmin_update(cand.data(), cand.size(), action, best.data(), arg.data());
}

}  // namespace sinkbond::kernels
