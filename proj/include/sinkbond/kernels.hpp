#pragma once

// Layer kernels for the backward passes. Each kernel has a scalar reference
// implementation and an AVX2 variant; the variant is chosen at runtime from
// the CPU features (override with SINKBOND_ISA=scalar). Both variants use the
// same operation order without contraction, so their results are bitwise
// identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace sinkbond::kernels {

/// Structure-of-arrays view of one lattice layer n < N. Branch probabilities
/// already carry the one-step survival factor.
struct LayerView {
  std::size_t size = 0;
  const std::int32_t* index[3] = {nullptr, nullptr, nullptr};
  const double* prob[3] = {nullptr, nullptr, nullptr};
  const double* survival = nullptr;
  const double* default_prob = nullptr;
};

/// Per-stage scalars of one candidate action, all per unit initial nominal.
struct StageTerms {
  double discount = 1.0;    // exp(-r(t_n) dt_{n+1})
  double redemption = 0.0;  // a
  double coupon = 0.0;      // C_{n+1} s
  double recovery = 0.0;    // R s
};

/// out[j] = d*((a + c) q_j + (1 - q_j) R s) + d * sum_k p_jk next[idx_jk]
/// with q_j the survival factor of node j.
void stage_candidates(const LayerView& layer, const double* next, const StageTerms& terms,
                      double* out);

/// Where cand[j] <= best[j], replace best[j] and set arg[j] = action. Calling
/// with actions in ascending order breaks ties towards the largest action.
void argmin_update(std::span<const double> cand, std::int32_t action, std::span<double> best,
                   std::span<std::int32_t> arg);

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
/// Selects the variant used by the dispatching entry points. Throws if the
/// CPU does not support it.
void set_isa(Isa isa);

namespace scalar {
void stage_candidates(const LayerView& layer, const double* next, const StageTerms& terms,
                      double* out);
void argmin_update(const double* cand, std::size_t n, std::int32_t action, double* best,
                   std::int32_t* arg);
}  // namespace scalar

#if defined(SINKBOND_HAVE_AVX2)
namespace avx2 {
void stage_candidates(const LayerView& layer, const double* next, const StageTerms& terms,
                      double* out);
void argmin_update(const double* cand, std::size_t n, std::int32_t action, double* best,
                   std::int32_t* arg);
}  // namespace avx2
#endif

}  // namespace sinkbond::kernels
