// Compiled with -mavx2 -ffp-contract=off. Only reached after a runtime
// CPU check.

#include <immintrin.h>

#include "sinkbond/kernels.hpp"

namespace sinkbond::kernels::avx2 {

namespace {

inline __m256d gather(const double* base, const std::int32_t* idx) {
  const __m128i vidx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx));
  return _mm256_i32gather_pd(base, vidx, 8);
}

}  // namespace

void stage_candidates(const LayerView& layer, const double* next, const StageTerms& terms,
                      double* out) {
  const __m256d paid = _mm256_set1_pd(terms.redemption + terms.coupon);
  const __m256d recovery = _mm256_set1_pd(terms.recovery);
  const __m256d discount = _mm256_set1_pd(terms.discount);

  std::size_t j = 0;
  for (; j + 4 <= layer.size; j += 4) {
    const __m256d v0 = gather(next, layer.index[0] + j);
    const __m256d v1 = gather(next, layer.index[1] + j);
    const __m256d v2 = gather(next, layer.index[2] + j);
    const __m256d p0 = _mm256_loadu_pd(layer.prob[0] + j);
    const __m256d p1 = _mm256_loadu_pd(layer.prob[1] + j);
    const __m256d p2 = _mm256_loadu_pd(layer.prob[2] + j);

    __m256d expected = _mm256_add_pd(_mm256_mul_pd(p0, v0), _mm256_mul_pd(p1, v1));
    expected = _mm256_add_pd(expected, _mm256_mul_pd(p2, v2));

    const __m256d q = _mm256_loadu_pd(layer.survival + j);
    const __m256d d = _mm256_loadu_pd(layer.default_prob + j);
    const __m256d cost = _mm256_add_pd(_mm256_mul_pd(paid, q), _mm256_mul_pd(d, recovery));

    const __m256d value =
        _mm256_add_pd(_mm256_mul_pd(discount, cost), _mm256_mul_pd(discount, expected));
    _mm256_storeu_pd(out + j, value);
  }

  if (j < layer.size) {
    LayerView tail = layer;
    tail.size = layer.size - j;
    for (int k = 0; k < 3; ++k) {
      tail.index[k] = layer.index[k] + j;
      tail.prob[k] = layer.prob[k] + j;
    }
    tail.survival = layer.survival + j;
    tail.default_prob = layer.default_prob + j;
    scalar::stage_candidates(tail, next, terms, out + j);
  }
}

void argmin_update(const double* cand, std::size_t n, std::int32_t action, double* best,
                   std::int32_t* arg) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d c = _mm256_loadu_pd(cand + j);
    const __m256d b = _mm256_loadu_pd(best + j);
    const __m256d take = _mm256_cmp_pd(c, b, _CMP_LE_OQ);
    const int mask = _mm256_movemask_pd(take);
    if (mask == 0) continue;
    _mm256_storeu_pd(best + j, _mm256_blendv_pd(b, c, take));
    for (int lane = 0; lane < 4; ++lane) {
      if (mask & (1 << lane)) arg[j + lane] = action;
    }
  }
  scalar::argmin_update(cand + j, n - j, action, best + j, arg + j);
}

}  // namespace sinkbond::kernels::avx2
