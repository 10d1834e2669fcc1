#include "sinkbond/kernels.hpp"

namespace sinkbond::kernels::scalar {

void stage_candidates(const LayerView& layer, const double* next, const StageTerms& terms,
                      double* out) {
  const double paid = terms.redemption + terms.coupon;
  for (std::size_t j = 0; j < layer.size; ++j) {
    const double expected = layer.prob[0][j] * next[layer.index[0][j]] +
                            layer.prob[1][j] * next[layer.index[1][j]] +
                            layer.prob[2][j] * next[layer.index[2][j]];
    const double cost = paid * layer.survival[j] + layer.default_prob[j] * terms.recovery;
    out[j] = terms.discount * cost + terms.discount * expected;
  }
}

void argmin_update(const double* cand, std::size_t n, std::int32_t action, double* best,
                   std::int32_t* arg) {
  for (std::size_t j = 0; j < n; ++j) {
    if (cand[j] <= best[j]) {
      best[j] = cand[j];
      arg[j] = action;
    }
  }
}

}  // namespace sinkbond::kernels::scalar
