#include "sinkbond/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "sinkbond/error.hpp"
#include "sinkbond/kernels.hpp"

namespace sinkbond {

namespace {

void check_recovery(double recovery) {
  if (!(recovery >= 0.0 && recovery <= 1.0)) throw ValidationError("recovery must lie in [0,1]");
}

// Backward pass V_n = d ((a_n + c_n) q + (1 - q) R) + d E[V_{n+1}] from V_N.
double bullet_pass(const IntensityTree& tree, const DiscountCurve& curve, double terminal,
                   std::span<const double> coupons, double principal, double recovery) {
  const PackedTree packed(tree);
  const GridDiscounting disc(curve, tree.grid);
  const std::size_t N = tree.steps();
  std::vector<double> next(packed.layer_size(N), terminal);
  std::vector<double> current;
  for (std::size_t n = N; n-- > 0;) {
    current.resize(packed.layer_size(n));
    const kernels::StageTerms terms{disc.step(n), n + 1 == N ? principal : 0.0,
                                    coupons.empty() ? 0.0 : coupons[n], recovery};
    kernels::stage_candidates(packed.view(n), next.data(), terms, current.data());
    next.swap(current);
  }
  return next.at(0);
}

}  // namespace

double price_zcb(const IntensityTree& tree, const DiscountCurve& curve, double recovery) {
  check_recovery(recovery);
  return bullet_pass(tree, curve, 1.0, {}, 0.0, recovery);
}

double price_vanilla_bond(const IntensityTree& tree, const DiscountCurve& curve,
                          std::span<const double> coupons, double recovery) {
  check_recovery(recovery);
  if (coupons.size() != tree.steps()) {
    throw ValidationError("vanilla bond needs one coupon entry per step");
  }
  return bullet_pass(tree, curve, 0.0, coupons, 1.0, recovery);
}

MdpProblem sinking_bond_problem(const IntensityTree& tree, const DiscountCurve& curve,
                                const SinkingBondSpec& spec,
                                std::optional<double> recovery_override) {
  spec.validate();
  if (std::abs(tree.grid.maturity() - spec.maturity) > kDateTolerance) {
    throw ValidationError("tree horizon does not match the bond maturity");
  }
  const auto stages = redemption_stages(spec, tree.grid);
  const auto installments = spec.installment_units();
  const std::size_t N = tree.steps();
  const bool callable = spec.callable;
  const bool skip = spec.allow_skip;

  ActionSource actions = [stages, installments, N, callable, skip](std::size_t n, int s,
                                                                   std::vector<int>& out) {
    out.clear();
    if (n + 1 == N) {
      out.push_back(s);
    } else if (!stages[n]) {
      out.push_back(0);
    } else if (callable) {
      out.push_back(0);
      if (s > 0) out.push_back(s);
    } else {
      if (skip) out.push_back(0);
      for (int u : installments) {
        if (u <= s) out.push_back(u);
      }
      if (out.empty()) out.push_back(s);
    }
  };
  return make_problem(tree, curve, coupons_on_grid(spec, tree.grid),
                      recovery_override.value_or(spec.recovery), spec.units(), std::move(actions));
}

SinkingBondPrice price_sinking_bond(const IntensityTree& tree, const DiscountCurve& curve,
                                    const SinkingBondSpec& spec) {
  const MdpProblem problem = sinking_bond_problem(tree, curve, spec);
  MdpSolution solution = backward_induction(problem);
  const double price = solution.price();
  return {price, std::move(solution)};
}

double price_fixed_schedule(const IntensityTree& tree, const DiscountCurve& curve,
                            const SinkingBondSpec& spec, const RedemptionSchedule& schedule) {
  const MdpProblem problem = sinking_bond_problem(tree, curve, spec);
  const ScheduleRule rule(spec, tree.grid, schedule);
  return evaluate_policy(problem, [&rule](std::size_t n, int s, std::size_t) {
           return rule(n, s);
         }).price();
}

double deterministic_price(const SinkingBondSpec& spec, const DiscountCurve& curve,
                           const TimeGrid& grid, double spread) {
  const double lambda[] = {spread};
  const IntensityTree chain = augment_default(build_deterministic(grid, lambda));
  const MdpProblem problem = sinking_bond_problem(chain, curve, spec, 0.0);
  return backward_induction(problem).price();
}

double z_spread(const SinkingBondSpec& spec, const DiscountCurve& curve, const TimeGrid& grid,
                double market_price, const ZSpreadOptions& options) {
  if (!std::isfinite(market_price)) throw ValidationError("market price must be finite");
  double lo = options.lower;
  double hi = options.upper;
  const double f_lo = deterministic_price(spec, curve, grid, lo) - market_price;
  const double f_hi = deterministic_price(spec, curve, grid, hi) - market_price;
  if (f_lo < 0.0 || f_hi > 0.0) {
    throw NumericalError("unattainable price " + std::to_string(market_price) +
                         ": no sign change of the pricing error on the spread bracket");
  }
  while (hi - lo > options.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (deterministic_price(spec, curve, grid, mid) - market_price > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double worst_ansatz(const SinkingBondSpec& spec, const DiscountCurve& curve, const TimeGrid& grid,
                    double spread) {
  spec.validate();
  const GridDiscounting disc(curve, grid);
  const auto coupons = coupons_on_grid(spec, grid);
  const std::size_t N = grid.steps();

  std::vector<std::size_t> exits;
  for (double d : spec.redemption_dates) exits.push_back(grid.index_of(d));
  exits.push_back(N);

  // pv_coupons[m] = sum_{i<=m} C_i D(i), D(i) = exp(-sum_{j<i} (r_j + z) dt_{j+1}).
  double exponent = 0.0;
  double coupon_pv = 0.0;
  std::vector<double> coupon_pv_at(N + 1, 0.0);
  std::vector<double> discount_at(N + 1, 1.0);
  for (std::size_t i = 1; i <= N; ++i) {
    exponent += (disc.rate(i - 1) + spread) * grid.dt(i);
    discount_at[i] = std::exp(-exponent);
    coupon_pv += coupons[i - 1] * discount_at[i];
    coupon_pv_at[i] = coupon_pv;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t m : exits) worst = std::min(worst, coupon_pv_at[m] + discount_at[m]);
  return worst;
}

std::vector<RedemptionSummary> summarize_policy(const IntensityTree& tree,
                                                const SinkingBondSpec& spec,
                                                const MdpSolution& solution) {
  const std::size_t N = tree.steps();
  const int K = spec.units();
  const auto stages = redemption_stages(spec, tree.grid);
  const double to_initial = spec.alpha / 100.0 / K;

  // mass[s][node] over pre-default states of the current stage.
  std::map<int, std::vector<double>> mass;
  mass[K] = {1.0};
  std::vector<RedemptionSummary> out;
  for (std::size_t n = 0; n < N; ++n) {
    std::map<int, std::vector<double>> next;
    std::map<int, double> decided;
    double alive = 0.0;
    for (const auto& [s, row] : mass) {
      const auto& nodes = tree.layers[n].nodes;
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == 0.0) continue;
        const int a = solution.action(n, s, j);
        alive += row[j];
        decided[a] += row[j];
        auto& dest = next[s - a];
        dest.resize(tree.layers[n + 1].nodes.size(), 0.0);
        for (const Branch& b : nodes[j].successors) dest[b.index] += row[j] * b.prob;
      }
    }
    if (stages[n] && n + 1 < N) {
      RedemptionSummary entry;
      entry.time = tree.grid.time(n + 1);
      entry.survival = alive;
      for (const auto& [a, p] : decided) {
        const double prob = alive > 0.0 ? p / alive : 0.0;
        entry.actions.emplace_back(a * to_initial, prob);
        entry.expected_fraction += a * to_initial * prob;
      }
      out.push_back(std::move(entry));
    }
    mass.swap(next);
  }
  return out;
}

}  // namespace sinkbond
