#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sinkbond/instruments.hpp"
#include "sinkbond/intensity_tree.hpp"
#include "sinkbond/market_data.hpp"
#include "sinkbond/mdp.hpp"

namespace sinkbond {

/// Defaultable zero-coupon bond by the one-step recursion
///   ZCB_n = exp(-r_n dt) ((1 - q) R + q E[ZCB_{n+1}]),  ZCB_N = 1.
double price_zcb(const IntensityTree& tree, const DiscountCurve& curve, double recovery);

/// Bullet bond paying coupons[n] = C_{n+1} at t_{n+1} and the principal at
/// maturity, recovery R on the full nominal, in a single backward pass.
double price_vanilla_bond(const IntensityTree& tree, const DiscountCurve& curve,
                          std::span<const double> coupons, double recovery);

/// The stage problems of a sinking bond on the given tree. The tree must be
/// built on a grid containing every coupon and redemption date.
MdpProblem sinking_bond_problem(const IntensityTree& tree, const DiscountCurve& curve,
                                const SinkingBondSpec& spec,
                                std::optional<double> recovery_override = std::nullopt);

struct SinkingBondPrice {
  double price = 0.0;
  MdpSolution solution;
};

SinkingBondPrice price_sinking_bond(const IntensityTree& tree, const DiscountCurve& curve,
                                    const SinkingBondSpec& spec);

/// Value of a fixed (node-independent) redemption schedule.
double price_fixed_schedule(const IntensityTree& tree, const DiscountCurve& curve,
                            const SinkingBondSpec& spec, const RedemptionSchedule& schedule);

/// Optimal price with deterministic intensity `spread` and zero recovery.
double deterministic_price(const SinkingBondSpec& spec, const DiscountCurve& curve,
                           const TimeGrid& grid, double spread);

struct ZSpreadOptions {
  double lower = -0.05;
  double upper = 5.0;
  double tolerance = 1e-10;
};

/// Constant spread reproducing `market_price` under deterministic_price(),
/// found by bisection. Throws NumericalError when the price is not
/// attainable on the bracket.
double z_spread(const SinkingBondSpec& spec, const DiscountCurve& curve, const TimeGrid& grid,
                double market_price, const ZSpreadOptions& options = {});

/// Minimum over call dates (and maturity) of the deterministic PV of the
/// cashflows up to that date, discounted at r + spread.
double worst_ansatz(const SinkingBondSpec& spec, const DiscountCurve& curve, const TimeGrid& grid,
                    double spread);

struct RedemptionSummary {
  double time = 0.0;
  double survival = 0.0;  // P(no default before the decision)
  std::vector<std::pair<double, double>> actions;  // (fraction of initial nominal, probability)
  double expected_fraction = 0.0;                  // conditional on survival
};

/// Distribution of the optimal decisions at each redemption date under the
/// optimal policy, from a forward pass over the pre-default states.
std::vector<RedemptionSummary> summarize_policy(const IntensityTree& tree,
                                                const SinkingBondSpec& spec,
                                                const MdpSolution& solution);

}  // namespace sinkbond
