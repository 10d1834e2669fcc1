#include <doctest.h>

#include <cmath>
#include <cstring>

#include "sinkbond/error.hpp"
#include "sinkbond/intensity_tree.hpp"
#include "sinkbond/mc_oracle.hpp"

using namespace sinkbond;

namespace {

const JdcevParams kFitted{0.004, 2.8199, -0.6, 30.0};

SinkingBondSpec sinking() {
  SinkingBondSpec b;
  b.maturity = 4.0;
  b.coupon_rate = 0.06;
  b.coupon_frequency = 2;
  b.redemption_dates = {2.0, 3.0};
  b.admissible_fractions = {0.25, 0.5};
  b.recovery = 0.4;
  return b;
}

}  // namespace

TEST_CASE("deterministic intensity survival") {
  const JdcevParams p{0.05, 0.0, -0.6, 30.0};
  const TimeGrid g = build_time_grid(5.0, 12);
  const std::size_t paths = 40000;
  const PathSet set = simulate_paths(p, g, paths, 99);
  std::size_t survived = 0;
  for (auto step : set.default_step) survived += step < 0 ? 1 : 0;
  TreeOptions o;
  o.degenerate = true;
  JdcevParams tree_params = p;
  tree_params.sigma = 1.0;  // unused by the degenerate chain
  const double q = survival_curve(build_default_tree(tree_params, g, o)).back();
  const double frac = static_cast<double>(survived) / paths;
  const double se = std::sqrt(q * (1.0 - q) / paths);
  CHECK(std::abs(frac - q) <= 3.0 * se);
}

TEST_CASE("no intensity, no defaults") {
  const JdcevParams p{0.0, 2.0, -0.6, 30.0};
  const PathSet set = simulate_paths(p, build_time_grid(3.0, 12), 5000, 1);
  for (auto step : set.default_step) CHECK(step == -1);
}

TEST_CASE("substreams depend on the path index only") {
  const TimeGrid g = build_time_grid(3.0, 12);
  SimulationOptions o;
  o.keep_intensities = true;
  const PathSet small = simulate_paths(kFitted, g, 100, 5, o);
  o.threads = 3;
  const PathSet large = simulate_paths(kFitted, g, 250, 5, o);
  const std::size_t width = g.steps() + 1;
  CHECK(std::memcmp(small.default_step.data(), large.default_step.data(), 100 * sizeof(std::int32_t)) == 0);
  CHECK(std::memcmp(small.intensities.data(), large.intensities.data(), 100 * width * sizeof(double)) == 0);
  CHECK(small.intensity(0, 0) == doctest::Approx(0.004));
}

TEST_CASE("riskless paths price the deterministic cashflows exactly") {
  const SinkingBondSpec b = sinking();
  const TimeGrid g = grid_for(b, 12);
  const auto curve = DiscountCurve::flat(0.03);
  const JdcevParams p{0.0, 0.0, -0.6, 30.0};
  const PathSet set = simulate_paths(p, g, 1000, 2);
  const McEstimate est = mc_price_fixed_policy(set, b, forced_max_schedule(b), curve);
  // Coupons 3% semiannually on the outstanding nominal; halves redeemed at 2y and 3y.
  double pv = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double t = 0.5 * k;
    const double outstanding = t <= 2.0 ? 1.0 : (t <= 3.0 ? 0.5 : 0.0);
    pv += 0.03 * outstanding * std::exp(-0.03 * t);
  }
  pv += 0.5 * std::exp(-0.03 * 2.0) + 0.5 * std::exp(-0.03 * 3.0);
  CHECK(est.estimate == doctest::Approx(pv).epsilon(1e-13));
  CHECK(est.std_error == 0.0);
}

TEST_CASE("standard error scales with the path count") {
  const SinkingBondSpec b = sinking();
  const TimeGrid g = grid_for(b, 12);
  const auto curve = DiscountCurve::flat(0.03);
  const JdcevParams risky{0.05, 2.8199, -0.6, 30.0};
  const auto se1 = mc_price_fixed_policy(simulate_paths(risky, g, 20000, 8), b,
                                         forced_min_schedule(b), curve).std_error;
  const auto se2 = mc_price_fixed_policy(simulate_paths(risky, g, 40000, 8), b,
                                         forced_min_schedule(b), curve).std_error;
  CHECK(se2 / se1 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("seeded estimates are reproducible") {
  const SinkingBondSpec b = sinking();
  const TimeGrid g = grid_for(b, 12);
  const auto curve = DiscountCurve::flat(0.03);
  const auto a = mc_price_fixed_policy(simulate_paths(kFitted, g, 3000, 77), b,
                                       forced_max_schedule(b), curve);
  SimulationOptions o;
  o.threads = 4;
  const auto c = mc_price_fixed_policy(simulate_paths(kFitted, g, 3000, 77, o), b,
                                       forced_max_schedule(b), curve);
  CHECK(std::memcmp(&a.estimate, &c.estimate, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.std_error, &c.std_error, sizeof(double)) == 0);
}

TEST_CASE("simulation input errors") {
  const TimeGrid g = build_time_grid(1.0, 4);
  CHECK_THROWS_AS(simulate_paths(kFitted, g, 0, 1), ValidationError);
  CHECK_THROWS_AS(simulate_paths({0.01, 1.0, 0.3, 1.0}, g, 10, 1), ValidationError);
}
