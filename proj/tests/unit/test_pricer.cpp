#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sinkbond/error.hpp"
#include "sinkbond/pricer.hpp"

using namespace sinkbond;

namespace {

const JdcevParams kFitted{0.004, 2.8199, -0.6, 30.0};

IntensityTree chain(const TimeGrid& g, double lambda) {
  const double l[] = {lambda};
  return augment_default(build_deterministic(g, l));
}

SinkingBondSpec premium_bond() {
  SinkingBondSpec b;
  b.maturity = 8.0;
  b.coupon_rate = 0.09;
  b.coupon_frequency = 2;
  b.redemption_dates = {3.0, 4.0, 5.0, 6.0, 7.0};
  b.admissible_fractions = {0.05, 0.10};
  b.alpha = 100.0;
  b.recovery = 0.4;
  return b;
}

}  // namespace

TEST_CASE("zero-coupon bond") {
  SUBCASE("one step of constant intensity") {
    const TimeGrid g = build_time_grid(1.0, 1);
    const double v = price_zcb(chain(g, 0.01), DiscountCurve::flat(0.0), 0.4);
    CHECK(v == doctest::Approx(0.9940299).epsilon(1e-7));
    CHECK(v == doctest::Approx(std::exp(-0.01) + 0.4 * (1.0 - std::exp(-0.01))).epsilon(1e-15));
  }
  SUBCASE("riskless and full recovery") {
    const TimeGrid g = build_time_grid(5.0, 12);
    const auto curve = DiscountCurve({{0.0, 0.01}, {2.0, 0.03}});
    const double df = discount_factor(curve, g, 0, g.steps());
    CHECK(price_zcb(chain(g, 0.0), curve, 0.4) == doctest::Approx(df).epsilon(1e-14));
    // Recovery is paid at the end of the default step, so full recovery is
    // only riskless without discounting.
    CHECK(price_zcb(build_default_tree(kFitted, g), DiscountCurve::flat(0.0), 1.0) ==
          doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("vanilla bond") {
  const TimeGrid g = build_time_grid(1.0, 4);
  const IntensityTree riskless = chain(g, 0.0);
  const auto zero = DiscountCurve::flat(0.0);
  CHECK(price_vanilla_bond(riskless, zero, std::vector<double>{0, 0, 0, 0.05}, 0.4) ==
        doctest::Approx(1.05).epsilon(1e-15));

  const TimeGrid g5 = build_time_grid(5.0, 12);
  const IntensityTree t = build_default_tree(kFitted, g5);
  const auto curve = DiscountCurve::flat(0.03);
  const std::vector<double> none(g5.steps(), 0.0);
  CHECK(price_vanilla_bond(t, curve, none, 0.4) == doctest::Approx(price_zcb(t, curve, 0.4)).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  std::vector<double> a(g5.steps()), b(g5.steps()), ab(g5.steps());
  for (std::size_t n = 0; n < a.size(); ++n) {
    a[n] = u(rng);
    b[n] = u(rng);
    ab[n] = a[n] + b[n];
  }
  const double lhs = price_vanilla_bond(t, curve, ab, 0.4);
  const double rhs = price_vanilla_bond(t, curve, a, 0.4) + price_vanilla_bond(t, curve, b, 0.4) -
                     price_vanilla_bond(t, curve, none, 0.4);
  CHECK(std::abs(lhs - rhs) <= 1e-12);
}

TEST_CASE("sinking bond without options reduces to the zero-coupon bond") {
  SinkingBondSpec b;
  b.maturity = 5.0;
  b.recovery = 0.4;
  const TimeGrid g = grid_for(b, 12);
  const IntensityTree t = build_default_tree(kFitted, g);
  const auto curve = DiscountCurve::flat(0.02);
  CHECK(std::abs(price_sinking_bond(t, curve, b).price - price_zcb(t, curve, 0.4)) <= 1e-12);

  // Skipping every redemption of a coupon-free sinking bond is the same bond.
  SinkingBondSpec s = b;
  s.redemption_dates = {1.0, 2.0, 3.0};
  s.admissible_fractions = {0.25};
  s.allow_skip = true;
  const IntensityTree ts = build_default_tree(kFitted, grid_for(s, 12));
  CHECK(std::abs(price_fixed_schedule(ts, curve, s, constant_schedule(s, 0.0)) -
                 price_zcb(ts, curve, 0.4)) <= 1e-12);
}

TEST_CASE("premium bond ordering against forced schedules") {
  const SinkingBondSpec b = premium_bond();
  const TimeGrid g = grid_for(b, 12);
  const IntensityTree t = build_default_tree(kFitted, g);
  const auto curve = DiscountCurve::flat(0.03);
  const double v = price_sinking_bond(t, curve, b).price;
  const double fmax = price_fixed_schedule(t, curve, b, forced_max_schedule(b));
  const double fmin = price_fixed_schedule(t, curve, b, forced_min_schedule(b));
  CHECK(v > 1.0);
  CHECK(v <= std::min(fmax, fmin) + 1e-12);
  CHECK(fmax <= fmin);

  SinkingBondSpec only_max = b;
  only_max.admissible_fractions = {0.10};
  const IntensityTree t_max = build_default_tree(kFitted, grid_for(only_max, 12));
  CHECK(v <= price_sinking_bond(t_max, curve, only_max).price + 1e-12);
}

TEST_CASE("fixed schedule reproduces a node-independent optimum") {
  const SinkingBondSpec b = premium_bond();
  const TimeGrid g = grid_for(b, 12);
  const IntensityTree t = chain(g, 0.02);
  const auto curve = DiscountCurve::flat(0.03);
  const SinkingBondPrice opt = price_sinking_bond(t, curve, b);
  RedemptionSchedule schedule;
  int s = b.units();
  for (double d : b.redemption_dates) {
    const std::size_t n = g.index_of(d) - 1;
    // Walk the optimal nominal path up to this stage.
    s = b.units();
    for (std::size_t m = 0; m < n; ++m) s -= opt.solution.action(m, s, 0);
    schedule.fractions.push_back(opt.solution.action(n, s, 0) * 0.05);
  }
  CHECK(std::abs(price_fixed_schedule(t, curve, b, schedule) - opt.price) <= 1e-12);
}

TEST_CASE("z-spread") {
  SinkingBondSpec zcb;
  zcb.maturity = 1.0;
  zcb.recovery = 0.0;
  const TimeGrid g = grid_for(zcb, 4);
  const auto zero = DiscountCurve::flat(0.0);
  CHECK(std::abs(z_spread(zcb, zero, g, 0.95) - (-std::log(0.95))) <= 1e-8);
  CHECK(z_spread(zcb, zero, g, 0.95) == doctest::Approx(0.0512933).epsilon(1e-6));

  const auto curve = DiscountCurve::flat(0.02);
  const double par = deterministic_price(zcb, curve, g, 0.0);
  CHECK(std::abs(z_spread(zcb, curve, g, par)) <= 1e-8);
  CHECK_THROWS_AS(z_spread(zcb, curve, g, 1.5), NumericalError);
  CHECK_THROWS_AS(z_spread(zcb, curve, g, 1e-9), NumericalError);

  SinkingBondSpec coupon = premium_bond();
  const TimeGrid gc = grid_for(coupon, 4);
  for (double z : {-0.01, 0.0, 0.013, 0.2}) {
    const double p = deterministic_price(coupon, curve, gc, z);
    CHECK(std::abs(z_spread(coupon, curve, gc, p) - z) <= 1e-8);
  }
}

TEST_CASE("worst ansatz") {
  SinkingBondSpec c;
  c.maturity = 6.0;
  c.coupon_rate = 0.07;
  c.coupon_frequency = 2;
  c.callable = true;
  c.recovery = 0.0;
  const auto curve = DiscountCurve({{0.0, 0.02}, {3.0, 0.035}});
  const double z = 0.015;

  SUBCASE("no call dates") {
    const TimeGrid g = grid_for(c, 4);
    const auto coupons = coupons_on_grid(c, g);
    double pv = 0.0, exponent = 0.0;
    for (std::size_t i = 1; i <= g.steps(); ++i) {
      exponent += (curve.rate(g.time(i - 1)) + z) * g.dt(i);
      pv += coupons[i - 1] * std::exp(-exponent);
    }
    pv += std::exp(-exponent);
    CHECK(worst_ansatz(c, curve, g, z) == doctest::Approx(pv).epsilon(1e-13));
  }
  SUBCASE("matches the deterministic call problem") {
    c.redemption_dates = {2.0, 3.0, 4.0, 5.0};
    const TimeGrid g = grid_for(c, 4);
    CHECK(std::abs(worst_ansatz(c, curve, g, z) - deterministic_price(c, curve, g, z)) <= 1e-10);
  }
  SUBCASE("more call dates never raise the price") {
    c.redemption_dates = {3.0};
    const double fewer = worst_ansatz(c, curve, grid_for(c, 4), z);
    c.redemption_dates = {2.0, 3.0, 4.0};
    CHECK(worst_ansatz(c, curve, grid_for(c, 4), z) <= fewer + 1e-15);
  }
}

TEST_CASE("policy summary probabilities") {
  const SinkingBondSpec b = premium_bond();
  const TimeGrid g = grid_for(b, 12);
  const IntensityTree t = build_default_tree(kFitted, g);
  const auto res = price_sinking_bond(t, DiscountCurve::flat(0.03), b);
  const auto summary = summarize_policy(t, b, res.solution);
  REQUIRE(summary.size() == b.redemption_dates.size());
  const auto q = survival_curve(t);
  for (const auto& s : summary) {
    double total = 0.0;
    for (const auto& [fraction, prob] : s.actions) total += prob;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.survival == doctest::Approx(q[g.index_of(s.time) - 1]).epsilon(1e-12));
  }
}
