#include <doctest.h>

#include "sinkbond/error.hpp"
#include "sinkbond/instruments.hpp"

using namespace sinkbond;

namespace {

SinkingBondSpec westvaco_style(double alpha) {
  SinkingBondSpec b;
  b.maturity = 5.0;
  b.coupon_rate = 0.08;
  b.coupon_frequency = 2;
  b.redemption_dates = {1.0, 2.0, 3.0, 4.0};
  b.admissible_fractions = {0.05, 0.10};
  b.alpha = alpha;
  return b;
}

}  // namespace

TEST_CASE("installments in units of the nominal grid") {
  const SinkingBondSpec b = westvaco_style(75.0);
  CHECK(b.units() == 15);
  const TimeGrid g = grid_for(b, 12);
  const std::size_t annual = g.index_of(1.0) - 1;
  CHECK(action_set(b, g, annual, 15) == std::vector<int>{1, 2});
  CHECK(action_set(b, g, annual, 1) == std::vector<int>{1});
  CHECK(action_set(b, g, 0, 15) == std::vector<int>{0});
  CHECK(action_set(b, g, g.steps() - 1, 7) == std::vector<int>{7});
  CHECK(action_set(b, g, annual, 0) == std::vector<int>{0});
}

TEST_CASE("skip and call variants") {
  SinkingBondSpec b = westvaco_style(100.0);
  b.allow_skip = true;
  const TimeGrid g = grid_for(b, 4);
  const std::size_t annual = g.index_of(2.0) - 1;
  CHECK(action_set(b, g, annual, 20) == std::vector<int>{0, 1, 2});

  SinkingBondSpec c;
  c.maturity = 3.0;
  c.coupon_rate = 0.05;
  c.redemption_dates = {1.0, 2.0};
  c.callable = true;
  const TimeGrid gc = grid_for(c, 4);
  CHECK(action_set(c, gc, gc.index_of(1.0) - 1, 1) == std::vector<int>{0, 1});
}

TEST_CASE("alpha must be a multiple of the smallest installment") {
  SinkingBondSpec b = westvaco_style(72.0);
  CHECK_THROWS_AS(b.validate(), ValidationError);
  b.alpha = 70.0;
  CHECK_NOTHROW(b.validate());
  CHECK(b.units() == 14);
}

TEST_CASE("coupon schedule") {
  SinkingBondSpec b;
  b.maturity = 1.0;
  b.coupon_rate = 0.05;
  const TimeGrid q = grid_for(b, 4);
  CHECK(coupons_on_grid(b, q) == std::vector<double>{0.0, 0.0, 0.0, 0.05});

  b.coupon_rate = 0.06;
  b.coupon_frequency = 2;
  const TimeGrid g = grid_for(b, 12);
  const auto c = coupons_on_grid(b, g);
  CHECK(c[g.index_of(0.5) - 1] == doctest::Approx(0.03));
  CHECK(c[g.index_of(1.0) - 1] == doctest::Approx(0.03));
  double total = 0.0;
  for (double v : c) total += v;
  CHECK(total == doctest::Approx(0.06));

  b.coupon_rate = 0.0;
  for (double v : coupons_on_grid(b, g)) CHECK(v == 0.0);
}

TEST_CASE("coupon dates must be on the grid") {
  SinkingBondSpec b;
  b.maturity = 1.0;
  b.coupon_rate = 0.05;
  b.coupon_frequency = 2;
  CHECK_THROWS_AS(coupons_on_grid(b, build_time_grid(1.0, 3)), ValidationError);
}

TEST_CASE("forced schedules are admissible") {
  const SinkingBondSpec b = westvaco_style(75.0);
  const TimeGrid g = grid_for(b, 12);
  const ScheduleRule max_rule(b, g, forced_max_schedule(b));
  const auto path = max_rule.nominal_path();
  CHECK(path.front() == 15);
  CHECK(path[g.index_of(1.0)] == 13);
  CHECK(path[g.index_of(4.0)] == 7);
  CHECK(path.back() == 0);

  const ScheduleRule min_rule(b, g, forced_min_schedule(b));
  CHECK(min_rule.nominal_path()[g.index_of(4.0)] == 11);

  CHECK_THROWS_AS(ScheduleRule(b, g, constant_schedule(b, 0.07)), ValidationError);
}

TEST_CASE("large requests settle for the largest admissible installment") {
  SinkingBondSpec b = westvaco_style(15.0);
  const TimeGrid g = grid_for(b, 4);
  // Three units outstanding: 2, then 1, then nothing left.
  const ScheduleRule rule(b, g, forced_max_schedule(b));
  const auto path = rule.nominal_path();
  CHECK(path[g.index_of(1.0)] == 1);
  CHECK(path[g.index_of(2.0)] == 0);
}
