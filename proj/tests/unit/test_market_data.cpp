#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "sinkbond/error.hpp"
#include "sinkbond/market_data.hpp"

using namespace sinkbond;

TEST_CASE("uniform grid") {
  const TimeGrid g = build_time_grid(1.0, 4);
  REQUIRE(g.steps() == 4);
  const std::vector<double> expected{0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::size_t n = 0; n <= 4; ++n) CHECK(g.time(n) == doctest::Approx(expected[n]).epsilon(1e-15));
}

TEST_CASE("event dates are inserted exactly") {
  const double events[] = {0.3};
  const TimeGrid g = build_time_grid(1.0, 2, events);
  CHECK(g.time(0) == 0.0);
  CHECK(g.maturity() == 1.0);
  REQUIRE(g.find(0.3));
  CHECK(g.time(*g.find(0.3)) == 0.3);
  for (std::size_t i = 1; i <= g.steps(); ++i) CHECK(g.dt(i) > 0.0);
}

TEST_CASE("thirty-year grid at thirteen steps per year") {
  std::vector<double> annual;
  for (int y = 1; y <= 30; ++y) annual.push_back(y);
  const TimeGrid g = build_time_grid(30.0, 13, annual);
  CHECK(std::abs(static_cast<long>(g.steps()) - 403L) <= 31);
  for (double d : annual) CHECK(g.find(d));
}

TEST_CASE("grid construction errors") {
  const double late[] = {2.0};
  CHECK_THROWS_AS(build_time_grid(1.0, 4, late), ValidationError);
  const double dup[] = {0.5, 0.5};
  CHECK_THROWS_AS(build_time_grid(1.0, 4, dup), ValidationError);
  CHECK_THROWS_AS(build_time_grid(0.0, 4), ValidationError);
  CHECK_THROWS_AS(build_time_grid(1.0, 0), ValidationError);
  CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.4}), ValidationError);
}

TEST_CASE("discount factors") {
  const TimeGrid g = build_time_grid(3.0, 4);
  const auto zero = DiscountCurve::flat(0.0);
  for (std::size_t n = 0; n <= g.steps(); ++n) CHECK(discount_factor(zero, g, 0, n) == 1.0);

  const auto flat = DiscountCurve::flat(0.02);
  const std::size_t one_year = g.index_of(1.0);
  CHECK(discount_factor(flat, g, 0, one_year) == doctest::Approx(0.980199).epsilon(1e-6));
  CHECK(discount_factor(flat, g, 0, one_year) == doctest::Approx(std::exp(-0.02)).epsilon(1e-14));
  CHECK(discount_factor(flat, g, 5, 5) == 1.0);
  CHECK_THROWS_AS(discount_factor(flat, g, 5, 4), ValidationError);
  CHECK_THROWS_AS(discount_factor(flat, g, 0, g.steps() + 1), ValidationError);
}

TEST_CASE("piecewise-constant curve uses left-endpoint rates") {
  const DiscountCurve c({{0.0, 0.01}, {1.0, 0.03}});
  CHECK(c.rate(0.5) == 0.01);
  CHECK(c.rate(1.0) == 0.03);
  CHECK(c.rate(7.0) == 0.03);
  const TimeGrid g = build_time_grid(2.0, 2);
  // Steps start at 0, 0.5, 1, 1.5.
  const double expected = std::exp(-(0.01 * 0.5 + 0.01 * 0.5 + 0.03 * 0.5 + 0.03 * 0.5));
  CHECK(discount_factor(c, g, 0, 4) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(discount_factor(c, g, 2, 4) == doctest::Approx(std::exp(-0.03)).epsilon(1e-14));
}

TEST_CASE("curve validation") {
  CHECK_THROWS_AS(DiscountCurve({{0.5, 0.01}}), ValidationError);
  CHECK_THROWS_AS(DiscountCurve({{0.0, 0.01}, {0.0, 0.02}}), ValidationError);
  CHECK_THROWS_AS(DiscountCurve({{0.0, NAN}}), ValidationError);
  CHECK_THROWS_AS(DiscountCurve(std::vector<RatePillar>{}), ValidationError);
}
