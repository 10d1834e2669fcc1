#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "sinkbond/error.hpp"
#include "sinkbond/intensity_tree.hpp"
#include "sinkbond/mdp.hpp"
#include "sinkbond/pricer.hpp"

using namespace sinkbond;

namespace {

const JdcevParams kFitted{0.004, 2.8199, -0.6, 30.0};

IntensityTree chain(const TimeGrid& g, double lambda) {
  const double l[] = {lambda};
  return augment_default(build_deterministic(g, l));
}

ActionSource hold_then_redeem(std::size_t N) {
  return [N](std::size_t n, int s, std::vector<int>& out) {
    out = {n + 1 == N ? s : 0, s};
  };
}

// Redeem everything at the last stage, nothing before.
ActionSource bullet(std::size_t N) {
  return [N](std::size_t n, int s, std::vector<int>& out) {
    out = {n + 1 == N ? s : 0};
  };
}

// Arbitrary redemption amounts in [0, s] at every third stage.
ActionSource random_sets(std::size_t N, std::uint64_t seed) {
  return [N, seed](std::size_t n, int s, std::vector<int>& out) {
    out.clear();
    if (n + 1 == N) {
      out.push_back(s);
      return;
    }
    out.push_back(0);
    if (n % 3 != 2) return;
    for (int a = 1; a <= s; ++a) {
      if (fixtures::key(seed, n, s, a) % 2 == 0) out.push_back(a);
    }
  };
}

}  // namespace

TEST_CASE("stage cost") {
  const TimeGrid g = build_time_grid(1.0, 4);
  const std::vector<double> coupons(4, 0.05);
  SUBCASE("certain survival pays the coupon") {
    const IntensityTree t = chain(g, 0.0);
    const MdpProblem p =
        make_problem(t, DiscountCurve::flat(0.0), coupons, 0.4, 1, bullet(g.steps()));
    CHECK(stage_cost(p, 0, 1, 0, 0) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(stage_cost(p, 0, 0, 0, 0) == 0.0);
    CHECK_THROWS_AS(stage_cost(p, 0, 1, 0, 1), ValidationError);
  }
  SUBCASE("certain default pays recovery on the nominal") {
    const IntensityTree t = chain(g, kDefaultIntensityCap);
    const MdpProblem p = make_problem(t, DiscountCurve::flat(0.0), std::vector<double>(4, 0.0),
                                      0.4, 1, bullet(g.steps()));
    CHECK(std::abs(stage_cost(p, 0, 1, 0, 0) - 0.4) <= 1e-8);
  }
}

TEST_CASE("one-stage toy closes by hand") {
  const double r = 0.03, z = 0.07, R = 0.4, dt = 0.5;
  const TimeGrid g = build_time_grid(dt, 2);
  REQUIRE(g.steps() == 1);
  const IntensityTree t = chain(g, z);
  const MdpProblem p = make_problem(t, DiscountCurve::flat(r), {0.0}, R, 1, bullet(1));
  const double expected = std::exp(-r * dt) * (std::exp(-z * dt) + (1.0 - std::exp(-z * dt)) * R);
  CHECK(backward_induction(p).price() == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("riskless bullet discounts at the curve") {
  const TimeGrid g = build_time_grid(4.0, 4);
  const IntensityTree t = chain(g, 0.0);
  const auto curve = DiscountCurve::flat(0.025);
  const MdpProblem p = make_problem(t, curve, std::vector<double>(g.steps(), 0.0), 0.3, 1,
                                    bullet(g.steps()));
  CHECK(backward_induction(p).price() ==
        doctest::Approx(discount_factor(curve, g, 0, g.steps())).epsilon(1e-14));
}

TEST_CASE("dominated actions leave the value unchanged") {
  // With zero rates and no default, deferring redemption only adds coupons.
  const TimeGrid g = build_time_grid(2.0, 2);
  const IntensityTree t = chain(g, 0.0);
  const std::vector<double> coupons(g.steps(), 0.04);
  const auto curve = DiscountCurve::flat(0.0);
  const std::size_t N = g.steps();
  auto narrow = [N](std::size_t n, int s, std::vector<int>& out) {
    out = {n == 0 || n + 1 == N ? s : 0};
  };
  auto wide = [N](std::size_t n, int s, std::vector<int>& out) {
    if (n + 1 == N) {
      out = {s};
    } else if (n == 0) {
      out = {0, s};
    } else {
      out = {0};
    }
  };
  const double v_narrow = backward_induction(make_problem(t, curve, coupons, 0.4, 2, narrow)).price();
  const double v_wide = backward_induction(make_problem(t, curve, coupons, 0.4, 2, wide)).price();
  CHECK(v_narrow == doctest::Approx(1.04).epsilon(1e-15));
  CHECK(v_wide == v_narrow);
}

TEST_CASE("Bellman re-check on a random instance") {
  const TimeGrid g = build_time_grid(3.0, 12);
  const IntensityTree t = build_default_tree(kFitted, g);
  const std::size_t N = g.steps();
  std::vector<double> coupons(N, 0.0);
  for (std::size_t n = 2; n < N; n += 3) coupons[n] = 0.02;
  const MdpProblem p =
      make_problem(t, DiscountCurve::flat(0.03), coupons, 0.4, 6, random_sets(N, 42));
  const MdpSolution sol = backward_induction(p);
  const BellmanCheck check = check_bellman(p, sol);
  CHECK(check.states > 0);
  CHECK(check.max_residual <= 1e-12);
  CHECK(check.max_violation <= 1e-12);

  const MdpSolution replay = evaluate_policy(p, [&sol](std::size_t n, int s, std::size_t node) {
    return sol.action(n, s, node);
  });
  CHECK(std::abs(replay.price() - sol.price()) <= 1e-12);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double v = evaluate_policy(p, fixtures::random_rule(p, seed)).price();
    CHECK(v >= sol.price() - 1e-12);
  }
}

TEST_CASE("reachable nominals") {
  const TimeGrid g = build_time_grid(1.0, 4);
  const IntensityTree t = chain(g, 0.01);
  const MdpProblem p = make_problem(t, DiscountCurve::flat(0.0), std::vector<double>(4, 0.0), 0.4,
                                    3, hold_then_redeem(g.steps()));
  const auto reach = reachable_nominals(p);
  CHECK(reach[0] == std::vector<int>{3});
  CHECK(reach[1] == std::vector<int>{0, 3});
  CHECK(reach[3] == std::vector<int>{0, 3});
  CHECK(reach[4] == std::vector<int>{0});
}

TEST_CASE("last stage must redeem in full") {
  const TimeGrid g = build_time_grid(1.0, 4);
  const IntensityTree t = chain(g, 0.01);
  const MdpProblem p = make_problem(t, DiscountCurve::flat(0.0), std::vector<double>(4, 0.0), 0.4,
                                    2, [](std::size_t, int, std::vector<int>& out) { out = {0}; });
  CHECK_THROWS_AS(backward_induction(p), ValidationError);
}

TEST_CASE("inadmissible policy is rejected") {
  const TimeGrid g = build_time_grid(1.0, 4);
  const IntensityTree t = chain(g, 0.01);
  const MdpProblem p = make_problem(t, DiscountCurve::flat(0.0), std::vector<double>(4, 0.0), 0.4,
                                    2, bullet(g.steps()));
  CHECK_THROWS_AS(evaluate_policy(p, [](std::size_t, int, std::size_t) { return 1; }),
                  ValidationError);
}
