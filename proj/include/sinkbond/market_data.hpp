#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sinkbond {

/// Dates closer than this (in years) are treated as the same date.
inline constexpr double kDateTolerance = 1e-9;

/// Strictly increasing year fractions 0 = t_0 < t_1 < ... < t_N = T.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> dates);

  /// Number of steps N (the grid holds N + 1 dates).
  std::size_t steps() const noexcept { return dates_.size() - 1; }
  double time(std::size_t n) const { return dates_.at(n); }
  /// Step length dt_i = t_i - t_{i-1}, defined for 1 <= i <= N.
  double dt(std::size_t i) const;
  double maturity() const noexcept { return dates_.back(); }
  std::span<const double> dates() const noexcept { return dates_; }

  /// Index of the grid date within `tol` of t, if any.
  std::optional<std::size_t> find(double t, double tol = kDateTolerance) const;
  /// Like find() but throws ValidationError when t is not a grid date.
  std::size_t index_of(double t) const;

 private:
  std::vector<double> dates_;
};

/// Uniform grid of spacing 1/steps_per_year with every event date inserted
/// as an exact grid point. Uniform points closer than a quarter step to an
/// event date are dropped so steps stay within [h/4, 5h/4].
TimeGrid build_time_grid(double maturity, int steps_per_year,
                         std::span<const double> event_dates = {});

struct RatePillar {
  double time;
  double rate;
};

/// Piecewise-constant instantaneous forward rates. The rate of a pillar
/// holds from its time up to the next pillar; the last one extends flat.
class DiscountCurve {
 public:
  explicit DiscountCurve(std::vector<RatePillar> pillars);
  static DiscountCurve flat(double rate);

  double rate(double t) const;
  std::span<const RatePillar> pillars() const noexcept { return pillars_; }

 private:
  std::vector<RatePillar> pillars_;
};

/// Discount factors of a curve sampled on a grid at left endpoints:
/// df(n, m) = exp(-sum_{i=n+1}^{m} r(t_{i-1}) dt_i).
class GridDiscounting {
 public:
  GridDiscounting(const DiscountCurve& curve, const TimeGrid& grid);

  std::size_t steps() const noexcept { return rates_.size(); }
  /// r(t_n) for 0 <= n < N.
  double rate(std::size_t n) const { return rates_.at(n); }
  /// One-step factor exp(-r(t_n) dt_{n+1}) for 0 <= n < N.
  double step(std::size_t n) const { return steps_.at(n); }
  double factor(std::size_t n, std::size_t m) const;

 private:
  std::vector<double> rates_;
  std::vector<double> steps_;
  std::vector<double> cumulative_;  // sum_{i<=n} r(t_{i-1}) dt_i
};

double discount_factor(const DiscountCurve& curve, const TimeGrid& grid,
                       std::size_t n, std::size_t m);

}  // namespace sinkbond
