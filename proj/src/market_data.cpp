#include "sinkbond/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sinkbond/error.hpp"

namespace sinkbond {

TimeGrid::TimeGrid(std::vector<double> dates) : dates_(std::move(dates)) {
  if (dates_.size() < 2) {
    throw ValidationError("time grid needs at least two dates");
  }
  if (dates_.front() != 0.0) {
    throw ValidationError("time grid must start at 0");
  }
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (!std::isfinite(dates_[i]) || !(dates_[i] > dates_[i - 1])) {
      throw ValidationError("time grid dates must be finite and strictly increasing (index " +
                            std::to_string(i) + ")");
    }
  }
}

double TimeGrid::dt(std::size_t i) const {
  if (i == 0 || i >= dates_.size()) {
    throw ValidationError("step index " + std::to_string(i) + " out of range");
  }
  return dates_[i] - dates_[i - 1];
}

std::optional<std::size_t> TimeGrid::find(double t, double tol) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), t - tol);
  if (it != dates_.end() && std::abs(*it - t) <= tol) {
    return static_cast<std::size_t>(it - dates_.begin());
  }
  return std::nullopt;
}

std::size_t TimeGrid::index_of(double t) const {
  if (auto n = find(t)) return *n;
  throw ValidationError("date " + std::to_string(t) + " is not a grid point");
}

TimeGrid build_time_grid(double maturity, int steps_per_year,
                         std::span<const double> event_dates) {
  if (!(maturity > 0.0) || !std::isfinite(maturity)) {
    throw ValidationError("maturity must be positive");
  }
  if (steps_per_year < 1) {
    throw ValidationError("steps_per_year must be >= 1");
  }

  std::vector<double> events(event_dates.begin(), event_dates.end());
  std::sort(events.begin(), events.end());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double e = events[i];
    if (!(e > 0.0) || e > maturity + kDateTolerance) {
      throw ValidationError("event date " + std::to_string(e) + " outside (0, maturity]");
    }
    if (i > 0 && e - events[i - 1] <= kDateTolerance) {
      throw ValidationError("duplicate event date " + std::to_string(e));
    }
  }
  if (events.empty() || std::abs(events.back() - maturity) > kDateTolerance) {
    events.push_back(maturity);
  } else {
    events.back() = maturity;
  }

  const double h = 1.0 / steps_per_year;
  std::vector<double> dates{0.0};
  std::size_t next_event = 0;
  for (long k = 1;; ++k) {
    const double u = static_cast<double>(k) / steps_per_year;
    if (u >= maturity - 0.25 * h) break;
    while (next_event < events.size() && events[next_event] < u - 0.25 * h) {
      dates.push_back(events[next_event++]);
    }
    bool near_event = next_event < events.size() && std::abs(events[next_event] - u) < 0.25 * h;
    if (!near_event) dates.push_back(u);
  }
  while (next_event < events.size()) dates.push_back(events[next_event++]);
  return TimeGrid(std::move(dates));
}

DiscountCurve::DiscountCurve(std::vector<RatePillar> pillars) : pillars_(std::move(pillars)) {
  if (pillars_.empty()) throw ValidationError("discount curve needs at least one pillar");
  if (pillars_.front().time != 0.0) throw ValidationError("first curve pillar must be at time 0");
  for (std::size_t i = 0; i < pillars_.size(); ++i) {
    if (!std::isfinite(pillars_[i].rate) || !std::isfinite(pillars_[i].time)) {
      throw ValidationError("curve pillar " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(pillars_[i].time > pillars_[i - 1].time)) {
      throw ValidationError("curve pillar times must be strictly increasing");
    }
  }
}

DiscountCurve DiscountCurve::flat(double rate) { return DiscountCurve({{0.0, rate}}); }

double DiscountCurve::rate(double t) const {
  auto it = std::upper_bound(pillars_.begin(), pillars_.end(), t,
                             [](double v, const RatePillar& p) { return v < p.time; });
  if (it == pillars_.begin()) return pillars_.front().rate;
  return std::prev(it)->rate;
}

GridDiscounting::GridDiscounting(const DiscountCurve& curve, const TimeGrid& grid) {
  const std::size_t N = grid.steps();
  rates_.resize(N);
  steps_.resize(N);
  cumulative_.assign(N + 1, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    rates_[n] = curve.rate(grid.time(n));
    const double exponent = rates_[n] * grid.dt(n + 1);
    steps_[n] = std::exp(-exponent);
    cumulative_[n + 1] = cumulative_[n] + exponent;
  }
}

double GridDiscounting::factor(std::size_t n, std::size_t m) const {
  if (n > m || m >= cumulative_.size()) {
    throw ValidationError("discount index pair (" + std::to_string(n) + ", " +
                          std::to_string(m) + ") out of range");
  }
  if (n == m) return 1.0;
  return std::exp(-(cumulative_[m] - cumulative_[n]));
}

double discount_factor(const DiscountCurve& curve, const TimeGrid& grid, std::size_t n,
                       std::size_t m) {
  return GridDiscounting(curve, grid).factor(n, m);
}

}  // namespace sinkbond
