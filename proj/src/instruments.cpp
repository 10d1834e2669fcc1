#include "sinkbond/instruments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sinkbond/error.hpp"

namespace sinkbond {

namespace {

int exact_integer(double v, const std::string& what) {
  const double r = std::round(v);
  if (!std::isfinite(v) || std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v))) {
    throw ValidationError(what);
  }
  return static_cast<int>(r);
}

std::vector<int> actions_for(const SinkingBondSpec& spec, const std::vector<int>& installments,
                             bool redemption_stage, bool last_stage, int s) {
  if (last_stage) return {s};
  if (!redemption_stage) return {0};
  if (spec.callable) return s == 0 ? std::vector<int>{0} : std::vector<int>{0, s};
  std::vector<int> out;
  if (spec.allow_skip) out.push_back(0);
  for (int u : installments) {
    if (u <= s) out.push_back(u);
  }
  if (out.empty()) out.push_back(s);
  return out;
}

}  // namespace

void SinkingBondSpec::validate() const {
  if (!(maturity > 0.0) || !std::isfinite(maturity)) throw ValidationError("maturity must be positive");
  if (!(coupon_rate >= 0.0) || !std::isfinite(coupon_rate)) {
    throw ValidationError("coupon_rate must be non-negative");
  }
  if (coupon_frequency < 1) throw ValidationError("coupon_frequency must be >= 1");
  if (!(recovery >= 0.0 && recovery <= 1.0)) throw ValidationError("recovery must lie in [0,1]");
  if (!(alpha > 0.0 && alpha <= 100.0)) throw ValidationError("alpha must lie in (0, 100]");
  for (std::size_t i = 0; i < redemption_dates.size(); ++i) {
    const double d = redemption_dates[i];
    if (!(d > 0.0) || d > maturity + kDateTolerance) {
      throw ValidationError("redemption date " + std::to_string(d) + " outside (0, maturity]");
    }
    if (i > 0 && !(d > redemption_dates[i - 1] + kDateTolerance)) {
      throw ValidationError("redemption dates must be strictly increasing");
    }
  }
  if (nominal_units < 0) throw ValidationError("K must be positive");
  if (callable) return;
  if (!redemption_dates.empty() && admissible_fractions.empty()) {
    throw ValidationError("a sinking bond with redemption dates needs admissible_fractions");
  }
  for (double f : admissible_fractions) {
    if (!(f > 0.0) || f * 100.0 > alpha + 1e-9) {
      throw ValidationError("admissible fraction " + std::to_string(f) +
                            " must be positive and at most alpha/100");
    }
  }
  if (!admissible_fractions.empty()) {
    const double smallest = *std::min_element(admissible_fractions.begin(), admissible_fractions.end());
    exact_integer(alpha / (smallest * 100.0),
                  "alpha must be a multiple of the smallest installment x 100 (alpha = " +
                      std::to_string(alpha) + ", smallest installment = " +
                      std::to_string(smallest * 100.0) + ")");
    for (double f : admissible_fractions) units_for_fraction(f);
  }
}

int SinkingBondSpec::units() const {
  if (nominal_units > 0) return nominal_units;
  if (callable || admissible_fractions.empty()) return 1;
  const double smallest = *std::min_element(admissible_fractions.begin(), admissible_fractions.end());
  return exact_integer(alpha / (smallest * 100.0),
                       "alpha must be a multiple of the smallest installment x 100");
}

int SinkingBondSpec::units_for_fraction(double fraction) const {
  if (fraction == 0.0) return 0;
  return exact_integer(fraction * 100.0 / alpha * units(),
                       "installment " + std::to_string(fraction) +
                           " is not an exact member of the nominal grid");
}

std::vector<int> SinkingBondSpec::installment_units() const {
  std::vector<int> out;
  for (double f : admissible_fractions) out.push_back(units_for_fraction(f));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> SinkingBondSpec::coupon_dates() const {
  std::vector<double> out;
  if (coupon_rate == 0.0) return out;
  for (int k = 0;; ++k) {
    const double d = maturity - static_cast<double>(k) / coupon_frequency;
    if (d <= kDateTolerance) break;
    out.push_back(d);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<double> SinkingBondSpec::event_dates() const {
  std::vector<double> all = coupon_dates();
  all.insert(all.end(), redemption_dates.begin(), redemption_dates.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double d : all) {
    if (out.empty() || d - out.back() > kDateTolerance) out.push_back(d);
  }
  return out;
}

TimeGrid grid_for(const SinkingBondSpec& spec, int steps_per_year) {
  spec.validate();
  const auto events = spec.event_dates();
  return build_time_grid(spec.maturity, steps_per_year, events);
}

std::vector<bool> redemption_stages(const SinkingBondSpec& spec, const TimeGrid& grid) {
  std::vector<bool> out(grid.steps(), false);
  for (double d : spec.redemption_dates) {
    const std::size_t m = grid.index_of(d);
    if (m == 0) throw ValidationError("redemption date at t = 0");
    out[m - 1] = true;
  }
  return out;
}

std::vector<int> action_set(const SinkingBondSpec& spec, const TimeGrid& grid, std::size_t n,
                            int s) {
  const std::size_t N = grid.steps();
  if (n >= N) throw ValidationError("stage " + std::to_string(n) + " out of range");
  if (s < 0 || s > spec.units()) {
    throw ValidationError("nominal " + std::to_string(s) + " is not a member of S");
  }
  const auto stages = redemption_stages(spec, grid);
  return actions_for(spec, spec.installment_units(), stages[n], n + 1 == N, s);
}

std::vector<double> coupons_on_grid(const SinkingBondSpec& spec, const TimeGrid& grid) {
  std::vector<double> coupons(grid.steps(), 0.0);
  for (double d : spec.coupon_dates()) {
    const auto m = grid.find(d);
    if (!m || *m == 0) {
      throw ValidationError("coupon date " + std::to_string(d) + " missing from the time grid");
    }
    coupons[*m - 1] = spec.coupon_rate / spec.coupon_frequency;
  }
  return coupons;
}

RedemptionSchedule constant_schedule(const SinkingBondSpec& spec, double fraction) {
  return {std::vector<double>(spec.redemption_dates.size(), fraction)};
}

RedemptionSchedule forced_max_schedule(const SinkingBondSpec& spec) {
  if (spec.callable || spec.admissible_fractions.empty()) return constant_schedule(spec, 1.0);
  return constant_schedule(
      spec, *std::max_element(spec.admissible_fractions.begin(), spec.admissible_fractions.end()));
}

RedemptionSchedule forced_min_schedule(const SinkingBondSpec& spec) {
  if (spec.callable || spec.admissible_fractions.empty()) return constant_schedule(spec, 0.0);
  return constant_schedule(
      spec, *std::min_element(spec.admissible_fractions.begin(), spec.admissible_fractions.end()));
}

ScheduleRule::ScheduleRule(const SinkingBondSpec& spec, const TimeGrid& grid,
                           RedemptionSchedule schedule)
    : spec_(spec),
      grid_(grid),
      redemption_(redemption_stages(spec, grid)),
      installments_(spec.installment_units()) {
  if (schedule.fractions.size() != spec.redemption_dates.size()) {
    throw ValidationError("schedule needs one entry per redemption date");
  }
  requested_.assign(grid.steps(), -1);
  for (std::size_t k = 0; k < schedule.fractions.size(); ++k) {
    const double f = schedule.fractions[k];
    if (!(f >= 0.0)) throw ValidationError("schedule fractions must be non-negative");
    const std::size_t stage = grid.index_of(spec.redemption_dates[k]) - 1;
    if (spec.callable) {
      requested_[stage] = f > 0.0 ? spec_.units() : 0;
    } else {
      requested_[stage] = spec_.units_for_fraction(f);
    }
  }
}

int ScheduleRule::operator()(std::size_t n, int s) const {
  const std::size_t N = grid_.steps();
  if (n >= N) throw ValidationError("stage " + std::to_string(n) + " out of range");
  if (n + 1 == N) return s;
  if (!redemption_[n]) return 0;
  const auto allowed = actions_for(spec_, installments_, true, false, s);
  const int want = requested_[n];
  if (std::find(allowed.begin(), allowed.end(), want) != allowed.end()) return want;
  if (want > s) return allowed.back();
  throw ValidationError("scheduled redemption of " + std::to_string(want) + "/" +
                        std::to_string(spec_.units()) + " at t = " +
                        std::to_string(grid_.time(n + 1)) + " is not admissible");
}

std::vector<int> ScheduleRule::nominal_path() const {
  std::vector<int> path{spec_.units()};
  for (std::size_t n = 0; n < grid_.steps(); ++n) path.push_back(path.back() - (*this)(n, path.back()));
  return path;
}

}  // namespace sinkbond
