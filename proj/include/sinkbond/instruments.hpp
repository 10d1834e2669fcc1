#pragma once

#include <cstddef>
#include <vector>

#include "sinkbond/market_data.hpp"

namespace sinkbond {

/// Bond with an optional sinking fund. Amounts are quoted per unit of the
/// currently outstanding nominal: an installment of fraction f of the
/// initial nominal is f * 100 / alpha of what an investor holds today.
///
/// The redemption chosen at stage n is paid at t_{n+1}, so a redemption date
/// t_m corresponds to stage m - 1; the same convention places the forced
/// full redemption D_{N-1} = {s} at maturity.
struct SinkingBondSpec {
  double maturity = 0.0;
  double coupon_rate = 0.0;  // per year, on the remaining nominal
  int coupon_frequency = 1;
  std::vector<double> redemption_dates;
  std::vector<double> admissible_fractions;  // of the initial nominal
  double alpha = 100.0;                      // outstanding percentage
  double recovery = 0.4;
  int nominal_units = 0;  // K; 0 selects alpha / (smallest fraction * 100)
  bool allow_skip = false;  // also admit 0 at redemption dates
  bool callable = false;    // redemption dates are call dates: {0, s}

  void validate() const;
  /// Resolution K of the nominal grid S = {0, 1/K, ..., 1}.
  int units() const;
  /// Installments in units of 1/K, ascending.
  std::vector<int> installment_units() const;
  /// Units of 1/K for a fraction of the initial nominal; throws unless exact.
  int units_for_fraction(double fraction) const;
  /// Coupon dates counted back from maturity in steps of 1/frequency.
  std::vector<double> coupon_dates() const;
  /// Sorted union of coupon and redemption dates.
  std::vector<double> event_dates() const;
};

TimeGrid grid_for(const SinkingBondSpec& spec, int steps_per_year);

/// True for the stages n whose payment date t_{n+1} is a redemption date.
std::vector<bool> redemption_stages(const SinkingBondSpec& spec, const TimeGrid& grid);

/// D_n(s) in units of 1/K.
std::vector<int> action_set(const SinkingBondSpec& spec, const TimeGrid& grid, std::size_t n,
                            int s);

/// C_{n+1} for n = 0..N-1: coupon_rate / frequency on coupon dates, else 0.
std::vector<double> coupons_on_grid(const SinkingBondSpec& spec, const TimeGrid& grid);

/// Requested redemption per redemption date, as a fraction of the initial
/// nominal (or, for callable bonds, any positive value meaning "call").
struct RedemptionSchedule {
  std::vector<double> fractions;
};

RedemptionSchedule constant_schedule(const SinkingBondSpec& spec, double fraction);
RedemptionSchedule forced_max_schedule(const SinkingBondSpec& spec);
RedemptionSchedule forced_min_schedule(const SinkingBondSpec& spec);

/// Resolves a schedule to the node-independent action at (n, s): the
/// requested amount when admissible, the largest admissible amount when the
/// request exceeds s. Throws when the request is not admissible otherwise.
class ScheduleRule {
 public:
  ScheduleRule(const SinkingBondSpec& spec, const TimeGrid& grid, RedemptionSchedule schedule);

  int operator()(std::size_t n, int s) const;
  /// Deterministic nominal path s_0 = K, ..., s_N under the schedule.
  std::vector<int> nominal_path() const;

 private:
  SinkingBondSpec spec_;
  TimeGrid grid_;
  std::vector<bool> redemption_;
  std::vector<int> installments_;
  std::vector<int> requested_;  // per stage, -1 where no redemption date
};

}  // namespace sinkbond
