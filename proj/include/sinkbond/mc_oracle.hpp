#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sinkbond/instruments.hpp"
#include "sinkbond/jdcev.hpp"
#include "sinkbond/market_data.hpp"

namespace sinkbond {

struct SimulationOptions {
  double intensity_cap = kDefaultIntensityCap;
  /// Deterministic path dZ = Z lambda(Z) dt; implied by sigma = 0.
  bool degenerate = false;
  bool keep_intensities = false;
  int threads = 1;
};

/// Simulated default stages. default_step[p] = n means default in
/// (t_n, t_{n+1}]; -1 means survival to the horizon.
struct PathSet {
  TimeGrid grid;
  std::vector<std::int32_t> default_step;
  /// Row-major [path][0..N] left-endpoint intensities when kept; entries
  /// after the default step are not simulated and hold NaN.
  std::vector<double> intensities;

  std::size_t size() const noexcept { return default_step.size(); }
  double intensity(std::size_t path, std::size_t n) const;
};

/// Euler scheme in the Bessel coordinate with unit diffusion; x <= 0 is
/// absorbing at the intensity cap. Default when the running sum of
/// lambda(t_{i-1}) dt_i exceeds an Exp(1) draw. Path p draws only from the
/// substream keyed by (seed, p).
PathSet simulate_paths(const JdcevParams& params, const TimeGrid& grid, std::size_t n_paths,
                       std::uint64_t seed, const SimulationOptions& options = {});

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
};

/// Discounted cashflows of a fixed redemption schedule per path: coupon and
/// redemption at every surviving step, R times the outstanding nominal at the
/// default step, each paid at the end of its step.
McEstimate mc_price_fixed_policy(const PathSet& paths, const SinkingBondSpec& spec,
                                 const RedemptionSchedule& schedule, const DiscountCurve& curve);

/// Counter-based generator: splitmix64 over a per-path state. Satisfies
/// UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

 private:
  std::uint64_t state_;
};

/// Initial state of the substream of `path` under `seed`.
std::uint64_t substream_state(std::uint64_t seed, std::uint64_t path);

}  // namespace sinkbond
