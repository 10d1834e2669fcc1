#include "sinkbond/mc_oracle.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "sinkbond/error.hpp"
#include "sinkbond/parallel.hpp"

namespace sinkbond {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void check_params(const JdcevParams& p) {
  if (!(p.lambda0 >= 0.0) || !std::isfinite(p.lambda0)) {
    throw ValidationError("simulation needs lambda0 >= 0");
  }
  if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma)) {
    throw ValidationError("simulation needs sigma >= 0");
  }
  if (!(p.beta < 0.0) || !std::isfinite(p.beta)) throw ValidationError("simulation needs beta < 0");
  if (!(p.z0 > 0.0) || !std::isfinite(p.z0)) throw ValidationError("simulation needs z0 > 0");
}

// Simulates one path; returns the default stage or -1. `lambda_out` (N + 1
// entries) is filled up to the default step when non-null.
std::int32_t simulate_one(const JdcevParams& params, const TimeGrid& grid, bool degenerate,
                          double cap, SplitMix64& rng, double* lambda_out) {
  std::exponential_distribution<double> exponential(1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double threshold = exponential(rng);
  const std::size_t N = grid.steps();

  double z = params.z0;
  double x = degenerate ? 0.0 : to_bessel(params, params.z0);
  bool absorbed = false;
  double hazard = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double lambda = intensity(params, absorbed ? 0.0 : z, cap);
    if (lambda_out != nullptr) lambda_out[n] = lambda;
    const double dt = grid.dt(n + 1);
    hazard += lambda * dt;
    if (hazard > threshold) return static_cast<std::int32_t>(n);
    if (degenerate) {
      z += z * lambda * dt;
    } else if (!absorbed) {
      x += bessel_drift(params, x) * dt + std::sqrt(dt) * normal(rng);
      if (x > 0.0) {
        z = from_bessel(params, x);
      } else {
        absorbed = true;
      }
    }
  }
  if (lambda_out != nullptr) lambda_out[N] = intensity(params, absorbed ? 0.0 : z, cap);
  return -1;
}

}  // namespace

SplitMix64::result_type SplitMix64::operator()() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix(state_);
}

std::uint64_t substream_state(std::uint64_t seed, std::uint64_t path) {
  return mix(mix(seed) ^ (path * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

double PathSet::intensity(std::size_t path, std::size_t n) const {
  if (intensities.empty()) throw ValidationError("path intensities were not kept");
  const std::size_t width = grid.steps() + 1;
  if (path >= size() || n >= width) throw ValidationError("path intensity index out of range");
  return intensities[path * width + n];
}

PathSet simulate_paths(const JdcevParams& params, const TimeGrid& grid, std::size_t n_paths,
                       std::uint64_t seed, const SimulationOptions& options) {
  if (n_paths < 1) throw ValidationError("n_paths must be >= 1");
  check_params(params);
  if (!(options.intensity_cap > 0.0)) throw ValidationError("intensity cap must be positive");
  const bool degenerate = options.degenerate || params.sigma == 0.0;
  const std::size_t width = grid.steps() + 1;

  PathSet out{grid, std::vector<std::int32_t>(n_paths, -1), {}};
  if (options.keep_intensities) {
    out.intensities.assign(n_paths * width, std::numeric_limits<double>::quiet_NaN());
  }
  parallel_for(n_paths, options.threads, [&](std::size_t p) {
    SplitMix64 rng(substream_state(seed, p));
    double* row = options.keep_intensities ? out.intensities.data() + p * width : nullptr;
    out.default_step[p] = simulate_one(params, grid, degenerate, options.intensity_cap, rng, row);
  });
  return out;
}

McEstimate mc_price_fixed_policy(const PathSet& paths, const SinkingBondSpec& spec,
                                 const RedemptionSchedule& schedule, const DiscountCurve& curve) {
  spec.validate();
  if (paths.size() == 0) throw ValidationError("empty path set");
  const TimeGrid& grid = paths.grid;
  const ScheduleRule rule(spec, grid, schedule);
  const auto nominal = rule.nominal_path();
  const auto coupons = coupons_on_grid(spec, grid);
  const GridDiscounting disc(curve, grid);
  const std::size_t N = grid.steps();
  const double K = spec.units();

  // pv_default[n]: value of a path defaulting in step n; pv_default[N]: survival.
  std::vector<double> pv_default(N + 1);
  double paid = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double d = disc.factor(0, n + 1);
    const double s = nominal[n] / K;
    pv_default[n] = paid + d * spec.recovery * s;
    paid += d * ((nominal[n] - nominal[n + 1]) / K + coupons[n] * s);
  }
  pv_default[N] = paid;

  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  for (std::int32_t step : paths.default_step) {
    const double v = pv_default[step < 0 ? N : static_cast<std::size_t>(step)];
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }
  McEstimate est;
  est.estimate = mean;
  est.paths = count;
  est.std_error = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) / count) : 0.0;
  return est;
}

}  // namespace sinkbond
