#include "sinkbond/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sinkbond/error.hpp"
#include "sinkbond/parallel.hpp"

namespace sinkbond {

namespace {

constexpr double kUnpriceable = 1e6;

struct CdsLegs {
  double protection = 0.0;
  double annuity = 0.0;
};

CdsLegs cds_legs(const TimeGrid& grid, const GridDiscounting& disc, std::span<const double> survival,
                 double recovery, double tenor, int premium_frequency) {
  if (tenor > grid.maturity() + kDateTolerance) {
    throw ValidationError("CDS tenor " + std::to_string(tenor) + " beyond the tree horizon");
  }
  const std::size_t end = grid.index_of(tenor);
  CdsLegs legs;
  for (std::size_t n = 0; n < end; ++n) {
    legs.protection += disc.factor(0, n + 1) * (survival[n] - survival[n + 1]);
  }
  legs.protection *= 1.0 - recovery;
  double previous = 0.0;
  for (double d : cds_premium_dates(tenor, premium_frequency)) {
    const std::size_t m = grid.index_of(d);
    legs.annuity += (grid.time(m) - previous) * disc.factor(0, m) * survival[m];
    previous = grid.time(m);
  }
  return legs;
}

TimeGrid cds_grid(std::span<const CdsQuote> quotes, const CalibrationConfig& config) {
  double horizon = 0.0;
  std::vector<double> dates;
  for (const CdsQuote& q : quotes) {
    horizon = std::max(horizon, q.tenor);
    const auto d = cds_premium_dates(q.tenor, config.premium_frequency);
    dates.insert(dates.end(), d.begin(), d.end());
  }
  std::sort(dates.begin(), dates.end());
  std::vector<double> events;
  for (double d : dates) {
    if (events.empty() || d - events.back() > kDateTolerance) events.push_back(d);
  }
  return build_time_grid(horizon, config.steps_per_year, events);
}

double project(double v, Interval box) { return std::clamp(v, box.lower, box.upper); }

}  // namespace

void CdsQuote::validate() const {
  if (!(tenor > 0.0) || !std::isfinite(tenor)) throw ValidationError("CDS tenor must be positive");
  if (!(spread >= 0.0) || !std::isfinite(spread)) {
    throw ValidationError("CDS spread must be non-negative");
  }
}

std::vector<double> cds_premium_dates(double tenor, int premium_frequency) {
  if (premium_frequency < 1) throw ValidationError("premium frequency must be >= 1");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double d = tenor - static_cast<double>(k) / premium_frequency;
    if (d <= kDateTolerance) break;
    out.push_back(d);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double price_cds(const IntensityTree& tree, const DiscountCurve& curve, double recovery,
                 double tenor, int premium_frequency) {
  if (!(recovery >= 0.0 && recovery <= 1.0)) throw ValidationError("recovery must lie in [0,1]");
  const auto survival = survival_curve(tree);
  const GridDiscounting disc(curve, tree.grid);
  const CdsLegs legs = cds_legs(tree.grid, disc, survival, recovery, tenor, premium_frequency);
  if (!(legs.annuity > 0.0)) throw NumericalError("CDS premium leg vanishes");
  return legs.protection / legs.annuity;
}

double error_functional(const JdcevParams& params, std::span<const CdsQuote> quotes,
                        const DiscountCurve& curve, const CalibrationConfig& config) {
  JdcevParams inside = params;
  inside.sigma = project(params.sigma, config.sigma_bounds);
  inside.lambda0 = project(params.lambda0, config.lambda0_bounds);
  inside.beta = project(params.beta, config.beta_bounds);
  const double distance2 = std::pow(params.sigma - inside.sigma, 2) +
                           std::pow(params.lambda0 - inside.lambda0, 2) +
                           std::pow(params.beta - inside.beta, 2);
  const double penalty = config.penalty_weight * distance2;
  if (!std::isfinite(penalty)) return std::numeric_limits<double>::max();

  try {
    const TimeGrid grid = cds_grid(quotes, config);
    TreeOptions options;
    options.intensity_cap = config.intensity_cap;
    const IntensityTree tree = build_default_tree(inside, grid, options);
    const auto survival = survival_curve(tree);
    const GridDiscounting disc(curve, grid);
    double sse = 0.0;
    for (const CdsQuote& q : quotes) {
      const CdsLegs legs =
          cds_legs(grid, disc, survival, config.recovery, q.tenor, config.premium_frequency);
      const double model = legs.protection / legs.annuity;
      if (!std::isfinite(model)) return kUnpriceable + penalty;
      sse += (model - q.spread) * (model - q.spread);
    }
    return sse + penalty;
  } catch (const NumericalError&) {
    return kUnpriceable + penalty;
  }
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  if (dim == 0) throw ValidationError("Nelder-Mead needs at least one free coordinate");

  NelderMeadResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    return f(x);
  };

  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) {
    double& c = simplex[i + 1][i];
    c = c != 0.0 ? c * (1.0 + options.initial_step) : 0.00025;
  }
  std::vector<double> values(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  auto point = [dim](const std::vector<double>& base, const std::vector<double>& towards,
                     double t) {
    std::vector<double> x(dim);
    for (std::size_t k = 0; k < dim; ++k) x[k] = base[k] + t * (towards[k] - base[k]);
    return x;
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    {
      std::vector<std::vector<double>> s2;
      std::vector<double> v2;
      for (std::size_t i : order) {
        s2.push_back(simplex[i]);
        v2.push_back(values[i]);
      }
      simplex.swap(s2);
      values.swap(v2);
    }

    double f_spread = 0.0;
    double x_spread = 0.0;
    for (std::size_t i = 1; i <= dim; ++i) {
      f_spread = std::max(f_spread, std::abs(values[i] - values[0]));
      for (std::size_t k = 0; k < dim; ++k) {
        x_spread = std::max(x_spread, std::abs(simplex[i][k] - simplex[0][k]));
      }
    }
    if (f_spread <= options.f_tolerance && x_spread <= options.x_tolerance) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;
    ++result.iterations;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k] / dim;
    }
    const auto& worst = simplex[dim];
    const auto reflected = point(centroid, worst, -1.0);
    const double f_r = eval(reflected);
    if (f_r < values[0]) {
      const auto expanded = point(centroid, worst, -2.0);
      const double f_e = eval(expanded);
      if (f_e < f_r) {
        simplex[dim] = expanded;
        values[dim] = f_e;
      } else {
        simplex[dim] = reflected;
        values[dim] = f_r;
      }
      continue;
    }
    if (f_r < values[dim - 1]) {
      simplex[dim] = reflected;
      values[dim] = f_r;
      continue;
    }
    const bool outside = f_r < values[dim];
    const auto contracted = outside ? point(centroid, worst, -0.5) : point(centroid, worst, 0.5);
    const double f_c = eval(contracted);
    if (f_c < (outside ? f_r : values[dim])) {
      simplex[dim] = contracted;
      values[dim] = f_c;
      continue;
    }
    for (std::size_t i = 1; i <= dim; ++i) {
      simplex[i] = point(simplex[0], simplex[i], 0.5);
      values[i] = eval(simplex[i]);
    }
  }
  result.x = simplex[0];
  result.value = values[0];
  return result;
}

CalibrationResult calibrate(std::span<const CdsQuote> quotes, const DiscountCurve& curve,
                            const CalibrationConfig& config) {
  if (quotes.empty()) throw ValidationError("calibration needs at least one CDS quote");
  for (const CdsQuote& q : quotes) q.validate();
  if (!(config.z0 > 0.0)) throw ValidationError("observed stock level z0 must be positive");

  // Coordinates in (sigma, lambda0, beta) order.
  const std::array<double, 3> fixed{config.fixed.sigma, config.fixed.lambda0, config.fixed.beta};
  const std::array<const std::vector<double>*, 3> grids{&config.sigma_grid, &config.lambda0_grid,
                                                        &config.beta_grid};
  auto to_params = [&](const std::array<double, 3>& c) {
    return JdcevParams{c[1], c[0], c[2], config.z0};
  };
  auto objective = [&](const std::array<double, 3>& c) {
    return error_functional(to_params(c), quotes, curve, config);
  };

  std::array<std::vector<double>, 3> axes;
  for (int k = 0; k < 3; ++k) {
    axes[k] = config.frozen[k] ? std::vector<double>{fixed[k]} : *grids[k];
    if (axes[k].empty()) throw ValidationError("calibration grid axis is empty");
  }
  const std::size_t total = axes[0].size() * axes[1].size() * axes[2].size();
  std::vector<std::array<double, 3>> points(total);
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t a = i / (axes[1].size() * axes[2].size());
    const std::size_t b = (i / axes[2].size()) % axes[1].size();
    const std::size_t c = i % axes[2].size();
    points[i] = {axes[0][a], axes[1][b], axes[2][c]};
  }
  parallel_for(total, config.threads, [&](std::size_t i) { values[i] = objective(points[i]); });

  std::size_t best = total;
  for (std::size_t i = 0; i < total; ++i) {
    if (std::isfinite(values[i]) && (best == total || values[i] < values[best])) best = i;
  }
  if (best == total) throw NumericalError("calibration failed: no finite grid point");

  std::vector<int> free;
  for (int k = 0; k < 3; ++k) {
    if (!config.frozen[k]) free.push_back(k);
  }

  CalibrationResult result;
  result.seed = to_params(points[best]);
  std::array<double, 3> fitted = points[best];
  result.objective = values[best];
  result.evaluations = static_cast<int>(total);
  if (!free.empty()) {
    std::vector<double> start;
    for (int k : free) start.push_back(points[best][k]);
    NelderMeadOptions nm;
    nm.max_iterations = config.max_iterations;
    nm.f_tolerance = config.tolerance;
    nm.x_tolerance = config.tolerance;
    const auto fit = nelder_mead(
        [&](std::span<const double> x) {
          std::array<double, 3> c = points[best];
          for (std::size_t i = 0; i < free.size(); ++i) c[free[i]] = x[i];
          return objective(c);
        },
        start, nm);
    for (std::size_t i = 0; i < free.size(); ++i) fitted[free[i]] = fit.x[i];
    result.iterations = fit.iterations;
    result.evaluations += fit.evaluations;
    result.converged = fit.converged;
  } else {
    result.converged = true;
  }

  fitted[0] = project(fitted[0], config.sigma_bounds);
  fitted[1] = project(fitted[1], config.lambda0_bounds);
  fitted[2] = project(fitted[2], config.beta_bounds);
  result.params = to_params(fitted);
  result.objective = objective(fitted);

  const TimeGrid grid = cds_grid(quotes, config);
  TreeOptions options;
  options.intensity_cap = config.intensity_cap;
  const IntensityTree tree = build_default_tree(result.params, grid, options);
  for (const CdsQuote& q : quotes) {
    result.fits.push_back(
        {q, price_cds(tree, curve, config.recovery, q.tenor, config.premium_frequency)});
  }
  return result;
}

}  // namespace sinkbond
