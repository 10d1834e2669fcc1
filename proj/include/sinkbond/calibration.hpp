#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sinkbond/intensity_tree.hpp"
#include "sinkbond/jdcev.hpp"
#include "sinkbond/market_data.hpp"

namespace sinkbond {

struct CdsQuote {
  double tenor = 0.0;
  double spread = 0.0;  // running par spread, per year
  std::string side = "mid";

  void validate() const;
};

/// Par spread of a CDS on the lattice: protection leg (1 - R) paid at the end
/// of the default step over the premium annuity (no accrual on default).
/// Premium dates are tenor - k / frequency and must be grid points.
double price_cds(const IntensityTree& tree, const DiscountCurve& curve, double recovery,
                 double tenor, int premium_frequency);

/// Premium dates of a CDS, counted back from the tenor.
std::vector<double> cds_premium_dates(double tenor, int premium_frequency);

struct Interval {
  double lower;
  double upper;
};

struct CalibrationConfig {
  double z0 = 1.0;
  double recovery = 0.4;
  int steps_per_year = 12;
  int premium_frequency = 4;
  double intensity_cap = kDefaultIntensityCap;

  Interval lambda0_bounds{1e-5, 0.5};
  Interval sigma_bounds{0.01, 10.0};
  Interval beta_bounds{-2.5, -0.05};
  double penalty_weight = 100.0;

  std::vector<double> sigma_grid{0.5, 1.5, 3.0, 5.0};
  std::vector<double> lambda0_grid{0.001, 0.003, 0.01, 0.03};
  std::vector<double> beta_grid{-1.5, -1.0, -0.5, -0.25};

  int max_iterations = 500;
  double tolerance = 1e-8;

  /// Parameters held fixed during the search, in (sigma, lambda0, beta)
  /// order; their values come from `fixed`.
  std::array<bool, 3> frozen{false, false, false};
  JdcevParams fixed{};

  int threads = 1;
};

/// Sum of squared spread errors plus a quadratic penalty on the distance to
/// the admissible box. Out-of-box points are priced at their projection onto
/// the box, so the functional is defined everywhere.
double error_functional(const JdcevParams& params, std::span<const CdsQuote> quotes,
                        const DiscountCurve& curve, const CalibrationConfig& config);

struct QuoteFit {
  CdsQuote quote;
  double model_spread = 0.0;
};

struct CalibrationResult {
  JdcevParams params;
  JdcevParams seed;
  double objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<QuoteFit> fits;
};

/// Coarse grid over (sigma, lambda0, beta) followed by Nelder-Mead from the
/// best grid point.
CalibrationResult calibrate(std::span<const CdsQuote> quotes, const DiscountCurve& curve,
                            const CalibrationConfig& config);

struct NelderMeadOptions {
  int max_iterations = 500;
  double f_tolerance = 1e-8;
  double x_tolerance = 1e-8;
  double initial_step = 0.05;  // relative; absolute 0.00025 for zero coordinates
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Downhill simplex with the standard reflection, expansion, contraction and
/// shrink coefficients (1, 2, 1/2, 1/2). Stops when both the spread of
/// simplex values and the simplex extent fall below their tolerances.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace sinkbond
