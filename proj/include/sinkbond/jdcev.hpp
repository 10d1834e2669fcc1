#pragma once

namespace sinkbond {

inline constexpr double kDefaultIntensityCap = 1e4;

/// Jump-to-default CEV parameters. The pre-default stock level follows
///   dZ = Z (lambda(Z) dt + sigma Z^beta dW),  lambda(Z) = lambda0 (Z/z0)^(2 beta).
struct JdcevParams {
  double lambda0 = 0.0;
  double sigma = 0.0;
  double beta = 0.0;
  double z0 = 0.0;

  /// Throws ValidationError unless lambda0 > 0, sigma > 0, beta < 0, z0 > 0.
  void validate() const;
};

/// Default intensity at a stock level, capped at `cap`. Non-positive levels
/// sit on the default boundary and receive the cap. lambda0 = 0 gives zero
/// intensity everywhere.
double intensity(const JdcevParams& params, double z_level, double cap = kDefaultIntensityCap);

/// Variance-stabilizing coordinate x = Z^(-beta) / (sigma |beta|).
/// In x the diffusion coefficient is identically one.
double to_bessel(const JdcevParams& params, double z_level);
double from_bessel(const JdcevParams& params, double x);

/// Ito drift of x_t:
///   lambda(Z) Z^(-beta) / sigma + (-beta - 1) sigma Z^beta / 2,  Z = from_bessel(x).
/// Uses the uncapped intensity.
double bessel_drift(const JdcevParams& params, double x);

}  // namespace sinkbond
