#include "sinkbond/jdcev.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sinkbond/error.hpp"

namespace sinkbond {

void JdcevParams::validate() const {
  auto bad = [](const char* what, double v) {
    return ValidationError(std::string("JDCEV parameter ") + what + " out of domain: " +
                           std::to_string(v));
  };
  if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) throw bad("lambda0 (> 0)", lambda0);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw bad("sigma (> 0)", sigma);
  if (!(beta < 0.0) || !std::isfinite(beta)) throw bad("beta (< 0)", beta);
  if (!(z0 > 0.0) || !std::isfinite(z0)) throw bad("z0 (> 0)", z0);
}

namespace {

double raw_intensity(const JdcevParams& p, double z_level) {
  return p.lambda0 * std::pow(z_level / p.z0, 2.0 * p.beta);
}

}  // namespace

double intensity(const JdcevParams& params, double z_level, double cap) {
  if (params.lambda0 == 0.0) return 0.0;
  if (!(z_level > 0.0)) return cap;
  const double value = raw_intensity(params, z_level);
  return std::isfinite(value) && value < cap ? value : cap;
}

double to_bessel(const JdcevParams& params, double z_level) {
  if (!(z_level > 0.0)) {
    throw ValidationError("Bessel transform needs a positive stock level");
  }
  return std::pow(z_level, -params.beta) / (params.sigma * -params.beta);
}

double from_bessel(const JdcevParams& params, double x) {
  if (!(x > 0.0)) {
    throw ValidationError("inverse Bessel transform needs a positive coordinate");
  }
  return std::pow(x * params.sigma * -params.beta, -1.0 / params.beta);
}

double bessel_drift(const JdcevParams& params, double x) {
  const double z = from_bessel(params, x);
  const double lambda = raw_intensity(params, z);
  return lambda * std::pow(z, -params.beta) / params.sigma +
         0.5 * (-params.beta - 1.0) * params.sigma * std::pow(z, params.beta);
}

}  // namespace sinkbond
