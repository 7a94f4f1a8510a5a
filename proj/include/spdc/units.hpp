#pragma once

// Unit conventions, fixed at every module boundary:
//   wavelength  lambda : um (vacuum)
//   angular freq omega : rad/ps
//   wavenumber  k      : rad/um
//   group delay GD     : ps/mm
//   crystal length L   : mm
//   pulse duration tau : ps (intensity FWHM)
//   temperature T      : degC

#include <cmath>

namespace spdc {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// speed of light
inline constexpr double kC_um_per_ps = 299.792458;
inline constexpr double kC_mm_per_ps = 0.299792458;

// omega [rad/ps] <-> vacuum wavelength [um]
inline double omega_from_lambda(double lambda_um) {
  return kTwoPi * kC_um_per_ps / lambda_um;
}
inline double lambda_from_omega(double omega_rad_ps) {
  return kTwoPi * kC_um_per_ps / omega_rad_ps;
}

// unnormalized sinc, sinc(0) = 1
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace spdc
