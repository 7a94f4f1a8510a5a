#pragma once

// Refractive index, wavenumber and group delay per crystal axis, wavelength
// and temperature. All results carry an out-of-validity flag instead of
// failing: queries outside the transparency window or outside a coefficient
// set's fit band evaluate anyway and mark the result.

#include "spdc/crystal.hpp"

namespace spdc {

struct OpticalQuery {
  const Crystal* crystal = nullptr;
  Axis axis = Axis::O;
  double lambda_um = 0.0;
  double temperature_c = 25.0;
};

struct Flagged {
  double value = 0.0;
  bool flagged = false;  // out of transparency/fit window, or thermo data missing
};

// True if the dispersion code implements this Sellmeier form tag.
bool sellmeier_form_known(std::string_view tag);
bool thermo_form_known(std::string_view tag);

Flagged refractive_index(const OpticalQuery& q);

// k = 2 pi n / lambda, rad/um
Flagged wavenumber(const OpticalQuery& q);

// GD = dk/domega, ps/mm; central difference on k(omega) with relative step
// 1e-5, Richardson-extrapolated once.
Flagged group_delay(const OpticalQuery& q);

// Resolves the form dispatch and temperature correction once for repeated
// evaluation on a single axis — the grid builders and sweep loops call n()/k()
// hundreds of thousands of times.
class IndexModel {
 public:
  IndexModel(const Crystal& crystal, Axis axis, double temperature_c);

  double n(double lambda_um) const;
  double k(double lambda_um) const { return 6.283185307179586 * n(lambda_um) / lambda_um; }
  bool out_of_band(double lambda_um) const;  // transparency or fit window
  double band_lo() const { return band_lo_; }
  double band_hi() const { return band_hi_; }
  bool thermo_missing() const { return thermo_missing_; }

 private:
  enum class Form { Pole1, Pole2, Const } form_;
  double c_[6] = {0, 0, 0, 0, 0, 0};
  bool has_thermo_ = false;
  double t1_[4] = {0, 0, 0, 0};
  double t2_[4] = {0, 0, 0, 0};
  double dT_ = 0.0;
  double band_lo_ = 0.0, band_hi_ = 0.0;  // intersection bound used by out_of_band
  bool thermo_missing_ = false;
  const char* who_ = "";
};

// Same differentiation scheme as group_delay, without flag bookkeeping.
double group_delay_value(const IndexModel& m, double lambda_um);

}  // namespace spdc
