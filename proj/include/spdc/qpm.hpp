#pragma once

// Quasi-phase-matching: mismatch evaluation and the root solvers around
// Dk_m = k_p - k_s - k_i - 2 pi m / Lambda (grating term absent for bulk).

#include <complex>
#include <optional>
#include <vector>

#include "spdc/dispersion.hpp"

namespace spdc {

// Thrown when an iterative solver fails to converge (CLI exit code 4).
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double idler_wavelength(double lambda_p, double lambda_s) {
  return 1.0 / (1.0 / lambda_p - 1.0 / lambda_s);
}

struct SpdcProcess {
  const Crystal* crystal = nullptr;
  PolarizationConfig pols;
  double lambda_p = 0.0;  // um
  double lambda_s = 0.0;
  double lambda_i = 0.0;
  double temperature_c = 25.0;
  std::optional<double> poling_period_um;  // nullopt = bulk (no grating)
  int qpm_order = 1;                       // odd
  double length_mm = 0.0;

  void validate() const;  // throws ValidationError on broken invariants
};

// Convenience constructor: idler from energy conservation.
SpdcProcess make_process(const Crystal& crystal, PolarizationConfig pols, double lambda_p,
                         double lambda_s, double temperature_c,
                         std::optional<double> poling_period_um, double length_mm,
                         int qpm_order = 1);

Flagged phase_mismatch(const SpdcProcess& p);  // rad/um

enum class PolingStatus { Ok, BulkMatched, WrongSign };

struct PolingResult {
  PolingStatus status = PolingStatus::Ok;
  double period_um = 0.0;  // valid when status == Ok
  bool flagged = false;
};

// Lambda = m 2 pi / (k_p - k_s - k_i); WrongSign when the bulk mismatch and m
// have opposite signs (no positive period), BulkMatched when it is zero.
PolingResult solve_poling_period(const Crystal& crystal, PolarizationConfig pols,
                                 double lambda_p, double lambda_s, double temperature_c,
                                 int m = 1);

struct FirstOrderPoling {
  PolingResult result;
  int m = 1;  // +1 or -1, whichever yields a positive period
};

// Searches and the CLI sweep first order only: try m = +1 then m = -1.
FirstOrderPoling solve_first_order_period(const Crystal& crystal, PolarizationConfig pols,
                                          double lambda_p, double lambda_s,
                                          double temperature_c);

// All signal-wavelength roots of Dk_m = 0 for a fixed grating (or bulk when
// period is nullopt): 2000-sample sign-change scan + bisection over the window
// where signal and idler both stay inside the transparency range. Empty result
// is a valid answer.
std::vector<double> solve_signal_wavelength(const Crystal& crystal, PolarizationConfig pols,
                                            double lambda_p,
                                            std::optional<double> period_um,
                                            double temperature_c, int m = 1,
                                            int samples = 2000);

// psi = exp(i Dk L/2) sinc(Dk L/2); L in mm, Dk in rad/um.
std::complex<double> qpm_amplitude(double dk_rad_um, double length_mm);

struct BulkLocusRow {
  double lambda_p = 0.0;
  std::vector<double> lambda_s;  // all bulk-matched signal roots at this pump
};

std::vector<BulkLocusRow> bulk_phasematch_locus(const Crystal& crystal,
                                                PolarizationConfig pols, double lambda_p_lo,
                                                double lambda_p_hi, int pump_samples,
                                                double temperature_c);

}  // namespace spdc
