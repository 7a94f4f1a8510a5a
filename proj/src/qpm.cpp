#include "spdc/qpm.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/units.hpp"

namespace spdc {

namespace {

// bulk mismatch k_p - k_s - k_i (no grating term), with flag propagation
Flagged bulk_mismatch(const Crystal& c, PolarizationConfig pols, double lp, double ls,
                      double li, double T) {
  Flagged kp = wavenumber({&c, pols.pump, lp, T});
  Flagged ks = wavenumber({&c, pols.signal, ls, T});
  Flagged ki = wavenumber({&c, pols.idler, li, T});
  return {kp.value - ks.value - ki.value, kp.flagged || ks.flagged || ki.flagged};
}

// signal window for root scans: both daughters inside transparency
bool signal_window(const Crystal& c, double lp, double& lo, double& hi) {
  // idler transparency bounds translated into signal bounds
  // li <= t_hi  <=>  ls >= 1/(1/lp - 1/t_hi)
  double lo_from_idler = idler_wavelength(lp, c.transparency_hi);
  if (lo_from_idler < 0) lo_from_idler = lp;  // t_hi beyond 2x pump scale: no bound
  lo = std::max(c.transparency_lo, lo_from_idler);
  lo = std::max(lo, lp * (1.0 + 1e-9));
  hi = c.transparency_hi;
  // idler >= t_lo  <=>  ls <= 1/(1/lp - 1/t_lo); only binds if lp < t_lo is false...
  if (lp < c.transparency_lo) return false;
  double hi_from_idler = 1.0 / lp - 1.0 / c.transparency_lo;  // 1/li left over
  if (hi_from_idler > 0) hi = std::min(hi, 1.0 / hi_from_idler);
  // tiny margins keep derivative stencils and 1/lambda differences finite
  lo *= 1.0 + 1e-12;
  hi *= 1.0 - 1e-12;
  return lo < hi;
}

}  // namespace

void SpdcProcess::validate() const {
  if (!crystal) throw ValidationError("SpdcProcess: null crystal");
  if (!(lambda_p > 0 && lambda_s > 0 && lambda_i > 0))
    throw ValidationError("SpdcProcess: wavelengths must be positive");
  double lhs = 1.0 / lambda_p, rhs = 1.0 / lambda_s + 1.0 / lambda_i;
  if (std::abs(lhs - rhs) > 1e-12 * lhs)
    throw ValidationError("SpdcProcess: energy conservation violated (1/lp != 1/ls + 1/li)");
  if (qpm_order % 2 == 0) throw ValidationError("SpdcProcess: QPM order must be odd");
  if (!(length_mm > 0)) throw ValidationError("SpdcProcess: crystal length must be positive");
  if (poling_period_um && !(*poling_period_um > 0))
    throw ValidationError("SpdcProcess: poling period must be positive (or bulk)");
}

SpdcProcess make_process(const Crystal& crystal, PolarizationConfig pols, double lambda_p,
                         double lambda_s, double temperature_c,
                         std::optional<double> poling_period_um, double length_mm,
                         int qpm_order) {
  SpdcProcess p;
  p.crystal = &crystal;
  p.pols = pols;
  p.lambda_p = lambda_p;
  p.lambda_s = lambda_s;
  p.lambda_i = idler_wavelength(lambda_p, lambda_s);
  p.temperature_c = temperature_c;
  p.poling_period_um = poling_period_um;
  p.length_mm = length_mm;
  p.qpm_order = qpm_order;
  p.validate();
  return p;
}

Flagged phase_mismatch(const SpdcProcess& p) {
  p.validate();
  Flagged dk = bulk_mismatch(*p.crystal, p.pols, p.lambda_p, p.lambda_s, p.lambda_i,
                             p.temperature_c);
  if (p.poling_period_um) dk.value -= kTwoPi * p.qpm_order / *p.poling_period_um;
  return dk;
}

PolingResult solve_poling_period(const Crystal& crystal, PolarizationConfig pols,
                                 double lambda_p, double lambda_s, double temperature_c,
                                 int m) {
  if (m % 2 == 0) throw ValidationError("QPM order must be odd");
  double li = idler_wavelength(lambda_p, lambda_s);
  if (!(li > 0)) throw ValidationError("signal wavelength must exceed the pump wavelength");
  Flagged dk = bulk_mismatch(crystal, pols, lambda_p, lambda_s, li, temperature_c);
  PolingResult r;
  r.flagged = dk.flagged;
  if (dk.value == 0.0) {
    r.status = PolingStatus::BulkMatched;
    return r;
  }
  double period = kTwoPi * m / dk.value;
  if (period <= 0) {
    r.status = PolingStatus::WrongSign;
    return r;
  }
  r.status = PolingStatus::Ok;
  r.period_um = period;
  return r;
}

FirstOrderPoling solve_first_order_period(const Crystal& crystal, PolarizationConfig pols,
                                          double lambda_p, double lambda_s,
                                          double temperature_c) {
  PolingResult plus = solve_poling_period(crystal, pols, lambda_p, lambda_s, temperature_c, 1);
  if (plus.status != PolingStatus::WrongSign) return {plus, 1};
  return {solve_poling_period(crystal, pols, lambda_p, lambda_s, temperature_c, -1), -1};
}

std::vector<double> solve_signal_wavelength(const Crystal& crystal, PolarizationConfig pols,
                                            double lambda_p,
                                            std::optional<double> period_um,
                                            double temperature_c, int m, int samples) {
  if (samples < 8) throw ValidationError("root scan needs at least 8 samples");
  if (!crystal.in_transparency(lambda_p)) return {};
  double lo, hi;
  if (!signal_window(crystal, lambda_p, lo, hi)) return {};

  const double grating = period_um ? kTwoPi * m / *period_um : 0.0;
  auto mismatch = [&](double ls) {
    return bulk_mismatch(crystal, pols, lambda_p, ls, idler_wavelength(lambda_p, ls),
                         temperature_c)
               .value -
           grating;
  };

  std::vector<double> roots;
  const double step = (hi - lo) / samples;
  double x0 = lo, f0 = mismatch(x0);
  for (int i = 1; i <= samples; ++i) {
    double x1 = lo + i * step, f1 = mismatch(x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if (std::isfinite(f0) && std::isfinite(f1) && f0 * f1 < 0.0) {
      double a = x0, b = x1, fa = f0;
      for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
        double mid = 0.5 * (a + b), fm = mismatch(mid);
        if (fm == 0.0) {
          a = b = mid;
          break;
        }
        if (fa * fm < 0.0) {
          b = mid;
        } else {
          a = mid;
          fa = fm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    f0 = f1;
  }
  // dedup rule: no two roots within one sample spacing
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || r - out.back() > step) out.push_back(r);
  return out;
}

std::complex<double> qpm_amplitude(double dk_rad_um, double length_mm) {
  if (!(length_mm > 0)) throw ValidationError("crystal length must be positive");
  double x = 0.5 * dk_rad_um * length_mm * 1e3;  // L in um
  return std::polar(1.0, x) * sinc(x);
}

std::vector<BulkLocusRow> bulk_phasematch_locus(const Crystal& crystal,
                                                PolarizationConfig pols, double lambda_p_lo,
                                                double lambda_p_hi, int pump_samples,
                                                double temperature_c) {
  if (!(lambda_p_lo > 0 && lambda_p_lo < lambda_p_hi))
    throw ValidationError("bad pump range for bulk locus");
  std::vector<BulkLocusRow> rows;
  for (int i = 0; i < pump_samples; ++i) {
    double lp = lambda_p_lo + (lambda_p_hi - lambda_p_lo) * i / double(pump_samples - 1);
    if (!crystal.in_transparency(lp)) continue;
    BulkLocusRow row;
    row.lambda_p = lp;
    row.lambda_s =
        solve_signal_wavelength(crystal, pols, lp, std::nullopt, temperature_c, 1, 2000);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace spdc
