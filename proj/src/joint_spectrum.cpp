#include "spdc/joint_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "json.hpp"
#include "spdc/units.hpp"
#include "spdc/util/svd.hpp"
#include "spdc/util/table.hpp"

namespace spdc {
namespace {

// d2k/domega2 in ps^2/um, central difference of the group delay
double gvd_per_um(const IndexModel& m, double lambda_um) {
  const double w0 = omega_from_lambda(lambda_um);
  const double h = 1e-4 * w0;
  const double hi = group_delay_value(m, lambda_from_omega(w0 + h));
  const double lo = group_delay_value(m, lambda_from_omega(w0 - h));
  return (hi - lo) / (2.0 * h) * 1e-3;
}

// sigma^2 lambda_k from singular values, descending, sum 1
std::vector<double> schmidt_weights(const std::vector<double>& sv) {
  double s2 = 0.0;
  for (double v : sv) s2 += v * v;
  if (!(s2 > 0.0)) throw ValidationError("cannot decompose an all-zero grid");
  std::vector<double> w(sv.size());
  for (size_t i = 0; i < sv.size(); ++i) w[i] = sv[i] * sv[i] / s2;
  return w;
}

double schmidt_number(const std::vector<double>& w) {
  double purity = 0.0;
  for (double v : w) purity += v * v;
  return 1.0 / purity;
}

// FWHM of a sampled marginal in nm; NaN when a half crossing lies outside the
// window (the caller flags that). Walks outward from the peak, so sinc side
// lobes below half maximum cannot confuse it.
double fwhm_nm(const Eigen::VectorXd& lambda, const Eigen::VectorXd& p) {
  const int n = static_cast<int>(p.size());
  int jm = 0;
  for (int j = 1; j < n; ++j)
    if (p[j] > p[jm]) jm = j;
  const double half = 0.5 * p[jm];
  int j = jm;
  while (j > 0 && p[j - 1] >= half) --j;
  int l = jm;
  while (l < n - 1 && p[l + 1] >= half) ++l;
  if (j == 0 || l == n - 1) return std::numeric_limits<double>::quiet_NaN();
  const double left =
      lambda[j - 1] + (half - p[j - 1]) / (p[j] - p[j - 1]) * (lambda[j] - lambda[j - 1]);
  const double right =
      lambda[l] + (p[l] - half) / (p[l] - p[l + 1]) * (lambda[l + 1] - lambda[l]);
  return (right - left) * 1e3;
}

// marginal peak with three-point parabolic refinement
double peak_wavelength(const Eigen::VectorXd& lambda, const Eigen::VectorXd& p) {
  const int n = static_cast<int>(p.size());
  int jm = 0;
  for (int j = 1; j < n; ++j)
    if (p[j] > p[jm]) jm = j;
  if (jm == 0 || jm == n - 1) return lambda[jm];
  const double y0 = p[jm - 1], y1 = p[jm], y2 = p[jm + 1];
  const double curv = y0 - 2.0 * y1 + y2;
  if (!(curv < 0.0)) return lambda[jm];
  return lambda[jm] + 0.5 * (y0 - y2) / curv * (lambda[1] - lambda[0]);
}

bool same_axis(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  return (a - b).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff();
}

// Bilinear resampling of a density matrix onto a new (uniform) wavelength
// axis, zero outside the source range, trace renormalized.
Eigen::MatrixXcd resample_density(const Eigen::MatrixXcd& rho, const Eigen::VectorXd& from,
                                  const Eigen::VectorXd& to) {
  const int nf = static_cast<int>(from.size()), nt = static_cast<int>(to.size());
  const double lo = from[0];
  const double step = (from[nf - 1] - from[0]) / (nf - 1);
  std::vector<int> idx(nt);
  std::vector<double> frac(nt);
  std::vector<char> inside(nt);
  for (int j = 0; j < nt; ++j) {
    const double x = (to[j] - lo) / step;
    inside[j] = x >= 0.0 && x <= nf - 1;
    const int k = std::clamp(static_cast<int>(std::floor(x)), 0, nf - 2);
    idx[j] = k;
    frac[j] = x - k;
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nt, nt);
  for (int j = 0; j < nt; ++j) {
    if (!inside[j]) continue;
    const int a = idx[j];
    const double fa = frac[j];
    for (int l = 0; l < nt; ++l) {
      if (!inside[l]) continue;
      const int b = idx[l];
      const double fb = frac[l];
      out(j, l) = (1 - fa) * ((1 - fb) * rho(a, b) + fb * rho(a, b + 1)) +
                  fa * ((1 - fb) * rho(a + 1, b) + fb * rho(a + 1, b + 1));
    }
  }
  const double tr = out.trace().real();
  if (tr > 0.0) out /= tr;
  return out;
}

}  // namespace

double PumpPulse::sigma_omega() const { return std::sqrt(2.0 * std::log(2.0)) / tau_ps; }

void PumpPulse::validate() const {
  if (!(lambda0_um > 0.0)) throw ValidationError("pump wavelength must be positive");
  if (!(tau_ps > 0.0)) throw ValidationError("pump duration must be positive");
}

std::complex<double> pump_amplitude(const PumpPulse& pump, double omega_sum_rad_ps) {
  const double s = pump.sigma_omega();
  const double d = omega_sum_rad_ps - omega_from_lambda(pump.lambda0_um);
  return {std::exp(-d * d / (4.0 * s * s)), 0.0};
}

JointSpectrum build_jsa(const SpdcProcess& process, const PumpPulse& pump,
                        const GridSpec& grid) {
  process.validate();
  pump.validate();
  if (grid.n < 8 || grid.n > 8192)
    throw ValidationError("grid size must lie between 8 and 8192");
  if (!(grid.window_factor > 0.0)) throw ValidationError("window factor must be positive");
  if (std::abs(pump.lambda0_um - process.lambda_p) > 1e-9 * process.lambda_p)
    throw ValidationError("pump center wavelength disagrees with the process pump wavelength");

  const Crystal& cr = *process.crystal;
  const double T = process.temperature_c;
  const IndexModel mp(cr, process.pols.pump, T);
  const IndexModel ms(cr, process.pols.signal, T);
  const IndexModel mi(cr, process.pols.idler, T);

  // A grating that is badly off (wrong period, wrong order sign) would fill
  // the window with side lobes; refuse unless the caller opts in.
  {
    const Flagged dk0 = phase_mismatch(process);
    const double x0 = std::abs(0.5 * dk0.value * process.length_mm * 1e3);
    if (x0 > 0.5 * kPi && !grid.allow_center_mismatch)
      throw ValidationError(
          "phase mismatch at the grid center exceeds pi/2; check the poling period "
          "and order, or set allow_center_mismatch");
  }

  const double ws0 = omega_from_lambda(process.lambda_s);
  const double wi0 = omega_from_lambda(process.lambda_i);
  const double sw = pump.sigma_omega();

  // Automatic window. The amplitude lives where the pump ridge
  // |dws + dwi| <= p and the sinc band |a dws + b dwi| <= q overlap, with
  // a = GDp - GDs and b = GDp - GDi the group-delay walk-offs. The bounding
  // box of that parallelogram gives exact per-axis half-widths; when the two
  // ridges are (near) parallel the strip length is set by group-velocity
  // dispersion instead.
  const double gd_p = group_delay_value(mp, process.lambda_p);
  const double gd_s = group_delay_value(ms, process.lambda_s);
  const double gd_i = group_delay_value(mi, process.lambda_i);
  const double a_um = (gd_p - gd_s) * 1e-3;  // ps/um
  const double b_um = (gd_p - gd_i) * 1e-3;
  const double length_um = process.length_mm * 1e3;
  const double p = grid.window_factor * sw;
  const double q = 0.75 * grid.window_factor * kTwoPi / length_um;
  double w_s, w_i;
  const double denom = std::abs(b_um - a_um);
  if (denom > 1e-3 * std::max(std::abs(a_um), std::abs(b_um))) {
    w_s = (std::abs(b_um) * p + q) / denom;
    w_i = (std::abs(a_um) * p + q) / denom;
  } else {
    const double kappa =
        std::abs(gvd_per_um(ms, process.lambda_s) + gvd_per_um(mi, process.lambda_i));
    w_s = w_i = p + std::sqrt(2.0 * q / std::max(kappa, 1e-12));
  }
  if (grid.halfwidth_s) w_s = *grid.halfwidth_s;
  if (grid.halfwidth_i) w_i = *grid.halfwidth_i;
  if (!std::isfinite(w_s) || !std::isfinite(w_i) || !(w_s > 0.0) || !(w_i > 0.0))
    throw ValidationError("window half-widths must be positive and finite");
  w_s = std::min(w_s, 0.4 * ws0);
  w_i = std::min(w_i, 0.4 * wi0);

  JointSpectrum js;
  js.process = process;
  js.pump = pump;

  double ls_lo = lambda_from_omega(ws0 + w_s), ls_hi = lambda_from_omega(ws0 - w_s);
  double li_lo = lambda_from_omega(wi0 + w_i), li_hi = lambda_from_omega(wi0 - w_i);
  const bool degenerate = std::abs(process.lambda_s - process.lambda_i) < 1e-9;
  if (degenerate) {  // one common axis so the reduced states share a basis
    ls_lo = li_lo = std::min(ls_lo, li_lo);
    ls_hi = li_hi = std::max(ls_hi, li_hi);
  }
  auto clamp_axis = [&js](double& lo, double& hi, const IndexModel& m, const char* arm) {
    if (lo < m.band_lo()) {
      lo = m.band_lo();
      js.window_clamped = true;
    }
    if (hi > m.band_hi()) {
      hi = m.band_hi();
      js.window_clamped = true;
    }
    if (!(lo < hi))
      throw ValidationError(std::string(arm) +
                            " window collapsed after clamping to the data validity range");
  };
  clamp_axis(ls_lo, ls_hi, ms, "signal");
  clamp_axis(li_lo, li_hi, mi, "idler");
  if (degenerate) {
    ls_lo = li_lo = std::max(ls_lo, li_lo);
    ls_hi = li_hi = std::min(ls_hi, li_hi);
    if (!(ls_lo < ls_hi))
      throw ValidationError("window collapsed after clamping to the data validity range");
  }

  const int n = grid.n;
  js.lambda_s.resize(n);
  js.lambda_i.resize(n);
  Eigen::VectorXd omega_s(n), omega_i(n), k_s(n), k_i(n);
  const double ds = (ls_hi - ls_lo) / (n - 1);
  const double di = (li_hi - li_lo) / (n - 1);
  bool flagged = mp.thermo_missing() || ms.thermo_missing() || mi.thermo_missing();
  for (int j = 0; j < n; ++j) {
    const double l = ls_lo + ds * j;
    js.lambda_s[j] = l;
    omega_s[j] = omega_from_lambda(l);
    k_s[j] = ms.k(l);
    flagged = flagged || ms.out_of_band(l);
  }
  for (int l = 0; l < n; ++l) {
    const double lam = li_lo + di * l;
    js.lambda_i[l] = lam;
    omega_i[l] = omega_from_lambda(lam);
    k_i[l] = mi.k(lam);
    flagged = flagged || mi.out_of_band(lam);
  }

  const double grating =
      process.poling_period_um ? kTwoPi * process.qpm_order / *process.poling_period_um : 0.0;
  const double wp0 = omega_from_lambda(pump.lambda0_um);
  const double inv4s2 = 1.0 / (4.0 * sw * sw);
  js.amp.resize(n, n);
  double norm2 = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      const double wsum = omega_s[j] + omega_i[l];
      const double d = wsum - wp0;
      const double mu = std::exp(-d * d * inv4s2);
      const double lp = kTwoPi * kC_um_per_ps / wsum;
      const double np = mp.n(lp);
      std::complex<double> cell(0.0, 0.0);
      if (std::isfinite(np)) {
        const double dk = kTwoPi * np / lp - k_s[j] - k_i[l] - grating;
        cell = mu * qpm_amplitude(dk, process.length_mm);
        if (mu > 1e-12 && mp.out_of_band(lp)) flagged = true;
      } else if (mu > 1e-12) {
        flagged = true;  // pump index undefined where the pump still has weight
      }
      js.amp(j, l) = cell;
      norm2 += std::norm(cell);
    }
  }
  if (!(norm2 > 0.0)) throw ValidationError("joint amplitude vanished on the whole grid");
  js.amp /= std::sqrt(norm2);
  js.dispersion_flagged = flagged;
  return js;
}

SchmidtReport schmidt_decompose(const JointSpectrum& js, SchmidtBasis basis) {
  SchmidtReport r;
  std::vector<double> sv;
  if (basis == SchmidtBasis::Amplitude) {
    sv = util::singular_values(js.amp);
  } else {
    Eigen::MatrixXd jsi = js.amp.cwiseAbs2();
    sv = util::singular_values(std::move(jsi));
  }
  r.coefficients = schmidt_weights(sv);
  r.K = schmidt_number(r.coefficients);
  r.P = 1.0 / r.K;
  if (basis == SchmidtBasis::Intensity) r.K_JSI = r.K;
  r.flagged = js.window_clamped || js.dispersion_flagged;
  return r;
}

SchmidtReport full_report(const JointSpectrum& js) {
  SchmidtReport r = schmidt_decompose(js, SchmidtBasis::Amplitude);
  {
    Eigen::MatrixXd jsi = js.amp.cwiseAbs2();
    r.K_JSI = schmidt_number(schmidt_weights(util::singular_values(std::move(jsi))));
  }
  const MarginalData m = marginals(js);
  r.fwhm_s_nm = m.fwhm_s_nm;
  r.fwhm_i_nm = m.fwhm_i_nm;
  r.delta = distinguishability(js);
  r.v_hom = r.P - r.delta;
  if (!std::isfinite(r.fwhm_s_nm) || !std::isfinite(r.fwhm_i_nm)) r.flagged = true;
  return r;
}

MarginalData marginals(const JointSpectrum& js) {
  const Eigen::MatrixXd jsi = js.amp.cwiseAbs2();
  MarginalData m;
  m.signal = jsi.rowwise().sum();
  m.idler = jsi.colwise().sum().transpose();
  m.signal /= m.signal.sum();
  m.idler /= m.idler.sum();
  m.fwhm_s_nm = fwhm_nm(js.lambda_s, m.signal);
  m.fwhm_i_nm = fwhm_nm(js.lambda_i, m.idler);
  return m;
}

DispersionParameter dispersion_parameter(const Crystal& crystal, PolarizationConfig pols,
                                         double lambda_p, double lambda_s, double lambda_i,
                                         double temperature_c) {
  const Flagged gp = group_delay({&crystal, pols.pump, lambda_p, temperature_c});
  const Flagged gs = group_delay({&crystal, pols.signal, lambda_s, temperature_c});
  const Flagged gi = group_delay({&crystal, pols.idler, lambda_i, temperature_c});
  DispersionParameter d;
  d.flagged = gp.flagged || gs.flagged || gi.flagged;
  const double a = gp.value - gs.value, b = gp.value - gi.value;
  d.d1 = -a / b;
  d.d2 = -b / a;
  d.canonical = std::abs(d.d1) <= std::abs(d.d2) ? d.d1 : d.d2;
  return d;
}

Eigen::MatrixXcd reduced_signal(const JointSpectrum& js) {
  const int n = static_cast<int>(js.amp.rows());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  rho.selfadjointView<Eigen::Lower>().rankUpdate(js.amp);  // A A^dag
  rho = rho.selfadjointView<Eigen::Lower>();
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw ValidationError("reduced state has zero trace");
  rho /= tr;
  return rho;
}

Eigen::MatrixXcd reduced_idler(const JointSpectrum& js) {
  const int n = static_cast<int>(js.amp.cols());
  const Eigen::MatrixXcd at = js.amp.adjoint();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  rho.selfadjointView<Eigen::Lower>().rankUpdate(at);  // A^dag A
  rho = rho.selfadjointView<Eigen::Lower>();
  rho = rho.conjugate();  // A^T A^* on the idler index
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw ValidationError("reduced state has zero trace");
  rho /= tr;
  return rho;
}

namespace {

// Deterministic arrival-time offset of one daughter relative to the pump: the
// linear part of the QPM phase exp(i Dk L/2) is a pure delay (GD_p - GD_arm)
// L/2, which the delay stage of any HOM measurement dials away.
double arm_delay_ps(const JointSpectrum& js, bool signal_arm) {
  const SpdcProcess& p = js.process;
  const IndexModel mp(*p.crystal, p.pols.pump, p.temperature_c);
  const IndexModel ma(*p.crystal, signal_arm ? p.pols.signal : p.pols.idler, p.temperature_c);
  const double lam = signal_arm ? p.lambda_s : p.lambda_i;
  const double walkoff_um =
      (group_delay_value(mp, p.lambda_p) - group_delay_value(ma, lam)) * 1e-3;  // ps/um
  return 0.5 * walkoff_um * p.length_mm * 1e3;
}

// Re Tr(rho_a U rho_b U^dag) with U = diag(exp(i omega tau)) via
// v^dag (rho_a o rho_b^T) v, one mat-vec per delay.
double delayed_overlap(const Eigen::MatrixXcd& m, const Eigen::VectorXd& omega, double tau) {
  Eigen::VectorXcd v(omega.size());
  for (Eigen::Index j = 0; j < omega.size(); ++j) v[j] = std::polar(1.0, omega[j] * tau);
  return v.dot(m * v).real();
}

// The overlap term of the HOM bound, maximized over the relative delay of the
// two photons (coarse scan around the analytic arrival-time seed, then golden
// section). Without this the bound would count a deterministic path-length
// difference as distinguishability.
double best_overlap(const Eigen::MatrixXcd& ra, const Eigen::MatrixXcd& rb,
                    const Eigen::VectorXd& lambda_axis, double seed_delay_ps) {
  const Eigen::Index n = lambda_axis.size();
  Eigen::VectorXd omega(n);
  for (Eigen::Index j = 0; j < n; ++j) omega[j] = omega_from_lambda(lambda_axis[j]);
  const Eigen::MatrixXcd m = ra.cwiseProduct(rb.transpose());

  const double span = std::abs(omega[n - 1] - omega[0]);
  const double margin = 0.5 * std::abs(seed_delay_ps) + 64.0 * kPi / std::max(span, 1e-12);
  const double lo = std::min({0.0, seed_delay_ps, -seed_delay_ps}) - margin;
  const double hi = std::max({0.0, seed_delay_ps, -seed_delay_ps}) + margin;
  const int coarse = 65;
  double best_tau = 0.0, best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < coarse; ++i) {
    const double tau = lo + (hi - lo) * i / (coarse - 1);
    const double v = delayed_overlap(m, omega, tau);
    if (v > best) {
      best = v;
      best_tau = tau;
    }
  }
  const double step = (hi - lo) / (coarse - 1);
  double a = best_tau - step, b = best_tau + step;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = delayed_overlap(m, omega, x1), f2 = delayed_overlap(m, omega, x2);
  for (int it = 0; it < 60 && (b - a) > 1e-6; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = delayed_overlap(m, omega, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = delayed_overlap(m, omega, x1);
    }
  }
  return std::max({best, f1, f2});
}

}  // namespace

double distinguishability(const JointSpectrum& js) {
  const Eigen::MatrixXcd rs = reduced_signal(js);
  Eigen::MatrixXcd ri = reduced_idler(js);
  if (!same_axis(js.lambda_s, js.lambda_i)) ri = resample_density(ri, js.lambda_i, js.lambda_s);
  const double seed = arm_delay_ps(js, true) - arm_delay_ps(js, false);
  const double overlap = best_overlap(rs, ri, js.lambda_s, seed);
  return std::max(0.0, 0.5 * (rs.squaredNorm() + ri.squaredNorm()) - overlap);
}

HomBound hom_visibility_bound(const JointSpectrum& a, const JointSpectrum& b) {
  const Eigen::MatrixXcd ra = reduced_signal(a);
  Eigen::MatrixXcd rb = reduced_idler(b);
  const double pa = ra.squaredNorm();  // Tr rho^2
  const double pb = rb.squaredNorm();
  HomBound h;
  if (!same_axis(a.lambda_s, b.lambda_i)) {
    rb = resample_density(rb, b.lambda_i, a.lambda_s);
    h.axes_differ = true;
  }
  const double seed = arm_delay_ps(a, true) - arm_delay_ps(b, false);
  const double overlap = best_overlap(ra, rb, a.lambda_s, seed);
  const double dist2 = ra.squaredNorm() + rb.squaredNorm() - 2.0 * overlap;
  h.v = 0.5 * (pa + pb) - 0.5 * std::max(0.0, dist2);
  return h;
}

FilterResult apply_bandpass(const JointSpectrum& js, double fwhm_s_nm, double fwhm_i_nm) {
  if (!(fwhm_s_nm > 0.0) || !(fwhm_i_nm > 0.0))
    throw ValidationError("filter bandwidths must be positive");
  const int n = static_cast<int>(js.amp.rows());
  const double ws_um = fwhm_s_nm * 1e-3, wi_um = fwhm_i_nm * 1e-3;
  const double ds = js.lambda_s[1] - js.lambda_s[0];
  const double di = js.lambda_i[1] - js.lambda_i[0];
  if (ws_um < 3.0 * ds || wi_um < 3.0 * di)
    throw ValidationError("filter under-resolved: bandwidth narrower than three grid steps");

  const MarginalData m = marginals(js);
  const double cs = peak_wavelength(js.lambda_s, m.signal);
  const double ci = peak_wavelength(js.lambda_i, m.idler);
  // Gaussian filter function multiplying the joint amplitude; fwhm is the
  // half-maximum width of this function itself (the published filtering
  // curves follow this convention), so the induced intensity transmission is
  // narrower by sqrt(2)
  const double as = 4.0 * std::log(2.0) / (ws_um * ws_um);
  const double ai = 4.0 * std::log(2.0) / (wi_um * wi_um);
  Eigen::VectorXd fs(n), fi(n);
  for (int j = 0; j < n; ++j) {
    const double u = js.lambda_s[j] - cs;
    fs[j] = std::exp(-as * u * u);
  }
  for (int l = 0; l < n; ++l) {
    const double u = js.lambda_i[l] - ci;
    fi[l] = std::exp(-ai * u * u);
  }
  FilterResult out{js, 0.0};
  const double before = js.amp.squaredNorm();
  out.filtered.amp = fs.asDiagonal() * js.amp * fi.asDiagonal();
  const double kept = out.filtered.amp.squaredNorm();
  if (!(kept > 0.0)) throw ValidationError("filter removed the entire joint amplitude");
  out.transmitted_fraction = kept / before;
  out.filtered.amp /= std::sqrt(kept);
  return out;
}

std::string export_matrix(const JointSpectrum& js, bool intensity) {
  const int n = static_cast<int>(js.amp.rows()), m = static_cast<int>(js.amp.cols());
  std::string out;
  out.reserve(static_cast<size_t>(n) * m * (intensity ? 14 : 28));
  const auto emit_block = [&](auto&& cell) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < m; ++l) {
        if (l) out.push_back(' ');
        out += util::fmt_g(cell(j, l), 9);
      }
      out.push_back('\n');
    }
  };
  if (intensity) {
    emit_block([&](int j, int l) { return std::norm(js.amp(j, l)); });
  } else {  // real block, blank line, imaginary block
    emit_block([&](int j, int l) { return js.amp(j, l).real(); });
    out.push_back('\n');
    emit_block([&](int j, int l) { return js.amp(j, l).imag(); });
  }
  return out;
}

std::string export_metadata(const JointSpectrum& js) {
  nlohmann::json j;
  j["crystal"] = js.process.crystal->name;
  j["polarizations"] = js.process.pols.to_string();
  j["lambda_p_um"] = js.process.lambda_p;
  j["lambda_s_um"] = js.process.lambda_s;
  j["lambda_i_um"] = js.process.lambda_i;
  j["temperature_c"] = js.process.temperature_c;
  if (js.process.poling_period_um) {
    j["poling_period_um"] = *js.process.poling_period_um;
    j["qpm_order"] = js.process.qpm_order;
  } else {
    j["poling_period_um"] = nullptr;
  }
  j["length_mm"] = js.process.length_mm;
  j["pump_tau_ps"] = js.pump.tau_ps;
  j["pump_sigma_omega_rad_ps"] = js.pump.sigma_omega();
  j["grid_n"] = static_cast<int>(js.amp.rows());
  j["signal_axis_um"] = {js.lambda_s[0], js.lambda_s[js.lambda_s.size() - 1]};
  j["idler_axis_um"] = {js.lambda_i[0], js.lambda_i[js.lambda_i.size() - 1]};
  j["row_order"] = "rows = signal samples (ascending), columns = idler samples (ascending)";
  j["window_clamped"] = js.window_clamped;
  j["dispersion_flagged"] = js.dispersion_flagged;
  return j.dump(2) + "\n";
}

std::string export_report_json(const SchmidtReport& r) {
  nlohmann::json j;
  j["schmidt_number"] = r.K;
  j["purity"] = r.P;
  j["schmidt_number_jsi"] = r.K_JSI;
  j["fwhm_signal_nm"] = r.fwhm_s_nm;
  j["fwhm_idler_nm"] = r.fwhm_i_nm;
  j["distinguishability"] = r.delta;
  j["hom_visibility"] = r.v_hom;
  j["flagged"] = r.flagged;
  const size_t keep = std::min<size_t>(r.coefficients.size(), 32);
  j["schmidt_coefficients"] =
      std::vector<double>(r.coefficients.begin(), r.coefficients.begin() + keep);
  return j.dump(2) + "\n";
}

}  // namespace spdc
