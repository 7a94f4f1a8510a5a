#pragma once

// Joint spectral amplitude on a (lambda_s, lambda_i) grid and everything
// derived from it: Schmidt decomposition, purity, marginals, dispersion
// parameter, distinguishability, HOM visibility bound, bandpass filtering.

#include <Eigen/Dense>
#include <complex>
#include <limits>

#include "spdc/qpm.hpp"

namespace spdc {

struct PumpPulse {
  double lambda0_um = 0.0;
  double tau_ps = 0.0;  // Gaussian pulse duration, intensity FWHM

  // spectral standard deviation of the INTENSITY, rad/ps; together with the
  // Gaussian transform limit this fixes FWHM_nu * FWHM_t = 4 ln2 / (2 pi)
  double sigma_omega() const;
  void validate() const;
};

// mu(omega_s + omega_i): Gaussian, flat spectral phase, peak value 1
std::complex<double> pump_amplitude(const PumpPulse& pump, double omega_sum_rad_ps);

struct GridSpec {
  int n = 512;
  double window_factor = 4.0;  // half-window = factor x max(pump, phase-matching width)
  // explicit half-windows in rad/ps override the automatic choice
  std::optional<double> halfwidth_s, halfwidth_i;
  bool allow_center_mismatch = false;
};

struct JointSpectrum {
  Eigen::MatrixXcd amp;      // row = signal sample, column = idler sample
  Eigen::VectorXd lambda_s;  // um, strictly increasing, uniform
  Eigen::VectorXd lambda_i;
  SpdcProcess process;
  PumpPulse pump;
  bool window_clamped = false;     // auto window hit the transparency edge
  bool dispersion_flagged = false; // some grid evaluation left a fit band
};

JointSpectrum build_jsa(const SpdcProcess& process, const PumpPulse& pump,
                        const GridSpec& grid = {});

enum class SchmidtBasis { Amplitude, Intensity };

struct SchmidtReport {
  std::vector<double> coefficients;  // descending, sum = 1
  double K = 0.0;                    // Schmidt number of the decomposed grid
  double P = 0.0;                    // purity = 1/K
  double K_JSI = std::numeric_limits<double>::quiet_NaN();
  double fwhm_s_nm = std::numeric_limits<double>::quiet_NaN();
  double fwhm_i_nm = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();  // distinguishability
  double v_hom = std::numeric_limits<double>::quiet_NaN();  // P - delta
  bool flagged = false;
};

// Decomposition of one basis only (amplitude: the JSA; intensity: the JSI
// renormalized). K/P refer to the decomposed grid; intensity mode also sets
// K_JSI = K.
SchmidtReport schmidt_decompose(const JointSpectrum& js, SchmidtBasis basis);

// Amplitude-basis Schmidt data plus K_JSI, marginal FWHMs, distinguishability
// and the identical-source HOM bound V = P - delta.
SchmidtReport full_report(const JointSpectrum& js);

struct MarginalData {
  Eigen::VectorXd signal, idler;  // JSI row/column sums, each normalized to sum 1
  double fwhm_s_nm = 0.0, fwhm_i_nm = 0.0;
};

MarginalData marginals(const JointSpectrum& js);

struct DispersionParameter {
  double canonical = 0.0;  // branch with min |D|
  double d1 = 0.0;         // -(GDp - GDs)/(GDp - GDi)
  double d2 = 0.0;         // reciprocal branch
  bool flagged = false;
};

DispersionParameter dispersion_parameter(const Crystal& crystal, PolarizationConfig pols,
                                         double lambda_p, double lambda_s, double lambda_i,
                                         double temperature_c);

// Trace-normalized reduced states of signal (A A^dag) and idler (A^T A^*).
Eigen::MatrixXcd reduced_signal(const JointSpectrum& js);
Eigen::MatrixXcd reduced_idler(const JointSpectrum& js);

// Delta = |rho_s - U rho_i U^dag|_F^2 / 2 on the common grid, minimized over
// the relative delay U = diag(exp(i omega tau)): the deterministic
// arrival-time offset the HOM delay stage compensates is not spectral
// distinguishability.
double distinguishability(const JointSpectrum& js);

struct HomBound {
  double v = 0.0;
  bool axes_differ = false;  // idler axis of b was resampled onto a's signal axis
};

// V = (P_A + P_B)/2 - |rho_A - U rho_B U^dag|_F^2 / 2 comparing signal of a
// against idler of b at the best relative delay; equals P for two copies of
// the same degenerate source.
HomBound hom_visibility_bound(const JointSpectrum& a, const JointSpectrum& b);

struct FilterResult {
  JointSpectrum filtered;        // renormalized
  double transmitted_fraction;   // intensity kept before renormalization
};

// Gaussian bandpass on both arms, centered on the marginal peaks; fwhm is the
// half-maximum width of the Gaussian filter function applied to the joint
// amplitude (the intensity transmission is narrower by sqrt 2). Throws
// "filter under-resolved" if a filter is narrower than 3 grid spacings.
FilterResult apply_bandpass(const JointSpectrum& js, double fwhm_s_nm, double fwhm_i_nm);

// matrix text export (one row per signal sample) + sidecar metadata
std::string export_matrix(const JointSpectrum& js, bool intensity);
std::string export_metadata(const JointSpectrum& js);
std::string export_report_json(const SchmidtReport& r);

}  // namespace spdc
