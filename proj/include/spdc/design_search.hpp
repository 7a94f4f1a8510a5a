#pragma once

// Sweep/search layer on top of the joint-spectrum machinery: tau-L purity
// optimization, pure-state atlases, degenerate group-velocity-matching
// constants, filter scans, bulk phase matching, and the co-existing
// double-downconversion (CDDC) search where one grating phase-matches two
// type-II processes at once.

#include <optional>

#include "spdc/joint_spectrum.hpp"

namespace spdc {

enum class TauLObjective { MaxPurity, MinKJsi };

struct TauLOptions {
  double tau_lo_ps = 0.1, tau_hi_ps = 50.0;
  double len_lo_mm = 1.0, len_hi_mm = 100.0;
  int grid = 24;          // log-spaced coarse samples per axis (0 = seed candidates only)
  int jsa_n = 128;        // grid resolution used while searching
  int refine_iters = 2;   // coordinate golden-section passes after the coarse scan
  bool full_final_report = true;  // re-evaluate the optimum with the complete report
};

struct TauLResult {
  double tau_ps = 0.0;
  double length_mm = 0.0;
  SchmidtReport report;  // full when requested, otherwise only the objective's fields
  bool flat = false;     // objective varied by < 1e-9 across the whole search
};

// Best Gaussian pulse duration and crystal length for the given process
// (its length_mm is ignored). Coarse log grid plus seeded candidates from the
// separability condition sigma^2 * 0.193 * L^2 * |a b| = 1, then coordinate
// golden-section refinement.
TauLResult optimize_tau_L(const SpdcProcess& prototype, TauLObjective objective,
                          const TauLOptions& options = {});

struct AtlasOptions {
  int scan_samples = 60;        // coarse signal-wavelength samples per pump
  double k_jsi_threshold = 1.01;
  int edge_iters = 10;          // predicate bisection steps per interval edge
  TauLOptions probe;            // fast optimizer used for the membership predicate
  TauLOptions best;             // fuller optimizer for the stored best design
  AtlasOptions();
};

struct AtlasSample {
  double lambda_p_um = 0.0;
  double lambda_s_um = 0.0;
  double period_um = 0.0;  // +inf exactly on a bulk-matching crossing
  int qpm_order = 0;       // 0 when bulk matched
  double d = 0.0;          // canonical dispersion parameter
  double k_jsi = 0.0;      // probe value (NaN for inserted boundary samples)
};

struct AtlasPoint {
  double lambda_p_um = 0.0;
  double lambda_s_lo_um = 0.0, lambda_s_hi_um = 0.0;
  double period_lo_um = 0.0, period_hi_um = 0.0;  // first-order period at the edges
  int qpm_order_lo = 1, qpm_order_hi = 1;
  double best_lambda_s_um = 0.0;
  double best_tau_ps = 0.0, best_length_mm = 0.0;
  double best_k_jsi = 0.0;
};

struct Atlas {
  std::vector<AtlasPoint> points;
  std::vector<AtlasSample> samples;  // plot-ready (lambda_p, lambda_s) and (period, lambda_s) curves
};

// Pure-state atlas: per pump wavelength, the contiguous signal interval(s)
// whose probe-optimized JSI Schmidt number stays at or below the threshold.
// Accepts type-0 (e -> e+e) and type-II (o -> o+e) only; for type-I use
// type_i_emptiness_check.
Atlas purity_atlas(const Crystal& crystal, PolarizationConfig pols,
                   const std::vector<double>& lambda_p_list_um, double temperature_c,
                   const AtlasOptions& options = AtlasOptions());

struct EmptinessCheck {
  bool empty = true;
  bool forbidden = false;  // the tensor element for this configuration is zero
  int probes = 0;
  double min_k_jsi = std::numeric_limits<double>::infinity();
  double at_lambda_p_um = 0.0, at_lambda_s_um = 0.0;
};

// Honest counterpart of the atlas for type-I configurations. A configuration
// with zero effective nonlinearity generates nothing and comes back as
// forbidden (vacuously empty, no probes). Otherwise the optimizer is probed
// across the same scan as the atlas and the best (lowest) JSI Schmidt number
// is reported instead of assuming emptiness; any probe at or below the
// threshold is re-evaluated at full resolution with two window sizes before
// it may count, since an under-resolved grid reports deceptively low Schmidt
// numbers for strongly correlated states.
EmptinessCheck type_i_emptiness_check(const Crystal& crystal, PolarizationConfig pols,
                                      const std::vector<double>& lambda_p_list_um,
                                      double temperature_c,
                                      const AtlasOptions& options = AtlasOptions());

// Frequency-degenerate type-II (o -> o+e) pump wavelength where the canonical
// dispersion parameter crosses 1, i.e. 2 GD_p = GD_s + GD_i (transversal
// crossings only). nullopt when the group delays never cross.
std::optional<double> degenerate_gvm_point(const Crystal& crystal, double temperature_c);

struct DegenerateRow {
  double lambda_p_um = 0.0;
  double period_um = 0.0;
  int qpm_order = 1;
  double d = 0.0;  // canonical dispersion parameter at degeneracy
  double tau_ps = 0.0, length_mm = 0.0;
  double purity = 0.0, v_hom = 0.0, k_jsi = 0.0;
  double fwhm_s_nm = 0.0, fwhm_i_nm = 0.0;
  double bw_ratio = 0.0;  // signal/idler marginal width ratio, crosses 1 at the GVM point
  bool flagged = false;
};

// Frequency-degenerate type-II scan: per pump, first-order grating plus
// MaxPurity-optimized (tau, L) and the resulting purity / HOM visibility /
// bandwidth ratio. Pumps whose grating cannot be solved are skipped.
std::vector<DegenerateRow> degenerate_scan(const Crystal& crystal, double lambda_p_lo_um,
                                           double lambda_p_hi_um, int samples,
                                           double temperature_c,
                                           const TauLOptions& options = {});

struct FilterScanRow {
  double fwhm_nm = 0.0;
  double purity = 0.0;
  double v_hom = 0.0;
  double transmitted_fraction = 0.0;
  double filtered_fwhm_s_nm = 0.0, filtered_fwhm_i_nm = 0.0;
};

// Identical Gaussian bandpass on both arms swept over widths; the input
// spectrum is built once and reused.
std::vector<FilterScanRow> filter_scan(const JointSpectrum& js,
                                       const std::vector<double>& fwhm_list_nm);

struct CddcOptions {
  double period_lo_um = 5.0, period_hi_um = 5000.0;
  int period_samples = 200;  // log spaced
  double reference_length_mm = 10.0;  // bandwidth reporting only
  int max_iterations = 50;
  double tolerance_rad_um = 1e-10;
  int seed_pump_samples = 300;  // pump grid for the seeding curve
};

struct CddcConfig {
  double period_um = 0.0;
  // Solution family this row belongs to. A given period can phase-match the
  // process pair at more than one pump; rows sharing a branch id form one
  // continuous curve in (period, lambda_p). Ids count up from 0 in order of
  // first appearance along the sweep.
  int branch = 0;
  double lambda_p_um = 0.0;
  double lambda_b_um = 0.0, lambda_r_um = 0.0;  // short/long daughter
  // per-process CW-pump bandwidths at the reference length, quoted at lambda_b
  double bw1_nm = 0.0, bw2_nm = 0.0;
  // both candidate pairings of the daughters' relative group delay
  double dgd_ob_er_ps_mm = 0.0;  // GD_o(lambda_b) - GD_e(lambda_r)
  double dgd_eb_or_ps_mm = 0.0;  // GD_e(lambda_b) - GD_o(lambda_r)
  int dgd_near_02 = 0;           // 1 or 2: the pairing closer to +0.2 ps/mm
  double residual_1_rad_um = 0.0, residual_2_rad_um = 0.0;
  double sum_residual_rel = 0.0;  // |2 k_p - K(lambda_b) - K(lambda_r)| / (2 k_p)
  int iterations = 0;
};

// One grating, two simultaneous type-II processes with the daughters'
// polarizations exchanged (orders +1 and -1 of the same grating). Solves
// {k_p - k_o(B) - k_e(R) = +2 pi/P, k_p - k_e(B) - k_o(R) = -2 pi/P} for
// (lambda_p, lambda_b) by damped 2-D Newton from a scanned seed. When the
// period admits several solution families, returns the one with the smallest
// pump wavelength.
std::optional<CddcConfig> cddc_solve(const Crystal& crystal, PolarizationConfig pols,
                                     double period_um, double temperature_c,
                                     const CddcOptions& options = {});

// Sweeps a log-spaced period grid and keeps every solution family found at
// each period (rows at equal period are ordered by pump wavelength). Periods
// with no convergent solution simply contribute no rows.
std::vector<CddcConfig> cddc_search(const Crystal& crystal, PolarizationConfig pols,
                                    double temperature_c, const CddcOptions& options = {});

// Pump wavelength where the frequency-degenerate process phase-matches with
// no grating at all; nullopt when the bulk mismatch never crosses zero.
std::optional<double> bulk_degenerate_pump(const Crystal& crystal, PolarizationConfig pols,
                                           double temperature_c);

}  // namespace spdc
