#include "spdc/design_search.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spdc/units.hpp"

namespace spdc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Gaussian stand-in exp(-gamma x^2) for sinc(x)^2, matched at half maximum
constexpr double kSeparabilityGamma = 0.193;

GridSpec search_grid(int n) {
  GridSpec gs;
  gs.n = n;
  return gs;
}

struct WalkOff {
  double a_um = 0.0, b_um = 0.0;  // (GD_p - GD_s), (GD_p - GD_i) in ps/um
  bool flagged = false;
};

WalkOff walk_offs(const Crystal& cr, PolarizationConfig pols, double lp, double ls, double li,
                  double T) {
  const Flagged gp = group_delay({&cr, pols.pump, lp, T});
  const Flagged gs = group_delay({&cr, pols.signal, ls, T});
  const Flagged gi = group_delay({&cr, pols.idler, li, T});
  return {(gp.value - gs.value) * 1e-3, (gp.value - gi.value) * 1e-3,
          gp.flagged || gs.flagged || gi.flagged};
}

// pulse duration satisfying sigma^2 * gamma * L^2 * |a b| = 1 at this length
double seed_tau(double ab_um2, double length_mm, const TauLOptions& o) {
  const double mid = std::sqrt(o.tau_lo_ps * o.tau_hi_ps);
  if (!(std::abs(ab_um2) > 1e-30)) return mid;
  const double len_um = length_mm * 1e3;
  const double sigma = 1.0 / (len_um * std::sqrt(kSeparabilityGamma * std::abs(ab_um2)));
  const double tau = std::sqrt(2.0 * std::log(2.0)) / sigma;
  return std::clamp(tau, o.tau_lo_ps, o.tau_hi_ps);
}

template <class F>
double golden_max(F&& f, double lo, double hi, int iters) {
  const double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

// signal-wavelength window at this pump with signal, idler and pump all
// inside their model validity ranges; false when empty
bool signal_window(const IndexModel& mp, const IndexModel& ms, const IndexModel& mi,
                   double lp, double& lo, double& hi) {
  if (lp < mp.band_lo() || lp > mp.band_hi()) return false;
  lo = std::max(ms.band_lo(), lp * (1.0 + 1e-6));
  const double hi_i = mi.band_hi();
  if (lp < hi_i) lo = std::max(lo, idler_wavelength(lp, hi_i) * (1.0 + 1e-12));
  hi = ms.band_hi();
  if (lp < mi.band_lo())  // long signals would push the idler below its band
    hi = std::min(hi, idler_wavelength(lp, mi.band_lo()) * (1.0 - 1e-12));
  return lo < hi;
}

}  // namespace

TauLResult optimize_tau_L(const SpdcProcess& prototype, TauLObjective objective,
                          const TauLOptions& o) {
  if (!(o.tau_lo_ps > 0.0) || !(o.tau_hi_ps >= o.tau_lo_ps) || !(o.len_lo_mm > 0.0) ||
      !(o.len_hi_mm >= o.len_lo_mm))
    throw ValidationError("tau/length bounds must be positive and ordered");
  SpdcProcess proto = prototype;
  proto.length_mm = o.len_lo_mm;
  proto.validate();

  double lo_seen = kInf, hi_seen = -kInf;
  int valid = 0;
  const auto score_at = [&](double tau, double len) {
    SpdcProcess p = proto;
    p.length_mm = len;
    const PumpPulse pump{p.lambda_p, tau};
    double s;
    try {
      const JointSpectrum js = build_jsa(p, pump, search_grid(o.jsa_n));
      s = objective == TauLObjective::MaxPurity
              ? schmidt_decompose(js, SchmidtBasis::Amplitude).P
              : -schmidt_decompose(js, SchmidtBasis::Intensity).K;
    } catch (const ValidationError&) {
      return -kInf;  // infeasible corner (window collapse etc.)
    }
    lo_seen = std::min(lo_seen, s);
    hi_seen = std::max(hi_seen, s);
    ++valid;
    return s;
  };

  const WalkOff w = walk_offs(*proto.crystal, proto.pols, proto.lambda_p, proto.lambda_s,
                              proto.lambda_i, proto.temperature_c);
  const double ab = w.a_um * w.b_um;

  std::vector<std::pair<double, double>> cand;
  const double ltau0 = std::log(o.tau_lo_ps), ltau1 = std::log(o.tau_hi_ps);
  const double llen0 = std::log(o.len_lo_mm), llen1 = std::log(o.len_hi_mm);
  for (int j = 0; j < o.grid; ++j)
    for (int k = 0; k < o.grid; ++k) {
      const double ft = o.grid > 1 ? double(j) / (o.grid - 1) : 0.5;
      const double fl = o.grid > 1 ? double(k) / (o.grid - 1) : 0.5;
      cand.emplace_back(std::exp(ltau0 + ft * (ltau1 - ltau0)),
                        std::exp(llen0 + fl * (llen1 - llen0)));
    }
  if (ab < 0.0)  // separability seeds at a few lengths
    for (int k = 0; k < 5; ++k) {
      const double len = std::exp(llen0 + (k + 0.5) / 5.0 * (llen1 - llen0));
      cand.emplace_back(seed_tau(ab, len, o), len);
    }
  if (cand.empty()) cand.emplace_back(std::exp(0.5 * (ltau0 + ltau1)), std::exp(0.5 * (llen0 + llen1)));

  double best_tau = cand.front().first, best_len = cand.front().second, best = -kInf;
  for (const auto& [tau, len] : cand) {
    const double s = score_at(tau, len);
    if (s > best) {
      best = s;
      best_tau = tau;
      best_len = len;
    }
  }
  if (valid == 0) throw ValidationError("no feasible tau/length sample in the given bounds");

  for (int pass = 0; pass < o.refine_iters; ++pass) {
    const double tlo = std::max(o.tau_lo_ps, best_tau / 3.0);
    const double thi = std::min(o.tau_hi_ps, best_tau * 3.0);
    best_tau = std::exp(golden_max(
        [&](double x) { return score_at(std::exp(x), best_len); }, std::log(tlo), std::log(thi), 18));
    const double llo = std::max(o.len_lo_mm, best_len / 3.0);
    const double lhi = std::min(o.len_hi_mm, best_len * 3.0);
    best_len = std::exp(golden_max(
        [&](double x) { return score_at(best_tau, std::exp(x)); }, std::log(llo), std::log(lhi), 18));
  }

  TauLResult r;
  r.tau_ps = best_tau;
  r.length_mm = best_len;
  r.flat = (hi_seen - lo_seen) < 1e-9;
  SpdcProcess p = proto;
  p.length_mm = best_len;
  const PumpPulse pump{p.lambda_p, best_tau};
  const JointSpectrum js = build_jsa(p, pump, search_grid(o.jsa_n));
  r.report = o.full_final_report
                 ? full_report(js)
                 : schmidt_decompose(js, objective == TauLObjective::MinKJsi
                                             ? SchmidtBasis::Intensity
                                             : SchmidtBasis::Amplitude);
  return r;
}

AtlasOptions::AtlasOptions() {
  probe.grid = 0;
  probe.refine_iters = 0;
  probe.jsa_n = 96;
  probe.full_final_report = false;
  best.grid = 6;
  best.refine_iters = 1;
  best.jsa_n = 96;
  best.full_final_report = false;
}

namespace {

struct Probe {
  double k_jsi = kInf;
  double tau = 0.0, len = 0.0;
  bool ok = false;
};

Probe probe_point(const Crystal& cr, PolarizationConfig pols, double lp, double ls, double T,
                  const TauLOptions& po, TauLObjective obj = TauLObjective::MinKJsi) {
  const FirstOrderPoling fo = solve_first_order_period(cr, pols, lp, ls, T);
  std::optional<double> period;
  int m = 1;
  if (fo.result.status == PolingStatus::Ok) {
    period = fo.result.period_um;
    m = fo.m;
  } else if (fo.result.status != PolingStatus::BulkMatched) {
    return {};
  }
  try {
    const SpdcProcess p = make_process(cr, pols, lp, ls, T, period, 10.0, period ? m : 1);
    const TauLResult r = optimize_tau_L(p, obj, po);
    // A flagged winner means the grid ran into a transparency or fit-band
    // edge: the state was truncated, which biases the Schmidt number low.
    // Such a probe is no evidence of purity, so the point does not qualify.
    if (r.report.flagged) return {};
    return {r.report.K_JSI, r.tau_ps, r.length_mm, true};
  } catch (const ValidationError&) {
    return {};
  }
}

// Re-evaluate a near-unity probe at full resolution before it may certify a
// separable state. The coarse probe grid under-resolves strongly correlated
// spectra -- a long thin diagonal JSI sampled on a 96x96 patch looks like a
// round blob -- so a sub-threshold probe is only trusted if a 512x512 grid at
// two window sizes agrees. Returns the worst (largest) of the re-evaluations;
// a flagged or invalid state confirms nothing.
double confirm_k_jsi(const Crystal& cr, PolarizationConfig pols, double lp, double ls, double T,
                     const Probe& pr) {
  const FirstOrderPoling fo = solve_first_order_period(cr, pols, lp, ls, T);
  std::optional<double> period;
  int m = 1;
  if (fo.result.status == PolingStatus::Ok) {
    period = fo.result.period_um;
    m = fo.m;
  } else if (fo.result.status != PolingStatus::BulkMatched) {
    return kInf;
  }
  try {
    const SpdcProcess p = make_process(cr, pols, lp, ls, T, period, pr.len, period ? m : 1);
    const PumpPulse pump{lp, pr.tau};
    double worst = 0.0;
    for (const double wf : {4.0, 8.0}) {
      GridSpec g;
      g.n = 512;
      g.window_factor = wf;
      const JointSpectrum js = build_jsa(p, pump, g);
      const SchmidtReport rep = schmidt_decompose(js, SchmidtBasis::Intensity);
      if (rep.flagged) return kInf;
      worst = std::max(worst, rep.K);
    }
    return worst;
  } catch (const ValidationError&) {
    return kInf;
  }
}

// refine the predicate boundary between a passing and a failing signal sample
double refine_edge(const Crystal& cr, PolarizationConfig pols, double lp, double T,
                   const AtlasOptions& opt, double ls_good, double ls_bad) {
  for (int i = 0; i < opt.edge_iters; ++i) {
    const double mid = 0.5 * (ls_good + ls_bad);
    const Probe pr = probe_point(cr, pols, lp, mid, T, opt.probe);
    if (pr.ok && pr.k_jsi <= opt.k_jsi_threshold)
      ls_good = mid;
    else
      ls_bad = mid;
  }
  return ls_good;
}

double signed_period(const FirstOrderPoling& fo) {
  return fo.result.status == PolingStatus::Ok ? fo.result.period_um : kInf;
}

// bulk mismatch of the (lp, ls) pair in rad/um; NaN when invalid
double bulk_mismatch(const Crystal& cr, PolarizationConfig pols, double lp, double ls, double T) {
  try {
    const SpdcProcess p = make_process(cr, pols, lp, ls, T, std::nullopt, 1.0);
    return phase_mismatch(p).value;
  } catch (const ValidationError&) {
    return kNan;
  }
}

}  // namespace

Atlas purity_atlas(const Crystal& cr, PolarizationConfig pols,
                   const std::vector<double>& lambda_p_list_um, double temperature_c,
                   const AtlasOptions& opt) {
  const SpdcType type = pols.type();
  const bool type0 = type == SpdcType::Type0 && pols.pump == Axis::E;
  const bool type2 = type == SpdcType::TypeII && pols.pump == Axis::O;
  if (!type0 && !type2)
    throw ValidationError(
        "purity_atlas accepts e:ee (type-0) or o:oe (type-II) configurations only; use "
        "type_i_emptiness_check for type-I");
  if (opt.scan_samples < 8) throw ValidationError("atlas needs at least 8 scan samples");

  const double T = temperature_c;
  const IndexModel mp(cr, pols.pump, T), ms(cr, pols.signal, T), mi(cr, pols.idler, T);
  Atlas atlas;

  for (const double lp : lambda_p_list_um) {
    double lo, hi;
    if (!signal_window(mp, ms, mi, lp, lo, hi)) continue;

    const int n = opt.scan_samples;
    std::vector<double> ls(n), dval(n);
    std::vector<Probe> probes(n);
    std::vector<char> pass(n);
    for (int j = 0; j < n; ++j) {
      ls[j] = lo + (hi - lo) * j / (n - 1);
      const double li = idler_wavelength(lp, ls[j]);
      const WalkOff w = walk_offs(cr, pols, lp, ls[j], li, T);
      const double d1 = -w.a_um / w.b_um;
      dval[j] = std::abs(d1) <= std::abs(1.0 / d1) ? d1 : 1.0 / d1;
      if (w.a_um * w.b_um < 0.0) probes[j] = probe_point(cr, pols, lp, ls[j], T, opt.probe);
      pass[j] = probes[j].ok && probes[j].k_jsi <= opt.k_jsi_threshold;
    }

    for (int j = 0; j < n;) {
      if (!pass[j]) {
        ++j;
        continue;
      }
      int k = j;
      while (k + 1 < n && pass[k + 1]) ++k;  // run [j, k]

      AtlasPoint pt;
      pt.lambda_p_um = lp;
      pt.lambda_s_lo_um =
          j > 0 ? refine_edge(cr, pols, lp, T, opt, ls[j], ls[j - 1]) : ls[j];
      pt.lambda_s_hi_um =
          k + 1 < n ? refine_edge(cr, pols, lp, T, opt, ls[k], ls[k + 1]) : ls[k];
      const FirstOrderPoling fo_lo =
          solve_first_order_period(cr, pols, lp, pt.lambda_s_lo_um, T);
      const FirstOrderPoling fo_hi =
          solve_first_order_period(cr, pols, lp, pt.lambda_s_hi_um, T);
      pt.period_lo_um = signed_period(fo_lo);
      pt.period_hi_um = signed_period(fo_hi);
      pt.qpm_order_lo = fo_lo.result.status == PolingStatus::Ok ? fo_lo.m : 0;
      pt.qpm_order_hi = fo_hi.result.status == PolingStatus::Ok ? fo_hi.m : 0;

      int jb = j;
      for (int t = j; t <= k; ++t)
        if (probes[t].k_jsi < probes[jb].k_jsi) jb = t;
      pt.best_lambda_s_um = ls[jb];
      Probe bestp = probe_point(cr, pols, lp, ls[jb], T, opt.best);
      if (!bestp.ok || bestp.k_jsi > probes[jb].k_jsi) bestp = probes[jb];
      pt.best_tau_ps = bestp.tau;
      pt.best_length_mm = bestp.len;
      pt.best_k_jsi = bestp.k_jsi;
      atlas.points.push_back(pt);

      // curve samples over the run, with extra points astride any bulk-locus
      // crossing (where the required period diverges)
      for (int t = j; t <= k; ++t) {
        const FirstOrderPoling fo = solve_first_order_period(cr, pols, lp, ls[t], T);
        atlas.samples.push_back({lp, ls[t], signed_period(fo),
                                 fo.result.status == PolingStatus::Ok ? fo.m : 0, dval[t],
                                 probes[t].k_jsi});
        if (t < k) {
          const double f0 = bulk_mismatch(cr, pols, lp, ls[t], T);
          const double f1 = bulk_mismatch(cr, pols, lp, ls[t + 1], T);
          if (std::isfinite(f0) && std::isfinite(f1) && f0 * f1 < 0.0) {
            double a = ls[t], b = ls[t + 1], fa = f0;
            for (int i = 0; i < 60; ++i) {
              const double m = 0.5 * (a + b);
              const double fm = bulk_mismatch(cr, pols, lp, m, T);
              if (!std::isfinite(fm)) break;
              if (fa * fm <= 0.0)
                b = m;
              else {
                a = m;
                fa = fm;
              }
            }
            const double root = 0.5 * (a + b);
            const double slope = std::abs(f1 - f0) / (ls[t + 1] - ls[t]);
            const double off = std::min(0.25 * (ls[t + 1] - ls[t]),
                                        kTwoPi / (1e6 * std::max(slope, 1e-12)));
            for (const double s : {root - off, root, root + off}) {
              const double li = idler_wavelength(lp, s);
              const WalkOff wr = walk_offs(cr, pols, lp, s, li, T);
              const double d1 = -wr.a_um / wr.b_um;
              const FirstOrderPoling fr = solve_first_order_period(cr, pols, lp, s, T);
              atlas.samples.push_back({lp, s, signed_period(fr),
                                       fr.result.status == PolingStatus::Ok ? fr.m : 0,
                                       std::abs(d1) <= std::abs(1.0 / d1) ? d1 : 1.0 / d1,
                                       kNan});
            }
          }
        }
      }
      j = k + 1;
    }
  }
  return atlas;
}

EmptinessCheck type_i_emptiness_check(const Crystal& cr, PolarizationConfig pols,
                                      const std::vector<double>& lambda_p_list_um,
                                      double temperature_c, const AtlasOptions& opt) {
  const double T = temperature_c;
  EmptinessCheck res;
  if (cr.effective_nonlinearity(pols) == 0.0) {
    // Zero tensor element: the crystal cannot drive this process at all, so
    // there is no state whose purity could be asked about.
    res.forbidden = true;
    return res;
  }
  const IndexModel mp(cr, pols.pump, T), ms(cr, pols.signal, T), mi(cr, pols.idler, T);
  const int stride = std::max(1, opt.scan_samples / 12);
  for (const double lp : lambda_p_list_um) {
    double lo, hi;
    if (!signal_window(mp, ms, mi, lp, lo, hi)) continue;
    for (int j = 0; j < opt.scan_samples; ++j) {
      const double s = lo + (hi - lo) * j / (opt.scan_samples - 1);
      const double li = idler_wavelength(lp, s);
      const WalkOff w = walk_offs(cr, pols, lp, s, li, T);
      if (j % stride != 0 && !(w.a_um * w.b_um < 0.0)) continue;
      const Probe pr = probe_point(cr, pols, lp, s, T, opt.probe);
      if (!pr.ok) continue;
      ++res.probes;
      double v = pr.k_jsi;
      if (v <= opt.k_jsi_threshold) v = confirm_k_jsi(cr, pols, lp, s, T, pr);
      if (v < res.min_k_jsi) {
        res.min_k_jsi = v;
        res.at_lambda_p_um = lp;
        res.at_lambda_s_um = s;
      }
    }
  }
  res.empty = !(res.min_k_jsi <= opt.k_jsi_threshold);
  return res;
}

std::optional<double> degenerate_gvm_point(const Crystal& cr, double temperature_c) {
  const IndexModel mo(cr, Axis::O, temperature_c), me(cr, Axis::E, temperature_c);
  const double lo =
      std::max(mo.band_lo(), 0.5 * std::max(mo.band_lo(), me.band_lo())) * (1.0 + 1e-9);
  const double hi =
      std::min(mo.band_hi(), 0.5 * std::min(mo.band_hi(), me.band_hi())) * (1.0 - 1e-9);
  if (!(lo < hi)) return std::nullopt;
  const auto h = [&](double lp) {
    return 2.0 * group_delay_value(mo, lp) - group_delay_value(mo, 2.0 * lp) -
           group_delay_value(me, 2.0 * lp);
  };
  const int n = 400;
  double prev_l = lo, prev_h = h(lo);
  for (int j = 1; j < n; ++j) {
    const double lp = lo + (hi - lo) * j / (n - 1);
    const double hv = h(lp);
    if (std::isfinite(prev_h) && std::isfinite(hv) && prev_h * hv < 0.0) {
      double a = prev_l, b = lp, fa = prev_h;
      while (b - a > 1e-7) {
        const double m = 0.5 * (a + b);
        const double fm = h(m);
        if (fa * fm <= 0.0)
          b = m;
        else {
          a = m;
          fa = fm;
        }
      }
      return 0.5 * (a + b);
    }
    prev_l = lp;
    prev_h = hv;
  }
  return std::nullopt;
}

std::vector<DegenerateRow> degenerate_scan(const Crystal& cr, double lambda_p_lo_um,
                                           double lambda_p_hi_um, int samples,
                                           double temperature_c, const TauLOptions& options) {
  if (!(lambda_p_lo_um > 0.0) || !(lambda_p_hi_um > lambda_p_lo_um) || samples < 2)
    throw ValidationError("degenerate scan needs an ordered pump range and >= 2 samples");
  const PolarizationConfig pols = PolarizationConfig::parse("o:oe");
  std::vector<DegenerateRow> rows;
  for (int j = 0; j < samples; ++j) {
    const double lp = lambda_p_lo_um + (lambda_p_hi_um - lambda_p_lo_um) * j / (samples - 1);
    const FirstOrderPoling fo = solve_first_order_period(cr, pols, lp, 2.0 * lp, temperature_c);
    if (fo.result.status != PolingStatus::Ok) continue;
    DegenerateRow row;
    row.lambda_p_um = lp;
    row.period_um = fo.result.period_um;
    row.qpm_order = fo.m;
    try {
      const SpdcProcess p = make_process(cr, pols, lp, 2.0 * lp, temperature_c,
                                         fo.result.period_um, 10.0, fo.m);
      const TauLResult r = optimize_tau_L(p, TauLObjective::MaxPurity, options);
      row.tau_ps = r.tau_ps;
      row.length_mm = r.length_mm;
      row.purity = r.report.P;
      row.v_hom = r.report.v_hom;
      row.k_jsi = r.report.K_JSI;
      row.fwhm_s_nm = r.report.fwhm_s_nm;
      row.fwhm_i_nm = r.report.fwhm_i_nm;
      row.bw_ratio = r.report.fwhm_s_nm / r.report.fwhm_i_nm;
      row.flagged = r.report.flagged || fo.result.flagged;
    } catch (const ValidationError&) {
      continue;
    }
    const DispersionParameter dp =
        dispersion_parameter(cr, pols, lp, 2.0 * lp, 2.0 * lp, temperature_c);
    row.d = dp.canonical;
    row.flagged = row.flagged || dp.flagged;
    rows.push_back(row);
  }
  return rows;
}

std::vector<FilterScanRow> filter_scan(const JointSpectrum& js,
                                       const std::vector<double>& fwhm_list_nm) {
  std::vector<FilterScanRow> rows;
  rows.reserve(fwhm_list_nm.size());
  for (const double w : fwhm_list_nm) {
    const FilterResult f = apply_bandpass(js, w, w);
    const SchmidtReport rep = full_report(f.filtered);
    rows.push_back({w, rep.P, rep.v_hom, f.transmitted_fraction, rep.fwhm_s_nm, rep.fwhm_i_nm});
  }
  return rows;
}

namespace {

struct CddcContext {
  const IndexModel mo, me;
  double band_hi;  // joint long-wavelength validity edge of the daughters
  CddcContext(const Crystal& cr, double T)
      : mo(cr, Axis::O, T),
        me(cr, Axis::E, T),
        band_hi(std::min(mo.band_hi(), me.band_hi())) {}
  double ksum(double l) const { return mo.k(l) + me.k(l); }     // K = k_o + k_e
  double kdiff(double l) const { return me.k(l) - mo.k(l); }    // birefringent split
};

// 2 k_p - K(lambda_b) - K(lambda_r): the grating-free part of the two
// phase-matching conditions added together
double sum_equation(const CddcContext& c, double lp, double lb) {
  const double lr = idler_wavelength(lp, lb);
  return 2.0 * c.mo.k(lp) - c.ksum(lb) - c.ksum(lr);
}

// shorter-daughter root of the sum equation at this pump, NaN when none
double solve_lambda_b(const CddcContext& c, double lp) {
  double lo = lp * (1.0 + 1e-6);
  if (lp < c.band_hi) lo = std::max(lo, idler_wavelength(lp, c.band_hi) * (1.0 + 1e-9));
  const double hi = 2.0 * lp * (1.0 - 1e-9);
  if (!(lo < hi)) return kNan;
  const int n = 64;
  double prev_l = lo, prev_s = sum_equation(c, lp, lo);
  for (int j = 1; j < n; ++j) {
    const double lb = lo + (hi - lo) * j / (n - 1);
    const double s = sum_equation(c, lp, lb);
    if (std::isfinite(prev_s) && std::isfinite(s) && prev_s * s < 0.0) {
      double a = prev_l, b = lb, fa = prev_s;
      for (int i = 0; i < 80; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = sum_equation(c, lp, m);
        if (fa * fm <= 0.0)
          b = m;
        else {
          a = m;
          fa = fm;
        }
      }
      return 0.5 * (a + b);
    }
    prev_l = lb;
    prev_s = s;
  }
  return kNan;
}

// signed inverse period that phase-matches both processes at this pump (via
// the difference of the two conditions): (dK_B - dK_R) / (4 pi). Bracketing
// runs on this instead of the period itself because the inverse passes
// smoothly through zero where the daughters degenerate and the period
// diverges. NaN when the sum equation has no root.
double inv_period_at_pump(const CddcContext& c, double lp) {
  const double lb = solve_lambda_b(c, lp);
  if (!std::isfinite(lb)) return kNan;
  const double lr = idler_wavelength(lp, lb);
  return (c.kdiff(lb) - c.kdiff(lr)) / (2.0 * kTwoPi);
}

struct NewtonOut {
  double lp = 0.0, lb = 0.0;
  double f1 = 0.0, f2 = 0.0;
  int iterations = 0;
  bool ok = false;
};

NewtonOut newton_polish(const CddcContext& c, double period, double lp0, double lb0,
                        const CddcOptions& o) {
  const double g = kTwoPi / period;
  const auto resid = [&](double lp, double lb, double& f1, double& f2) {
    if (!(lb > lp) || !(lb < 2.0 * lp * (1.0 + 1e-12))) return false;
    const double lr = idler_wavelength(lp, lb);
    if (!(lr > 0.0) || lr > c.band_hi * (1.0 + 1e-9)) return false;
    const double kp = c.mo.k(lp);
    f1 = kp - c.mo.k(lb) - c.me.k(lr) - g;
    f2 = kp - c.me.k(lb) - c.mo.k(lr) + g;
    return std::isfinite(f1) && std::isfinite(f2);
  };

  NewtonOut out;
  out.lp = lp0;
  out.lb = lb0;
  double f1, f2;
  if (!resid(out.lp, out.lb, f1, f2)) return out;
  const double h = 1e-4;
  for (int it = 0; it < o.max_iterations; ++it) {
    out.iterations = it;
    if (std::abs(f1) < o.tolerance_rad_um && std::abs(f2) < o.tolerance_rad_um) {
      out.f1 = f1;
      out.f2 = f2;
      out.ok = true;
      return out;
    }
    double a1, a2, b1, b2;
    if (!resid(out.lp + h, out.lb, a1, a2) || !resid(out.lp, out.lb + h, b1, b2)) return out;
    const double j11 = (a1 - f1) / h, j12 = (b1 - f1) / h;
    const double j21 = (a2 - f2) / h, j22 = (b2 - f2) / h;
    const double det = j11 * j22 - j12 * j21;
    if (!(std::abs(det) > 1e-30)) return out;
    double dp = (-f1 * j22 + f2 * j12) / det;
    double db = (-f2 * j11 + f1 * j21) / det;
    const double norm0 = std::max(std::abs(f1), std::abs(f2));
    double scale = 1.0;
    bool stepped = false;
    for (int halvings = 0; halvings <= 8; ++halvings, scale *= 0.5) {
      double n1, n2;
      if (!resid(out.lp + scale * dp, out.lb + scale * db, n1, n2)) continue;
      if (std::max(std::abs(n1), std::abs(n2)) < norm0 || halvings == 8) {
        out.lp += scale * dp;
        out.lb += scale * db;
        f1 = n1;
        f2 = n2;
        stepped = true;
        break;
      }
    }
    if (!stepped) return out;
  }
  out.f1 = f1;
  out.f2 = f2;
  out.ok = std::abs(f1) < o.tolerance_rad_um && std::abs(f2) < o.tolerance_rad_um;
  return out;
}

void check_cddc_pols(PolarizationConfig pols) {
  if (pols.pump != Axis::O || pols.type() != SpdcType::TypeII)
    throw ValidationError(
        "the double-downconversion search needs an o-pumped type-II configuration (o:oe)");
}

struct SeedCurve {
  std::vector<double> lp, inv;  // pump samples, signed inverse period there
  std::vector<int> seg;         // per sample pair: monotone-run id, -1 unusable
};

SeedCurve seed_curve(const CddcContext& c, const Crystal& cr, const CddcOptions& o) {
  SeedCurve sc;
  const double lo = std::max(c.mo.band_lo(), cr.transparency_lo) * (1.0 + 1e-6);
  const double hi = 0.5 * c.band_hi * (1.0 - 1e-6);
  const int n = std::max(16, o.seed_pump_samples);
  sc.lp.resize(n);
  sc.inv.resize(n);
  for (int j = 0; j < n; ++j) {
    sc.lp[j] = lo + (hi - lo) * j / (n - 1);
    sc.inv[j] = inv_period_at_pump(c, sc.lp[j]);
  }
  // Split the curve into monotone runs: each run maps period to pump
  // one-to-one, so every run contributes at most one solution per period and
  // rows sharing a run id form one continuous branch of the sweep.
  sc.seg.assign(n - 1, -1);
  int seg = -1, dir = 0;
  bool open = false;
  for (int j = 0; j + 1 < n; ++j) {
    const bool va = std::isfinite(sc.inv[j]), vb = std::isfinite(sc.inv[j + 1]);
    if (!va && !vb) {
      open = false;
      continue;
    }
    if (va && vb) {
      const double d = sc.inv[j + 1] - sc.inv[j];
      const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
      if (!open) {
        ++seg;
        open = true;
        dir = s;
      } else if (s != 0 && dir != 0 && s != dir) {
        ++seg;  // slope reversed: a new run starts at this extremum
        dir = s;
      } else if (dir == 0) {
        dir = s;
      }
      sc.seg[j] = seg;
    } else {
      // half-valid pair at a validity edge; the curve still runs into the
      // gap (toward period -> infinity at a degeneracy terminal), so keep
      // the pair attached to the adjacent run
      if (!open) {
        ++seg;
        open = true;
        dir = 0;
      }
      sc.seg[j] = seg;
      if (!vb) open = false;
    }
  }
  return sc;
}

CddcConfig make_config(const CddcContext& c, double period, const NewtonOut& nw, int seg,
                       const CddcOptions& o) {
  CddcConfig cfg;
  cfg.period_um = period;
  cfg.branch = seg;  // raw run id; the sweep renumbers by first appearance
  cfg.lambda_p_um = nw.lp;
  cfg.lambda_b_um = nw.lb;
  cfg.lambda_r_um = idler_wavelength(nw.lp, nw.lb);
  cfg.residual_1_rad_um = std::abs(nw.f1);
  cfg.residual_2_rad_um = std::abs(nw.f2);
  cfg.iterations = nw.iterations;
  const double kp2 = 2.0 * c.mo.k(nw.lp);
  cfg.sum_residual_rel = std::abs(kp2 - c.ksum(cfg.lambda_b_um) - c.ksum(cfg.lambda_r_um)) / kp2;

  const double gd_ob = group_delay_value(c.mo, cfg.lambda_b_um);
  const double gd_eb = group_delay_value(c.me, cfg.lambda_b_um);
  const double gd_or = group_delay_value(c.mo, cfg.lambda_r_um);
  const double gd_er = group_delay_value(c.me, cfg.lambda_r_um);
  cfg.dgd_ob_er_ps_mm = gd_ob - gd_er;
  cfg.dgd_eb_or_ps_mm = gd_eb - gd_or;
  cfg.dgd_near_02 =
      std::abs(cfg.dgd_ob_er_ps_mm - 0.2) <= std::abs(cfg.dgd_eb_or_ps_mm - 0.2) ? 1 : 2;

  // CW-pump sinc bandwidth of each process at the reference length, quoted at
  // the short daughter: domega = 5.566 / (L |GD_s - GD_i|)
  const double len_um = o.reference_length_mm * 1e3;
  const double lam2 = cfg.lambda_b_um * cfg.lambda_b_um;
  const auto bw_nm = [&](double dgd_ps_mm) {
    const double domega = 5.566 / (len_um * std::max(std::abs(dgd_ps_mm) * 1e-3, 1e-12));
    return domega * lam2 / (kTwoPi * kC_um_per_ps) * 1e3;
  };
  cfg.bw1_nm = bw_nm(cfg.dgd_ob_er_ps_mm);
  cfg.bw2_nm = bw_nm(cfg.dgd_eb_or_ps_mm);
  return cfg;
}

// Every solution at this period: bracket 1/period against the seed curve on
// each monotone run, bisect, then Newton-polish. Samples past a validity edge
// count as inverse period zero (their limit at the degeneracy terminal), so
// the near-terminal bracket where the period diverges is not lost.
std::vector<CddcConfig> solve_all_with_curve(const CddcContext& c, const SeedCurve& sc,
                                             double period, const CddcOptions& o) {
  const double t = 1.0 / period;
  const auto val = [&](double inv) { return std::isfinite(inv) ? inv - t : -t; };
  std::vector<CddcConfig> out;
  for (int j = 0; j + 1 < static_cast<int>(sc.lp.size()); ++j) {
    if (sc.seg[j] < 0) continue;
    double a = sc.lp[j], b = sc.lp[j + 1];
    double fa = val(sc.inv[j]);
    if (fa * val(sc.inv[j + 1]) > 0.0) continue;
    for (int i = 0; i < 60 && b - a > 1e-10; ++i) {
      const double m = 0.5 * (a + b);
      const double fm = val(inv_period_at_pump(c, m));
      if (fa * fm <= 0.0)
        b = m;
      else {
        a = m;
        fa = fm;
      }
    }
    // seed the polish from whichever end still has a sum-equation root
    double lp0 = 0.5 * (a + b);
    double lb0 = solve_lambda_b(c, lp0);
    if (!std::isfinite(lb0)) {
      lp0 = a;
      lb0 = solve_lambda_b(c, a);
    }
    if (!std::isfinite(lb0)) {
      lp0 = b;
      lb0 = solve_lambda_b(c, b);
    }
    if (!std::isfinite(lb0)) continue;
    const NewtonOut nw = newton_polish(c, period, lp0, lb0, o);
    if (!nw.ok) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const CddcConfig& prev) {
      return std::abs(prev.lambda_p_um - nw.lp) < 1e-6 * nw.lp;
    });
    if (dup) continue;  // same root reached from two adjacent sample pairs
    out.push_back(make_config(c, period, nw, sc.seg[j], o));
  }
  std::sort(out.begin(), out.end(), [](const CddcConfig& x, const CddcConfig& y) {
    return x.lambda_p_um < y.lambda_p_um;
  });
  return out;
}

}  // namespace

std::optional<CddcConfig> cddc_solve(const Crystal& crystal, PolarizationConfig pols,
                                     double period_um, double temperature_c,
                                     const CddcOptions& options) {
  check_cddc_pols(pols);
  if (!(period_um > 0.0)) throw ValidationError("poling period must be positive");
  const CddcContext c(crystal, temperature_c);
  const SeedCurve sc = seed_curve(c, crystal, options);
  std::vector<CddcConfig> all = solve_all_with_curve(c, sc, period_um, options);
  if (all.empty()) return std::nullopt;
  CddcConfig best = all.front();  // smallest pump wavelength
  best.branch = 0;
  return best;
}

std::vector<CddcConfig> cddc_search(const Crystal& crystal, PolarizationConfig pols,
                                    double temperature_c, const CddcOptions& options) {
  check_cddc_pols(pols);
  if (!(options.period_lo_um > 0.0) || !(options.period_hi_um > options.period_lo_um) ||
      options.period_samples < 2)
    throw ValidationError("period sweep needs an ordered positive range and >= 2 samples");
  const CddcContext c(crystal, temperature_c);
  const SeedCurve sc = seed_curve(c, crystal, options);
  std::vector<CddcConfig> out;
  std::map<int, int> branch_of_run;  // raw monotone-run id -> dense output id
  const double l0 = std::log(options.period_lo_um), l1 = std::log(options.period_hi_um);
  for (int j = 0; j < options.period_samples; ++j) {
    const double period = std::exp(l0 + (l1 - l0) * j / (options.period_samples - 1));
    for (CddcConfig& cfg : solve_all_with_curve(c, sc, period, options)) {
      const auto [it, inserted] =
          branch_of_run.try_emplace(cfg.branch, static_cast<int>(branch_of_run.size()));
      (void)inserted;
      cfg.branch = it->second;
      out.push_back(cfg);
    }
  }
  return out;
}

std::optional<double> bulk_degenerate_pump(const Crystal& crystal, PolarizationConfig pols,
                                           double temperature_c) {
  const IndexModel mp(crystal, pols.pump, temperature_c);
  const IndexModel ms(crystal, pols.signal, temperature_c);
  const IndexModel mi(crystal, pols.idler, temperature_c);
  const double lo =
      std::max(mp.band_lo(), 0.5 * std::max(ms.band_lo(), mi.band_lo())) * (1.0 + 1e-9);
  const double hi =
      std::min(mp.band_hi(), 0.5 * std::min(ms.band_hi(), mi.band_hi())) * (1.0 - 1e-9);
  if (!(lo < hi)) return std::nullopt;
  const auto f = [&](double lp) {
    return mp.k(lp) - ms.k(2.0 * lp) - mi.k(2.0 * lp);
  };
  const int n = 800;
  double prev_l = lo, prev_f = f(lo);
  for (int j = 1; j < n; ++j) {
    const double lp = lo + (hi - lo) * j / (n - 1);
    const double fv = f(lp);
    if (std::isfinite(prev_f) && std::isfinite(fv) && prev_f * fv < 0.0) {
      double a = prev_l, b = lp, fa = prev_f;
      for (int i = 0; i < 80; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fa * fm <= 0.0)
          b = m;
        else {
          a = m;
          fa = fm;
        }
      }
      return 0.5 * (a + b);
    }
    prev_l = lp;
    prev_f = fv;
  }
  return std::nullopt;
}

}  // namespace spdc
