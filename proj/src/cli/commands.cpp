#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spdc/design_search.hpp"
#include "spdc/units.hpp"
#include "spdc/util/sha256.hpp"
#include "spdc/util/svg.hpp"
#include "spdc/util/table.hpp"

namespace spdc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using util::CsvWriter;
using util::fmt_full;
using util::fmt_g;

constexpr const char* kFamily[5] = {"KTP", "CTA", "KTA", "RTA", "RTP"};

// Every knob of every subcommand, resolved. This is what a run manifest
// records, so a stored configuration replays without re-parsing argv.
struct Options {
  std::string command;

  // global
  std::string crystal = "KTP";
  std::string pols = "o:oe";
  double temp_c = 25.0;
  std::string data_path = "data/ktp_family.crystals";
  std::string out_dir = "out";  // not recorded: the re-run chooses its own
  std::string format = "csv";
  int grid = 512;
  bool seedless = true;
  bool plot = false;
  int figure = 0;  // expanded to concrete runs before dispatch, never recorded

  // process (jsa / filter / optimize)
  double pump_um = 0.0;
  double signal_um = 0.0;  // 0 = frequency degenerate
  double tau_ps = 2.5;
  double length_mm = 10.0;
  double period_um = 0.0;  // 0 = solve the first-order period
  int qpm_order = 0;       // 0 = sign chosen with the solved period
  bool bulk = false;
  double window_factor = 4.0;
  bool panels = false;

  // optimize
  std::string objective = "purity";
  double tau_lo = 0.1, tau_hi = 50.0;
  double len_lo = 1.0, len_hi = 100.0;
  int opt_grid = 24;
  int opt_n = 128;
  int refine = 2;
  bool surface = false;

  // atlas / scans
  double pump_lo_um = 0.0, pump_hi_um = 0.0;  // 0 = widest range the fit bands allow
  double pump_step_um = 0.005;
  int scan_samples = 60;
  double threshold = 1.01;
  int probe_n = 96;
  bool do_scan = false;
  int samples = 0;  // gvm scan / bulk locus sample count (0 = default)

  // cddc
  double cddc_period_lo = 5.0, cddc_period_hi = 5000.0;
  int cddc_periods = 200;
  double ref_length_mm = 10.0;

  // filter
  double fwhm_nm = 0.0;  // single width; 0 = sweep lo..hi
  double fwhm_lo_nm = 0.5, fwhm_hi_nm = 8.0;
  int fwhm_steps = 16;
};

// One field list for both manifest directions; out_dir and figure stay out so
// a re-run reproduces the same bytes into a directory of its own choosing.
template <class Fn>
void visit_fields(Options& o, Fn&& fn) {
  fn("crystal", o.crystal);
  fn("pols", o.pols);
  fn("temp_c", o.temp_c);
  fn("data", o.data_path);
  fn("format", o.format);
  fn("grid", o.grid);
  fn("seedless", o.seedless);
  fn("plot", o.plot);
  fn("pump_um", o.pump_um);
  fn("signal_um", o.signal_um);
  fn("tau_ps", o.tau_ps);
  fn("length_mm", o.length_mm);
  fn("period_um", o.period_um);
  fn("qpm_order", o.qpm_order);
  fn("bulk", o.bulk);
  fn("window_factor", o.window_factor);
  fn("panels", o.panels);
  fn("objective", o.objective);
  fn("tau_lo", o.tau_lo);
  fn("tau_hi", o.tau_hi);
  fn("len_lo", o.len_lo);
  fn("len_hi", o.len_hi);
  fn("opt_grid", o.opt_grid);
  fn("opt_n", o.opt_n);
  fn("refine", o.refine);
  fn("surface", o.surface);
  fn("pump_lo_um", o.pump_lo_um);
  fn("pump_hi_um", o.pump_hi_um);
  fn("pump_step_um", o.pump_step_um);
  fn("scan_samples", o.scan_samples);
  fn("threshold", o.threshold);
  fn("probe_n", o.probe_n);
  fn("do_scan", o.do_scan);
  fn("samples", o.samples);
  fn("cddc_period_lo", o.cddc_period_lo);
  fn("cddc_period_hi", o.cddc_period_hi);
  fn("cddc_periods", o.cddc_periods);
  fn("ref_length_mm", o.ref_length_mm);
  fn("fwhm_nm", o.fwhm_nm);
  fn("fwhm_lo_nm", o.fwhm_lo_nm);
  fn("fwhm_hi_nm", o.fwhm_hi_nm);
  fn("fwhm_steps", o.fwhm_steps);
}

json config_json(const Options& o) {
  json j;
  Options copy = o;
  visit_fields(copy, [&](const char* key, auto& value) { j[key] = value; });
  return j;
}

Options config_from_json(const json& j) {
  Options o;
  visit_fields(o, [&](const char* key, auto& value) {
    if (j.contains(key)) value = j.at(key).get<std::decay_t<decltype(value)>>();
  });
  return o;
}

double nm(double um) { return um * 1e3; }

// --------------------------------------------------------------------------
// shared plumbing

void write_outputs(const Options& o, std::map<std::string, std::string> files) {
  fs::create_directories(o.out_dir);
  json manifest;
  manifest["command"] = o.command;
  manifest["config"] = config_json(o);
  manifest["data_file"] = {{"path", o.data_path}, {"sha256", util::sha256_file_hex(o.data_path)}};
  json outs = json::object();
  for (const auto& [name, content] : files) {
    util::write_file((fs::path(o.out_dir) / name).string(), content);
    outs[name] = util::sha256_hex(content);
  }
  manifest["outputs"] = outs;
  util::write_file((fs::path(o.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

// Grating resolution for jsa/filter/optimize: explicit period, bulk, or the
// solved first-order period (m = +1 or -1, whichever is positive).
SpdcProcess resolve_process(const Options& o, const Crystal& cr) {
  const PolarizationConfig pols = PolarizationConfig::parse(o.pols);
  if (o.pump_um <= 0.0) throw ValidationError("a positive --pump wavelength is required");
  const double ls = o.signal_um > 0.0 ? o.signal_um : 2.0 * o.pump_um;
  std::optional<double> period;
  int order = o.qpm_order;
  if (o.bulk) {
    if (o.period_um > 0.0) throw ValidationError("--bulk and --period are mutually exclusive");
    if (order == 0) order = 1;
  } else if (o.period_um > 0.0) {
    period = o.period_um;
    if (order == 0) order = 1;
  } else {
    const FirstOrderPoling fo = solve_first_order_period(cr, pols, o.pump_um, ls, o.temp_c);
    if (fo.result.status == PolingStatus::BulkMatched) {
      order = 1;  // already matched without a grating
    } else if (fo.result.status == PolingStatus::Ok) {
      period = fo.result.period_um;
      order = fo.m;
    } else {
      throw ValidationError(
          "no first-order grating phase-matches this process; give --period explicitly");
    }
  }
  return make_process(cr, pols, o.pump_um, ls, o.temp_c, period, o.length_mm, order);
}

// Widest pump interval keeping the pump and the (near-degenerate) daughters
// inside their Sellmeier fit bands.
std::pair<double, double> default_pump_range(const Crystal& cr, PolarizationConfig pols,
                                             double temp_c) {
  const IndexModel mp(cr, pols.pump, temp_c);
  const IndexModel ms(cr, pols.signal, temp_c);
  const IndexModel mi(cr, pols.idler, temp_c);
  double lo = std::max(mp.band_lo(), 0.5 * std::max(ms.band_lo(), mi.band_lo()));
  double hi = std::min(mp.band_hi(), 0.5 * std::min(ms.band_hi(), mi.band_hi()));
  lo *= 1.0 + 1e-6;
  hi *= 1.0 - 1e-6;
  if (!(hi > lo))
    throw ValidationError("no pump range keeps pump and daughters inside the fit bands for " +
                          cr.name + " " + pols.to_string());
  return {lo, hi};
}

std::pair<double, double> pump_range(const Options& o, const Crystal& cr,
                                     PolarizationConfig pols) {
  if (o.pump_lo_um > 0.0 && o.pump_hi_um > o.pump_lo_um) return {o.pump_lo_um, o.pump_hi_um};
  if (o.pump_lo_um != 0.0 || o.pump_hi_um != 0.0)
    throw ValidationError("--pump-lo/--pump-hi must satisfy 0 < lo < hi (or both be omitted)");
  return default_pump_range(cr, pols, o.temp_c);
}

std::string jsi_heatmap_svg(const JointSpectrum& js) {
  const int n = static_cast<int>(js.amp.rows());
  std::vector<std::vector<double>> g(n, std::vector<double>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) g[r][c] = std::norm(js.amp(r, c));
  return util::svg_heatmap(g, nm(js.lambda_i[0]), nm(js.lambda_i[n - 1]), nm(js.lambda_s[0]),
                           nm(js.lambda_s[n - 1]), "joint spectral intensity",
                           "idler wavelength (nm)", "signal wavelength (nm)");
}

std::string marginals_svg(const JointSpectrum& js, const MarginalData& marg) {
  util::PlotSeries s, i;
  const int n = static_cast<int>(js.amp.rows());
  for (int r = 0; r < n; ++r) {
    s.x.push_back(nm(js.lambda_s[r]));
    s.y.push_back(marg.signal[r]);
    i.x.push_back(nm(js.lambda_i[r]));
    i.y.push_back(marg.idler[r]);
  }
  i.color = "#c23b22";
  return util::svg_line_plot({s, i}, "marginal spectra (signal blue, idler red)",
                             "wavelength (nm)", "normalized marginal");
}

// Pump-envelope and phase-matching magnitude panels on the same grid as the
// stored joint amplitude (their product, with the phases, is the JSA).
void add_panels(std::map<std::string, std::string>& files, const JointSpectrum& js) {
  const SpdcProcess& p = js.process;
  const IndexModel mp(*p.crystal, p.pols.pump, p.temperature_c);
  const IndexModel ms(*p.crystal, p.pols.signal, p.temperature_c);
  const IndexModel mi(*p.crystal, p.pols.idler, p.temperature_c);
  const int n = static_cast<int>(js.amp.rows());
  const double grating =
      p.poling_period_um ? kTwoPi * p.qpm_order / *p.poling_period_um : 0.0;
  std::vector<double> ws(n), wi(n), ks(n), ki(n);
  for (int r = 0; r < n; ++r) {
    ws[r] = omega_from_lambda(js.lambda_s[r]);
    ks[r] = ms.k(js.lambda_s[r]);
  }
  for (int c = 0; c < n; ++c) {
    wi[c] = omega_from_lambda(js.lambda_i[c]);
    ki[c] = mi.k(js.lambda_i[c]);
  }
  std::string mu_txt, pm_txt;
  mu_txt.reserve(static_cast<size_t>(n) * n * 12);
  pm_txt.reserve(static_cast<size_t>(n) * n * 12);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double mu = std::abs(pump_amplitude(js.pump, ws[r] + wi[c]));
      const double lp = lambda_from_omega(ws[r] + wi[c]);
      const double dk = mp.k(lp) - ks[r] - ki[c] - grating;
      if (c) {
        mu_txt += ' ';
        pm_txt += ' ';
      }
      mu_txt += fmt_g(mu, 6);
      pm_txt += fmt_g(std::abs(qpm_amplitude(dk, p.length_mm)), 6);
    }
    mu_txt += '\n';
    pm_txt += '\n';
  }
  files["pump_panel.mat"] = mu_txt;
  files["phasematch_panel.mat"] = pm_txt;
}

// --------------------------------------------------------------------------
// subcommands

JointSpectrum build_from_options(const Options& o, const Crystal& cr, SpdcProcess* out_p) {
  const SpdcProcess p = resolve_process(o, cr);
  const PumpPulse pump{p.lambda_p, o.tau_ps};
  GridSpec gs;
  gs.n = o.grid;
  gs.window_factor = o.window_factor;
  if (out_p != nullptr) *out_p = p;
  return build_jsa(p, pump, gs);
}

void print_process_line(const SpdcProcess& p) {
  std::printf("process: %s %s at %g C, pump %.4f nm -> %.4f nm + %.4f nm\n",
              p.crystal->name.c_str(), p.pols.to_string().c_str(), p.temperature_c,
              nm(p.lambda_p), nm(p.lambda_s), nm(p.lambda_i));
  if (p.poling_period_um)
    std::printf("grating: period %.6f um (order %+d), length %g mm\n", *p.poling_period_um,
                p.qpm_order, p.length_mm);
  else
    std::printf("grating: none (bulk phase matching), length %g mm\n", p.length_mm);
}

void cmd_jsa(const Options& o, const CrystalSet& set) {
  SpdcProcess p;
  const JointSpectrum js = build_from_options(o, set.find(o.crystal), &p);
  const SchmidtReport rep = full_report(js);
  const MarginalData marg = marginals(js);

  std::map<std::string, std::string> files;
  files["report.json"] = export_report_json(rep);
  files["metadata.json"] = export_metadata(js);
  {
    CsvWriter w({"lambda_s_um", "marginal_s", "lambda_i_um", "marginal_i"});
    for (int r = 0; r < js.lambda_s.size(); ++r)
      w.row({fmt_full(js.lambda_s[r]), fmt_g(marg.signal[r]), fmt_full(js.lambda_i[r]),
             fmt_g(marg.idler[r])});
    files["marginals.csv"] = w.str();
  }
  if (o.format == "matrix") {
    files["jsa.mat"] = export_matrix(js, false);
    files["jsi.mat"] = export_matrix(js, true);
  }
  if (o.panels) add_panels(files, js);
  if (o.plot) {
    files["jsi.svg"] = jsi_heatmap_svg(js);
    files["marginals.svg"] = marginals_svg(js, marg);
  }
  write_outputs(o, std::move(files));

  print_process_line(p);
  std::printf("pump pulse: %g ps (sigma_omega %.6f rad/ps)\n", js.pump.tau_ps,
              js.pump.sigma_omega());
  std::printf("P = %.4f  K = %.4f  K_JSI = %.4f  V_HOM = %.4f\n", rep.P, rep.K, rep.K_JSI,
              rep.v_hom);
  std::printf("marginal FWHM: signal %.4f nm, idler %.4f nm\n", rep.fwhm_s_nm, rep.fwhm_i_nm);
  if (js.window_clamped) std::printf("note: grid window clamped to the transparency range\n");
  if (rep.flagged)
    std::printf("note: flagged (outside a dispersion fit band or unresolved marginal)\n");
}

void cmd_optimize(const Options& o, const CrystalSet& set) {
  const Crystal& cr = set.find(o.crystal);
  Options po = o;
  po.length_mm = std::max(o.length_mm, 1.0);  // placeholder; the optimizer owns L
  const SpdcProcess p = resolve_process(po, cr);

  TauLObjective obj;
  if (o.objective == "purity")
    obj = TauLObjective::MaxPurity;
  else if (o.objective == "kjsi")
    obj = TauLObjective::MinKJsi;
  else
    throw ValidationError("--objective must be 'purity' or 'kjsi'");

  TauLOptions topt;
  topt.tau_lo_ps = o.tau_lo;
  topt.tau_hi_ps = o.tau_hi;
  topt.len_lo_mm = o.len_lo;
  topt.len_hi_mm = o.len_hi;
  topt.grid = o.opt_grid;
  topt.jsa_n = o.opt_n;
  topt.refine_iters = o.refine;
  const TauLResult r = optimize_tau_L(p, obj, topt);

  json j;
  j["objective"] = o.objective;
  j["tau_ps"] = r.tau_ps;
  j["length_mm"] = r.length_mm;
  j["flat"] = r.flat;
  j["purity"] = r.report.P;
  j["schmidt_number"] = r.report.K;
  j["k_jsi"] = r.report.K_JSI;
  j["v_hom"] = r.report.v_hom;
  j["delta"] = r.report.delta;
  j["fwhm_s_nm"] = r.report.fwhm_s_nm;
  j["fwhm_i_nm"] = r.report.fwhm_i_nm;
  j["flagged"] = r.report.flagged;
  std::map<std::string, std::string> files;
  files["optimum.json"] = j.dump(2) + "\n";

  if (o.surface) {
    const int m = std::max(8, o.opt_grid);
    CsvWriter w({"tau_ps", "length_mm", "purity"});
    std::vector<std::vector<double>> g(m, std::vector<double>(m, 0.0));
    const double ltau = std::log(o.tau_hi / o.tau_lo);
    const double llen = std::log(o.len_hi / o.len_lo);
    for (int a = 0; a < m; ++a) {
      const double tau = o.tau_lo * std::exp(ltau * a / (m - 1));
      for (int b = 0; b < m; ++b) {
        const double len = o.len_lo * std::exp(llen * b / (m - 1));
        double purity = std::numeric_limits<double>::quiet_NaN();
        try {
          SpdcProcess q = p;
          q.length_mm = len;
          GridSpec gs;
          gs.n = o.opt_n;
          const JointSpectrum js = build_jsa(q, PumpPulse{p.lambda_p, tau}, gs);
          purity = schmidt_decompose(js, SchmidtBasis::Amplitude).P;
        } catch (const ValidationError&) {
          // out-of-band corner of the surface: leave the hole visible
        }
        g[a][b] = std::isfinite(purity) ? purity : 0.0;
        w.row({fmt_g(tau), fmt_g(len), fmt_g(purity)});
      }
    }
    files["surface.csv"] = w.str();
    if (o.plot)
      files["surface.svg"] =
          util::svg_heatmap(g, o.len_lo, o.len_hi, o.tau_lo, o.tau_hi,
                            "heralded purity over the pulse/length plane (log-spaced samples)",
                            "crystal length (mm)", "pulse duration (ps)");
  }
  write_outputs(o, std::move(files));

  print_process_line(p);
  std::printf("optimum: tau = %.6g ps, L = %.6g mm%s\n", r.tau_ps, r.length_mm,
              r.flat ? "  (objective flat across the search box)" : "");
  std::printf("P = %.4f  K_JSI = %.4f  V_HOM = %.4f\n", r.report.P, r.report.K_JSI,
              r.report.v_hom);
}

void cmd_atlas(const Options& o, const CrystalSet& set) {
  const Crystal& cr = set.find(o.crystal);
  const PolarizationConfig pols = PolarizationConfig::parse(o.pols);
  const auto [lo, hi] = pump_range(o, cr, pols);
  const double step = o.pump_step_um > 0.0 ? o.pump_step_um : 0.005;
  std::vector<double> lps;
  for (double lp = lo; lp <= hi + 0.25 * step; lp += step) lps.push_back(std::min(lp, hi));
  if (lps.empty()) throw ValidationError("empty pump list; check --pump-lo/--pump-hi/--pump-step");

  AtlasOptions aopt;
  aopt.scan_samples = o.scan_samples;
  aopt.k_jsi_threshold = o.threshold;
  aopt.probe.jsa_n = o.probe_n;
  aopt.best.jsa_n = std::max(o.probe_n, 96);

  std::map<std::string, std::string> files;
  if (pols.type() == SpdcType::TypeI) {
    const EmptinessCheck ec = type_i_emptiness_check(cr, pols, lps, o.temp_c, aopt);
    json j;
    j["empty"] = ec.empty;
    j["forbidden"] = ec.forbidden;
    j["probes"] = ec.probes;
    j["min_k_jsi"] = ec.min_k_jsi;
    j["at_lambda_p_um"] = ec.at_lambda_p_um;
    j["at_lambda_s_um"] = ec.at_lambda_s_um;
    j["threshold"] = o.threshold;
    files["emptiness.json"] = j.dump(2) + "\n";
    CsvWriter pw({"lambda_p_um", "lambda_s_lo_um", "lambda_s_hi_um", "period_lo_um",
                  "period_hi_um", "qpm_order_lo", "qpm_order_hi", "best_lambda_s_um",
                  "best_tau_ps", "best_length_mm", "best_k_jsi"});
    files["atlas_points.csv"] = pw.str();  // header only: the type-I atlas is empty
    write_outputs(o, std::move(files));
    if (ec.forbidden)
      std::printf("%s %s: forbidden (zero effective nonlinearity); nothing to scan\n",
                  cr.name.c_str(), pols.to_string().c_str());
    else
      std::printf("%s %s: %s after %d probes (best K_JSI %.4f at pump %.4f nm)\n",
                  cr.name.c_str(), pols.to_string().c_str(),
                  ec.empty ? "no pure-state interval" : "NOT empty", ec.probes, ec.min_k_jsi,
                  nm(ec.at_lambda_p_um));
    return;
  }

  const Atlas atlas = purity_atlas(cr, pols, lps, o.temp_c, aopt);
  {
    CsvWriter w({"lambda_p_um", "lambda_s_lo_um", "lambda_s_hi_um", "period_lo_um",
                 "period_hi_um", "qpm_order_lo", "qpm_order_hi", "best_lambda_s_um",
                 "best_tau_ps", "best_length_mm", "best_k_jsi"});
    for (const AtlasPoint& pt : atlas.points)
      w.row({fmt_full(pt.lambda_p_um), fmt_g(pt.lambda_s_lo_um), fmt_g(pt.lambda_s_hi_um),
             fmt_g(pt.period_lo_um), fmt_g(pt.period_hi_um), std::to_string(pt.qpm_order_lo),
             std::to_string(pt.qpm_order_hi), fmt_g(pt.best_lambda_s_um), fmt_g(pt.best_tau_ps),
             fmt_g(pt.best_length_mm), fmt_g(pt.best_k_jsi)});
    files["atlas_points.csv"] = w.str();
  }
  {
    CsvWriter w({"lambda_p_um", "lambda_s_um", "period_um", "qpm_order", "d", "k_jsi"});
    for (const AtlasSample& s : atlas.samples)
      w.row({fmt_full(s.lambda_p_um), fmt_g(s.lambda_s_um), fmt_g(s.period_um),
             std::to_string(s.qpm_order), fmt_g(s.d), fmt_g(s.k_jsi)});
    files["atlas_samples.csv"] = w.str();
  }
  if (o.plot) {
    util::PlotSeries curve;
    curve.points_only = true;
    util::PlotSeries periods;
    periods.points_only = true;
    periods.color = "#c23b22";
    for (const AtlasSample& s : atlas.samples) {
      curve.x.push_back(nm(s.lambda_p_um));
      curve.y.push_back(nm(s.lambda_s_um));
      if (std::isfinite(s.period_um)) {
        periods.x.push_back(s.period_um);
        periods.y.push_back(nm(s.lambda_s_um));
      }
    }
    files["atlas.svg"] = util::svg_line_plot({curve}, "pure-state atlas (" + cr.name + " " +
                                                          pols.to_string() + ")",
                                             "pump wavelength (nm)", "signal wavelength (nm)");
    files["atlas_periods.svg"] =
        util::svg_line_plot({periods}, "first-order poling period along the atlas",
                            "poling period (um)", "signal wavelength (nm)");
  }
  write_outputs(o, std::move(files));
  std::printf("%s %s: %zu pump wavelengths with a pure-state interval, %zu curve samples\n",
              cr.name.c_str(), pols.to_string().c_str(), atlas.points.size(),
              atlas.samples.size());
  if (!atlas.points.empty()) {
    const AtlasPoint& pt = atlas.points.front();
    std::printf("first: pump %.4f nm, signal in [%.2f, %.2f] nm, best K_JSI %.4f\n",
                nm(pt.lambda_p_um), nm(pt.lambda_s_lo_um), nm(pt.lambda_s_hi_um),
                pt.best_k_jsi);
  }
}

void cmd_gvm(const Options& o, const CrystalSet& set) {
  const Crystal& cr = set.find(o.crystal);
  const std::optional<double> pt = degenerate_gvm_point(cr, o.temp_c);

  std::map<std::string, std::string> files;
  {
    CsvWriter w({"crystal", "temperature_c", "found", "lambda_p_um", "lambda_p_nm"});
    w.row({cr.name, fmt_g(o.temp_c), pt ? "1" : "0", pt ? fmt_full(*pt) : "",
           pt ? fmt_g(nm(*pt)) : ""});
    files["gvm.csv"] = w.str();
  }

  if (o.do_scan) {
    const PolarizationConfig pols = PolarizationConfig::parse("o:oe");
    const auto [vlo, vhi] = default_pump_range(cr, pols, o.temp_c);
    double lo = o.pump_lo_um, hi = o.pump_hi_um;
    if (!(lo > 0.0 && hi > lo)) {
      if (!pt)
        throw ValidationError(
            "no degenerate GVM point to center the scan; give --pump-lo/--pump-hi");
      lo = *pt - 0.05;
      hi = *pt + 0.05;
    }
    lo = std::max(lo, vlo);
    hi = std::min(hi, vhi);
    const int ns = o.samples > 0 ? o.samples : 21;
    TauLOptions topt;
    topt.grid = 6;
    topt.jsa_n = 128;
    topt.refine_iters = 1;
    const std::vector<DegenerateRow> rows = degenerate_scan(cr, lo, hi, ns, o.temp_c, topt);
    CsvWriter w({"lambda_p_um", "period_um", "qpm_order", "d", "tau_ps", "length_mm", "purity",
                 "v_hom", "k_jsi", "fwhm_s_nm", "fwhm_i_nm", "bw_ratio", "flagged"});
    util::PlotSeries purity_s, vhom_s;
    vhom_s.color = "#c23b22";
    for (const DegenerateRow& r : rows) {
      w.row({fmt_full(r.lambda_p_um), fmt_g(r.period_um), std::to_string(r.qpm_order),
             fmt_g(r.d), fmt_g(r.tau_ps), fmt_g(r.length_mm), fmt_g(r.purity), fmt_g(r.v_hom),
             fmt_g(r.k_jsi), fmt_g(r.fwhm_s_nm), fmt_g(r.fwhm_i_nm), fmt_g(r.bw_ratio),
             r.flagged ? "1" : "0"});
      purity_s.x.push_back(nm(r.lambda_p_um));
      purity_s.y.push_back(r.purity);
      vhom_s.x.push_back(nm(r.lambda_p_um));
      vhom_s.y.push_back(r.v_hom);
    }
    files["scan.csv"] = w.str();
    if (o.plot)
      files["scan.svg"] = util::svg_line_plot(
          {purity_s, vhom_s}, "degenerate source quality (purity blue, HOM bound red)",
          "pump wavelength (nm)", "value");
  }
  write_outputs(o, std::move(files));

  if (pt)
    std::printf("%s degenerate GVM point: pump %.4f nm (daughters at %.4f nm) at %g C\n",
                cr.name.c_str(), nm(*pt), nm(2.0 * *pt), o.temp_c);
  else
    std::printf("%s: no degenerate GVM point inside the fit bands at %g C\n", cr.name.c_str(),
                o.temp_c);
}

void cmd_cddc(const Options& o, const CrystalSet& set) {
  const Crystal& cr = set.find(o.crystal);
  const PolarizationConfig pols = PolarizationConfig::parse(o.pols);
  CddcOptions copt;
  copt.period_lo_um = o.cddc_period_lo;
  copt.period_hi_um = o.cddc_period_hi;
  copt.period_samples = o.cddc_periods;
  copt.reference_length_mm = o.ref_length_mm;

  std::vector<CddcConfig> rows;
  if (o.period_um > 0.0) {
    const std::optional<CddcConfig> cfg = cddc_solve(cr, pols, o.period_um, o.temp_c, copt);
    if (!cfg)
      throw ConvergenceError("the double-downconversion pair did not converge at period " +
                             std::to_string(o.period_um) + " um");
    rows.push_back(*cfg);
  } else {
    rows = cddc_search(cr, pols, o.temp_c, copt);
  }

  std::map<std::string, std::string> files;
  CsvWriter w({"period_um", "branch", "lambda_p_um", "lambda_b_um", "lambda_r_um",
               "lambda_p_nm", "lambda_b_nm", "lambda_r_nm", "bw1_nm", "bw2_nm",
               "dgd_ob_er_ps_mm", "dgd_eb_or_ps_mm", "dgd_near_02", "residual_1_rad_um",
               "residual_2_rad_um", "sum_residual_rel", "iterations"});
  // one blue/red series pair per branch so the plot never draws a line
  // across a jump between solution families
  static const char* kBlue[] = {"#1f6fb2", "#6aa5d8", "#9cc4e4"};
  static const char* kRed[] = {"#c23b22", "#de7f63", "#edb3a1"};
  std::map<int, std::pair<util::PlotSeries, util::PlotSeries>> series;
  int max_branch = 0;
  for (const CddcConfig& c : rows) {
    w.row({fmt_g(c.period_um, 12), std::to_string(c.branch), fmt_g(c.lambda_p_um, 12),
           fmt_g(c.lambda_b_um, 12), fmt_g(c.lambda_r_um, 12), fmt_g(nm(c.lambda_p_um)),
           fmt_g(nm(c.lambda_b_um)), fmt_g(nm(c.lambda_r_um)), fmt_g(c.bw1_nm),
           fmt_g(c.bw2_nm), fmt_g(c.dgd_ob_er_ps_mm), fmt_g(c.dgd_eb_or_ps_mm),
           std::to_string(c.dgd_near_02), fmt_g(c.residual_1_rad_um, 6),
           fmt_g(c.residual_2_rad_um, 6), fmt_g(c.sum_residual_rel, 6),
           std::to_string(c.iterations)});
    auto& [sb, sr] = series[c.branch];
    sb.color = kBlue[std::min(c.branch, 2)];
    sr.color = kRed[std::min(c.branch, 2)];
    sb.x.push_back(c.period_um);
    sb.y.push_back(nm(c.lambda_b_um));
    sr.x.push_back(c.period_um);
    sr.y.push_back(nm(c.lambda_r_um));
    max_branch = std::max(max_branch, c.branch);
  }
  files["cddc.csv"] = w.str();
  if (o.plot && !rows.empty()) {
    std::vector<util::PlotSeries> all;
    for (auto& [b, pair] : series) {
      all.push_back(std::move(pair.first));
      all.push_back(std::move(pair.second));
    }
    files["cddc.svg"] = util::svg_line_plot(
        std::move(all), "paired daughters of one grating (short arm blue, long arm red)",
        "poling period (um)", "wavelength (nm)");
  }
  write_outputs(o, std::move(files));

  std::printf("%s %s: %zu double-downconversion configuration(s) on %d branch(es)\n",
              cr.name.c_str(), pols.to_string().c_str(), rows.size(),
              rows.empty() ? 0 : max_branch + 1);
  if (!rows.empty()) {
    const CddcConfig& c = rows.front();
    std::printf("first: period %.4f um, pump %.4f nm -> %.4f nm + %.4f nm (dGD %.4f / %.4f "
                "ps/mm)\n",
                c.period_um, nm(c.lambda_p_um), nm(c.lambda_b_um), nm(c.lambda_r_um),
                c.dgd_ob_er_ps_mm, c.dgd_eb_or_ps_mm);
  }
}

void cmd_bulk(const Options& o, const CrystalSet& set) {
  const Crystal& cr = set.find(o.crystal);
  const PolarizationConfig pols = PolarizationConfig::parse(o.pols);
  const auto [lo, hi] = pump_range(o, cr, pols);
  const int ns = o.samples > 0 ? o.samples : 200;
  const std::vector<BulkLocusRow> locus = bulk_phasematch_locus(cr, pols, lo, hi, ns, o.temp_c);

  std::map<std::string, std::string> files;
  util::PlotSeries pts;
  pts.points_only = true;
  {
    CsvWriter w({"lambda_p_um", "lambda_s_um", "lambda_i_um"});
    for (const BulkLocusRow& row : locus)
      for (double ls : row.lambda_s) {
        w.row({fmt_full(row.lambda_p), fmt_full(ls),
               fmt_full(idler_wavelength(row.lambda_p, ls))});
        pts.x.push_back(nm(row.lambda_p));
        pts.y.push_back(nm(ls));
      }
    files["locus.csv"] = w.str();
  }

  const std::optional<double> deg = bulk_degenerate_pump(cr, pols, o.temp_c);
  json j;
  j["found"] = bool(deg);
  if (deg) {
    j["lambda_p_um"] = *deg;
    j["lambda_p_nm"] = nm(*deg);
    const SpdcProcess p =
        make_process(cr, pols, *deg, 2.0 * *deg, o.temp_c, std::nullopt, 10.0, 1);
    TauLOptions topt;
    topt.grid = 10;
    topt.jsa_n = 128;
    topt.refine_iters = 1;
    const TauLResult r = optimize_tau_L(p, TauLObjective::MaxPurity, topt);
    j["tau_ps"] = r.tau_ps;
    j["length_mm"] = r.length_mm;
    j["purity"] = r.report.P;
    j["v_hom"] = r.report.v_hom;
    j["k_jsi"] = r.report.K_JSI;
  }
  files["bulk_point.json"] = j.dump(2) + "\n";
  if (o.plot && !pts.x.empty())
    files["locus.svg"] =
        util::svg_line_plot({pts}, "bulk phase-matching locus (" + cr.name + " " +
                                       pols.to_string() + ")",
                            "pump wavelength (nm)", "signal wavelength (nm)");
  write_outputs(o, std::move(files));

  size_t roots = 0;
  for (const BulkLocusRow& row : locus) roots += row.lambda_s.size();
  std::printf("%s %s bulk locus: %zu root(s) across %d pump samples\n", cr.name.c_str(),
              pols.to_string().c_str(), roots, ns);
  if (deg)
    std::printf("degenerate terminal point: pump %.4f nm -> daughters %.4f nm\n", nm(*deg),
                nm(2.0 * *deg));
  else
    std::printf("no frequency-degenerate bulk match inside the fit bands\n");
}

void cmd_filter(const Options& o, const CrystalSet& set) {
  SpdcProcess p;
  const JointSpectrum js = build_from_options(o, set.find(o.crystal), &p);

  std::vector<double> widths;
  if (o.fwhm_nm > 0.0) {
    widths.push_back(o.fwhm_nm);
  } else {
    if (!(o.fwhm_lo_nm > 0.0) || !(o.fwhm_hi_nm > o.fwhm_lo_nm) || o.fwhm_steps < 2)
      throw ValidationError("--fwhm-lo/--fwhm-hi/--fwhm-steps do not define a scan");
    for (int i = 0; i < o.fwhm_steps; ++i)
      widths.push_back(o.fwhm_lo_nm +
                       (o.fwhm_hi_nm - o.fwhm_lo_nm) * i / (o.fwhm_steps - 1));
  }
  const std::vector<FilterScanRow> rows = filter_scan(js, widths);
  const SchmidtReport unfiltered = full_report(js);

  std::map<std::string, std::string> files;
  CsvWriter w({"fwhm_nm", "purity", "v_hom", "transmitted_fraction", "filtered_fwhm_s_nm",
               "filtered_fwhm_i_nm"});
  util::PlotSeries purity_s, trans_s;
  trans_s.color = "#c23b22";
  for (const FilterScanRow& r : rows) {
    w.row({fmt_g(r.fwhm_nm), fmt_g(r.purity), fmt_g(r.v_hom), fmt_g(r.transmitted_fraction),
           fmt_g(r.filtered_fwhm_s_nm), fmt_g(r.filtered_fwhm_i_nm)});
    purity_s.x.push_back(r.fwhm_nm);
    purity_s.y.push_back(r.purity);
    trans_s.x.push_back(r.fwhm_nm);
    trans_s.y.push_back(r.transmitted_fraction);
  }
  files["filter_scan.csv"] = w.str();
  {
    json j;
    j["unfiltered"] = {{"purity", unfiltered.P},
                       {"k_jsi", unfiltered.K_JSI},
                       {"v_hom", unfiltered.v_hom},
                       {"fwhm_s_nm", unfiltered.fwhm_s_nm},
                       {"fwhm_i_nm", unfiltered.fwhm_i_nm}};
    if (rows.size() == 1) {
      const FilterScanRow& r = rows.front();
      j["filtered"] = {{"fwhm_nm", r.fwhm_nm},
                       {"purity", r.purity},
                       {"v_hom", r.v_hom},
                       {"transmitted_fraction", r.transmitted_fraction},
                       {"filtered_fwhm_s_nm", r.filtered_fwhm_s_nm},
                       {"filtered_fwhm_i_nm", r.filtered_fwhm_i_nm}};
    }
    files["filter.json"] = j.dump(2) + "\n";
  }
  if (o.plot)
    files["filter.svg"] = util::svg_line_plot(
        {purity_s, trans_s},
        "identical bandpass on both arms (purity blue, transmission red)",
        "filter FWHM (nm)", "value");
  write_outputs(o, std::move(files));

  print_process_line(p);
  std::printf("unfiltered: P = %.4f\n", unfiltered.P);
  for (const FilterScanRow& r : rows)
    if (rows.size() == 1)
      std::printf("filtered %g nm: P = %.4f, V_HOM = %.4f, transmitted %.4f\n", r.fwhm_nm,
                  r.purity, r.v_hom, r.transmitted_fraction);
  if (rows.size() > 1)
    std::printf("scanned %zu widths from %g to %g nm (see filter_scan.csv)\n", rows.size(),
                widths.front(), widths.back());
}

void run_one(const Options& o) {
  const CrystalSet set = load_crystal_set(o.data_path);
  if (o.command == "jsa")
    cmd_jsa(o, set);
  else if (o.command == "optimize")
    cmd_optimize(o, set);
  else if (o.command == "atlas")
    cmd_atlas(o, set);
  else if (o.command == "gvm")
    cmd_gvm(o, set);
  else if (o.command == "cddc")
    cmd_cddc(o, set);
  else if (o.command == "bulk")
    cmd_bulk(o, set);
  else if (o.command == "filter")
    cmd_filter(o, set);
  else
    throw ValidationError("unknown command in configuration: '" + o.command + "'");
}

// --------------------------------------------------------------------------
// figure presets: each expands to one or more fully resolved runs written
// into subdirectories of --out, every one with its own manifest.

Options preset_base(const Options& g) {
  Options o;
  o.data_path = g.data_path;
  o.temp_c = g.temp_c;
  o.format = g.format;
  o.grid = g.grid;
  o.plot = true;
  return o;
}

std::vector<Options> figure_runs(int fig, const Options& g) {
  std::vector<Options> runs;
  auto add = [&](Options o, const std::string& sub) {
    o.out_dir = (fs::path(g.out_dir) / sub).string();
    runs.push_back(std::move(o));
  };
  auto two_digit = [](int n) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "fig%02d", n);
    return std::string(buf);
  };
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
  };
  auto jsa_preset = [&](const char* crystal, const char* pols, double pump, double tau,
                        double len) {
    Options o = preset_base(g);
    o.command = "jsa";
    o.crystal = crystal;
    o.pols = pols;
    o.pump_um = pump;
    o.tau_ps = tau;
    o.length_mm = len;
    o.panels = true;
    o.format = "matrix";
    return o;
  };
  auto atlas_preset = [&](const char* crystal, const char* pols) {
    Options o = preset_base(g);
    o.command = "atlas";
    o.crystal = crystal;
    o.pols = pols;
    o.pump_step_um = 0.010;  // coarser than the CLI default to keep one preset ~minutes
    return o;
  };
  auto gvm_scan_preset = [&](const char* crystal, int samples) {
    Options o = preset_base(g);
    o.command = "gvm";
    o.crystal = crystal;
    o.do_scan = true;
    o.samples = samples;
    return o;
  };

  switch (fig) {
    case 1:  // the two benchmark degenerate sources
      add(jsa_preset("KTP", "o:oe", 0.791, 2.5, 30.0), two_digit(1) + "_ktp791");
      add(jsa_preset("KTP", "o:eo", 0.612, 2.5, 10.0), two_digit(1) + "_ktp612");
      break;
    case 2: {  // purity over the pulse/length plane
      Options o = preset_base(g);
      o.command = "optimize";
      o.crystal = "KTP";
      o.pols = "o:oe";
      o.pump_um = 0.791;
      o.surface = true;
      add(o, two_digit(2) + "_surface");
      break;
    }
    case 3:  // JSA + JSI matrices of the benchmark source
      add(jsa_preset("KTP", "o:oe", 0.791, 2.5, 30.0), two_digit(3) + "_jsa_jsi");
      break;
    case 4: {  // filter-width scan on the benchmark source
      Options o = preset_base(g);
      o.command = "filter";
      o.crystal = "KTP";
      o.pols = "o:oe";
      o.pump_um = 0.791;
      o.tau_ps = 2.5;
      o.length_mm = 30.0;
      add(o, two_digit(4) + "_filter");
      break;
    }
    case 5:
    case 6:
    case 7:
    case 8:
    case 9:  // type-0 atlases, one crystal each
      add(atlas_preset(kFamily[fig - 5], "e:ee"),
          two_digit(fig) + "_atlas0_" + lower(kFamily[fig - 5]));
      break;
    case 10:
    case 11:
    case 12:
    case 13:
    case 14:  // type-II atlases
      add(atlas_preset(kFamily[fig - 10], "o:oe"),
          two_digit(fig) + "_atlas2_" + lower(kFamily[fig - 10]));
      break;
    case 15: {  // KTP degenerate scan across the GVM point
      Options o = gvm_scan_preset("KTP", 21);
      o.pump_lo_um = 0.70;
      o.pump_hi_um = 0.90;
      add(o, two_digit(15) + "_ktp_degenerate");
      break;
    }
    case 16:  // degenerate scans for the other four crystals
      for (const char* crystal : {"CTA", "KTA", "RTA", "RTP"})
        add(gvm_scan_preset(crystal, 15), two_digit(16) + "_" + lower(crystal));
      break;
    case 17: {  // CTA bulk locus with its degenerate terminal point
      Options o = preset_base(g);
      o.command = "bulk";
      o.crystal = "CTA";
      add(o, two_digit(17) + "_cta_bulk");
      break;
    }
    case 18:  // bulk loci of the remaining crystals
      for (const char* crystal : {"KTP", "KTA", "RTA", "RTP"}) {
        Options o = preset_base(g);
        o.command = "bulk";
        o.crystal = crystal;
        add(o, two_digit(18) + "_" + lower(crystal) + "_bulk");
      }
      break;
    case 19: {  // CTA double-downconversion sweep
      Options o = preset_base(g);
      o.command = "cddc";
      o.crystal = "CTA";
      add(o, two_digit(19) + "_cta_cddc");
      break;
    }
    case 20:  // double-downconversion sweeps of the remaining crystals
      for (const char* crystal : {"KTP", "KTA", "RTA", "RTP"}) {
        Options o = preset_base(g);
        o.command = "cddc";
        o.crystal = crystal;
        add(o, two_digit(20) + "_" + lower(crystal) + "_cddc");
      }
      break;
    default:
      throw ValidationError("--figure takes a preset number from 1 to 20");
  }
  return runs;
}

}  // namespace

int run(int argc, char** argv) {
  Options o;
  std::string manifest_path;

  CLI::App app{"spdc-design: photon-pair source design in the KTP isomorph family"};
  app.require_subcommand(0, 1);
  app.add_option("--crystal", o.crystal, "crystal name from the data file")
      ->capture_default_str();
  app.add_option("--pols", o.pols, "pump:daughter polarizations, e.g. o:oe")
      ->capture_default_str();
  app.add_option("--temp", o.temp_c, "crystal temperature (C)")->capture_default_str();
  app.add_option("--data", o.data_path, "crystal data file")->capture_default_str();
  app.add_option("--out", o.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", o.format, "csv | json | matrix")
      ->check(CLI::IsMember({"csv", "json", "matrix"}))
      ->capture_default_str();
  app.add_option("--grid", o.grid, "joint-spectrum grid resolution")->capture_default_str();
  app.add_flag("--seedless,!--seeded", o.seedless,
               "fully deterministic evaluation order (default on)");
  app.add_flag("--plot", o.plot, "also write SVG plots");
  app.add_option("--figure", o.figure, "reproduce a built-in preset (1-20) instead of a subcommand")
      ->check(CLI::Range(1, 20));
  app.add_option("--from-manifest", manifest_path,
                 "replay the configuration recorded in a manifest.json");

  auto add_process_opts = [&](CLI::App* c) {
    c->add_option("--pump", o.pump_um, "pump wavelength (um)")->required();
    c->add_option("--signal", o.signal_um,
                  "signal wavelength (um); omit for frequency degenerate");
    c->add_option("--period", o.period_um, "poling period (um); omit to solve first order");
    c->add_option("--order", o.qpm_order, "QPM order; omit for the solved sign");
    c->add_flag("--bulk", o.bulk, "no grating (bulk phase matching)");
    c->add_option("--window-factor", o.window_factor, "grid half-window in ridge widths")
        ->capture_default_str();
  };

  CLI::App* jsa = app.add_subcommand("jsa", "joint spectral amplitude and its purity report");
  add_process_opts(jsa);
  jsa->add_option("--tau", o.tau_ps, "pump pulse duration, intensity FWHM (ps)")
      ->capture_default_str();
  jsa->add_option("--length,--L", o.length_mm, "crystal length (mm)")->capture_default_str();
  jsa->add_flag("--panels", o.panels, "also write pump / phase-matching panel matrices");

  CLI::App* optimize =
      app.add_subcommand("optimize", "best pulse duration and crystal length");
  add_process_opts(optimize);
  optimize->add_option("--objective", o.objective, "purity | kjsi")->capture_default_str();
  optimize->add_option("--tau-lo", o.tau_lo, "pulse search floor (ps)")->capture_default_str();
  optimize->add_option("--tau-hi", o.tau_hi, "pulse search ceiling (ps)")
      ->capture_default_str();
  optimize->add_option("--len-lo", o.len_lo, "length search floor (mm)")->capture_default_str();
  optimize->add_option("--len-hi", o.len_hi, "length search ceiling (mm)")
      ->capture_default_str();
  optimize->add_option("--search-grid", o.opt_grid, "coarse samples per axis")
      ->capture_default_str();
  optimize->add_option("--search-n", o.opt_n, "grid resolution while searching")
      ->capture_default_str();
  optimize->add_option("--refine", o.refine, "golden-section passes")->capture_default_str();
  optimize->add_flag("--surface", o.surface, "also tabulate purity over the search plane");

  CLI::App* atlas = app.add_subcommand("atlas", "pure-state atlas over pump wavelength");
  atlas->add_option("--pump-lo", o.pump_lo_um, "pump sweep start (um); omit for widest");
  atlas->add_option("--pump-hi", o.pump_hi_um, "pump sweep end (um)");
  atlas->add_option("--pump-step", o.pump_step_um, "pump sweep step (um)")
      ->capture_default_str();
  atlas->add_option("--scan-samples", o.scan_samples, "signal samples per pump")
      ->capture_default_str();
  atlas->add_option("--threshold", o.threshold, "JSI Schmidt-number membership threshold")
      ->capture_default_str();
  atlas->add_option("--probe-n", o.probe_n, "grid resolution of the membership probe")
      ->capture_default_str();

  CLI::App* gvm = app.add_subcommand("gvm", "degenerate group-velocity-matching point");
  gvm->add_flag("--scan", o.do_scan, "also scan source quality across pump wavelength");
  gvm->add_option("--pump-lo", o.pump_lo_um, "scan start (um); omit for point +- 50 nm");
  gvm->add_option("--pump-hi", o.pump_hi_um, "scan end (um)");
  gvm->add_option("--samples", o.samples, "scan sample count")->capture_default_str();

  CLI::App* cddc =
      app.add_subcommand("cddc", "co-existing double downconversion from one grating");
  cddc->add_option("--period", o.period_um, "solve one poling period (um) instead of sweeping");
  cddc->add_option("--period-lo", o.cddc_period_lo, "sweep start (um)")->capture_default_str();
  cddc->add_option("--period-hi", o.cddc_period_hi, "sweep end (um)")->capture_default_str();
  cddc->add_option("--periods", o.cddc_periods, "log-spaced sweep samples")
      ->capture_default_str();
  cddc->add_option("--ref-length", o.ref_length_mm, "bandwidth reporting length (mm)")
      ->capture_default_str();

  CLI::App* bulk = app.add_subcommand("bulk", "grating-free phase-matching locus");
  bulk->add_option("--pump-lo", o.pump_lo_um, "pump sweep start (um); omit for widest");
  bulk->add_option("--pump-hi", o.pump_hi_um, "pump sweep end (um)");
  bulk->add_option("--samples", o.samples, "pump sample count")->capture_default_str();

  CLI::App* filter = app.add_subcommand("filter", "Gaussian bandpass on both arms");
  add_process_opts(filter);
  filter->add_option("--tau", o.tau_ps, "pump pulse duration (ps)")->capture_default_str();
  filter->add_option("--length,--L", o.length_mm, "crystal length (mm)")
      ->capture_default_str();
  filter->add_option("--fwhm", o.fwhm_nm,
                     "single Gaussian filter-function FWHM (nm); omit to sweep");
  filter->add_option("--fwhm-lo", o.fwhm_lo_nm, "sweep start (nm)")->capture_default_str();
  filter->add_option("--fwhm-hi", o.fwhm_hi_nm, "sweep end (nm)")->capture_default_str();
  filter->add_option("--fwhm-steps", o.fwhm_steps, "sweep sample count")
      ->capture_default_str();

  // global flags may follow the subcommand (the common way to type them)
  for (CLI::App* sub : {jsa, optimize, atlas, gvm, cddc, bulk, filter}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help or the parse error itself
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!manifest_path.empty()) {
      const json m = json::parse(util::read_file(manifest_path));
      Options ro = config_from_json(m.at("config"));
      ro.command = m.at("command").get<std::string>();
      ro.out_dir = o.out_dir;  // the replay decides where its copies go
      run_one(ro);
      return 0;
    }
    if (o.figure > 0) {
      if (!app.get_subcommands().empty())
        throw ValidationError("--figure replaces the subcommand; give one or the other");
      const std::vector<Options> runs = figure_runs(o.figure, o);
      for (const Options& r : runs) run_one(r);
      std::printf("figure %d: %zu run(s) under %s\n", o.figure, runs.size(),
                  o.out_dir.c_str());
      return 0;
    }
    const auto subs = app.get_subcommands();
    if (subs.empty()) {
      std::fputs(app.help().c_str(), stdout);
      return 2;
    }
    o.command = subs.front()->get_name();
    run_one(o);
    return 0;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace spdc::cli
