#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdc/design_search.hpp"
#include "test_helpers.hpp"

using namespace spdc;

namespace {

SpdcProcess ktp791_prototype() {
  const Crystal& ktp = shipped_crystals().find("KTP");
  const PolarizationConfig pols = PolarizationConfig::parse("o:oe");
  const FirstOrderPoling fo = solve_first_order_period(ktp, pols, 0.791, 1.582, 50.0);
  REQUIRE(fo.result.status == PolingStatus::Ok);
  return make_process(ktp, pols, 0.791, 1.582, 50.0, fo.result.period_um, 30.0, fo.m);
}

}  // namespace

TEST_SUITE_BEGIN("design_search");

TEST_CASE("tau-L optimizer matches an exhaustive scan") {
  const SpdcProcess proto = ktp791_prototype();

  // brute force on a log grid at the same working resolution
  double best_p = 0.0;
  const int n = 40;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double tau = 0.5 * std::pow(8.0 / 0.5, a / (n - 1.0));
      const double len = 5.0 * std::pow(80.0 / 5.0, b / (n - 1.0));
      SpdcProcess p = proto;
      p.length_mm = len;
      GridSpec g;
      g.n = 64;
      const JointSpectrum js = build_jsa(p, PumpPulse{proto.lambda_p, tau}, g);
      best_p = std::max(best_p, schmidt_decompose(js, SchmidtBasis::Amplitude).P);
    }

  TauLOptions o;
  o.tau_lo_ps = 0.5;
  o.tau_hi_ps = 8.0;
  o.len_lo_mm = 5.0;
  o.len_hi_mm = 80.0;
  o.grid = 16;
  o.jsa_n = 64;
  o.full_final_report = false;
  const TauLResult r = optimize_tau_L(proto, TauLObjective::MaxPurity, o);
  CHECK(r.report.P >= best_p - 0.01);
  CHECK(!r.flat);
  CHECK(r.tau_ps >= o.tau_lo_ps);
  CHECK(r.tau_ps <= o.tau_hi_ps);
  CHECK(r.length_mm >= o.len_lo_mm);
  CHECK(r.length_mm <= o.len_hi_mm);
}

TEST_CASE("collapsed search bounds are reported as flat") {
  const SpdcProcess proto = ktp791_prototype();
  TauLOptions o;
  o.tau_lo_ps = o.tau_hi_ps = 2.0;
  o.len_lo_mm = o.len_hi_mm = 20.0;
  o.grid = 2;
  o.jsa_n = 64;
  o.refine_iters = 0;
  o.full_final_report = false;
  const TauLResult r = optimize_tau_L(proto, TauLObjective::MaxPurity, o);
  CHECK(r.flat);
  CHECK(r.tau_ps == doctest::Approx(2.0));
  CHECK(r.length_mm == doctest::Approx(20.0));
}

TEST_CASE("KTP pure-state atlas contains the 791 -> 1582 design") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  const std::vector<double> pumps{0.789, 0.790, 0.791, 0.792, 0.793};
  const Atlas atlas =
      purity_atlas(ktp, PolarizationConfig::parse("o:oe"), pumps, 50.0);
  REQUIRE(!atlas.points.empty());
  const AtlasPoint* at791 = nullptr;
  for (const AtlasPoint& pt : atlas.points)
    if (pt.lambda_p_um == doctest::Approx(0.791)) at791 = &pt;
  REQUIRE(at791 != nullptr);
  CHECK(at791->lambda_s_lo_um <= 1.582);
  CHECK(at791->lambda_s_hi_um >= 1.582);
  CHECK(at791->best_k_jsi <= 1.011);
  CHECK(at791->best_tau_ps > 0.0);
  CHECK(at791->best_length_mm > 0.0);
  CHECK(std::abs(at791->qpm_order_lo) == 1);
  CHECK(std::abs(at791->qpm_order_hi) == 1);
  CHECK(at791->period_lo_um > 0.0);

  REQUIRE(!atlas.samples.empty());
  for (const AtlasSample& s : atlas.samples)
    if (std::isfinite(s.period_um)) CHECK(s.period_um > 0.0);
}

TEST_CASE("type-I probing finds no intrinsically pure states") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  const EmptinessCheck chk = type_i_emptiness_check(
      ktp, PolarizationConfig::parse("e:oo"), {0.50, 0.60, 0.70}, 25.0);
  CHECK(chk.empty);
  CHECK_FALSE(chk.forbidden);
  CHECK(chk.probes > 0);
  CHECK(chk.min_k_jsi > 1.01);
  CHECK(chk.at_lambda_p_um > 0.0);  // best attempt is reported, not assumed
}

TEST_CASE("o -> ee is reported forbidden, not scanned") {
  // No mm2 tensor element couples an o pump to two e daughters, so the
  // emptiness check must refuse to treat the configuration as scannable.
  const Crystal& ktp = shipped_crystals().find("KTP");
  const PolarizationConfig pols = PolarizationConfig::parse("o:ee");
  CHECK(ktp.effective_nonlinearity(pols) == 0.0);
  const EmptinessCheck chk =
      type_i_emptiness_check(ktp, pols, {0.55, 0.60, 0.65}, 25.0);
  CHECK(chk.forbidden);
  CHECK(chk.empty);
  CHECK(chk.probes == 0);
  CHECK(std::isinf(chk.min_k_jsi));
}

TEST_CASE("atlas rejects type-I configurations outright") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  CHECK_THROWS_AS(
      purity_atlas(ktp, PolarizationConfig::parse("e:oo"), {0.60}, 25.0),
      ValidationError);
}

TEST_CASE("degenerate GVM constants of all five materials") {
  const CrystalSet& set = shipped_crystals();
  const auto ktp = degenerate_gvm_point(set.find("KTP"), 50.0);
  REQUIRE(ktp.has_value());
  CHECK(std::abs(*ktp - 0.791) <= 0.003);

  struct Anchor {
    const char* name;
    double lambda_nm;
  };
  for (const Anchor& a :
       {Anchor{"CTA", 932.3}, Anchor{"KTA", 817.4}, Anchor{"RTA", 892.3},
        Anchor{"RTP", 821.6}}) {
    const auto got = degenerate_gvm_point(set.find(a.name), 25.0);
    REQUIRE_MESSAGE(got.has_value(), a.name, ": no GVM crossing found");
    CHECK_MESSAGE(std::abs(*got * 1e3 - a.lambda_nm) <= 5.0, a.name, " at ",
                  *got * 1e3, " nm");
  }
}

TEST_CASE("a dispersionless crystal has no GVM crossing") {
  const Crystal synth = constant_crystal(1.8, 1.9);
  CHECK(!degenerate_gvm_point(synth, 25.0).has_value());
}

TEST_CASE("degenerate scan brackets the KTP matching point") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  TauLOptions o;
  o.grid = 6;
  o.jsa_n = 96;
  o.refine_iters = 1;
  const auto rows = degenerate_scan(ktp, 0.789, 0.793, 5, 50.0, o);
  REQUIRE(rows.size() == 5);
  const DegenerateRow* mid = nullptr;
  for (const DegenerateRow& r : rows) {
    CHECK(r.period_um > 0.0);
    CHECK(r.purity > 0.0);
    CHECK(r.purity <= 1.0 + 1e-9);
    if (r.lambda_p_um == doctest::Approx(0.791)) mid = &r;
  }
  REQUIRE(mid != nullptr);
  CHECK(mid->purity >= 0.79);
  CHECK(mid->purity <= 0.87);
  // indistinguishable at the matching point: visibility meets purity, the
  // bandwidth ratio crosses one inside the scanned window
  CHECK(std::abs(mid->v_hom - mid->purity) < 0.02);
  CHECK((rows.front().bw_ratio - 1.0) * (rows.back().bw_ratio - 1.0) < 0.0);
  CHECK(std::abs(mid->d - 1.0) < 0.05);
}

TEST_CASE("CDDC sweep reproduces the published KTP configuration") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  const auto rows =
      cddc_search(ktp, PolarizationConfig::parse("o:oe"), 25.0, CddcOptions{});
  REQUIRE(!rows.empty());
  bool anchor = false;
  for (const CddcConfig& c : rows) {
    CHECK(c.residual_1_rad_um < 1e-8);
    CHECK(c.residual_2_rad_um < 1e-8);
    CHECK(c.sum_residual_rel < 1e-8);
    CHECK(c.lambda_b_um < c.lambda_r_um);
    anchor = anchor || (std::abs(c.lambda_p_um * 1e3 - 532.511) <= 5.0 &&
                        std::abs(c.lambda_b_um * 1e3 - 903.858) <= 5.0 &&
                        std::abs(c.lambda_r_um * 1e3 - 1296.131) <= 5.0);
  }
  CHECK(anchor);
}

TEST_CASE("CDDC sweep reaches the CTA telecom box on a monotone branch") {
  const Crystal& cta = shipped_crystals().find("CTA");
  const auto rows =
      cddc_search(cta, PolarizationConfig::parse("o:oe"), 25.0, CddcOptions{});
  REQUIRE(!rows.empty());

  bool box = false;
  int max_branch = 0;
  double branch0_max_period = 0.0;
  for (const CddcConfig& c : rows) {
    max_branch = std::max(max_branch, c.branch);
    if (c.branch == 0) branch0_max_period = std::max(branch0_max_period, c.period_um);
    const double dgd = c.dgd_near_02 == 1 ? c.dgd_ob_er_ps_mm : c.dgd_eb_or_ps_mm;
    box = box || (std::abs(c.lambda_p_um * 1e3 - 772.5) <= 10.0 &&
                  std::abs(c.lambda_b_um * 1e3 - 1505.0) <= 10.0 &&
                  std::abs(c.lambda_r_um * 1e3 - 1587.0) <= 10.0 &&
                  std::abs(dgd - 0.2) <= 0.05);
  }
  CHECK(box);
  CHECK(max_branch >= 1);                 // the second solution family is kept
  CHECK(branch0_max_period > 2000.0);     // physical branch survives to long periods

  // wavelengths approach each other along each branch separately
  for (int b = 0; b <= max_branch; ++b) {
    double prev_gap = -1.0, prev_period = 0.0;
    for (const CddcConfig& c : rows) {
      if (c.branch != b) continue;
      const double gap = c.lambda_r_um - c.lambda_b_um;
      if (prev_gap >= 0.0) {
        CHECK(c.period_um > prev_period);
        CHECK(gap <= prev_gap + 1e-9);
      }
      prev_gap = gap;
      prev_period = c.period_um;
    }
  }
}

TEST_CASE("single-period CDDC solves agree with the sweep") {
  const CrystalSet& set = shipped_crystals();
  const auto cta = cddc_solve(set.find("CTA"), PolarizationConfig::parse("o:oe"),
                              900.0, 25.0);
  REQUIRE(cta.has_value());
  CHECK(cta->lambda_p_um == doctest::Approx(0.773627).epsilon(2e-5));
  CHECK(cta->branch == 0);

  const auto ktp = cddc_solve(set.find("KTP"), PolarizationConfig::parse("o:oe"),
                              63.019, 25.0);
  REQUIRE(ktp.has_value());
  CHECK(std::abs(ktp->lambda_p_um * 1e3 - 532.51) < 0.5);

  CHECK_THROWS_AS(cddc_solve(set.find("KTP"), PolarizationConfig::parse("o:oe"),
                             -5.0, 25.0),
                  ValidationError);
  // the pair of processes needs an o pump with cross-polarized daughters
  CHECK_THROWS_AS(cddc_solve(set.find("KTP"), PolarizationConfig::parse("e:oe"),
                             60.0, 25.0),
                  ValidationError);
}

TEST_CASE("bulk degenerate pump wavelengths") {
  const CrystalSet& set = shipped_crystals();
  const PolarizationConfig pols = PolarizationConfig::parse("o:oe");

  // only CTA's crossing lands in the telecom band; the others sit much bluer
  const auto cta = bulk_degenerate_pump(set.find("CTA"), pols, 25.0);
  REQUIRE(cta.has_value());
  CHECK(std::abs(*cta - 0.77392) < 0.003);

  const auto ktp = bulk_degenerate_pump(set.find("KTP"), pols, 25.0);
  REQUIRE(ktp.has_value());
  CHECK(std::abs(*ktp - 0.5404) < 0.005);

  // constant indices leave the type-II mismatch pi (n_o - n_e) / lambda_p,
  // which never crosses zero
  CHECK(!bulk_degenerate_pump(constant_crystal(1.8, 1.9), pols, 25.0).has_value());
}

TEST_CASE("filter scan: ordered rows, monotone loss") {
  const SpdcProcess proto = ktp791_prototype();
  GridSpec g;
  g.n = 256;
  const JointSpectrum js = build_jsa(proto, PumpPulse{proto.lambda_p, 2.5}, g);
  const std::vector<double> widths{2.0, 4.0, 8.0};
  const auto rows = filter_scan(js, widths);
  REQUIRE(rows.size() == widths.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].fwhm_nm == doctest::Approx(widths[i]));
    CHECK(rows[i].transmitted_fraction > 0.0);
    CHECK(rows[i].transmitted_fraction <= 1.0);
  }
  CHECK(rows[0].transmitted_fraction < rows[1].transmitted_fraction);
  CHECK(rows[1].transmitted_fraction < rows[2].transmitted_fraction);
  CHECK(rows[0].purity > rows[1].purity);
  CHECK(rows[1].purity > rows[2].purity);
}

TEST_SUITE_END();
