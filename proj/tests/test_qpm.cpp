#include <doctest.h>

#include <cmath>
#include <random>

#include "spdc/qpm.hpp"
#include "spdc/units.hpp"
#include "test_helpers.hpp"

using namespace spdc;

TEST_SUITE_BEGIN("qpm");

TEST_CASE("idler wavelength closes the energy balance") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> up(0.4, 0.9), us(1.1, 2.2);
  for (int i = 0; i < 100; ++i) {
    const double lp = up(rng);
    const double ls = std::max(us(rng), 2.0 * lp * 1.01);
    const double li = idler_wavelength(lp, ls);
    CHECK(std::abs(1.0 / lp - 1.0 / ls - 1.0 / li) < 1e-12 / lp);
  }
}

TEST_CASE("degenerate KTP grating at 791 nm: inverse pair and bisection cross-check") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  const PolarizationConfig pols = PolarizationConfig::parse("o:oe");
  const FirstOrderPoling fo = solve_first_order_period(ktp, pols, 0.791, 1.582, 50.0);
  REQUIRE(fo.result.status == PolingStatus::Ok);
  // the bulk mismatch is negative here, so first order only works backwards
  CHECK(fo.m == -1);
  CHECK(fo.result.period_um > 1.0);
  CHECK(fo.result.period_um < 1000.0);

  SpdcProcess p = make_process(ktp, pols, 0.791, 1.582, 50.0, fo.result.period_um, 10.0, fo.m);
  CHECK(std::abs(phase_mismatch(p).value) < 1e-10);

  // independent bisection on Dk_m(Lambda) over a bracket around the answer
  double lo = fo.result.period_um * 0.5, hi = fo.result.period_um * 2.0;
  auto dk_at = [&](double period) {
    SpdcProcess q = p;
    q.poling_period_um = period;
    return phase_mismatch(q).value;
  };
  REQUIRE(dk_at(lo) * dk_at(hi) < 0.0);
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dk_at(lo) * dk_at(mid) <= 0.0 ? hi : lo) = mid;
  }
  CHECK(fo.result.period_um == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
}

TEST_CASE("QPM orders +1 and -1 differ by exactly 4 pi / period") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  SpdcProcess p = make_process(ktp, PolarizationConfig::parse("o:oe"), 0.791, 1.582, 50.0,
                               46.0, 10.0, 1);
  SpdcProcess q = p;
  q.qpm_order = -1;
  const double diff = phase_mismatch(q).value - phase_mismatch(p).value;
  CHECK(diff == doctest::Approx(2.0 * kTwoPi / 46.0).epsilon(1e-12));
}

TEST_CASE("signal solver finds the 1582 nm root of the degenerate grating") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  const PolarizationConfig pols = PolarizationConfig::parse("o:oe");
  const FirstOrderPoling fo = solve_first_order_period(ktp, pols, 0.791, 1.582, 50.0);
  REQUIRE(fo.result.status == PolingStatus::Ok);
  const std::vector<double> roots =
      solve_signal_wavelength(ktp, pols, 0.791, fo.result.period_um, 50.0, fo.m);
  REQUIRE(!roots.empty());
  bool found = false;
  for (double r : roots) found = found || std::abs(r - 1.582) < 5e-4;
  CHECK(found);
}

TEST_CASE("relabeling signal and idler polarizations mirrors the root set") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  const double lp = 0.80;
  // a deliberately non-degenerate grating so the mirror root is distinct
  const FirstOrderPoling fo =
      solve_first_order_period(ktp, PolarizationConfig::parse("o:oe"), lp, 1.45, 25.0);
  REQUIRE(fo.result.status == PolingStatus::Ok);
  const auto oe = solve_signal_wavelength(ktp, PolarizationConfig::parse("o:oe"), lp,
                                          fo.result.period_um, 25.0, fo.m);
  const auto eo = solve_signal_wavelength(ktp, PolarizationConfig::parse("o:eo"), lp,
                                          fo.result.period_um, 25.0, fo.m);
  REQUIRE(!oe.empty());
  for (double r : oe) {
    const double partner = idler_wavelength(lp, r);
    bool found = false;
    for (double s : eo) found = found || std::abs(s - partner) < 1e-6;
    CHECK_MESSAGE(found, "no eo root pairs with oe root at ", r);
  }
}

TEST_CASE("randomized gratings: every reported root closes the mismatch") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> up(0.55, 0.85), us(1.2, 2.0);
  const CrystalSet& set = shipped_crystals();
  std::uniform_int_distribution<int> uc(0, static_cast<int>(set.crystals.size()) - 1);
  int solved = 0;
  for (int i = 0; i < 100; ++i) {
    const Crystal& cr = set.crystals[uc(rng)];
    const double lp = up(rng);
    const double ls = std::max(us(rng), 2.0 * lp * 1.02);
    const FirstOrderPoling fo =
        solve_first_order_period(cr, PolarizationConfig::parse("o:oe"), lp, ls, 25.0);
    if (fo.result.status != PolingStatus::Ok) continue;
    for (double r : solve_signal_wavelength(cr, PolarizationConfig::parse("o:oe"), lp,
                                            fo.result.period_um, 25.0, fo.m)) {
      SpdcProcess p = make_process(cr, PolarizationConfig::parse("o:oe"), lp, r, 25.0,
                                   fo.result.period_um, 10.0, fo.m);
      ++solved;
      CHECK(std::abs(phase_mismatch(p).value) < 1e-10);
    }
  }
  CHECK(solved > 50);  // the draw ranges are chosen to mostly phase-match
}

TEST_CASE("period diverges on the CTA bulk-matching locus") {
  const Crystal& cta = shipped_crystals().find("CTA");
  const PolarizationConfig pols = PolarizationConfig::parse("o:oe");
  const auto locus = bulk_phasematch_locus(cta, pols, 0.772, 0.7735, 4, 25.0);
  REQUIRE(!locus.empty());
  REQUIRE(!locus.front().lambda_s.empty());
  const double lp = locus.front().lambda_p;
  const double ls = locus.front().lambda_s.front();
  const PolingResult pr = solve_poling_period(cta, pols, lp, ls, 25.0, 1);
  if (pr.status == PolingStatus::Ok)
    CHECK(pr.period_um > 1e5);  // "approaches infinity" on the locus
  else
    CHECK(pr.status == PolingStatus::BulkMatched);
}

TEST_CASE("QPM amplitude: peak, first zero, side lobe, symmetry") {
  const double L = 10.0;  // mm
  CHECK(qpm_amplitude(0.0, L) == std::complex<double>(1.0, 0.0));

  const double dk_zero = kTwoPi / (L * 1e3);  // Dk L/2 = pi
  CHECK(std::abs(qpm_amplitude(dk_zero, L)) < 1e-12);

  const double dk_lobe = 1.5 * dk_zero;  // Dk L/2 = 3 pi / 2
  CHECK(std::norm(qpm_amplitude(dk_lobe, L)) == doctest::Approx(0.045).epsilon(0.02));

  std::mt19937 rng(55);
  std::uniform_real_distribution<double> ud(-5.0 * dk_zero, 5.0 * dk_zero);
  for (int i = 0; i < 50; ++i) {
    const double dk = ud(rng);
    CHECK(std::abs(qpm_amplitude(dk, L)) ==
          doctest::Approx(std::abs(qpm_amplitude(-dk, L))).epsilon(1e-14));
    // the modulus is even, the phase odd: psi(-dk) is the conjugate
    CHECK(std::abs(qpm_amplitude(-dk, L) - std::conj(qpm_amplitude(dk, L))) < 1e-14);
  }
}

TEST_CASE("CTA bulk locus passes near 775 -> 2 x 1550 nm") {
  const Crystal& cta = shipped_crystals().find("CTA");
  const auto locus =
      bulk_phasematch_locus(cta, PolarizationConfig::parse("o:oe"), 0.769, 0.776, 60, 25.0);
  bool hit = false;
  for (const BulkLocusRow& row : locus)
    for (double ls : row.lambda_s)
      hit = hit || (std::abs(row.lambda_p - 0.775) <= 0.003 && std::abs(ls - 1.550) <= 0.010);
  CHECK(hit);
  // every reported pair closes the grating-free mismatch
  for (const BulkLocusRow& row : locus)
    for (double ls : row.lambda_s) {
      SpdcProcess p = make_process(cta, PolarizationConfig::parse("o:oe"), row.lambda_p, ls,
                                   25.0, std::nullopt, 10.0);
      CHECK(std::abs(phase_mismatch(p).value) < 1e-10);
    }
}

TEST_CASE("phosphate and arsenate bulk loci reach the mid-infrared") {
  for (const char* name : {"KTP", "KTA", "RTA", "RTP"}) {
    const Crystal& cr = shipped_crystals().find(name);
    const auto locus =
        bulk_phasematch_locus(cr, PolarizationConfig::parse("o:oe"), 0.45, 1.6, 80, 25.0);
    double max_idler = 0.0;
    for (const BulkLocusRow& row : locus)
      for (double ls : row.lambda_s)
        max_idler = std::max(max_idler, idler_wavelength(row.lambda_p, ls));
    CHECK_MESSAGE(max_idler > 2.0, name, ": bulk idler never leaves the near infrared");
  }
}

TEST_SUITE_END();
