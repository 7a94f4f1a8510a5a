#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "spdc/joint_spectrum.hpp"
#include "spdc/units.hpp"
#include "test_helpers.hpp"

using namespace spdc;

namespace {

// hand-built spectrum on shared axes; the synthetic crystal has equal o/e
// indices so the signal/idler arm delays coincide and carry no information
JointSpectrum manual_spectrum(const Eigen::MatrixXcd& amp_in) {
  static const Crystal synth = constant_crystal(2.0, 2.0);
  const int n = static_cast<int>(amp_in.rows());
  JointSpectrum js;
  js.amp = amp_in / amp_in.norm();
  js.lambda_s = Eigen::VectorXd::LinSpaced(n, 1.55, 1.65);
  js.lambda_i = js.lambda_s;
  js.process = make_process(synth, PolarizationConfig::parse("o:oe"), 0.8, 1.6, 25.0,
                            std::nullopt, 1e-6);
  js.pump = PumpPulse{0.8, 1.0};
  return js;
}

Eigen::MatrixXcd random_complex(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = std::complex<double>(g(rng), g(rng));
  return m;
}

const JointSpectrum& ktp791(int n = 512) {
  static const JointSpectrum js = [] {
    const Crystal& ktp = shipped_crystals().find("KTP");
    const PolarizationConfig pols = PolarizationConfig::parse("o:oe");
    const FirstOrderPoling fo = solve_first_order_period(ktp, pols, 0.791, 1.582, 50.0);
    REQUIRE(fo.result.status == PolingStatus::Ok);
    SpdcProcess p =
        make_process(ktp, pols, 0.791, 1.582, 50.0, fo.result.period_um, 30.0, fo.m);
    return build_jsa(p, PumpPulse{0.791, 2.5});
  }();
  REQUIRE(js.amp.rows() == n);
  return js;
}

}  // namespace

TEST_SUITE_BEGIN("joint_spectrum");

TEST_CASE("pump amplitude: peak, symmetry, time-bandwidth product") {
  const PumpPulse pump{0.791, 2.5};
  const double w0 = omega_from_lambda(0.791);
  CHECK(std::abs(pump_amplitude(pump, w0) - std::complex<double>(1.0, 0.0)) < 1e-15);
  for (double d : {0.05, 0.11, 0.4})
    CHECK(std::abs(pump_amplitude(pump, w0 + d) - pump_amplitude(pump, w0 - d)) < 1e-15);

  // transform-limited Gaussian: intensity FWHM_nu x FWHM_t = 4 ln2 / 2 pi
  const double fwhm_nu_thz = pump.sigma_omega() * 2.0 * std::sqrt(2.0 * std::log(2.0)) / kTwoPi;
  CHECK(fwhm_nu_thz * 1e3 == doctest::Approx(176.5).epsilon(0.002));  // GHz

  // amplitude down to exp(-1/4) one intensity standard deviation out
  CHECK(std::abs(pump_amplitude(pump, w0 + pump.sigma_omega())) ==
        doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
}

TEST_CASE("grid construction: normalization, axes, clean flags") {
  const JointSpectrum& js = ktp791();
  CHECK(std::abs(js.amp.squaredNorm() - 1.0) < 1e-9);
  CHECK(!js.window_clamped);
  CHECK(!js.dispersion_flagged);
  const double step0 = js.lambda_s[1] - js.lambda_s[0];
  CHECK(step0 > 0.0);
  for (int i = 1; i + 1 < js.lambda_s.size(); ++i)
    CHECK(js.lambda_s[i + 1] - js.lambda_s[i] == doctest::Approx(step0).epsilon(1e-9));
}

TEST_CASE("Schmidt identities on the workhorse spectrum") {
  const SchmidtReport rep = schmidt_decompose(ktp791(), SchmidtBasis::Amplitude);
  double sum = 0.0, sum2 = 0.0;
  for (double c : rep.coefficients) {
    CHECK(c >= 0.0);
    sum += c;
    sum2 += c * c;
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
  CHECK(std::abs(rep.P - sum2) < 1e-9);
  CHECK(std::abs(rep.P - 1.0 / rep.K) < 1e-9);
  // descending order
  for (size_t i = 1; i < rep.coefficients.size(); ++i)
    CHECK(rep.coefficients[i] <= rep.coefficients[i - 1] + 1e-15);
}

TEST_CASE("rank-1 grid decomposes to a single unit coefficient") {
  const int n = 64;
  Eigen::VectorXcd u(n), v(n);
  for (int i = 0; i < n; ++i) {
    const double x = (i - n / 2) / 12.0;
    u[i] = std::polar(std::exp(-x * x), 0.3 * x);
    v[i] = std::polar(std::exp(-0.5 * x * x), -0.1 * x * x);
  }
  const JointSpectrum js = manual_spectrum(u * v.transpose());
  const SchmidtReport rep = schmidt_decompose(js, SchmidtBasis::Amplitude);
  CHECK(std::abs(rep.K - 1.0) < 1e-9);
  CHECK(rep.coefficients[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Schmidt coefficients match a Gram-matrix eigendecomposition") {
  const JointSpectrum js = manual_spectrum(random_complex(8, 42));
  const SchmidtReport rep = schmidt_decompose(js, SchmidtBasis::Amplitude);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(js.amp * js.amp.adjoint());
  REQUIRE(eig.info() == Eigen::Success);
  std::vector<double> expect(eig.eigenvalues().data(),
                             eig.eigenvalues().data() + eig.eigenvalues().size());
  std::sort(expect.rbegin(), expect.rend());
  REQUIRE(rep.coefficients.size() >= expect.size());
  for (size_t i = 0; i < expect.size(); ++i)
    CHECK(std::abs(rep.coefficients[i] - expect[i]) < 1e-9);
}

TEST_CASE("transpose invariance of the decomposition") {
  const JointSpectrum& js = ktp791();
  JointSpectrum flipped = js;
  flipped.amp = js.amp.transpose();
  flipped.lambda_s = js.lambda_i;
  flipped.lambda_i = js.lambda_s;
  const SchmidtReport a = schmidt_decompose(js, SchmidtBasis::Amplitude);
  const SchmidtReport b = schmidt_decompose(flipped, SchmidtBasis::Amplitude);
  CHECK(std::abs(a.K - b.K) < 1e-12);
  for (size_t i = 0; i < std::min(a.coefficients.size(), b.coefficients.size()); ++i)
    CHECK(std::abs(a.coefficients[i] - b.coefficients[i]) < 1e-12);
}

TEST_CASE("squaring the JSA suppresses the sinc side lobes") {
  const SchmidtReport amp = schmidt_decompose(ktp791(), SchmidtBasis::Amplitude);
  const SchmidtReport jsi = schmidt_decompose(ktp791(), SchmidtBasis::Intensity);
  CHECK(jsi.K_JSI == doctest::Approx(jsi.K));
  CHECK(jsi.K < amp.K);
  CHECK(jsi.K_JSI <= 1.02);
}

TEST_CASE("the 791 nm workhorse reproduces the published figures of merit") {
  const SchmidtReport rep = full_report(ktp791());
  CHECK(rep.P >= 0.80);
  CHECK(rep.P <= 0.86);
  CHECK(rep.K >= 1.15);
  CHECK(rep.K <= 1.25);
  CHECK(rep.K_JSI <= 1.02);
  // degenerate group-velocity-matched pair: no distinguishability, V = P
  CHECK(rep.delta < 0.005);
  CHECK(std::abs(rep.v_hom - rep.P) < 0.005);
  CHECK(rep.fwhm_s_nm == doctest::Approx(1.08).epsilon(0.05));
  CHECK(rep.fwhm_s_nm / rep.fwhm_i_nm == doctest::Approx(1.0).epsilon(0.02));
  CHECK(!rep.flagged);
}

TEST_CASE("the 612 nm configuration trades indistinguishability for purity") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  const PolarizationConfig pols = PolarizationConfig::parse("o:oe");
  const FirstOrderPoling fo = solve_first_order_period(ktp, pols, 0.612, 1.224, 50.0);
  REQUIRE(fo.result.status == PolingStatus::Ok);
  // pulse duration and length from the purity optimizer for this pump
  SpdcProcess p =
      make_process(ktp, pols, 0.612, 1.224, 50.0, fo.result.period_um, 61.1, fo.m);
  const JointSpectrum js = build_jsa(p, PumpPulse{0.612, 0.321}, GridSpec{256});
  const SchmidtReport rep = full_report(js);
  CHECK(rep.P > 0.96);
  CHECK(rep.delta > 0.75);
  CHECK(rep.v_hom < 0.2);
}

TEST_CASE("dispersion parameter at the two published KTP design points") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  const PolarizationConfig pols = PolarizationConfig::parse("o:oe");
  const DispersionParameter d791 =
      dispersion_parameter(ktp, pols, 0.791, 1.582, 1.582, 50.0);
  CHECK(d791.canonical == doctest::Approx(0.993).epsilon(0.02 / 0.993));
  const DispersionParameter d612 =
      dispersion_parameter(ktp, pols, 0.612, 1.224, 1.224, 50.0);
  CHECK(std::abs(d612.canonical - (-0.003)) < 0.02);
  CHECK(!d791.flagged);
  // the two branches are reciprocal up to sign bookkeeping of the definition
  CHECK(std::abs(d791.d1 * d791.d2 - 1.0) < 1e-9);
}

TEST_CASE("matched pump and signal group delays give D = 0") {
  const Crystal synth = constant_crystal(2.0, 1.5);
  const DispersionParameter d = dispersion_parameter(
      synth, PolarizationConfig::parse("o:oe"), 0.8, 1.6, 1.6, 25.0);
  CHECK(std::abs(d.canonical) < 1e-6);
}

TEST_CASE("marginals: normalization and symmetric-grid equality") {
  const Eigen::MatrixXcd b = random_complex(32, 7);
  const JointSpectrum js = manual_spectrum(b + b.transpose().eval());
  const MarginalData m = marginals(js);
  CHECK(std::abs(m.signal.sum() - 1.0) < 1e-9);
  CHECK(std::abs(m.idler.sum() - 1.0) < 1e-9);
  CHECK(m.fwhm_s_nm == m.fwhm_i_nm);  // identical axes, symmetric intensity
}

TEST_CASE("symmetric amplitude carries no distinguishability") {
  const Eigen::MatrixXcd b = random_complex(24, 99);
  const JointSpectrum js = manual_spectrum(b + b.transpose().eval());
  CHECK(distinguishability(js) < 1e-9);
}

TEST_CASE("HOM bound against the trace-product oracle") {
  const JointSpectrum a = manual_spectrum(random_complex(16, 5));
  const JointSpectrum b = manual_spectrum(random_complex(16, 6));
  const Eigen::MatrixXcd ra = reduced_signal(a);
  const Eigen::MatrixXcd rb = reduced_idler(b);
  const double pa = ra.squaredNorm(), pb = rb.squaredNorm();
  const double zero_delay = (ra * rb).trace().real();
  const HomBound h = hom_visibility_bound(a, b);
  // the delay search can only improve on the tau = 0 overlap
  CHECK(h.v >= zero_delay - 1e-12);
  CHECK(h.v <= 0.5 * (pa + pb) + 1e-12);
  CHECK(!h.axes_differ);

  // two copies of one source whose arms are identical (symmetric amplitude)
  // interfere with visibility = purity; an asymmetric source stays below
  const Eigen::MatrixXcd s = random_complex(16, 8);
  const JointSpectrum sym = manual_spectrum(s + s.transpose().eval());
  const double p_sym = reduced_signal(sym).squaredNorm();
  const HomBound same = hom_visibility_bound(sym, sym);
  CHECK(same.v == doctest::Approx(p_sym).epsilon(1e-9));
  const HomBound asym = hom_visibility_bound(a, a);
  CHECK(asym.v <= 0.5 * (pa + reduced_idler(a).squaredNorm()) + 1e-12);
}

TEST_CASE("bandpass filtering: purity gain, losses, and the resolution guard") {
  const JointSpectrum& js = ktp791();
  const FilterResult f4 = apply_bandpass(js, 4.0, 4.0);
  CHECK(f4.transmitted_fraction > 0.80);
  CHECK(f4.transmitted_fraction < 1.0);
  CHECK(std::abs(f4.filtered.amp.squaredNorm() - 1.0) < 1e-9);
  const double p4 = schmidt_decompose(f4.filtered, SchmidtBasis::Amplitude).P;
  CHECK(p4 > 0.95);

  const double p2 = schmidt_decompose(apply_bandpass(js, 2.0, 2.0).filtered,
                                      SchmidtBasis::Amplitude)
                        .P;
  const double p8 = schmidt_decompose(apply_bandpass(js, 8.0, 8.0).filtered,
                                      SchmidtBasis::Amplitude)
                        .P;
  CHECK(p2 >= p4 - 1e-6);  // narrower filters keep trimming the side lobes
  CHECK(p4 >= p8 - 1e-6);
  const double p_unfiltered = schmidt_decompose(js, SchmidtBasis::Amplitude).P;
  CHECK(p8 >= p_unfiltered - 1e-6);

  const JointSpectrum coarse = manual_spectrum(random_complex(64, 3));
  CHECK_THROWS_AS(apply_bandpass(coarse, 0.02, 0.02), ValidationError);
}

TEST_CASE("grid self-convergence from 512 to 1024 samples") {
  const JointSpectrum& js = ktp791();
  const double k512 = schmidt_decompose(js, SchmidtBasis::Amplitude).K;
  JointSpectrum fine = build_jsa(js.process, js.pump, GridSpec{1024});
  const double k1024 = schmidt_decompose(fine, SchmidtBasis::Amplitude).K;
  CHECK(std::abs(k1024 - k512) < 1e-3);
}

TEST_CASE("exports carry the numbers they promise") {
  const JointSpectrum& js = ktp791();
  const SchmidtReport rep = full_report(js);
  const std::string j = export_report_json(rep);
  CHECK(j.find("purity") != std::string::npos);
  CHECK(j.find("schmidt_number") != std::string::npos);
  const std::string meta = export_metadata(js);
  CHECK(meta.find("512") != std::string::npos);
}

TEST_SUITE_END();
