#include "spdc/dispersion.hpp"

#include <cmath>

#include "spdc/units.hpp"

namespace spdc {

IndexModel::IndexModel(const Crystal& crystal, Axis axis, double temperature_c) {
  const SellmeierSet& s = crystal.sellmeier(axis);
  const std::string who =
      "crystal " + crystal.name + " axis " + std::string{axis_char(axis)};
  auto want = [&](size_t n) {
    if (s.coef.size() != n)
      throw ValidationError(who + ": form '" + s.form + "' wants " + std::to_string(n) +
                            " coefficients, got " + std::to_string(s.coef.size()));
  };
  if (s.form == "sellmeier_pole1") {
    form_ = Form::Pole1;
    want(4);
  } else if (s.form == "sellmeier_pole2") {
    form_ = Form::Pole2;
    want(6);
  } else if (s.form == "constant_n") {
    form_ = Form::Const;
    want(1);
  } else {
    throw ValidationError(who + ": Sellmeier form '" + s.form + "' is not implemented");
  }
  for (size_t i = 0; i < s.coef.size(); ++i) c_[i] = s.coef[i];

  const auto& th = crystal.thermo(axis);
  if (th) {
    if (th->form != "dndt_invlambda_poly")
      throw ValidationError(who + ": thermo-optic form '" + th->form + "' is not implemented");
    if (th->n1.size() != 4 || th->n2.size() != 4)
      throw ValidationError(who + ": dndt_invlambda_poly wants 4+4 coefficients");
    has_thermo_ = true;
    for (int i = 0; i < 4; ++i) {
      t1_[i] = th->n1[i];
      t2_[i] = th->n2[i];
    }
    dT_ = temperature_c - th->base_c;
  } else {
    // no published thermo-optic data: evaluate at the reference temperature
    // and flag any off-reference query
    thermo_missing_ = std::abs(temperature_c - crystal.reference_temperature_c) > 1e-9;
  }
  // unflagged region = inside transparency AND inside the fit band
  band_lo_ = std::max(crystal.transparency_lo, s.valid_lo);
  band_hi_ = std::min(crystal.transparency_hi, s.valid_hi);
}

double IndexModel::n(double lambda_um) const {
  const double l2 = lambda_um * lambda_um;
  double n2;
  switch (form_) {
    case Form::Pole1:
      n2 = c_[0] + c_[1] * l2 / (l2 - c_[2]) - c_[3] * l2;
      break;
    case Form::Pole2:
      n2 = c_[0] + c_[1] * l2 / (l2 - c_[2]) + c_[3] * l2 / (l2 - c_[4]) - c_[5] * l2;
      break;
    case Form::Const:
      return c_[0];
  }
  double nn = std::sqrt(n2);  // NaN outside model validity; callers check/flag
  if (has_thermo_ && dT_ != 0.0) {
    double il = 1.0 / lambda_um;
    double p1 = t1_[0] + il * (t1_[1] + il * (t1_[2] + il * t1_[3]));
    double p2 = t2_[0] + il * (t2_[1] + il * (t2_[2] + il * t2_[3]));
    nn += 1e-6 * p1 * dT_ + 1e-8 * p2 * dT_ * dT_;
  }
  return nn;
}

bool IndexModel::out_of_band(double lambda_um) const {
  return lambda_um < band_lo_ || lambda_um > band_hi_;
}

double group_delay_value(const IndexModel& m, double lambda_um) {
  const double w0 = omega_from_lambda(lambda_um);
  auto k_of = [&](double w) { return m.k(lambda_from_omega(w)); };
  const double h = 1e-5 * w0;
  auto diff = [&](double hh) { return (k_of(w0 + hh) - k_of(w0 - hh)) / (2.0 * hh); };
  double d1 = diff(h);
  double d2 = diff(0.5 * h);
  return (4.0 * d2 - d1) / 3.0 * 1e3;  // ps/um -> ps/mm
}

bool sellmeier_form_known(std::string_view tag) {
  return tag == "sellmeier_pole1" || tag == "sellmeier_pole2" || tag == "constant_n";
}

bool thermo_form_known(std::string_view tag) { return tag == "dndt_invlambda_poly"; }

namespace {

void check_query(const OpticalQuery& q) {
  if (!q.crystal) throw ValidationError("optical query: null crystal");
  if (!(q.lambda_um > 0)) throw ValidationError("optical query: wavelength must be positive");
}

}  // namespace

Flagged refractive_index(const OpticalQuery& q) {
  check_query(q);
  IndexModel m(*q.crystal, q.axis, q.temperature_c);
  return {m.n(q.lambda_um), m.out_of_band(q.lambda_um) || m.thermo_missing()};
}

Flagged wavenumber(const OpticalQuery& q) {
  Flagged n = refractive_index(q);
  return {kTwoPi * n.value / q.lambda_um, n.flagged};
}

Flagged group_delay(const OpticalQuery& q) {
  check_query(q);
  IndexModel m(*q.crystal, q.axis, q.temperature_c);
  // flag if any stencil point leaves the band (stencil spans ~2e-5 relative)
  bool flagged = m.thermo_missing() || m.out_of_band(q.lambda_um) ||
                 m.out_of_band(q.lambda_um * (1 + 1.1e-5)) ||
                 m.out_of_band(q.lambda_um * (1 - 1.1e-5));
  return {group_delay_value(m, q.lambda_um), flagged};
}

// Declared in crystal.hpp; lives here so the loader can sanity-check optics
// without a header cycle.
void check_optical_sanity(const CrystalSet& set) {
  for (const auto& c : set.crystals) {
    for (Axis ax : {Axis::O, Axis::E}) {
      IndexModel m(c, ax, c.reference_temperature_c);  // throws on unknown forms
      const int kSamples = 80;
      for (int i = 0; i <= kSamples; ++i) {
        double lam =
            c.transparency_lo + (c.transparency_hi - c.transparency_lo) * i / double(kSamples);
        double n = m.n(lam);
        if (!(n > 1.0 && n < 3.0))
          throw ValidationError("crystal " + c.name + " axis " +
                                std::string{axis_char(ax)} + ": n = " + std::to_string(n) +
                                " at " + std::to_string(lam) + " um is outside (1, 3)");
      }
    }
  }
}

}  // namespace spdc
