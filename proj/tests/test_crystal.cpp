#include <doctest.h>

#include <sstream>

#include "spdc/crystal.hpp"
#include "test_helpers.hpp"

using namespace spdc;

TEST_SUITE_BEGIN("crystal");

TEST_CASE("shipped file loads all five family members") {
  const CrystalSet& set = shipped_crystals();
  REQUIRE(set.crystals.size() == 5);
  for (const char* name : {"KTP", "CTA", "KTA", "RTA", "RTP"}) {
    const Crystal& c = set.find(name);
    CHECK(c.name == name);
    CHECK(c.transparency_lo < c.transparency_hi);
    CHECK(c.deff.size() == 6);
  }
  CHECK(set.try_find("ktp") != nullptr);  // lookup is case-insensitive
  CHECK(set.try_find("LBO") == nullptr);
}

TEST_CASE("d_eff table") {
  const CrystalSet& set = shipped_crystals();
  const PolarizationConfig eee = PolarizationConfig::parse("e:ee");
  const PolarizationConfig ooo = PolarizationConfig::parse("o:oo");
  CHECK(set.find("KTP").effective_nonlinearity(eee) == 9.5);
  CHECK(set.find("CTA").effective_nonlinearity(eee) == 11.2);
  CHECK(set.find("KTP").effective_nonlinearity(ooo) == 0.0);

  // daughters are unordered: o->oe and o->eo are the same configuration
  const Crystal& ktp = set.find("KTP");
  CHECK(ktp.effective_nonlinearity(PolarizationConfig::parse("o:oe")) ==
        ktp.effective_nonlinearity(PolarizationConfig::parse("o:eo")));

  const std::string csv = deff_table_csv(set);
  CHECK(csv.find("crystal,o->oo,e->ee,o->ee,e->oo,o->oe,e->oe") != std::string::npos);
  CHECK(csv.find("KTP,0,9.5,0,2.4,2.4,0") != std::string::npos);
  CHECK(csv.find("CTA,0,11.2,0,2.1,2.1,0") != std::string::npos);
  CHECK(csv.find("KTA,0,9.6,0,2.3,2.3,0") != std::string::npos);
  CHECK(csv.find("RTA,0,9.8,0,2.4,2.4,0") != std::string::npos);
  CHECK(csv.find("RTP,0,9.6,0,2.4,2.4,0") != std::string::npos);
}

TEST_CASE("polarization configurations") {
  PolarizationConfig p = PolarizationConfig::parse("o:oe");
  CHECK(p.pump == Axis::O);
  CHECK(p.signal == Axis::O);
  CHECK(p.idler == Axis::E);
  CHECK(p.type() == SpdcType::TypeII);
  CHECK(p.key() == "o->oe");
  CHECK(p.to_string() == "o:oe");

  CHECK(PolarizationConfig::parse("e:ee").type() == SpdcType::Type0);
  CHECK(PolarizationConfig::parse("o:oo").type() == SpdcType::Type0);
  CHECK(PolarizationConfig::parse("e:oo").type() == SpdcType::TypeI);
  CHECK(PolarizationConfig::parse("o:ee").type() == SpdcType::TypeI);
  CHECK(PolarizationConfig::parse("e:oe").type() == SpdcType::TypeII);
  CHECK(PolarizationConfig::parse("e:eo").key() == "e->oe");

  CHECK_THROWS_AS(PolarizationConfig::parse("x:oe"), ValidationError);
  CHECK_THROWS_AS(PolarizationConfig::parse("ooe"), ValidationError);
}

TEST_CASE("transparency predicate") {
  const Crystal& ktp = shipped_crystals().find("KTP");
  CHECK(ktp.in_transparency(1.582));
  CHECK(!ktp.in_transparency(100.0));
  CHECK_THROWS_AS(ktp.in_transparency(0.0), ValidationError);
  CHECK_THROWS_AS(ktp.in_transparency(-1.0), ValidationError);
}

TEST_CASE("round-trip serialize/reload") {
  const CrystalSet& set = shipped_crystals();
  std::string text = serialize_crystal_set(set);
  std::istringstream in(text);
  CrystalSet again = parse_crystal_set(in, "<memory>");
  REQUIRE(again.crystals.size() == set.crystals.size());
  for (size_t i = 0; i < set.crystals.size(); ++i) {
    const Crystal& a = set.crystals[i];
    const Crystal& b = again.crystals[i];
    CHECK(a.name == b.name);
    CHECK(a.formula == b.formula);
    CHECK(a.transparency_lo == b.transparency_lo);
    CHECK(a.transparency_hi == b.transparency_hi);
    CHECK(a.reference_temperature_c == b.reference_temperature_c);
    for (Axis ax : {Axis::O, Axis::E}) {
      CHECK(a.sellmeier(ax).form == b.sellmeier(ax).form);
      CHECK(a.sellmeier(ax).coef == b.sellmeier(ax).coef);
      CHECK(a.sellmeier(ax).valid_lo == b.sellmeier(ax).valid_lo);
      CHECK(a.sellmeier(ax).valid_hi == b.sellmeier(ax).valid_hi);
      CHECK(a.thermo(ax).has_value() == b.thermo(ax).has_value());
      if (a.thermo(ax)) {
        CHECK(a.thermo(ax)->n1 == b.thermo(ax)->n1);
        CHECK(a.thermo(ax)->n2 == b.thermo(ax)->n2);
        CHECK(a.thermo(ax)->base_c == b.thermo(ax)->base_c);
      }
    }
    CHECK(a.deff == b.deff);
  }
  // serializing the reload reproduces the text exactly
  CHECK(serialize_crystal_set(again) == text);
}

TEST_CASE("loader rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_crystal_set(in, "<memory>");
  };

  CHECK_THROWS_AS(parse(""), ValidationError);  // empty file

  const std::string minimal =
      "schema = 1\n[crystal X]\ntransparency_um = 0.4 4.0\n"
      "axis.o.form = constant_n\naxis.o.coefficients = 1.8\naxis.o.valid_um = 0.4 4.0\n"
      "axis.e.form = constant_n\naxis.e.coefficients = 1.9\naxis.e.valid_um = 0.4 4.0\n"
      "deff.o->oo = 0\ndeff.e->ee = 1\ndeff.o->ee = 0\ndeff.e->oo = 1\n"
      "deff.o->oe = 1\ndeff.e->oe = 0\n";
  CHECK(parse(minimal).crystals.size() == 1);

  SUBCASE("duplicate crystal") {
    std::string dup = minimal + "\n[crystal X]\ntransparency_um = 0.4 4.0\n";
    CHECK_THROWS_WITH_AS(parse(dup), doctest::Contains("duplicate crystal"), ValidationError);
  }
  SUBCASE("duplicate key") {
    std::string dup = minimal + "transparency_um = 0.4 4.0\n";
    CHECK_THROWS_WITH_AS(parse(dup), doctest::Contains("duplicate key"), ValidationError);
  }
  SUBCASE("missing d_eff row") {
    std::string cut = minimal.substr(0, minimal.find("deff.e->oe"));
    CHECK_THROWS_WITH_AS(parse(cut), doctest::Contains("missing d_eff"), ValidationError);
  }
  SUBCASE("empty coefficients") {
    std::string bad = minimal;
    bad.replace(bad.find("axis.o.coefficients = 1.8"), 25, "axis.o.coefficients =    ");
    CHECK_THROWS_AS(parse(bad), ValidationError);
  }
  SUBCASE("inverted transparency bounds") {
    std::string bad = minimal;
    bad.replace(bad.find("transparency_um = 0.4 4.0"), 25, "transparency_um = 4.0 0.4");
    CHECK_THROWS_AS(parse(bad), ValidationError);
  }
  SUBCASE("unknown form tag") {
    std::string bad = minimal;
    bad.replace(bad.find("axis.o.form = constant_n"), 24, "axis.o.form = mystery_42");
    CHECK_THROWS_WITH_AS(parse(bad), doctest::Contains("not implemented"), ValidationError);
  }
  SUBCASE("unphysical index is rejected by the sanity check") {
    std::string bad = minimal;
    bad.replace(bad.find("axis.e.coefficients = 1.9"), 25, "axis.e.coefficients = 3.5");
    CHECK_THROWS_WITH_AS(parse(bad), doctest::Contains("outside (1, 3)"), ValidationError);
  }
}

TEST_SUITE_END();
