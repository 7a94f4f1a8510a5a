#pragma once

#include <string>

#include "spdc/crystal.hpp"

// Shared fixtures for the test binaries. The shipped data file path and the
// CLI binary location are injected by the build.

inline const spdc::CrystalSet& shipped_crystals() {
  static spdc::CrystalSet set = spdc::load_crystal_set(SPDC_DATA_FILE);
  return set;
}

inline std::string shipped_data_path() { return SPDC_DATA_FILE; }

// A synthetic constant-index crystal for unit-conversion checks.
inline spdc::Crystal constant_crystal(double n_o, double n_e) {
  spdc::Crystal c;
  c.name = "SYNTH";
  c.transparency_lo = 0.2;
  c.transparency_hi = 10.0;
  c.reference_temperature_c = 25.0;
  c.sellmeier_o = {"constant_n", {n_o}, 0.2, 10.0, ""};
  c.sellmeier_e = {"constant_n", {n_e}, 0.2, 10.0, ""};
  for (const char* k : {"o->oo", "e->ee", "o->ee", "e->oo", "o->oe", "e->oe"})
    c.deff[k] = 1.0;
  return c;
}
