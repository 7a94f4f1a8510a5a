#pragma once

// Crystal material database: Sellmeier coefficient sets, thermo-optic
// corrections, transparency windows and effective nonlinearities, loaded
// from the key-value data file shipped in data/ (grammar documented there).

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spdc {

// Thrown on malformed data files or broken invariants; message names the
// offending file/line/field.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Axis : std::uint8_t { O, E };  // o = y axis, e = z axis (x propagation)

char axis_char(Axis a);
Axis axis_from_char(char c);  // throws ValidationError on anything but o/e

enum class SpdcType : std::uint8_t { Type0, TypeI, TypeII };

// Pump/signal/idler polarization assignment, e.g. o -> o + e.
struct PolarizationConfig {
  Axis pump{};
  Axis signal{};
  Axis idler{};

  SpdcType type() const;
  // canonical d_eff key with daughters unordered, 'o' first: "o->oe"
  std::string key() const;
  // CLI spelling "o:oe" (pump:signal+idler, ordered)
  std::string to_string() const;
  static PolarizationConfig parse(std::string_view s);  // accepts "o:oe"

  bool operator==(const PolarizationConfig&) const = default;
};

struct SellmeierSet {
  std::string form;            // tag dispatched by the dispersion code
  std::vector<double> coef;
  double valid_lo = 0.0;       // um; fit validity window (flag outside)
  double valid_hi = 0.0;
  std::string citation;
};

struct ThermoOpticSet {
  std::string form;
  double base_c = 25.0;        // temperature the correction vanishes at
  std::vector<double> n1;      // linear-in-dT row
  std::vector<double> n2;      // quadratic-in-dT row
  std::string citation;
};

struct Crystal {
  std::string name;
  std::string formula;
  double transparency_lo = 0.0;  // um
  double transparency_hi = 0.0;
  double reference_temperature_c = 25.0;
  SellmeierSet sellmeier_o;      // ordinary (y)
  SellmeierSet sellmeier_e;      // extraordinary (z)
  std::optional<ThermoOpticSet> thermo_o;
  std::optional<ThermoOpticSet> thermo_e;
  std::map<std::string, double> deff;  // canonical pol key -> pm/V
  std::string deff_units;
  std::string deff_citation;

  const SellmeierSet& sellmeier(Axis a) const;
  const std::optional<ThermoOpticSet>& thermo(Axis a) const;

  // pre: lambda_um > 0 (throws otherwise)
  bool in_transparency(double lambda_um) const;

  // total over the six polarization configurations; forbidden ones are 0
  double effective_nonlinearity(const PolarizationConfig& pols) const;
};

struct CrystalSet {
  std::vector<Crystal> crystals;
  std::string source_path;  // informational; empty when parsed from memory

  const Crystal& find(std::string_view name) const;   // throws if absent
  const Crystal* try_find(std::string_view name) const;
};

CrystalSet load_crystal_set(const std::string& path);
CrystalSet parse_crystal_set(std::istream& in, const std::string& origin);

// Round-trippable serialization in the same grammar the loader reads.
std::string serialize_crystal_set(const CrystalSet& set);

// d_eff table as CSV (crystal x configuration), for tests and export.
std::string deff_table_csv(const CrystalSet& set);

// Defined with the dispersion code: checks every shipped Sellmeier set stays
// inside n in (1, 3) across its transparency window. Called by the loader.
void check_optical_sanity(const CrystalSet& set);

}  // namespace spdc
