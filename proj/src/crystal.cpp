#include "spdc/crystal.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace spdc {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view tok, const std::string& where) {
  try {
    size_t used = 0;
    std::string t(tok);
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": not a number: '" + std::string(tok) + "'");
  }
}

std::vector<double> parse_numbers(std::string_view val, const std::string& where) {
  std::vector<double> out;
  std::istringstream ss{std::string(val)};
  std::string tok;
  while (ss >> tok) out.push_back(parse_number(tok, where));
  if (out.empty()) throw ValidationError(where + ": empty number list");
  return out;
}

const std::array<const char*, 6> kDeffKeys = {
    "o->oo", "e->ee", "o->ee", "e->oo", "o->oe", "e->oe"};

// number formatting for serialize: shortest round-trip-safe decimal
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back = 0;
  std::sscanf(buf, "%lg", &back);
  for (int prec = 6; prec <= 16; ++prec) {
    char b2[40];
    std::snprintf(b2, sizeof b2, "%.*g", prec, v);
    std::sscanf(b2, "%lg", &back);
    if (back == v) return b2;
  }
  return buf;
}

struct Parser {
  std::string origin;
  int lineno = 0;
  bool saw_schema = false;
  CrystalSet set;
  Crystal* cur = nullptr;
  std::set<std::string> seen_keys;  // per-crystal duplicate guard

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError(origin + ":" + std::to_string(lineno) + ": " + msg);
  }

  std::string here(std::string_view key) const {
    return origin + ":" + std::to_string(lineno) + ": " + std::string(key);
  }

  void open_crystal(std::string_view name) {
    if (name.empty()) fail("crystal section without a name");
    for (const auto& c : set.crystals)
      if (lower(c.name) == lower(name)) fail("duplicate crystal '" + std::string(name) + "'");
    finish_crystal();
    set.crystals.emplace_back();
    cur = &set.crystals.back();
    cur->name = std::string(name);
    seen_keys.clear();
  }

  SellmeierSet& axis_set(char a, std::string_view key) {
    if (a == 'o') return cur->sellmeier_o;
    if (a == 'e') return cur->sellmeier_e;
    fail("unknown axis in key '" + std::string(key) + "'");
  }

  ThermoOpticSet& thermo_set(char a, std::string_view key) {
    auto& slot = (a == 'o') ? cur->thermo_o : (a == 'e') ? cur->thermo_e : throw ValidationError(here(key) + ": unknown axis");
    if (!slot) slot.emplace();
    return *slot;
  }

  void handle(std::string_view key, std::string_view val) {
    if (!cur) {
      if (key == "schema") {
        if (val != "1") fail("unsupported schema '" + std::string(val) + "'");
        saw_schema = true;
        return;
      }
      fail("key '" + std::string(key) + "' outside any [crystal] section");
    }
    if (!seen_keys.insert(std::string(key)).second)
      fail("duplicate key '" + std::string(key) + "' in crystal " + cur->name);

    const std::string where = here(key);
    if (key == "formula") {
      cur->formula = std::string(val);
    } else if (key == "transparency_um") {
      auto v = parse_numbers(val, where);
      if (v.size() != 2) fail("transparency_um wants two numbers");
      cur->transparency_lo = v[0];
      cur->transparency_hi = v[1];
    } else if (key == "reference_temperature_c") {
      cur->reference_temperature_c = parse_number(val, where);
    } else if (key == "deff_units") {
      cur->deff_units = std::string(val);
    } else if (key == "deff_citation") {
      cur->deff_citation = std::string(val);
    } else if (key.starts_with("deff.")) {
      std::string cfg(key.substr(5));
      if (std::find_if(kDeffKeys.begin(), kDeffKeys.end(),
                       [&](const char* k) { return cfg == k; }) == kDeffKeys.end())
        fail("unknown d_eff configuration '" + cfg + "'");
      double v = parse_number(val, where);
      if (v < 0) fail("d_eff must be a magnitude (>= 0)");
      if (!cur->deff.emplace(cfg, v).second) fail("duplicate d_eff row '" + cfg + "'");
    } else if (key.starts_with("axis.") || key.starts_with("thermo.")) {
      bool is_axis = key.starts_with("axis.");
      std::string_view rest = key.substr(is_axis ? 5 : 7);
      if (rest.size() < 3 || rest[1] != '.') fail("malformed key '" + std::string(key) + "'");
      char ax = rest[0];
      std::string_view field = rest.substr(2);
      if (is_axis) {
        SellmeierSet& s = axis_set(ax, key);
        if (field == "form") s.form = std::string(val);
        else if (field == "coefficients") s.coef = parse_numbers(val, where);
        else if (field == "valid_um") {
          auto v = parse_numbers(val, where);
          if (v.size() != 2) fail("valid_um wants two numbers");
          s.valid_lo = v[0];
          s.valid_hi = v[1];
        } else if (field == "citation") s.citation = std::string(val);
        else fail("unknown axis field '" + std::string(field) + "'");
      } else {
        ThermoOpticSet& t = thermo_set(ax, key);
        if (field == "form") t.form = std::string(val);
        else if (field == "base_c") t.base_c = parse_number(val, where);
        else if (field == "n1") t.n1 = parse_numbers(val, where);
        else if (field == "n2") t.n2 = parse_numbers(val, where);
        else if (field == "citation") t.citation = std::string(val);
        else fail("unknown thermo field '" + std::string(field) + "'");
      }
    } else {
      fail("unknown key '" + std::string(key) + "'");
    }
  }

  void check_sellmeier(const Crystal& c, const SellmeierSet& s, const char* axis) const {
    const std::string who = "crystal " + c.name + " axis " + axis;
    if (s.form.empty()) throw ValidationError(who + ": missing Sellmeier form");
    if (s.coef.empty()) throw ValidationError(who + ": empty coefficient list");
    if (!(s.valid_lo > 0 && s.valid_lo < s.valid_hi))
      throw ValidationError(who + ": bad valid_um window");
  }

  void finish_crystal() {
    if (!cur) return;
    const Crystal& c = *cur;
    if (!(c.transparency_lo > 0 && c.transparency_lo < c.transparency_hi))
      throw ValidationError("crystal " + c.name + ": bad transparency window");
    check_sellmeier(c, c.sellmeier_o, "o");
    check_sellmeier(c, c.sellmeier_e, "e");
    for (const char* k : kDeffKeys)
      if (!c.deff.count(k))
        throw ValidationError("crystal " + c.name + ": missing d_eff row '" + std::string(k) + "'");
    for (const auto* t : {&c.thermo_o, &c.thermo_e}) {
      if (*t) {
        if ((*t)->form.empty() || (*t)->n1.empty() || (*t)->n2.empty())
          throw ValidationError("crystal " + c.name + ": incomplete thermo-optic block");
      }
    }
  }

  CrystalSet run(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view sv = trim(line);
      if (sv.empty() || sv.front() == '#') continue;
      if (sv.front() == '[') {
        if (sv.back() != ']') fail("unterminated section header");
        std::string_view inner = trim(sv.substr(1, sv.size() - 2));
        if (!inner.starts_with("crystal")) fail("unknown section '" + std::string(inner) + "'");
        open_crystal(trim(inner.substr(7)));
        continue;
      }
      auto eq = sv.find('=');
      if (eq == std::string_view::npos) fail("expected 'key = value'");
      std::string_view key = trim(sv.substr(0, eq));
      std::string_view val = trim(sv.substr(eq + 1));
      if (key.empty()) fail("empty key");
      handle(key, val);
    }
    finish_crystal();
    if (!saw_schema) throw ValidationError(origin + ": missing 'schema = 1' line");
    if (set.crystals.empty()) throw ValidationError(origin + ": no crystals defined");
    return std::move(set);
  }
};

}  // namespace

char axis_char(Axis a) { return a == Axis::O ? 'o' : 'e'; }

Axis axis_from_char(char c) {
  if (c == 'o' || c == 'O') return Axis::O;
  if (c == 'e' || c == 'E') return Axis::E;
  throw ValidationError(std::string("unknown polarization axis '") + c + "' (want o or e)");
}

SpdcType PolarizationConfig::type() const {
  if (signal == idler) {
    return (pump == signal) ? SpdcType::Type0 : SpdcType::TypeI;
  }
  return SpdcType::TypeII;
}

std::string PolarizationConfig::key() const {
  char a = axis_char(signal), b = axis_char(idler);
  if (a == 'e' && b == 'o') std::swap(a, b);  // daughters unordered, 'o' first
  return std::string{axis_char(pump)} + "->" + a + b;
}

std::string PolarizationConfig::to_string() const {
  return std::string{axis_char(pump)} + ":" + axis_char(signal) + axis_char(idler);
}

PolarizationConfig PolarizationConfig::parse(std::string_view s) {
  // accepted spelling: "o:oe" (pump ':' signal idler)
  if (s.size() != 4 || s[1] != ':')
    throw ValidationError("polarization string '" + std::string(s) +
                          "' (want pump:signal+idler, e.g. o:oe)");
  return {axis_from_char(s[0]), axis_from_char(s[2]), axis_from_char(s[3])};
}

const SellmeierSet& Crystal::sellmeier(Axis a) const {
  return a == Axis::O ? sellmeier_o : sellmeier_e;
}

const std::optional<ThermoOpticSet>& Crystal::thermo(Axis a) const {
  return a == Axis::O ? thermo_o : thermo_e;
}

bool Crystal::in_transparency(double lambda_um) const {
  if (!(lambda_um > 0))
    throw ValidationError("wavelength must be positive, got " + std::to_string(lambda_um));
  return lambda_um >= transparency_lo && lambda_um <= transparency_hi;
}

double Crystal::effective_nonlinearity(const PolarizationConfig& pols) const {
  auto it = deff.find(pols.key());
  if (it == deff.end())
    throw ValidationError("crystal " + name + ": no d_eff for " + pols.key());
  return it->second;
}

const Crystal& CrystalSet::find(std::string_view name) const {
  if (const Crystal* c = try_find(name)) return *c;
  throw ValidationError("unknown crystal '" + std::string(name) + "'");
}

const Crystal* CrystalSet::try_find(std::string_view name) const {
  for (const auto& c : crystals)
    if (lower(c.name) == lower(name)) return &c;
  return nullptr;
}

CrystalSet load_crystal_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open crystal data file '" + path + "'");
  Parser p;
  p.origin = path;
  CrystalSet set = p.run(in);
  set.source_path = path;
  check_optical_sanity(set);
  return set;
}

CrystalSet parse_crystal_set(std::istream& in, const std::string& origin) {
  Parser p;
  p.origin = origin;
  CrystalSet set = p.run(in);
  check_optical_sanity(set);
  return set;
}

std::string serialize_crystal_set(const CrystalSet& set) {
  std::ostringstream out;
  out << "# serialized crystal set\nschema = 1\n";
  auto put_nums = [&](const std::vector<double>& v) {
    for (size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << fmt(v[i]);
  };
  for (const auto& c : set.crystals) {
    out << "\n[crystal " << c.name << "]\n";
    if (!c.formula.empty()) out << "formula = " << c.formula << "\n";
    out << "transparency_um = " << fmt(c.transparency_lo) << " " << fmt(c.transparency_hi) << "\n";
    out << "reference_temperature_c = " << fmt(c.reference_temperature_c) << "\n";
    for (char ax : {'o', 'e'}) {
      const SellmeierSet& s = ax == 'o' ? c.sellmeier_o : c.sellmeier_e;
      std::string p = std::string("axis.") + ax + ".";
      out << p << "form = " << s.form << "\n" << p << "coefficients = ";
      put_nums(s.coef);
      out << "\n" << p << "valid_um = " << fmt(s.valid_lo) << " " << fmt(s.valid_hi) << "\n";
      if (!s.citation.empty()) out << p << "citation = " << s.citation << "\n";
    }
    for (char ax : {'o', 'e'}) {
      const auto& t = ax == 'o' ? c.thermo_o : c.thermo_e;
      if (!t) continue;
      std::string p = std::string("thermo.") + ax + ".";
      out << p << "form = " << t->form << "\n";
      out << p << "base_c = " << fmt(t->base_c) << "\n";
      out << p << "n1 = ";
      put_nums(t->n1);
      out << "\n" << p << "n2 = ";
      put_nums(t->n2);
      out << "\n";
      if (!t->citation.empty()) out << p << "citation = " << t->citation << "\n";
    }
    if (!c.deff_units.empty()) out << "deff_units = " << c.deff_units << "\n";
    if (!c.deff_citation.empty()) out << "deff_citation = " << c.deff_citation << "\n";
    for (const char* k : kDeffKeys) out << "deff." << k << " = " << fmt(c.deff.at(k)) << "\n";
  }
  return out.str();
}

std::string deff_table_csv(const CrystalSet& set) {
  std::ostringstream out;
  out << "crystal";
  for (const char* k : kDeffKeys) out << "," << k;
  out << "\n";
  for (const auto& c : set.crystals) {
    out << c.name;
    for (const char* k : kDeffKeys) out << "," << fmt(c.deff.at(k));
    out << "\n";
  }
  return out.str();
}

}  // namespace spdc
