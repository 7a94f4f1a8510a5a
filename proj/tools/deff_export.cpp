// Dumps the effective-nonlinearity table of a crystal data file as CSV, for
// spreadsheets and for cross-checking the shipped values.

#include <cstdio>

#include "spdc/crystal.hpp"
#include "spdc/util/table.hpp"

int main(int argc, char** argv) {
  if (argc < 2 || argc > 3) {
    std::fprintf(stderr, "usage: deff-export <crystal-data-file> [out.csv]\n");
    return 2;
  }
  try {
    const spdc::CrystalSet set = spdc::load_crystal_set(argv[1]);
    const std::string csv = spdc::deff_table_csv(set);
    if (argc == 3)
      spdc::util::write_file(argv[2], csv);
    else
      std::fputs(csv.c_str(), stdout);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
