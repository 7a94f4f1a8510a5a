#pragma once

// Deterministic text output helpers. Every file the tool writes goes through
// these formatters so reruns are byte-for-byte identical across runs and
// builds (snprintf with fixed precision, no locale, no timestamps).

#include <string>
#include <vector>

namespace spdc::util {

// shortest decimal that round-trips the double (stable, locale-free)
std::string fmt_full(double v);
// fixed significant digits, for bulky grids
std::string fmt_g(double v, int digits = 9);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);  // throws on width mismatch
  const std::string& str() const { return text_; }

 private:
  size_t width_;
  std::string text_;
};

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace spdc::util
