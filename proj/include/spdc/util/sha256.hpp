#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace spdc::util {

// Minimal SHA-256 (FIPS 180-4), enough to digest crystal data files for run
// manifests. Returns lowercase hex.
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);  // throws on I/O failure

}  // namespace spdc::util
