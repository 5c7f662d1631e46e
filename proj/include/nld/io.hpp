/// @file io.hpp
/// Deterministic text formatting and small file helpers shared by the
/// exporters.  All floating point output uses round-trip precision so a
/// fixed scenario and seed reproduce output files byte for byte.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nld {

/// Shortest round-trip decimal form ("%.17g" trimmed via std::to_chars).
std::string format_double(double v);

/// FNV-1a 64-bit hash, used to fingerprint inputs in metadata sidecars.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Row-major binary dump: magic "NLDF", counts, then doubles (little endian).
void write_binary_matrix(const std::string& path, std::size_t rows,
                         std::size_t cols, const double* data);

}  // namespace nld
