#pragma once

#include "schrocurve/grid.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace schrocurve {

/// Lowercase hex SHA-256 of a byte range.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Little-endian IEEE-754 (re, im) pairs in row-major order.
std::vector<unsigned char> encode_field(const Field& f);
Field decode_field(const Grid& grid, std::span<const unsigned char> bytes);

/**
 * Writes `<path>` (binary samples) and `<path>.json` (sidecar with d, n, L,
 * sha256). Returns the checksum of the binary file.
 */
std::string write_field(const std::filesystem::path& path, const Field& f);

/// Reads a field written by write_field; throws std::runtime_error on checksum mismatch.
Field read_field(const std::filesystem::path& path);

}  // namespace schrocurve
