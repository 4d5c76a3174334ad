#include "schrocurve/field_io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace schrocurve {

std::string sha256_hex(std::span<const unsigned char> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_double(unsigned char* out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out[b] = static_cast<unsigned char>(bits >> (8 * b));
}

double get_double(const unsigned char* in) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(in[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_bytes(path)); }

std::vector<unsigned char> encode_field(const Field& f) {
  std::vector<unsigned char> out(f.size() * 16);
  for (std::size_t i = 0; i < f.size(); ++i) {
    put_double(&out[16 * i], f[i].real());
    put_double(&out[16 * i + 8], f[i].imag());
  }
  return out;
}

Field decode_field(const Grid& grid, std::span<const unsigned char> bytes) {
  if (bytes.size() != grid.size() * 16)
    throw std::runtime_error("field payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                             std::to_string(grid.size() * 16));
  Field f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {get_double(&bytes[16 * i]), get_double(&bytes[16 * i + 8])};
  return f;
}

std::string write_field(const std::filesystem::path& path, const Field& f) {
  const auto bytes = encode_field(f);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  const std::string checksum = sha256_hex(bytes);
  nlohmann::json sidecar = {{"d", f.grid().dim()},
                            {"n", f.grid().n()},
                            {"L", f.grid().half_width()},
                            {"format", "f64le-complex-rowmajor"},
                            {"sha256", checksum}};
  std::ofstream side(path.string() + ".json", std::ios::trunc);
  side << sidecar.dump(2) << '\n';
  return checksum;
}

Field read_field(const std::filesystem::path& path) {
  std::ifstream side(path.string() + ".json");
  if (!side) throw std::runtime_error("missing sidecar for " + path.string());
  const auto meta = nlohmann::json::parse(side);
  const Grid grid(meta.at("d").get<int>(), meta.at("n").get<std::size_t>(), meta.at("L").get<double>());
  const auto bytes = read_bytes(path);
  if (sha256_hex(bytes) != meta.at("sha256").get<std::string>())
    throw std::runtime_error("checksum mismatch for " + path.string());
  return decode_field(grid, bytes);
}

}  // namespace schrocurve
