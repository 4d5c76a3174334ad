#include <doctest.h>

#include "schrocurve/conventions.hpp"
#include "schrocurve/field_io.hpp"
#include "schrocurve/grid.hpp"
#include "schrocurve/norms.hpp"
#include "schrocurve/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace schrocurve;

namespace {

const double kPi = std::numbers::pi;

Field gaussian(const Grid& g, double width = 1.0, double shift = 0.0) {
  return Field::from_function(g, [=](const Point& x) {
    const double r2 = (x[0] - shift) * (x[0] - shift) + x[1] * x[1];
    return cplx{std::exp(-r2 / (2 * width * width)), 0.0};
  });
}

/// Smooth random field: a few Gaussian bumps with random amplitudes and phases.
Field random_bumps(const Grid& g, std::uint64_t sample) {
  const CounterRng rng(7);
  Field f(g);
  for (std::uint32_t b = 0; b < 4; ++b) {
    const double c = 3.0 * rng.normal(sample, b, 0);
    const cplx amp{rng.normal(sample, b, 1), rng.normal(sample, b, 2)};
    const double w = 0.7 + rng.uniform(sample, b, 3);
    f += Field::from_function(g, [&](const Point& x) {
      return amp * std::exp(-((x[0] - c) * (x[0] - c) + x[1] * x[1]) / (2 * w * w));
    });
  }
  return f;
}

}  // namespace

TEST_CASE("grid validation and layout") {
  CHECK_THROWS_AS(Grid(1, 12, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(3, 16, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1, 16, -1.0), std::invalid_argument);
  const Grid g(1, 16, 4.0);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.frequency_spacing() == doctest::Approx(kPi / 4.0));
  CHECK(g.coordinate(0) == doctest::Approx(-4.0));
  CHECK(g.wavenumber(7) == 7);
  CHECK(g.wavenumber(8) == -8);
  CHECK(g.wavenumber(15) == -1);
  const Grid g2(2, 8, 1.0);
  CHECK(g2.size() == 64);
  CHECK(g2.flatten(3, 5) == 29);
  CHECK(g2.unflatten(29) == std::array<std::size_t, 2>{3, 5});
}

TEST_CASE("forward transform of zero is zero") {
  const Grid g(1, 64, 8.0);
  const Field s = forward_transform(Field(g));
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s[i]) == 0.0);
}

TEST_CASE("plane wave transforms to a discrete delta of height 2L") {
  const Grid g(1, 64, 8.0);
  for (long k : {0L, 3L, -5L}) {
    const double xi = kPi * static_cast<double>(k) / g.half_width();
    const Field f = Field::from_function(g, [&](const Point& x) { return std::polar(1.0, xi * x[0]); });
    const Field s = forward_transform(f);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double expect = g.wavenumber(i) == k ? 2.0 * g.half_width() : 0.0;
      CHECK(std::abs(s[i] - expect) < 1e-11);
    }
  }
}

TEST_CASE("Gaussian transform matches sqrt(2 pi) e^{-xi^2/2}") {
  const Grid g(1, 256, 16.0);
  const Field s = forward_transform(gaussian(g));
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double xi = g.frequency(i);
    err = std::max(err, std::abs(s[i] - std::sqrt(2 * kPi) * std::exp(-xi * xi / 2)));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("2-d Gaussian transform factorizes") {
  const Grid g(2, 64, 10.0);
  const Field s = forward_transform(gaussian(g));
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) err = std::max(err, std::abs(s[i] - 2 * kPi * std::exp(-norm2(g.frequency_point(i)) / 2)));
  CHECK(err < 1e-8);
}

TEST_CASE("inverse transform undoes forward transform") {
  for (int d : {1, 2}) {
    const Grid g(d, 32, 6.0);
    const Field f = random_bumps(g, 3);
    const Field back = inverse_transform(forward_transform(f));
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(back[i] - f[i]));
    CHECK(err < 1e-13);
  }
}

TEST_CASE("Parseval at grid level") {
  for (int d : {1, 2}) {
    const Grid g(d, 64, 8.0);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Field f = random_bumps(g, s);
      const double lhs = std::pow(l2_norm(f), 2);
      const double rhs = conventions::inverse_prefactor(d) * std::pow(frequency_l2_norm(forward_transform(f)), 2);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * lhs);
    }
  }
}

TEST_CASE("Sobolev-Kato norm of the Gaussian") {
  const Grid g(1, 256, 16.0);
  const Field f = gaussian(g);
  CHECK(sobolev_kato_norm(Field(g), 1.0, 1.0) == 0.0);
  CHECK(sobolev_kato_norm(f, 0, 0) == doctest::Approx(std::pow(kPi, 0.25)).epsilon(1e-12));
  CHECK(sobolev_kato_norm(f, 0, 0) == doctest::Approx(l2_norm(f)).epsilon(1e-14));
  // Monotone in rho at r = 0, where the weight acts as a pure multiplier on F f.
  for (double rho = 0.0; rho < 3.0; rho += 0.5) CHECK(sobolev_kato_norm(f, 0, rho + 0.5) >= sobolev_kato_norm(f, 0, rho));
}

TEST_CASE("rho monotonicity does not survive a spatial weight") {
  // <x>^r acts after <D>^rho, and <D>^{1/2} spreads the Gaussian enough to lower the <x>^2 moment.
  for (std::size_t n : {256u, 512u}) {
    const Grid g(1, n, 16.0 * static_cast<double>(n) / 256.0);
    const Field f = gaussian(g);
    CHECK(sobolev_kato_norm(f, 2, 0.5) < sobolev_kato_norm(f, 2, 0.0));
    CHECK(sobolev_kato_norm(f, 2, 1.0) > sobolev_kato_norm(f, 2, 0.0));
  }
}

TEST_CASE("H_{z,zeta} norm against closed-form quadrature") {
  const Grid g(1, 256, 16.0);
  const Field f = gaussian(g);
  // ||<x> e^{-x^2/2}||^2 = int (1 + x^2) e^{-x^2} = 3 sqrt(pi)/2, and the same for <D>.
  const double one = std::sqrt(1.5 * std::sqrt(kPi));
  CHECK(h_zz_norm(f, 1, 0) == doctest::Approx(2 * one).epsilon(1e-10));
  CHECK(h_zz_norm(f, 1, 0) == doctest::Approx(sobolev_kato_norm(f, 1, 0) + sobolev_kato_norm(f, 0, 1)).epsilon(1e-14));
  CHECK(h_zz_hilbert_norm_sq(f, 1, 0) == doctest::Approx(2 * one * one).epsilon(1e-10));
  for (int zeta : {0, 1, 3}) CHECK(h_zz_norm(f, 0, zeta) == doctest::Approx(sobolev_kato_norm(f, 0, zeta)).epsilon(1e-14));
  CHECK(h_zz_norm(Field(g), 2, 1) == 0.0);
  CHECK_THROWS_AS(h_zz_norm(f, -1, 0), std::invalid_argument);
  CHECK_THROWS_AS(h_zz_norm(f, 0, -1), std::invalid_argument);
}

TEST_CASE("H_{z,zeta} properties on random fields") {
  const Grid g(1, 128, 12.0);
  for (std::uint64_t s = 0; s < 6; ++s) {
    const Field f = random_bumps(g, s);
    const Field h = random_bumps(g, s + 100);
    for (auto [z, zeta] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1}}) {
      const double nf = h_zz_norm(f, z, zeta);
      // Homogeneity.
      const cplx c{-1.5, 2.0};
      CHECK(h_zz_norm(c * f, z, zeta) == doctest::Approx(std::abs(c) * nf).epsilon(1e-12));
      // Triangle inequality.
      CHECK(h_zz_norm(f + h, z, zeta) <= nf + h_zz_norm(h, z, zeta) + 1e-12);
      // Embedding chain H^{z,z+zeta} in H_{z,zeta} in H^{z,zeta}.
      double biggest = 0.0;
      for (int j = 0; j <= z; ++j) biggest = std::max(biggest, sobolev_kato_norm(f, z - j, j + zeta));
      CHECK(sobolev_kato_norm(f, z, zeta) <= nf * (1 + 1e-14));
      CHECK(nf <= (z + 1) * biggest * (1 + 1e-14));
      CHECK(nf <= (z + 1) * sobolev_kato_norm(f, z, z + zeta) * (1 + 1e-14));
    }
  }
}

TEST_CASE("algebra constant probe") {
  const Grid g(1, 128, 12.0);
  std::vector<FieldPairFactory> samples{
      [](const Grid& gr) { return std::pair{gaussian(gr), gaussian(gr)}; },
      [](const Grid& gr) { return std::pair{gaussian(gr, 0.8, 1.0), gaussian(gr, 1.5, -1.0)}; },
      [](const Grid& gr) { return std::pair{Field(gr), gaussian(gr)}; },
  };
  const AlgebraProbe p = algebra_constant_probe(0, 1, g, samples);
  CHECK(p.hypothesis_met);
  CHECK(std::isfinite(p.ratio));
  CHECK(p.ratio > 0.0);
  CHECK(p.drift < 0.05);
  CHECK(p.pass);
  const AlgebraProbe weak = algebra_constant_probe(0, 0, g, samples);
  CHECK_FALSE(weak.hypothesis_met);
  CHECK_FALSE(weak.pass);
}

TEST_CASE("boundary mass diagnostic") {
  const Grid g(1, 256, 16.0);
  CHECK(boundary_mass(gaussian(g)) < kBoundaryMassThreshold);
  const Field flat = Field::from_function(g, [](const Point&) { return cplx{1.0, 0.0}; });
  CHECK(boundary_mass(flat) > 0.1);
}

TEST_CASE("SHA-256 known vector") {
  const std::string abc = "abc";
  CHECK(sha256_hex({reinterpret_cast<const unsigned char*>(abc.data()), abc.size()}) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("field file round trip and checksum") {
  const auto dir = std::filesystem::temp_directory_path() / "schrocurve_field_io_test";
  std::filesystem::create_directories(dir);
  const Grid g(2, 16, 3.0);
  const Field f = random_bumps(g, 11);
  const auto path = dir / "f.bin";
  const std::string sum = write_field(path, f);
  CHECK(std::filesystem::file_size(path) == g.size() * 16);
  CHECK(sha256_file(path) == sum);
  const Field back = read_field(path);
  CHECK(back == f);
  // Little-endian (re, im) layout.
  const auto bytes = encode_field(f);
  CHECK(decode_field(g, bytes) == f);
  {
    std::fstream io(path, std::ios::in | std::ios::out | std::ios::binary);
    io.seekg(5);
    const char c = static_cast<char>(io.get());
    io.seekp(5);
    io.put(static_cast<char>(c ^ 0x5a));
  }
  CHECK_THROWS_AS(read_field(path), std::runtime_error);
  std::filesystem::remove_all(dir);
}
