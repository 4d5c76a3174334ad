#include <doctest.h>

#include "schrocurve/conventions.hpp"
#include "schrocurve/noise.hpp"

#include <cmath>
#include <numbers>

using namespace schrocurve;

namespace {

const double kPi = std::numbers::pi;

double node(const Grid& g, long k) { return kPi * static_cast<double>(k) / g.half_width(); }

SpectralMeasure atom_pair(const Grid& g, long k, double w) {
  return SpectralMeasure::from_atoms(g.dim(), {{{node(g, k), 0.0}, w}, {{-node(g, k), 0.0}, w}});
}

double max_gram_defect(const CameronMartinBasis& b) {
  const auto gram = b.gram();
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m = std::max(m, std::abs(gram[i * b.size() + j] - (i == j ? 1.0 : 0.0)));
  return m;
}

}  // namespace

TEST_CASE("total mass examples") {
  const Grid g(1, 256, 16.0);
  CHECK(SpectralMeasure::from_atoms(1, {{{0, 0}, 1.0}}).total_mass() == 1.0);
  CHECK(atom_pair(g, 3, 0.5).total_mass() == doctest::Approx(1.0));
  const auto truncated = SpectralMeasure::from_density_function(
      g, [](const Point& xi) { return std::abs(xi[0]) <= 8.0 ? std::exp(-xi[0] * xi[0]) : 0.0; });
  CHECK(std::abs(truncated.total_mass() - std::sqrt(kPi)) < 1e-6);
  CHECK(SpectralMeasure::zero(1).total_mass() == 0.0);
  CHECK(SpectralMeasure::gaussian_density(g, 2.5, 1.0).total_mass() == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(SpectralMeasure::uniform_density(g, 0.7, 3.0).total_mass() == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("invalid measures are rejected") {
  CHECK_THROWS_AS(SpectralMeasure::from_atoms(1, {{{0, 0}, -1.0}}), invalid_measure);
  CHECK_THROWS_AS(SpectralMeasure::from_atoms(1, {{{1.0, 0}, 1.0}}), invalid_measure);
  CHECK_THROWS_AS(SpectralMeasure::from_atoms(1, {{{1.0, 0}, 1.0}, {{-1.0, 0}, 2.0}}), invalid_measure);
  const Grid g(1, 16, 2.0);
  std::vector<double> density(g.size(), 0.0);
  density[1] = 1.0;  // +xi_1 without -xi_1
  CHECK_THROWS_AS(SpectralMeasure::from_density(g, density), invalid_measure);
  density[1] = -1.0;
  density[15] = -1.0;
  CHECK_THROWS_AS(SpectralMeasure::from_density(g, density), invalid_measure);
}

TEST_CASE("Nyquist nodes are dropped when binning") {
  const Grid g(1, 16, 2.0);
  const auto M = SpectralMeasure::from_density_function(g, [](const Point&) { return 1.0; });
  CHECK(M.atoms().size() == 15);
  CHECK(M.total_mass() == doctest::Approx(15 * g.frequency_spacing()));
}

TEST_CASE("correlation measure examples") {
  const Grid g(1, 128, 10.0);
  const double pre = conventions::inverse_prefactor(1);

  const auto flat = correlation_from_spectral(SpectralMeasure::from_atoms(1, {{{0, 0}, 1.0}}), g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(flat.samples[i] - pre) < 1e-14);

  for (const auto& M : {atom_pair(g, 4, 0.5), SpectralMeasure::from_atoms(1, {{{0.37, 0}, 0.5}, {{-0.37, 0}, 0.5}})}) {
    const double xi0 = M.atoms()[0].xi[0];
    const auto cos_corr = correlation_from_spectral(M, g);
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(std::abs(cos_corr.samples[i] - pre * std::cos(xi0 * g.point(i)[0])) < 1e-13);
    CHECK(cos_corr.at_origin() == doctest::Approx(conventions::correlation_at_origin(M.total_mass(), 1)));
  }

  // Density e^{-xi^2/2} (mass sqrt(2 pi)) has Gamma(x) = (2 pi)^{-1} sqrt(2 pi) e^{-x^2/2}.
  const auto gauss = SpectralMeasure::from_density_function(g, [](const Point& xi) { return std::exp(-xi[0] * xi[0] / 2); });
  const auto gamma = correlation_from_spectral(gauss, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i)[0];
    CHECK(std::abs(gamma.samples[i] - pre * std::sqrt(2 * kPi) * std::exp(-x * x / 2)) < 1e-10);
  }
  // F Gamma = M on the grid density.
  const Field back = forward_transform(gamma.samples);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(back[k] - gauss.density()[k]) < 1e-10);
}

TEST_CASE("Cameron-Martin basis examples") {
  const Grid g(1, 64, 8.0);
  const double c = 2.5;
  const auto one = build_cm_basis(SpectralMeasure::from_atoms(1, {{{0, 0}, c}}), g);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one.mode(0).f[0] - 1.0 / std::sqrt(c)) < 1e-15);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(one.e(0)[i] - std::sqrt(c)) < 1e-13);

  const auto pair = atom_pair(g, 3, 0.5);
  const auto even = build_cm_basis(pair, g, 1);
  REQUIRE(even.size() == 1);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(even.e(0)[i] - std::cos(node(g, 3) * g.point(i)[0])) < 1e-13);
  CHECK(cm_dimension(pair) == 2);
  CHECK(cm_dimension(pair, BasisParity::even_only) == 1);
  const auto both = build_cm_basis(pair, g);
  REQUIRE(both.size() == 2);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(both.e(1)[i] - std::sin(node(g, 3) * g.point(i)[0])) < 1e-13);

  try {
    build_cm_basis(pair, g, 3);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("maximum is 2") != std::string::npos);
  }
}

TEST_CASE("basis is orthonormal and Hermitian") {
  for (int d : {1, 2}) {
    const Grid g(d, d == 1 ? 128 : 32, 8.0);
    for (const auto& M : {SpectralMeasure::gaussian_density(g, 1.0, 1.0), SpectralMeasure::uniform_density(g, 2.0, 2.0)}) {
      for (auto parity : {BasisParity::hermitian, BasisParity::even_only}) {
        const auto b = build_cm_basis(M, g, {}, parity);
        CHECK(b.size() == default_truncation(M, parity));
        CHECK(max_gram_defect(b) < 1e-10);
        for (std::size_t j = 0; j < b.size(); ++j) {
          const auto& f = b.mode(j).f;
          for (std::size_t k = 0; k < f.size(); ++k) {
            const cplx mirror = f[M.partner(k)];
            if (parity == BasisParity::hermitian) CHECK(std::abs(mirror - std::conj(f[k])) < 1e-14);
            else CHECK(std::abs(mirror - f[k]) < 1e-14);
          }
          for (std::size_t i = 0; i < g.size(); ++i) CHECK(b.e(j)[i].imag() == 0.0);
        }
      }
    }
  }
}

TEST_CASE("full basis reproduces the correlation kernel exactly") {
  // dt sum_j e_j(x) e_j(y) = dt (2 pi)^d Gamma(x - y) when J is the full dimension.
  for (int d : {1, 2}) {
    const Grid g(d, d == 1 ? 64 : 16, 6.0);
    const auto M = SpectralMeasure::gaussian_density(g, 1.3, 0.8);
    const auto b = build_cm_basis(M, g, cm_dimension(M));
    const auto gamma = correlation_from_spectral(M, g);
    const CounterRng rng(1);
    std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 0}, {3, 7}, {g.size() / 2, g.size() / 2 + 1}};
    for (const auto& pc : point_covariance(b, pairs, 1.0, 2, rng)) {
      CHECK(pc.truncated == doctest::Approx(pc.analytic).epsilon(1e-10));
    }
    // Origin pair against Gamma(0).
    const std::size_t mid = d == 1 ? g.flatten(g.n() / 2) : g.flatten(g.n() / 2, g.n() / 2);
    const auto at0 = point_covariance(b, {{mid, mid}}, 1.0, 2, rng);
    CHECK(at0[0].analytic == doctest::Approx(conventions::pointwise_covariance_factor(d) * gamma.at_origin()).epsilon(1e-12));
  }
}

TEST_CASE("Bessel partial sums increase to the norm") {
  const Grid g(1, 64, 8.0);
  const auto M = SpectralMeasure::gaussian_density(g, 1.0, 1.5);
  const auto b = build_cm_basis(M, g, cm_dimension(M));
  std::vector<cplx> h(M.atoms().size());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = std::exp(-std::abs(M.atoms()[k].xi[0]));
  const double norm_sq = b.inner(h, h);
  const auto sums = bessel_partial_sums(b, h);
  for (std::size_t j = 1; j < sums.size(); ++j) CHECK(sums[j] >= sums[j - 1]);
  CHECK(sums.back() == doctest::Approx(norm_sq).epsilon(1e-12));
  CHECK(sums[sums.size() / 2] <= norm_sq);
}

TEST_CASE("covariance functional examples") {
  const Grid g(1, 128, 10.0);
  const CounterRng rng(2024);
  const double dt = 0.01;

  SUBCASE("single atom, phi = psi") {
    const double w = 0.8;
    const auto M = SpectralMeasure::from_atoms(1, {{{0, 0}, w}});
    const auto b = build_cm_basis(M, g);
    const Field phi = Field::from_function(g, [](const Point& x) { return cplx{std::exp(-x[0] * x[0] / 2), 0.0}; });
    const auto rep = covariance_check(b, phi, phi, dt, 10000, rng);
    // F phi(0) = sqrt(2 pi).
    CHECK(rep.analytic.real() == doctest::Approx(dt * w * 2 * kPi).epsilon(1e-10));
    CHECK(rep.rel_err < 0.05);
    CHECK(rep.pass);
  }
  SUBCASE("test function orthogonal to the support") {
    const auto M = atom_pair(g, 3, 0.5);
    const auto b = build_cm_basis(M, g);
    const Field phi = Field::from_function(g, [&](const Point& x) { return cplx{std::cos(node(g, 5) * x[0]), 0.0}; });
    const auto rep = covariance_check(b, phi, phi, dt, 10000, rng);
    CHECK(rep.absolute_mode);
    CHECK(std::abs(rep.empirical) < 1e-20);
    CHECK(rep.pass);
  }
  SUBCASE("two-atom hand computation") {
    const double w = 0.5;
    const auto M = atom_pair(g, 3, w);
    const auto b = build_cm_basis(M, g);
    const double xi0 = node(g, 3), L = g.half_width();
    const Field phi = Field::from_function(g, [&](const Point& x) { return cplx{std::cos(xi0 * x[0]), 0.0}; });
    const Field psi = Field::from_function(g, [&](const Point& x) { return cplx{std::cos(xi0 * x[0]) + std::sin(xi0 * x[0]), 0.0}; });
    const auto rep = covariance_check(b, phi, psi, dt, 10000, rng);
    CHECK(std::abs(rep.analytic - cplx{2 * dt * w * L * L, 0.0}) < 1e-10 * dt * L * L);
    CHECK(rep.rel_err < 0.05);
    CHECK(rep.pass);
  }
  SUBCASE("zero measure gives zero noise") {
    const auto b = build_cm_basis(SpectralMeasure::zero(1), g);
    CHECK(b.size() == 0);
    const Field phi = Field::from_function(g, [](const Point& x) { return cplx{std::exp(-x[0] * x[0]), 0.0}; });
    const auto rep = covariance_check(b, phi, phi, dt, 1000, rng);
    CHECK(rep.empirical == cplx{0.0, 0.0});
    CHECK(rep.pass);
  }
}

TEST_CASE("increments are Gaussian") {
  const CounterRng rng(99);
  const std::size_t M = 10000;
  for (std::uint32_t mode : {0u, 1u, 17u}) {
    double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
    for (std::size_t s = 0; s < M; ++s) {
      const double v = rng.normal(s, mode, 3);
      m1 += v;
      m2 += v * v;
      m3 += v * v * v;
      m4 += v * v * v * v;
    }
    m1 /= M;
    const double var = m2 / M - m1 * m1;
    const double skew = (m3 / M - 3 * m1 * var - m1 * m1 * m1) / std::pow(var, 1.5);
    const double kurt = (m4 / M - 4 * m1 * m3 / M + 6 * m1 * m1 * m2 / M - 3 * std::pow(m1, 4)) / (var * var) - 3.0;
    CHECK(std::abs(skew) < 0.1);
    CHECK(std::abs(kurt) < 0.2);
  }
}

TEST_CASE("noise covariance is translation invariant") {
  const Grid g(1, 128, 10.0);
  const auto M = SpectralMeasure::gaussian_density(g, 1.0, 1.0);
  const auto b = build_cm_basis(M, g);
  const CounterRng rng(5);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t shift : {0u, 10u, 25u, 40u}) pairs.push_back({50 + shift, 53 + shift});
  const auto cov = point_covariance(b, pairs, 1.0, 10000, rng);
  for (const auto& pc : cov) CHECK(std::abs(pc.empirical - pc.analytic) < 0.05 * pc.analytic);
  for (const auto& pc : cov) CHECK(std::abs(pc.empirical - cov[0].empirical) < 0.05 * cov[0].analytic);
}

TEST_CASE("counter-based draws depend only on their coordinates") {
  const CounterRng a(42), b(42), c(43);
  CHECK(a.normal(3, 1, 7) == b.normal(3, 1, 7));
  CHECK(a.normal(3, 1, 7) != c.normal(3, 1, 7));
  CHECK(a.normal(3, 1, 7) != a.normal(3, 1, 8));
  CHECK(a.normal(3, 1, 7) != a.normal(4, 1, 7));
}
