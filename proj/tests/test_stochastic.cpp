#include <doctest.h>

#include "schrocurve/stochastic.hpp"

#include <cmath>

using namespace schrocurve;

namespace {

Field bump(const Grid& g, double shift = 0.0, double width = 1.0) {
  return Field::from_function(g, [=](const Point& x) {
    return cplx{std::exp(-((x[0] - shift) * (x[0] - shift)) / (2 * width * width)), 0.0};
  });
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l2_sq(const Field& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::norm(f[i]);
  return s * f.grid().cell_volume();
}

}  // namespace

TEST_CASE("sample_path examples") {
  const CounterRng rng(11);
  const WienerPath still = sample_path(3, 0.0, 20, rng);
  for (double v : still.increments) CHECK(v == 0.0);

  // W(100) with dt = 1 has variance 100.
  const std::size_t paths = 10000;
  double m2 = 0.0;
  for (std::size_t s = 0; s < paths; ++s) {
    const double w = sample_path(1, 1.0, 100, rng, s).value(0, 100);
    m2 += w * w;
  }
  CHECK(std::abs(m2 / paths - 100.0) < 5.0);

  const WienerPath a = sample_path(2, 0.1, 10, rng, 7);
  CHECK(a.increments == sample_path(2, 0.1, 10, CounterRng(11), 7).increments);
  CHECK(a.increments != sample_path(2, 0.1, 10, CounterRng(12), 7).increments);
  CHECK(a.increments != sample_path(2, 0.1, 10, rng, 8).increments);
  CHECK(a.value(1, 0) == 0.0);
  CHECK(a.value(1, 3) == doctest::Approx(a.increment(1, 0) + a.increment(1, 1) + a.increment(1, 2)));
  CHECK_THROWS_AS(sample_path(1, -1.0, 3, rng), std::invalid_argument);
}

TEST_CASE("stochastic integral is linear") {
  const Grid g(1, 64, 8.0);
  const CounterRng rng(3);
  const WienerPath path = sample_path(2, 0.05, 20, rng, 1);
  const Field p = bump(g), q = bump(g, 1.0, 0.5);
  const Integrand phi = [&](const PathHistory&, std::size_t k, std::size_t j) { return (1.0 + k + j) * p; };
  const Integrand psi = [&](const PathHistory& h, std::size_t, std::size_t j) { return std::cos(h.time() + j) * q; };
  const cplx a{2.0, -1.0}, b{0.5, 3.0};
  const Integrand combo = [&](const PathHistory& h, std::size_t k, std::size_t j) {
    return a * phi(h, k, j) + b * psi(h, k, j);
  };
  const Field lhs = stochastic_integral(combo, path, g);
  const Field rhs = a * stochastic_integral(phi, path, g) + b * stochastic_integral(psi, path, g);
  CHECK(max_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("constant one-mode integrand gives phi W(T)") {
  const Grid g(1, 64, 8.0);
  const CounterRng rng(5);
  const WienerPath path = sample_path(1, 0.01, 100, rng, 2);
  const Field p = bump(g);
  const Field out = stochastic_integral([&](const PathHistory&, std::size_t, std::size_t) { return p; }, path, g);
  CHECK(max_diff(out, path.value(0, 100) * p) < 1e-12);
  // A zero path integrates to zero.
  const Field none = stochastic_integral([&](const PathHistory&, std::size_t, std::size_t) { return p; },
                                         zero_path(1, 0.01, 100), g);
  CHECK(max_diff(none, Field(g)) == 0.0);
}

TEST_CASE("isometry for the ramp integrand") {
  const Grid g(1, 64, 8.0);
  const Field p = bump(g);
  IsometryConfig cfg;
  cfg.modes = 1;
  cfg.dt = 0.02;
  cfg.steps = 50;
  cfg.samples = 10000;
  const Integrand ramp = [&](const PathHistory& h, std::size_t, std::size_t) { return h.time() * p; };
  const auto rep = ito_isometry_check(ramp, g, cfg, CounterRng(21));
  // Left Riemann sum of s^2 over [0, 1]: dt^3 (K - 1) K (2K - 1) / 6.
  const double K = 50, dt = 0.02;
  const double riemann = dt * dt * dt * (K - 1) * K * (2 * K - 1) / 6.0;
  CHECK(rep.rhs == doctest::Approx(riemann * l2_sq(p)).epsilon(1e-12));
  CHECK(std::abs(riemann - 1.0 / 3.0) < dt);
  CHECK(rep.rel_err < 0.05);
  CHECK(rep.pass);
}

TEST_CASE("isometry for an adapted integrand") {
  const Grid g(1, 64, 8.0);
  const Field p = bump(g, 0.5, 0.8);
  IsometryConfig cfg;
  cfg.modes = 2;
  cfg.dt = 0.05;
  cfg.steps = 20;
  cfg.samples = 10000;
  cfg.deterministic = false;
  // Phi_j(s) = W_j(s) p; E ||int||^2 = sum_j sum_k dt (k dt) ||p||^2.
  const Integrand adapted = [&](const PathHistory& h, std::size_t, std::size_t j) { return h.value(j) * p; };
  const auto rep = ito_isometry_check(adapted, g, cfg, CounterRng(8));
  const double expect = 2.0 * cfg.dt * cfg.dt * (cfg.steps - 1) * cfg.steps / 2.0 * l2_sq(p);
  CHECK(std::abs(rep.rhs - expect) < 0.05 * expect);
  CHECK(std::abs(rep.lhs - expect) < 0.05 * expect);
  CHECK(rep.pass);
}

TEST_CASE("anticipating integrands are rejected") {
  const Grid g(1, 32, 4.0);
  const WienerPath path = sample_path(1, 0.1, 5, CounterRng(1));
  const Integrand peek = [&](const PathHistory& h, std::size_t k, std::size_t j) {
    return h.increment(j, k) * bump(g);
  };
  CHECK_THROWS_AS(stochastic_integral(peek, path, g), std::logic_error);
  const Integrand past = [&](const PathHistory& h, std::size_t k, std::size_t j) {
    return (k > 0 ? h.increment(j, k - 1) : 0.0) * bump(g);
  };
  CHECK_NOTHROW(stochastic_integral(past, path, g));
}

TEST_CASE("isometry error scaling and worker invariance") {
  const Grid g(1, 64, 8.0);
  const Field p = bump(g);
  IsometryConfig cfg;
  cfg.modes = 2;
  cfg.dt = 0.05;
  cfg.steps = 20;
  cfg.samples = 2000;
  cfg.norm = NormSpec::hzz(1, 0);
  const Integrand f = [&](const PathHistory& h, std::size_t, std::size_t j) { return (1.0 + j + h.time()) * p; };
  const auto sc = isometry_scaling(f, g, cfg, CounterRng(4));
  CHECK(sc.se_ratio >= 0.25);
  CHECK(sc.se_ratio <= 0.75);
  CHECK(sc.pass);

  IsometryConfig par = cfg;
  par.workers = 4;
  const auto one = ito_isometry_check(f, g, cfg, CounterRng(4));
  const auto four = ito_isometry_check(f, g, par, CounterRng(4));
  CHECK(one.lhs == four.lhs);
  CHECK(one.rhs == four.rhs);
}

TEST_CASE("Hilbert-Schmidt norm examples") {
  const Grid g(1, 128, 10.0);
  const auto M = SpectralMeasure::gaussian_density(g, 1.0, 1.0);
  const auto basis = build_cm_basis(M, g, 16);
  const Propagator free(default_propagator_config(free_bundle(1), 1e-2), g);
  const Field w = bump(g);

  CHECK(hs_norm_direct(w, Nonlinearity::zero(), 0.5, 0.0, basis, free, 1, 0) == 0.0);
  const auto sums = hs_partial_sums(w, Nonlinearity::constant(1.0), 0.5, 0.0, basis, free, 1, 0);
  REQUIRE(sums.size() == 16);
  for (std::size_t j = 1; j < sums.size(); ++j) CHECK(sums[j] >= sums[j - 1]);
  CHECK_THROWS_AS(hs_norm_direct(w, Nonlinearity::constant(1.0), 0.0, 0.5, basis, free, 0, 0), std::invalid_argument);

  // Bound e^{2 C t} C_s^2 (1 + ||w||)^2 M(R^d).
  const auto atom = SpectralMeasure::from_atoms(1, {{{0, 0}, 3.0}});
  CHECK(hs_bound(Field(g), 2.0, 0.3, 0.3, atom, 0.0, 0, 0) == doctest::Approx(12.0));
  CHECK(hs_bound(Field(g), 2.0, 1.0, 0.0, atom, 0.5, 0, 0) == doctest::Approx(12.0 * std::exp(1.0)));
  const double wn = std::sqrt(l2_sq(w));
  CHECK(hs_bound(w, 1.0, 0.0, 0.0, atom, 0.0, 0, 0) == doctest::Approx(3.0 * (1 + wn) * (1 + wn)).epsilon(1e-12));
  CHECK_THROWS_AS(hs_bound(w, std::nullopt, 0.0, 0.0, atom, 0.0, 0, 0), std::invalid_argument);
}

TEST_CASE("convention constant kappa is the grid norm of 1") {
  for (int d : {1, 2}) {
    const Grid g(d, d == 1 ? 64 : 16, 4.0);
    const double vol = std::pow(2.0 * g.half_width(), d);
    double moment = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) moment += (1.0 + norm2(g.point(i))) * g.cell_volume();
    for (double c : {1.0, 0.25, 7.0}) {
      CHECK(hs_convention_kappa(g, 0, 0, c) == doctest::Approx(vol).epsilon(1e-12));
      CHECK(hs_convention_kappa(g, 0, 2, c) == doctest::Approx(vol).epsilon(1e-12));
      const double one = std::sqrt(moment) + std::sqrt(vol);
      CHECK(hs_convention_kappa(g, 1, 0, c) == doctest::Approx(one * one).epsilon(1e-12));
    }
  }
}

TEST_CASE("direct norm respects the scaled bound at s = t") {
  const Grid g(1, 128, 10.0);
  const auto M = SpectralMeasure::gaussian_density(g, 0.5, 1.0);
  const auto basis = build_cm_basis(M, g);
  const Propagator free(default_propagator_config(free_bundle(1), 1e-2), g);
  const Field w = bump(g, 0.3);
  const double kappa = hs_convention_kappa(g, 0, 0);
  const auto rep = hs_report(hs_norm_direct(w, Nonlinearity::constant(1.0), 0.0, 0.0, basis, free, 0, 0),
                             hs_bound(w, 1.0, 0.0, 0.0, M, 0.0, 0, 0));
  CHECK(rep.direct > 0.0);
  CHECK(rep.ratio <= kappa);
}
