#include <doctest.h>

#include "schrocurve/symbol.hpp"

#include <cmath>
#include <sstream>

using namespace schrocurve;

namespace {

/// a_11(x) = 1 + e^{-x^2} in d = 1, with its exact gradient.
MetricCoefficients bump_one_d() {
  MetricCoefficients m;
  m.dim = 1;
  m.entry = [](const Point& x, int, int) { return 1.0 + std::exp(-x[0] * x[0]); };
  m.gradient = [](const Point& x, int, int, int) { return -2.0 * x[0] * std::exp(-x[0] * x[0]); };
  m.name = "bump1d";
  return m;
}

MetricCoefficients bump_one_d_without_gradient() {
  MetricCoefficients m = bump_one_d();
  m.gradient.reset();
  return m;
}

}  // namespace

TEST_CASE("build_hamiltonian examples") {
  const Symbol flat2 = build_hamiltonian(flat_metric(2));
  CHECK(flat2({0.3, -1.0}, {2.0, 0.0}).real() == doctest::Approx(-2.0));
  CHECK(flat2.order() == SymbolOrder{0, 2});
  for (const auto& metric : {flat_metric(1), gauss_bump_metric(1, 0.3, {1, 0}), bump_one_d()}) {
    const Symbol a = build_hamiltonian(metric);
    CHECK(std::abs(a({0.7, 0.0}, {0.0, 0.0})) == 0.0);
  }
  CHECK(build_hamiltonian(bump_one_d())({0.0, 0.0}, {1.0, 0.0}).real() == doctest::Approx(-1.0));
}

TEST_CASE("non-symmetric metric is rejected") {
  MetricCoefficients m;
  m.dim = 2;
  m.entry = [](const Point&, int j, int l) { return j == l ? 1.0 : (j < l ? 0.1 : 0.2); };
  CHECK_THROWS_AS(build_hamiltonian(m), invalid_metric);
}

TEST_CASE("build_lower_metric_term examples") {
  const Symbol flat = build_lower_metric_term(flat_metric(2));
  CHECK(flat.is_zero());
  const Symbol constant = build_lower_metric_term(constant_metric(2, {{{2.0, 0.5}, {0.5, 1.0}}}));
  const ProbeGrid probes = dyadic_probe_grid(2);
  for (const auto& x : probes.x_points)
    for (const auto& xi : probes.xi_points) CHECK(std::abs(constant(x, xi)) == 0.0);

  // Exact gradient and the finite-difference substitute agree with the hand derivative.
  const cplx expect = cplx{0.0, 0.5} * (-2.0 * std::exp(-1.0));
  for (const auto& metric : {bump_one_d(), bump_one_d_without_gradient()}) {
    const Symbol a1 = build_lower_metric_term(metric);
    CHECK(a1.order() == SymbolOrder{-1, 1});
    CHECK(std::abs(a1({1.0, 0.0}, {1.0, 0.0}) - expect) < 1e-8);
    CHECK(std::abs(a1({1.3, 0.0}, {0.0, 0.0})) == 0.0);
  }
}

TEST_CASE("constant symbol estimates") {
  const Symbol one = Symbol::constant(2, 1.0);
  const EstimateReport rep = check_symbol_estimates(one, 2, 2, dyadic_probe_grid(2));
  CHECK(rep.pass);
  for (const auto& e : rep.entries) CHECK(e.constant <= 1.0 + 1e-12);
}

TEST_CASE("flat Hamiltonian has C_{0,0} = 1/2") {
  const EstimateReport rep = check_symbol_estimates(build_hamiltonian(flat_metric(1)), 2, 2, dyadic_probe_grid(1));
  CHECK(rep.pass);
  for (const auto& e : rep.entries) {
    if (length(e.alpha) == 0 && length(e.beta) == 0) {
      CHECK(e.constant <= 0.5);
      CHECK(e.constant > 0.49);
    }
  }
  std::ostringstream csv;
  rep.write_csv(csv);
  CHECK(csv.str().rfind("alpha0,alpha1,beta0,beta1", 0) == 0);
}

TEST_CASE("shipped families pass, exponential control fails") {
  for (int d : {1, 2}) {
    const ProbeGrid probes = dyadic_probe_grid(d);
    for (const std::string family : {"flat", "gauss_bump", "rational_decay"}) {
      const auto metric = metric_by_name(family, d, 0.4, {1.0, 0.5});
      INFO(family << " d=" << d);
      CHECK(check_symbol_estimates(build_hamiltonian(metric), 2, 2, probes).pass);
      CHECK(check_symbol_estimates(build_lower_metric_term(metric), 2, 2, probes).pass);
    }
    const Symbol bad = Symbol::x_only(d, {0, 0}, [](const Point& x) { return cplx{std::exp(std::sqrt(norm2(x))), 0.0}; },
                                      "exp_abs_x");
    CHECK_FALSE(check_symbol_estimates(bad, 2, 2, probes).pass);
  }
}

TEST_CASE("product orders add") {
  const ProbeGrid probes = dyadic_probe_grid(1);
  const Symbol w = weight_symbol(1, 1.0, 2.0);
  const Symbol a = build_hamiltonian(gauss_bump_metric(1, 0.5, {1, 0}));
  const Symbol p = product(w, a);
  CHECK(p.order() == SymbolOrder{1, 4});
  CHECK(check_symbol_estimates(p, 2, 2, probes).pass);
  // The same function claimed at a lower order fails.
  CHECK_FALSE(check_symbol_estimates(p.with_order({0, 2}), 2, 2, probes).pass);
}

TEST_CASE("finite differences of a polynomial symbol") {
  const SymbolFn f = [](const Point& x, const Point& xi) { return cplx{x[0] * x[0] * xi[0] * xi[0] * xi[0], 0.0}; };
  // d_xi^2 d_x a = 2x * 6 xi.
  const cplx v = finite_difference_derivative(f, {2, 0}, {1, 0}, {1.5, 0.0}, {2.0, 0.0}, 1);
  CHECK(v.real() == doctest::Approx(2 * 1.5 * 6 * 2.0).epsilon(1e-4));
}

TEST_CASE("ellipticity constants") {
  const ProbeGrid probes = ellipticity_probe_grid(1);
  CHECK(check_ellipticity(flat_metric(1), probes).constant == doctest::Approx(2.0));
  CHECK(check_ellipticity(flat_metric(2), ellipticity_probe_grid(2)).constant == doctest::Approx(2.0));
  // a_11 = 2: q = |xi|^2, so both inequalities hold with C = 1 under C^{-1}|xi|^2 <= q <= C|xi|^2.
  const auto two = check_ellipticity(constant_metric(1, {{{2.0, 0.0}, {0.0, 0.0}}}), probes);
  CHECK(two.upper == doctest::Approx(1.0));
  CHECK(two.lower == doctest::Approx(1.0));
  CHECK(two.constant == doctest::Approx(1.0));
}

TEST_CASE("negative metric reports a witness") {
  const ProbeGrid probes = ellipticity_probe_grid(1);
  try {
    check_ellipticity(constant_metric(1, {{{-1.0, 0.0}, {0.0, 0.0}}}), probes);
    FAIL("expected ellipticity_error");
  } catch (const ellipticity_error& e) {
    CHECK(norm2(e.witness_xi) > 0.0);
  }
}

TEST_CASE("ellipticity is invariant under coordinate relabeling") {
  const ProbeGrid probes = ellipticity_probe_grid(2);
  const auto m = gauss_bump_metric(2, 0.6, {1.0, 0.3});
  MetricCoefficients swapped = m;
  swapped.entry = [m](const Point& x, int j, int l) { return m({x[1], x[0]}, 1 - j, 1 - l); };
  swapped.gradient.reset();
  const auto a = check_ellipticity(m, probes);
  const auto b = check_ellipticity(swapped, probes);
  CHECK(a.constant == doctest::Approx(b.constant).epsilon(1e-12));
}
