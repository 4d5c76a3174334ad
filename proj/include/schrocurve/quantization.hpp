#pragma once

#include "schrocurve/grid.hpp"
#include "schrocurve/symbol.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace schrocurve {

/// The four pieces of the generator: Hamiltonian a, lower metric term a_1, magnetic term m_1, potential m_0.
struct GeneratorBundle {
  Symbol a;
  Symbol a1;
  Symbol m1;
  Symbol m0;
  /// Ellipticity constant of the metric that produced a; enters the rk4 step limit.
  double ellipticity_constant = 1.0;

  /// True when every piece is x-only, xi-only, constant or zero.
  bool splits() const;
  /// Sum of the xi-only pieces, evaluated at xi (requires splits()).
  cplx multiplier(const Point& xi) const;
  /// Sum of the x-only and constant pieces, evaluated at x (requires splits()).
  cplx potential(const Point& x) const;
};

/// Free flat bundle, a = -|xi|^2/2 and nothing else.
GeneratorBundle free_bundle(int dim);
GeneratorBundle zero_bundle(int dim);
/// Bundle from a metric plus optional m_1, m_0 (zero when omitted).
GeneratorBundle make_bundle(const MetricCoefficients& metric, std::optional<Symbol> m1 = {},
                            std::optional<Symbol> m0 = {});

/// V(x) = (omega^2/2)|x|^2 / (1 + |x|^2/R^2): harmonic near the origin, saturating beyond R. Order (0, 0).
Symbol harmonic_window_potential(int dim, double omega, double radius);
/// m_1(x, xi) = eps tanh(x_last) xi_1: real, order (0, 1).
Symbol shear_magnetic_term(int dim, double eps);

/// Op(a) f = (2 pi)^{-d} sum_xi e^{i x xi} a(x, xi) F f(xi) Dxi^d.
/// Separable symbols cost one FFT pair per term; others fall back to direct summation.
Field apply_op(const Symbol& sym, const Field& f);

/// Direct Kohn-Nirenberg summation, O(n^{2d}); the reference path for non-separable symbols.
Field apply_op_direct(const Symbol& sym, const Field& f);

struct OpApplication {
  Field field;
  std::vector<std::string> warnings;
};

/// apply_op plus the boundary-mass diagnostic on the input.
OpApplication apply_op_checked(const Symbol& sym, const Field& f);

/// Op(a) f + Op(a_1) f + Op(m_1) f + Op(m_0) f.
Field apply_generator(const GeneratorBundle& g, const Field& f);

/// xi-only multiplier applied through the FFT: F^{-1}(m F f).
Field apply_multiplier(const Field& f, const std::function<cplx(const Point&)>& m);

using FieldFactory = std::function<Field(const Grid&)>;

struct ContinuityReport {
  double ratio = 0.0;          ///< max over samples at the base resolution
  double refined_ratio = 0.0;  ///< same at twice the resolution
  bool pass = false;           ///< relative drift under 5%
};

/**
 * max_f ||Op(a) f||_{H^{r-m, rho-mu}} / ||f||_{H^{r, rho}} over the sample
 * fields, measured at the grid resolution and at its refinement.
 */
ContinuityReport continuity_probe(const Symbol& sym, SymbolOrder order, double r, double rho, const Grid& grid,
                                  const std::vector<FieldFactory>& samples);

}  // namespace schrocurve
