#pragma once

#include "schrocurve/grid.hpp"
#include "schrocurve/rng.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrocurve {

struct Atom {
  Point xi{0.0, 0.0};
  double weight = 0.0;
};

class invalid_measure : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Symmetric nonnegative measure M on frequency space.
 *
 * Densities live on the nodes of a Grid and are binned to atoms of weight
 * density * Dxi^d. The unpaired Nyquist nodes are dropped, so the binned
 * measure stays symmetric.
 */
class SpectralMeasure {
public:
  /// Atoms must be nonnegative and come in (xi, -xi) pairs of equal weight or sit at 0.
  static SpectralMeasure from_atoms(int dim, std::vector<Atom> atoms);
  /// Density sampled at the grid's frequency nodes (FFT order); must be even and nonnegative.
  static SpectralMeasure from_density(const Grid& grid, std::vector<double> density);
  static SpectralMeasure from_density_function(const Grid& grid, const std::function<double(const Point&)>& density);
  /// Density proportional to exp(-|xi|^2 / (2 s^2)), scaled to the given mass after binning.
  static SpectralMeasure gaussian_density(const Grid& grid, double mass, double scale);
  /// Constant density on |xi| <= radius, scaled to the given mass after binning.
  static SpectralMeasure uniform_density(const Grid& grid, double mass, double radius);
  /// The zero measure.
  static SpectralMeasure zero(int dim) { return from_atoms(dim, {}); }

  int dim() const { return dim_; }
  bool is_density() const { return density_grid_.has_value(); }
  const std::optional<Grid>& density_grid() const { return density_grid_; }
  /// Binned density in FFT order (density measures only).
  const std::vector<double>& density() const { return density_; }
  /// Atoms with positive weight.
  const std::vector<Atom>& atoms() const { return atoms_; }
  /// Sum of the atom weights.
  double total_mass() const;
  /// int |xi|^{2p} M(dxi); p = 0 is the mass.
  double moment(double p) const;

  SpectralMeasure scaled(double factor) const;
  std::size_t partner(std::size_t k) const { return partner_[k]; }

private:
  SpectralMeasure(int dim, std::vector<Atom> atoms, std::optional<Grid> grid, std::vector<double> density);

  int dim_;
  /// partner_[k]: index of the atom at -xi_k (k itself at the origin).
  std::vector<std::size_t> partner_;
  std::vector<Atom> atoms_;
  std::optional<Grid> density_grid_;
  std::vector<double> density_;
};

/// Gamma sampled on a grid. Real-valued for symmetric measures.
struct CorrelationMeasure {
  Field samples;
  double at_origin() const;
};

/// Gamma = F^{-1} M on the grid: (2 pi)^{-d} sum_k w_k e^{i x xi_k}.
CorrelationMeasure correlation_from_spectral(const SpectralMeasure& M, const Grid& grid);

/**
 * Which functions span the discrete L^2_{M,s}.
 *
 * hermitian: f(-xi) = conj f(xi). Each orbit {xi, -xi} carries an even (cosine)
 * and an odd (sine) mode; this is the real Hilbert space whose image gives a
 * homogeneous noise.
 * even_only: f(-xi) = f(xi), cosine modes only.
 */
enum class BasisParity { hermitian, even_only };

struct CameronMartinMode {
  /// f_j at each atom of the measure.
  std::vector<cplx> f;
  /// e_j = F(f_j M) = sum_k f_j(xi_k) w_k e^{-i x xi_k}; real for Hermitian f_j.
  Field e;
};

class CameronMartinBasis {
public:
  CameronMartinBasis(SpectralMeasure measure, Grid grid, std::vector<CameronMartinMode> modes);

  std::size_t size() const { return modes_.size(); }
  const SpectralMeasure& measure() const { return measure_; }
  const Grid& grid() const { return grid_; }
  const CameronMartinMode& mode(std::size_t j) const { return modes_[j]; }
  const Field& e(std::size_t j) const { return modes_[j].e; }

  /// <f, g>_{L^2_M} = Re sum_k w_k f_k conj g_k.
  double inner(const std::vector<cplx>& f, const std::vector<cplx>& g) const;
  /// Gram matrix of the f_j, row-major size() x size().
  std::vector<double> gram() const;
  /// sum_j e_j dW_j.
  Field combine(const std::vector<double>& coefficients) const;

private:
  SpectralMeasure measure_;
  Grid grid_;
  std::vector<CameronMartinMode> modes_;
};

/// Dimension of the discretized L^2_{M,s}: atom count (hermitian) or orbit count (even_only).
std::size_t cm_dimension(const SpectralMeasure& M, BasisParity parity = BasisParity::hermitian);

/// Default truncation min(64, dimension).
std::size_t default_truncation(const SpectralMeasure& M, BasisParity parity = BasisParity::hermitian);

/**
 * Orthonormal basis of L^2_{M,s} by Gram-Schmidt over orbit seeds (indicator,
 * then signed indicator), orbits ordered by |xi|. J defaults to
 * default_truncation; J above the dimension throws std::invalid_argument.
 */
CameronMartinBasis build_cm_basis(const SpectralMeasure& M, const Grid& grid, std::optional<std::size_t> J = {},
                                  BasisParity parity = BasisParity::hermitian);

/// F phi at each atom of M (FFT when the atoms sit on grid nodes, direct sums otherwise).
std::vector<cplx> transform_at_atoms(const SpectralMeasure& M, const Field& phi);

/// sum_{j<=J} |<g, f_j>_M|^2 for J = 1..size(); nondecreasing, bounded by ||g||_M^2.
std::vector<double> bessel_partial_sums(const CameronMartinBasis& basis, const std::vector<cplx>& g);

struct CovarianceReport {
  cplx empirical{};
  cplx analytic{};
  /// Same functional restricted to the truncated basis.
  cplx truncated{};
  double std_error = 0.0;
  double rel_err = 0.0;
  bool absolute_mode = false;
  bool pass = false;
};

/**
 * Monte Carlo check of E[Xi(phi) conj Xi(psi)] = dt int F phi conj(F psi) dM,
 * with Xi(phi) = sum_j dW_j int e_j phi dx. Passes at 5% relative error, or
 * |empirical| < 3 standard errors when the analytic value vanishes.
 */
CovarianceReport covariance_check(const CameronMartinBasis& basis, const Field& phi, const Field& psi, double dt,
                                  std::size_t samples, const CounterRng& rng, std::uint32_t step = 0);

struct PointCovariance {
  std::size_t x_index = 0;
  std::size_t y_index = 0;
  double empirical = 0.0;
  /// dt (2 pi)^d Gamma(x - y) from the full measure.
  double analytic = 0.0;
  /// dt sum_j e_j(x) e_j(y) over the truncated basis.
  double truncated = 0.0;
};

/// Empirical E[dXi(x) dXi(y)] at the given node pairs.
std::vector<PointCovariance> point_covariance(const CameronMartinBasis& basis,
                                              const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                              double dt, std::size_t samples, const CounterRng& rng);

}  // namespace schrocurve
