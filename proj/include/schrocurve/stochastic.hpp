#pragma once

#include "schrocurve/grid.hpp"
#include "schrocurve/noise.hpp"
#include "schrocurve/nonlinearity.hpp"
#include "schrocurve/norms.hpp"
#include "schrocurve/propagator.hpp"
#include "schrocurve/rng.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace schrocurve {

/// Truncated cylindrical Wiener process: J independent Brownian motions on the time grid k dt.
struct WienerPath {
  std::size_t modes = 0;
  std::size_t steps = 0;
  double dt = 0.0;
  /// increments[j * steps + k] = W_j(t_{k+1}) - W_j(t_k) ~ N(0, dt).
  std::vector<double> increments;

  double increment(std::size_t j, std::size_t k) const { return increments[j * steps + k]; }
  /// W_j(t_k).
  double value(std::size_t j, std::size_t k) const;
  /// dW_{., k} as a vector over modes.
  std::vector<double> step_increments(std::size_t k) const;
};

/// Path number `sample` of the counter-based stream: increments are sqrt(dt) N(0,1) keyed by (sample, mode, step).
WienerPath sample_path(std::size_t J, double dt, std::size_t steps, const CounterRng& rng, std::uint64_t sample = 0);

/// A path with every increment zero.
WienerPath zero_path(std::size_t J, double dt, std::size_t steps);

/**
 * The part of a path visible to a predictable integrand at step k: the
 * increments strictly before k. Reading later increments throws.
 */
class PathHistory {
public:
  PathHistory(const WienerPath& path, std::size_t step) : path_(&path), step_(step) {}
  std::size_t step() const { return step_; }
  double time() const { return static_cast<double>(step_) * path_->dt; }
  double increment(std::size_t j, std::size_t k) const;
  /// W_j at the current (left) endpoint.
  double value(std::size_t j) const { return path_->value(j, step_); }

private:
  const WienerPath* path_;
  std::size_t step_;
};

/// Phi(s_k) e_j as a field; left-endpoint evaluation is enforced through PathHistory.
using Integrand = std::function<Field(const PathHistory& history, std::size_t step, std::size_t mode)>;

/// sum_k sum_j integrand(k, j) dW_{j,k}.
Field stochastic_integral(const Integrand& integrand, const WienerPath& path, const Grid& grid);

struct IsometryConfig {
  std::size_t modes = 1;
  double dt = 1e-2;
  std::size_t steps = 100;
  std::size_t samples = 10000;
  NormSpec norm = NormSpec::hzz(0, 0);
  /// Deterministic integrands are evaluated once and reused across paths.
  bool deterministic = true;
  unsigned workers = 1;
  /// First path index; paths use indices offset .. offset + samples - 1.
  std::uint64_t sample_offset = 0;
};

struct IsometryReport {
  double lhs = 0.0;     ///< Monte Carlo E ||int Phi dW||^2
  double rhs = 0.0;     ///< sum_k dt sum_j ||Phi(s_k) e_j||^2 (path mean if adapted)
  double lhs_se = 0.0;  ///< standard error of lhs
  double rhs_se = 0.0;
  double rel_err = 0.0;
  /// Standard error of lhs - rhs relative to rhs.
  double rel_se = 0.0;
  bool absolute_mode = false;
  bool pass = false;
};

/// Squared norms use the Hilbert form of the norm spec (sum of squares for H_{z,zeta}).
IsometryReport ito_isometry_check(const Integrand& integrand, const Grid& grid, const IsometryConfig& cfg,
                                  const CounterRng& rng);

struct IsometryScaling {
  IsometryReport base;
  IsometryReport quadrupled;
  /// rel_err(4M) / rel_err(M) for the realized errors.
  double error_ratio = 0.0;
  /// rel_se(4M) / rel_se(M); 1/2 in expectation.
  double se_ratio = 0.0;
  /// se_ratio within 1/2 +- 50%.
  bool pass = false;
};

/// Runs the check at cfg.samples and 4 cfg.samples paths.
IsometryScaling isometry_scaling(const Integrand& integrand, const Grid& grid, const IsometryConfig& cfg,
                                 const CounterRng& rng);

/// ||S(t-s)(sigma(s, ., w) e_j)||^2_{H_{z,zeta}} accumulated over j: entry j is the partial sum up to mode j.
std::vector<double> hs_partial_sums(const Field& w, const Nonlinearity& sigma, double t, double s,
                                    const CameronMartinBasis& basis, const Propagator& propagator, int z, int zeta);

/// Truncated Hilbert-Schmidt norm squared of Phi(t, s) = S(t-s) sigma(s, ., w).
double hs_norm_direct(const Field& w, const Nonlinearity& sigma, double t, double s, const CameronMartinBasis& basis,
                      const Propagator& propagator, int z, int zeta);

/// e^{2 C_zz t} C_s^2 (1 + ||w||)^2 M(R^d). A missing C_s throws std::invalid_argument.
double hs_bound(const Field& w, std::optional<double> C_s, double t, double s, const SpectralMeasure& M, double C_zz,
                int z, int zeta);

struct HSReport {
  double direct = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  ///< direct / bound
};

HSReport hs_report(double direct, double bound);

/**
 * The convention constant kappa: t = s, sigma = 1 with C_s = 1, w = 0, and a
 * single atom of weight c at the origin. Both sides are brute-forced on the
 * grid; the result is ||1||^2_{H_{z,zeta}} on the grid, independent of c.
 */
double hs_convention_kappa(const Grid& grid, int z, int zeta, double weight = 1.0);

}  // namespace schrocurve
