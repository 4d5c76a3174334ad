#pragma once

#include "schrocurve/noise.hpp"
#include "schrocurve/nonlinearity.hpp"
#include "schrocurve/propagator.hpp"
#include "schrocurve/stochastic.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrocurve {

/**
 * Working Lipschitz constant C(t) at each probe time: the larger of
 * max ||g(v1) - g(v2)|| / ||v1 - v2|| and max ||g(v)|| / (1 + ||v||) over the
 * probes, norms in H_{z,zeta}. Probes outside the ball throw.
 */
std::vector<double> lip_constants(const Nonlinearity& g, const Ball& ball, const std::vector<Field>& probes,
                                  const std::vector<double>& times, int z, int zeta);

/// Deterministic probes inside the ball: the center plus smooth bumps at radii R/4, R/2, R.
std::vector<Field> ball_probes(const Ball& ball, std::size_t directions = 4);

class no_admissible_horizon : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// K(t) = e^{2 C_zz t} C^2 t (1 + mass).
double contraction_constant(double t, double C, double C_zz, double mass);

struct Horizon {
  double T0 = 0.0;
  double K = 0.0;
  std::size_t steps = 0;
  double C = 0.0;     ///< max of the sampled C(t)
  double C_zz = 0.0;
  double mass = 0.0;
  bool shrunk_for_ball = false;
  std::string formula = "K(T0) = exp(2 C_zz T0) * max_t C(t)^2 * T0 * (1 + mass)";
};

/**
 * Largest grid time T0 = k dt <= T with K(T0) < 1. C(t) enters through its
 * maximum over the samples. Throws no_admissible_horizon when even one step
 * fails.
 */
Horizon pick_horizon(double T, double dt, const std::vector<double>& C_of_t, double C_zz, double mass);

class ball_exit_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class picard_divergence : public std::runtime_error {
public:
  picard_divergence(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), distances(std::move(history)) {}
  std::vector<double> distances;
};

/**
 * Drops steps from the horizon until ||S(t) u0 - u0||_{H_{z,zeta}} <= R/2 on
 * the whole grid. Throws no_admissible_horizon if no step survives.
 */
Horizon enforce_ball_drift(Horizon horizon, const Field& u0, double radius, const Propagator& propagator, int z,
                           int zeta);

/// sqrt(T0 C_{T0}) (1 + ||u0|| + R) (sqrt(mass) + 1), with C_{T0} = e^{2 C_zz T0} C^2. The map sends
/// the ball into itself when this is <= R/2.
double ball_self_map_bound(double t, const Horizon& horizon, double u0_norm, double radius);

struct SolveContext {
  std::shared_ptr<const Propagator> propagator;
  std::shared_ptr<const CameronMartinBasis> basis;  ///< may be null when sigma is zero
  int z = 0;
  int zeta = 0;
  double dt = 1e-3;
  std::size_t steps = 0;  ///< time grid t_k = k dt, k = 0..steps
  double tol = 1e-6;
  int max_iters = 50;
  double K = 0.0;         ///< contraction constant of the horizon, for the ratio check
  double ratio_margin = 1.5;
  std::optional<Ball> ball;

  const Grid& grid() const { return propagator->grid(); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> fields;
  /// sup_t ||u^{(m+1)}(t) - u^{(m)}(t)|| per Picard iteration.
  std::vector<double> distances;
  /// ||u(t_k)||_{H_{z,zeta}}.
  std::vector<double> norms;
  std::size_t iterations = 0;
  /// max over m >= 1 of d_m / d_{m-1}.
  double max_ratio = 0.0;
  bool contraction_ok = true;
};

/// S(t_k) u0 on the time grid.
Trajectory free_trajectory(const Field& u0, const SolveContext& ctx);

/**
 * (T u)(t_k) = S(t_k) u0 - i sum_{m<k} S(t_k - s_m) gamma(s_m, u_m) dt
 *              - i sum_{m<k} sum_j S(t_k - s_m)(sigma(s_m, u_m) e_j) dW_{j,m},
 * evaluated by the step recursion T_{k+1} = S(dt)[T_k - i dt gamma_k - i sigma_k dXi_k].
 */
Trajectory apply_T(const Trajectory& u, const WienerPath& path, const SolveContext& ctx, const Nonlinearity& gamma,
                   const Nonlinearity& sigma, const Field& u0);

/// Picard iteration from v0 (or from `guess`) until the sup distance drops below ctx.tol.
Trajectory picard_solve(const Field& u0, const SolveContext& ctx, const Nonlinearity& gamma, const Nonlinearity& sigma,
                        const WienerPath& path, const std::optional<Trajectory>& guess = {});

/// u_{k+1} = S(dt)[u_k - i gamma(t_k, u_k) dt - i sigma(t_k, u_k) dXi_k].
Trajectory em_solve(const Field& u0, const SolveContext& ctx, const Nonlinearity& gamma, const Nonlinearity& sigma,
                    const WienerPath& path);

/// sup_t ||u(t) - (T u)(t)||_{H_{z,zeta}}.
double residual_check(const Trajectory& u, const WienerPath& path, const SolveContext& ctx, const Nonlinearity& gamma,
                      const Nonlinearity& sigma, const Field& u0);

/// sup_k ||a_k - b_k||_{H_{z,zeta}}.
double sup_distance(const Trajectory& a, const Trajectory& b, int z, int zeta);

}  // namespace schrocurve
