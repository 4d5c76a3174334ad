#pragma once

#include "schrocurve/config.hpp"
#include "schrocurve/solver.hpp"

#include <memory>

namespace schrocurve {

/// The objects a run config describes, built once and shared read-only across paths.
struct Problem {
  RunConfig config;
  Grid grid;
  GeneratorBundle bundle;
  std::shared_ptr<const Propagator> propagator;
  SpectralMeasure measure;
  std::shared_ptr<const CameronMartinBasis> basis;
  Nonlinearity gamma;
  Nonlinearity sigma;
  Field u0;
  Ball ball;
};

Problem build_problem(const RunConfig& cfg);

Field gaussian_datum(const Grid& grid, const InitialSpec& spec);
Nonlinearity make_nonlinearity(const NonlinearitySpec& spec);
SpectralMeasure make_measure(const Grid& grid, const RunConfig::Noise& noise);
GeneratorBundle make_generator(const RunConfig::Problem& problem, int dim);

struct Plan {
  Horizon horizon;
  std::vector<double> probe_times;
  std::vector<double> C_gamma;
  std::vector<double> C_sigma;
  /// Elementwise max of C_gamma and C_sigma.
  std::vector<double> C_of_t;
  double C_zz = 0.0;
  /// A nonlinearity is only locally Lipschitz, so iterates are confined to the ball.
  bool local = false;
  /// ball_self_map_bound at T0 (reported, not enforced); compare with R/2.
  double self_map_bound = 0.0;
};

/**
 * Measures C(t) on ball probes at t in {0, T/2, T}, fits C_zz from the free
 * evolution of the same probes over [0, T], then picks T0. For locally
 * Lipschitz problems T0 is further shrunk so that ||S(t)u0 - u0|| <= R/2.
 */
Plan plan_horizon(const Problem& problem);

SolveContext make_context(const Problem& problem, const Plan& plan);

}  // namespace schrocurve
