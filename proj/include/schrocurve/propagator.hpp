#pragma once

#include "schrocurve/grid.hpp"
#include "schrocurve/norms.hpp"
#include "schrocurve/quantization.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace schrocurve {

enum class Scheme { split_step, rk4 };

/// What to do when the requested step exceeds the rk4 stability limit.
enum class SubstepPolicy { reject, subdivide };

/// Step-size constant c_cfl in dt <= c_cfl h^2 / (d C_ell).
inline constexpr double kRk4Cfl = 0.2;

struct PropagatorConfig {
  Scheme scheme = Scheme::split_step;
  double dt = 1e-3;
  SubstepPolicy substeps = SubstepPolicy::reject;
  GeneratorBundle generator = zero_bundle(1);
};

/// Strang split-step where the bundle separates, rk4 otherwise.
PropagatorConfig default_propagator_config(GeneratorBundle generator, double dt,
                                           SubstepPolicy policy = SubstepPolicy::subdivide);

class cfl_violation : public std::invalid_argument {
public:
  cfl_violation(const std::string& what, double suggested) : std::invalid_argument(what), suggested_dt(suggested) {}
  double suggested_dt;
};

/// Largest stable rk4 step on this grid for the bundle's ellipticity constant.
double rk4_step_limit(const Grid& grid, const GeneratorBundle& g);

/**
 * Time stepper for i u_t = -(Op(a) + Op(a_1) + Op(m_1) + Op(m_0)) u, i.e.
 * u_t = i G u. Step plans (split-step phases) are memoized per step length
 * and immutable once built, so one Propagator can serve several threads.
 */
class Propagator {
public:
  Propagator(PropagatorConfig cfg, Grid grid);

  const PropagatorConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }

  /// Approximates S(t) u0. t = 0 returns u0 unchanged.
  Field evolve(const Field& u0, double t) const;

  /// Number of internal steps used for a duration t.
  std::size_t step_count(double t) const;

private:
  struct SplitPlan {
    std::vector<cplx> half_kinetic;  // e^{i K dt/2} in FFT order
    std::vector<cplx> potential;     // e^{i V dt}
  };

  const SplitPlan& split_plan(double step) const;
  void split_step(Field& u, const SplitPlan& plan) const;
  void rk4_step(Field& u, double step) const;

  PropagatorConfig cfg_;
  Grid grid_;
  mutable std::mutex plan_mutex_;
  mutable std::map<double, std::unique_ptr<SplitPlan>> plans_;
};

/// One-shot evolve(u0, t, cfg).
Field evolve(const Field& u0, double t, const PropagatorConfig& cfg);

/// The linear map f -> S(t_to - t_from) f bound to a shared propagator.
class PropagatorOperator {
public:
  PropagatorOperator(std::shared_ptr<const Propagator> propagator, double t_from, double t_to);
  Field operator()(const Field& f) const { return propagator_->evolve(f, duration_); }
  double duration() const { return duration_; }

private:
  std::shared_ptr<const Propagator> propagator_;
  double duration_;
};

PropagatorOperator propagator_operator(double t_from, double t_to, std::shared_ptr<const Propagator> propagator);

struct GrowthReport {
  std::vector<double> times;
  /// norms[i][k]: ||u_i(t_k)||_{H_{z,zeta}} for initial datum i.
  std::vector<std::vector<double>> norms;
  /// Smallest C with ||u(t)|| <= e^{Ct} ||u0|| on every sample (the envelope).
  double fitted_c = 0.0;
  /// Largest least-squares slope of log(||u(t)||/||u0||) against t (free intercept, one fit per datum).
  double slope = 0.0;
  /// Largest |log ratio - (a + slope t)| over the samples of each datum's own fit.
  double residual = 0.0;
  bool pass = false;
  std::string witness;

  void write_csv(std::ostream& out) const;
};

/// Fits the e^{Ct} growth of the H_{z,zeta} norm over the initial data set.
GrowthReport growth_bound_check(const std::vector<Field>& initial_data, const std::vector<double>& times, int z,
                                int zeta, const Propagator& propagator);

}  // namespace schrocurve
