#include "schrocurve/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace schrocurve {

double rk4_step_limit(const Grid& grid, const GeneratorBundle& g) {
  const double h = grid.spacing();
  return kRk4Cfl * h * h / (grid.dim() * std::max(1.0, g.ellipticity_constant));
}

PropagatorConfig default_propagator_config(GeneratorBundle generator, double dt,
                                           SubstepPolicy policy) {
  PropagatorConfig cfg;
  cfg.scheme = generator.splits() ? Scheme::split_step : Scheme::rk4;
  cfg.dt = dt;
  cfg.substeps = policy;
  cfg.generator = std::move(generator);
  return cfg;
}

Propagator::Propagator(PropagatorConfig cfg, Grid grid) : cfg_(std::move(cfg)), grid_(grid) {
  if (!(cfg_.dt > 0.0)) throw std::invalid_argument("propagator dt must be positive");
  if (cfg_.scheme == Scheme::split_step && !cfg_.generator.splits())
    throw std::invalid_argument("split-step needs a bundle made of x-only and xi-only pieces; use rk4");
  if (cfg_.scheme == Scheme::rk4) {
    const double limit = rk4_step_limit(grid_, cfg_.generator);
    if (cfg_.dt > limit) {
      if (cfg_.substeps == SubstepPolicy::reject) {
        std::ostringstream msg;
        msg << "rk4 step " << cfg_.dt << " exceeds the stability limit " << limit << " (c_cfl=" << kRk4Cfl
            << ", h=" << grid_.spacing() << ", C_ell=" << cfg_.generator.ellipticity_constant
            << "); use dt <= " << limit;
        throw cfl_violation(msg.str(), limit);
      }
      cfg_.dt = limit;
    }
  }
}

std::size_t Propagator::step_count(double t) const {
  if (t <= 0.0) return 0;
  const double ratio = t / cfg_.dt;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(ratio * (1.0 - 1e-12))));
}

const Propagator::SplitPlan& Propagator::split_plan(double step) const {
  std::lock_guard lock(plan_mutex_);
  auto& slot = plans_[step];
  if (!slot) {
    auto plan = std::make_unique<SplitPlan>();
    const auto& g = cfg_.generator;
    plan->half_kinetic.resize(grid_.size());
    plan->potential.resize(grid_.size());
    const cplx i{0.0, 1.0};
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      plan->half_kinetic[k] = std::exp(i * g.multiplier(grid_.frequency_point(k)) * (0.5 * step));
      plan->potential[k] = std::exp(i * g.potential(grid_.point(k)) * step);
    }
    slot = std::move(plan);
  }
  return *slot;
}

void Propagator::split_step(Field& u, const SplitPlan& plan) const {
  Field s = forward_transform(u);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] *= plan.half_kinetic[k];
  u = inverse_transform(s);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] *= plan.potential[k];
  s = forward_transform(u);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] *= plan.half_kinetic[k];
  u = inverse_transform(s);
}

void Propagator::rk4_step(Field& u, double step) const {
  const cplx i{0.0, 1.0};
  const auto& g = cfg_.generator;
  auto rhs = [&](const Field& v) { return i * apply_generator(g, v); };
  const Field k1 = rhs(u);
  const Field k2 = rhs(Field(u).axpy(0.5 * step, k1));
  const Field k3 = rhs(Field(u).axpy(0.5 * step, k2));
  const Field k4 = rhs(Field(u).axpy(step, k3));
  u.axpy(step / 6.0, k1).axpy(step / 3.0, k2).axpy(step / 3.0, k3).axpy(step / 6.0, k4);
}

Field Propagator::evolve(const Field& u0, double t) const {
  if (t < 0.0) throw std::invalid_argument("evolve needs t >= 0");
  if (!(u0.grid() == grid_)) throw std::invalid_argument("field grid does not match propagator grid");
  Field u = u0;
  const std::size_t steps = step_count(t);
  if (steps == 0) return u;
  const double step = t / static_cast<double>(steps);
  if (cfg_.scheme == Scheme::split_step) {
    const SplitPlan& plan = split_plan(step);
    for (std::size_t k = 0; k < steps; ++k) split_step(u, plan);
  } else {
    for (std::size_t k = 0; k < steps; ++k) rk4_step(u, step);
  }
  return u;
}

Field evolve(const Field& u0, double t, const PropagatorConfig& cfg) {
  return Propagator(cfg, u0.grid()).evolve(u0, t);
}

PropagatorOperator::PropagatorOperator(std::shared_ptr<const Propagator> propagator, double t_from, double t_to)
    : propagator_(std::move(propagator)), duration_(t_to - t_from) {
  if (t_to < t_from) throw std::invalid_argument("propagator_operator needs t_from <= t_to");
}

PropagatorOperator propagator_operator(double t_from, double t_to, std::shared_ptr<const Propagator> propagator) {
  return PropagatorOperator(std::move(propagator), t_from, t_to);
}

GrowthReport growth_bound_check(const std::vector<Field>& initial_data, const std::vector<double>& times, int z,
                                int zeta, const Propagator& propagator) {
  if (times.empty() || times.front() != 0.0) throw std::invalid_argument("growth times must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("growth times must be increasing");

  GrowthReport rep;
  rep.times = times;
  bool overflow = false;
  for (std::size_t i = 0; i < initial_data.size(); ++i) {
    std::vector<double> norms;
    Field u = initial_data[i];
    double t_prev = 0.0;
    for (double t : times) {
      u = propagator.evolve(u, t - t_prev);
      t_prev = t;
      const double nrm = h_zz_norm(u, z, zeta);
      norms.push_back(nrm);
      if (!std::isfinite(nrm) && !overflow) {
        overflow = true;
        std::ostringstream w;
        w << "norm overflow for datum " << i << " at t=" << t;
        rep.witness = w.str();
      }
    }
    const double n0 = norms.front();
    if (n0 > 0.0 && times.size() > 1) {
      std::vector<double> y(times.size());
      for (std::size_t k = 0; k < times.size(); ++k) y[k] = std::log(norms[k] / n0);
      for (std::size_t k = 1; k < times.size(); ++k) rep.fitted_c = std::max(rep.fitted_c, y[k] / times[k]);
      // ordinary least squares on (t, log ratio), per datum
      const double m = static_cast<double>(times.size());
      double tbar = 0.0, ybar = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k) tbar += times[k] / m, ybar += y[k] / m;
      double sty = 0.0, stt = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        sty += (times[k] - tbar) * (y[k] - ybar);
        stt += (times[k] - tbar) * (times[k] - tbar);
      }
      const double b = sty / stt, a = ybar - b * tbar;
      rep.slope = std::max(rep.slope, b);
      for (std::size_t k = 0; k < times.size(); ++k) rep.residual = std::max(rep.residual, std::abs(y[k] - a - b * times[k]));
    }
    rep.norms.push_back(std::move(norms));
  }
  rep.pass = !overflow && std::isfinite(rep.fitted_c) && std::isfinite(rep.residual) && rep.residual < 0.05;
  return rep;
}

void GrowthReport::write_csv(std::ostream& out) const {
  out << "datum,t,norm,bound\n";
  out.precision(15);
  for (std::size_t i = 0; i < norms.size(); ++i)
    for (std::size_t k = 0; k < times.size(); ++k)
      out << i << ',' << times[k] << ',' << norms[i][k] << ',' << norms[i].front() * std::exp(fitted_c * times[k])
          << '\n';
}

}  // namespace schrocurve
