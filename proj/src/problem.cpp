#include "schrocurve/problem.hpp"

#include <cmath>

namespace schrocurve {

Field gaussian_datum(const Grid& grid, const InitialSpec& s) {
  return Field::from_function(grid, [&](const Point& x) {
    const Point y{x[0] - s.shift, x[1]};
    return s.amplitude * std::exp(-norm2(y) / (2.0 * s.width * s.width)) * std::polar(1.0, s.momentum * x[0]);
  });
}

Nonlinearity make_nonlinearity(const NonlinearitySpec& s) {
  const cplx c{s.re, s.im};
  if (s.kind == "zero") return Nonlinearity::zero();
  if (s.kind == "linear") return Nonlinearity::linear_in_u(c);
  if (s.kind == "power") return Nonlinearity::power(s.n, c);
  if (s.kind == "constant") return Nonlinearity::constant(c);
  throw config_error("kind", "unknown nonlinearity '" + s.kind + "'");
}

SpectralMeasure make_measure(const Grid& grid, const RunConfig::Noise& n) {
  if (n.type == "atoms") {
    std::vector<Atom> atoms;
    for (const auto& a : n.atoms) atoms.push_back({{a.xi[0], a.xi.size() > 1 ? a.xi[1] : 0.0}, a.weight});
    return SpectralMeasure::from_atoms(grid.dim(), std::move(atoms));
  }
  if (n.mass == 0.0) return SpectralMeasure::zero(grid.dim());
  if (n.type == "gaussian_density") return SpectralMeasure::gaussian_density(grid, n.mass, n.scale);
  return SpectralMeasure::uniform_density(grid, n.mass, n.radius);
}

GeneratorBundle make_generator(const RunConfig::Problem& p, int dim) {
  const auto metric = metric_by_name(p.metric.family, dim, p.metric.eps, {p.metric.direction[0], p.metric.direction[1]});
  std::optional<Symbol> m1, m0;
  if (p.m1.family == "shear") m1 = shear_magnetic_term(dim, p.m1.eps);
  if (p.m0.family == "harmonic_window") m0 = harmonic_window_potential(dim, p.m0.omega, p.m0.radius);
  return make_bundle(metric, m1, m0);
}

Problem build_problem(const RunConfig& cfg) {
  validate(cfg);
  const auto& d = cfg.discretization;
  const Grid grid(d.d, d.n, d.L);
  GeneratorBundle bundle = make_generator(cfg.problem, d.d);
  auto propagator =
      std::make_shared<const Propagator>(default_propagator_config(bundle, d.dt, SubstepPolicy::subdivide), grid);
  SpectralMeasure measure = make_measure(grid, cfg.noise);
  const BasisParity parity = cfg.noise.parity == "even_only" ? BasisParity::even_only : BasisParity::hermitian;
  std::optional<std::size_t> J;
  if (cfg.noise.J > 0) J = cfg.noise.J;
  auto basis = std::make_shared<const CameronMartinBasis>(build_cm_basis(measure, grid, J, parity));
  Field u0 = gaussian_datum(grid, cfg.problem.u0);
  const double R = cfg.solver.ball_radius > 0.0 ? cfg.solver.ball_radius : h_zz_norm(u0, cfg.solver.z, cfg.solver.zeta);
  Ball ball{u0, R, cfg.solver.z, cfg.solver.zeta};
  return Problem{cfg,
                 grid,
                 std::move(bundle),
                 std::move(propagator),
                 std::move(measure),
                 std::move(basis),
                 make_nonlinearity(cfg.problem.gamma),
                 make_nonlinearity(cfg.problem.sigma),
                 std::move(u0),
                 std::move(ball)};
}

Plan plan_horizon(const Problem& p) {
  const auto& cfg = p.config;
  const int z = cfg.solver.z, zeta = cfg.solver.zeta;
  const double T = cfg.discretization.T, dt = cfg.discretization.dt;
  Plan plan;
  plan.probe_times = {0.0, 0.5 * T, T};
  const auto probes = ball_probes(p.ball);
  plan.C_gamma = lip_constants(p.gamma, p.ball, probes, plan.probe_times, z, zeta);
  plan.C_sigma = lip_constants(p.sigma, p.ball, probes, plan.probe_times, z, zeta);
  for (std::size_t i = 0; i < plan.probe_times.size(); ++i)
    plan.C_of_t.push_back(std::max(plan.C_gamma[i], plan.C_sigma[i]));

  std::vector<double> times;
  for (int k = 0; k <= 4; ++k) times.push_back(T * k / 4.0);
  plan.C_zz = growth_bound_check(probes, times, z, zeta, *p.propagator).fitted_c;

  const Horizon h = pick_horizon(T, dt, plan.C_of_t, plan.C_zz, p.measure.total_mass());
  plan.local = p.gamma.genuinely_nonlinear() || p.sigma.genuinely_nonlinear();
  if (!plan.local) {
    plan.horizon = h;
    return plan;
  }
  plan.horizon = enforce_ball_drift(h, p.u0, p.ball.radius, *p.propagator, z, zeta);
  plan.self_map_bound = ball_self_map_bound(plan.horizon.T0, plan.horizon, h_zz_norm(p.u0, z, zeta), p.ball.radius);
  return plan;
}

SolveContext make_context(const Problem& p, const Plan& plan) {
  SolveContext ctx;
  ctx.propagator = p.propagator;
  ctx.basis = p.basis;
  ctx.z = p.config.solver.z;
  ctx.zeta = p.config.solver.zeta;
  ctx.dt = p.config.discretization.dt;
  ctx.steps = plan.horizon.steps;
  ctx.tol = p.config.solver.tol;
  ctx.max_iters = p.config.solver.max_iters;
  ctx.K = plan.horizon.K;
  if (plan.local) ctx.ball = p.ball;
  return ctx;
}

}  // namespace schrocurve
