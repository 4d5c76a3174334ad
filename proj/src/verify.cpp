#include "schrocurve/verify.hpp"

#include "schrocurve/conventions.hpp"
#include "schrocurve/parallel.hpp"
#include "schrocurve/problem.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace schrocurve {

namespace {

const double kPi = std::numbers::pi;

/// CSV builder with full double precision.
class Csv {
public:
  explicit Csv(const std::string& header) { out_ << header << '\n'; out_.precision(17); }
  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cells, first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

private:
  std::ostringstream out_;
};

CheckResult check(const std::string& suite, const std::string& name, double value, double threshold, bool pass,
                  const std::string& detail = {}) {
  return CheckResult{suite, name, value, threshold, pass, detail};
}

Grid grid_of(const RunConfig& cfg) {
  return Grid(cfg.discretization.d, cfg.discretization.n, cfg.discretization.L);
}

Field gaussian(const Grid& g, double shift = 0.0, double width = 1.0, double momentum = 0.0) {
  return gaussian_datum(g, InitialSpec{"gaussian", 1.0, width, shift, momentum});
}

double node(const Grid& g, long k) { return kPi * static_cast<double>(k) / g.half_width(); }

SpectralMeasure atom_pair(const Grid& g, long k, double w) {
  return SpectralMeasure::from_atoms(g.dim(), {{{node(g, k), 0.0}, w}, {{-node(g, k), 0.0}, w}});
}

std::shared_ptr<const Propagator> propagator_for(const GeneratorBundle& b, const Grid& g, double dt) {
  return std::make_shared<const Propagator>(default_propagator_config(b, dt, SubstepPolicy::subdivide), g);
}

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

}  // namespace

bool SuiteResult::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

void SuiteResult::merge(SuiteResult other) {
  for (auto& c : other.checks) checks.push_back(std::move(c));
  for (auto& [k, v] : other.tables) tables[k] = std::move(v);
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"symbols", "norms", "propagator", "noise",
                                              "isometry", "hs", "contraction", "all"};
  return names;
}

SuiteResult run_suite(const std::string& suite, const RunConfig& cfg, unsigned workers) {
  if (suite == "symbols") return verify_symbols(cfg);
  if (suite == "norms") return verify_norms(cfg);
  if (suite == "propagator") return verify_propagator(cfg);
  if (suite == "noise") return verify_noise(cfg);
  if (suite == "isometry") return verify_isometry(cfg, workers);
  if (suite == "hs") return verify_hs(cfg);
  if (suite == "contraction") return verify_contraction(cfg, workers);
  if (suite == "all") {
    SuiteResult all;
    for (const auto& name : suite_names())
      if (name != "all") all.merge(run_suite(name, cfg, workers));
    return all;
  }
  std::ostringstream msg;
  msg << "unknown suite '" << suite << "'; expected one of";
  for (const auto& n : suite_names()) msg << ' ' << n;
  throw std::invalid_argument(msg.str());
}

SuiteResult verify_symbols(const RunConfig& cfg) {
  const int d = cfg.discretization.d;
  const ProbeGrid probes = dyadic_probe_grid(d);
  SuiteResult out;
  Csv table("symbol,order_m,order_mu,max_constant,expected,verdict");
  auto record = [&](const Symbol& sym, bool expect_pass) {
    const EstimateReport rep = check_symbol_estimates(sym, 2, 2, probes);
    double cmax = 0.0;
    for (const auto& e : rep.entries) cmax = std::max(cmax, e.constant);
    const bool ok = rep.pass == expect_pass;
    table.row(sym.name(), sym.order().m, sym.order().mu, cmax, expect_pass ? "PASS" : "FAIL", verdict(rep.pass));
    out.checks.push_back(check("symbols", sym.name() + (expect_pass ? "" : " (control)"), cmax, 0.0, ok,
                               expect_pass ? "estimates hold at the declared order" : "control must fail"));
  };
  for (const std::string family : {"flat", "gauss_bump", "rational_decay"}) {
    const auto metric = metric_by_name(family, d, 0.4, {1.0, 0.5});
    record(build_hamiltonian(metric), true);
    record(build_lower_metric_term(metric), true);
  }
  record(Symbol::x_only(d, {0, 0}, [](const Point& x) { return cplx{std::exp(std::sqrt(norm2(x))), 0.0}; },
                        "exp_abs_x"),
         false);
  out.tables["symbols"] = table.str();
  return out;
}

SuiteResult verify_norms(const RunConfig& cfg) {
  const Grid g = grid_of(cfg);
  const int d = g.dim();
  SuiteResult out;
  const Field f = gaussian(g, 0.7, 1.2, 0.8);
  const double lhs = std::pow(l2_norm(f), 2);
  const double rhs = conventions::inverse_prefactor(d) * std::pow(frequency_l2_norm(forward_transform(f)), 2);
  out.checks.push_back(check("norms", "parseval", std::abs(lhs - rhs) / lhs, 1e-10, std::abs(lhs - rhs) <= 1e-10 * lhs));

  const Field g0 = gaussian(g);
  const double sk = sobolev_kato_norm(g0, 0, 0), sk_exact = std::pow(kPi, d / 4.0);
  out.checks.push_back(check("norms", "gaussian L2 norm", std::abs(sk - sk_exact) / sk_exact, 1e-10,
                             std::abs(sk - sk_exact) <= 1e-10 * sk_exact));
  // int (1 + |x|^2) e^{-|x|^2} dx = pi^{d/2} (1 + d/2), the same on the Fourier side.
  const double hz_exact = 2.0 * std::sqrt(std::pow(kPi, d / 2.0) * (1.0 + d / 2.0));
  const double hz = h_zz_norm(g0, 1, 0);
  out.checks.push_back(check("norms", "gaussian H_{1,0} norm", std::abs(hz - hz_exact) / hz_exact, 1e-8,
                             std::abs(hz - hz_exact) <= 1e-8 * hz_exact));

  const int z = cfg.solver.z, zeta = cfg.solver.zeta;
  if (2 * zeta > d) {
    const std::vector<FieldPairFactory> samples{
        [](const Grid& gr) { return std::pair{gaussian(gr), gaussian(gr)}; },
        [](const Grid& gr) { return std::pair{gaussian(gr, 1.0, 0.8), gaussian(gr, -1.0, 1.5, 0.5)}; },
    };
    const AlgebraProbe p = algebra_constant_probe(z, zeta, g, samples);
    out.checks.push_back(check("norms", "algebra constant stable under refinement", p.drift, 0.05, p.pass));
  }
  return out;
}

SuiteResult verify_propagator(const RunConfig& cfg) {
  const Grid g = grid_of(cfg);
  const int d = g.dim();
  SuiteResult out;
  {
    const auto p = propagator_for(free_bundle(d), g, 1e-3);
    const Field u0 = gaussian(g);
    const Field u1 = p->evolve(u0, 1.0);
    const cplx s{1.0, 1.0};
    const Field exact = Field::from_function(
        g, [&](const Point& x) { return std::exp(-norm2(x) / (2.0 * s)) / std::pow(std::sqrt(s), d); });
    const double err = l2_norm(u1 - exact), drift = std::abs(l2_norm(u1) - l2_norm(u0));
    out.checks.push_back(check("propagator", "free gaussian error", err, 1e-4, err < 1e-4));
    out.checks.push_back(check("propagator", "free gaussian L2 drift", drift, 1e-8, drift < 1e-8));
  }
  Csv table("metric,z,zeta,fitted_c,slope,residual,verdict");
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  for (const std::string family : {"flat", "gauss_bump"}) {
    const auto p = propagator_for(make_bundle(metric_by_name(family, d, 0.3, {1.0, 0.0})), g, 1e-3);
    const std::vector<Field> data{gaussian(g), gaussian(g, 1.0, 0.8, 0.5)};
    for (auto [z, zeta] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) {
      const GrowthReport rep = growth_bound_check(data, times, z, zeta, *p);
      table.row(family, z, zeta, rep.fitted_c, rep.slope, rep.residual, verdict(rep.pass));
      std::ostringstream name;
      name << "growth " << family << " (" << z << "," << zeta << ")";
      out.checks.push_back(check("propagator", name.str(), rep.residual, 0.05, rep.pass, rep.witness));
    }
  }
  out.tables["growth"] = table.str();
  return out;
}

SuiteResult verify_noise(const RunConfig& cfg) {
  const Grid g = grid_of(cfg);
  const CounterRng rng(cfg.monte_carlo.seed.value_or(0));
  const std::size_t M = cfg.monte_carlo.samples;
  const double dt = 0.01;
  SuiteResult out;
  Csv table("case,empirical_re,empirical_im,analytic_re,analytic_im,std_error,rel_err,absolute_mode,verdict");
  auto run = [&](const std::string& name, const SpectralMeasure& measure, const Field& phi, const Field& psi) {
    const auto basis = build_cm_basis(measure, g);
    const auto rep = covariance_check(basis, phi, psi, dt, M, rng);
    table.row(name, rep.empirical.real(), rep.empirical.imag(), rep.analytic.real(), rep.analytic.imag(),
              rep.std_error, rep.rel_err, rep.absolute_mode ? 1 : 0, verdict(rep.pass));
    out.checks.push_back(check("noise", "covariance " + name, rep.rel_err, rep.absolute_mode ? 3.0 * rep.std_error : 0.05,
                               rep.pass));
  };
  const Field phi = gaussian(g), psi = gaussian(g, 1.0, 0.8);
  run("atom_pair", atom_pair(g, 3, 0.5), phi, psi);
  run("gaussian_density", SpectralMeasure::gaussian_density(g, 1.0, 1.0), phi, psi);
  const Field off_support =
      Field::from_function(g, [&](const Point& x) { return cplx{std::cos(node(g, 5) * x[0]), 0.0}; });
  run("atom_pair_orthogonal", atom_pair(g, 3, 0.5), off_support, off_support);
  out.tables["covariance"] = table.str();

  // With the full basis, dt sum_j e_j(x) e_j(y) reproduces dt (2 pi)^d Gamma(x - y).
  const auto M_full = SpectralMeasure::gaussian_density(g, 1.0, 1.0);
  const auto full = build_cm_basis(M_full, g, cm_dimension(M_full));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < g.size(); i += g.size() / 16) pairs.push_back({g.size() / 2, i});
  double worst = 0.0, scale = 0.0;
  for (const auto& pc : point_covariance(full, pairs, 1.0, 2, rng)) {
    worst = std::max(worst, std::abs(pc.truncated - pc.analytic));
    scale = std::max(scale, std::abs(pc.analytic));
  }
  out.checks.push_back(check("noise", "full basis reproduces the kernel", worst / scale, 1e-10, worst <= 1e-10 * scale));
  return out;
}

SuiteResult verify_isometry(const RunConfig& cfg, unsigned workers) {
  const Grid g = grid_of(cfg);
  const CounterRng rng(cfg.monte_carlo.seed.value_or(0));
  const auto M = SpectralMeasure::gaussian_density(g, 1.0, 1.0);
  const auto basis = build_cm_basis(M, g, std::min<std::size_t>(8, cm_dimension(M)));
  const auto free = propagator_for(free_bundle(g.dim()), g, 1e-2);
  const Field w = gaussian(g, 0.5);
  std::vector<Field> we;
  for (std::size_t j = 0; j < basis.size(); ++j) we.push_back(pointwise_product(w, basis.e(j)));

  IsometryConfig base;
  base.dt = 0.01;
  base.steps = 100;
  base.samples = cfg.monte_carlo.samples;
  base.norm = NormSpec::hzz(cfg.solver.z, cfg.solver.zeta);
  base.workers = workers;
  const double T = base.dt * static_cast<double>(base.steps);

  struct Case {
    std::string name;
    std::size_t modes;
    Integrand integrand;
  };
  const std::vector<Case> cases{
      {"constant_one_mode", 1, [&](const PathHistory&, std::size_t, std::size_t j) { return we[j]; }},
      {"ramp_one_mode", 1, [&](const PathHistory& h, std::size_t, std::size_t j) { return h.time() * we[j]; }},
      {"propagated_multi_mode", basis.size(),
       [&](const PathHistory& h, std::size_t, std::size_t j) { return free->evolve(we[j], T - h.time()); }},
  };
  SuiteResult out;
  Csv table("integrand,samples,lhs,rhs,lhs_se,rel_err,rel_se,verdict");
  for (const auto& c : cases) {
    IsometryConfig ic = base;
    ic.modes = c.modes;
    const IsometryScaling sc = isometry_scaling(c.integrand, g, ic, rng);
    for (const auto* rep : {&sc.base, &sc.quadrupled})
      table.row(c.name, rep == &sc.base ? ic.samples : 4 * ic.samples, rep->lhs, rep->rhs, rep->lhs_se, rep->rel_err,
                rep->rel_se, verdict(rep->pass));
    out.checks.push_back(check("isometry", c.name + " rel_err", sc.base.rel_err, 0.05, sc.base.pass));
    std::ostringstream detail;
    detail << "realized error ratio " << sc.error_ratio;
    out.checks.push_back(check("isometry", c.name + " standard error halves at 4x paths", sc.se_ratio, 0.5, sc.pass,
                               detail.str()));
  }
  out.tables["isometry"] = table.str();
  return out;
}

SuiteResult verify_hs(const RunConfig& cfg) {
  const Grid g = grid_of(cfg);
  const int d = g.dim(), z = cfg.solver.z, zeta = cfg.solver.zeta;
  const double kappa = hs_convention_kappa(g, z, zeta);
  SuiteResult out;
  out.checks.push_back(check("hs", "convention fixture kappa", kappa, 0.0, std::isfinite(kappa) && kappa > 0.0,
                             "t = s, sigma = 1, C_s = 1, w = 0, one atom at the origin"));

  const double t = 0.5, s = 0.25;
  const Field w = gaussian(g);
  const Ball ball{w, h_zz_norm(w, z, zeta), z, zeta};
  const auto probes = ball_probes(ball);
  const std::vector<double> growth_times{0.0, 0.25, 0.5, 0.75, 1.0};

  Csv table("metric,noise,sigma,J,direct,bound,ratio,kappa,verdict");
  for (const std::string family : {"flat", "gauss_bump", "rational_decay"}) {
    const auto p = propagator_for(make_bundle(metric_by_name(family, d, 0.3, {1.0, 0.0})), g, 1e-2);
    const double C_zz = growth_bound_check(probes, growth_times, z, zeta, *p).fitted_c;
    for (const std::string noise : {"atom_pair", "gaussian_density"}) {
      const SpectralMeasure M =
          noise == "atom_pair" ? atom_pair(g, 2, 0.25) : SpectralMeasure::gaussian_density(g, 0.5, 1.0);
      const auto basis = build_cm_basis(M, g);
      for (const auto& sigma : {Nonlinearity::constant(1.0), Nonlinearity::power(2)}) {
        const double C_s = lip_constants(sigma, ball, probes, {s}, z, zeta)[0];
        const auto sums = hs_partial_sums(w, sigma, t, s, basis, *p, z, zeta);
        const HSReport rep = hs_report(sums.back(), hs_bound(w, C_s, t, s, M, C_zz, z, zeta));
        const bool ok = rep.direct <= kappa * rep.bound;
        table.row(family, noise, sigma.name(), basis.size(), rep.direct, rep.bound, rep.ratio, kappa, verdict(ok));
        out.checks.push_back(
            check("hs", "direct <= kappa bound: " + family + "/" + noise + "/" + sigma.name(), rep.ratio, kappa, ok));
        if (noise == "gaussian_density") {
          const std::size_t J2 = std::min(2 * basis.size(), cm_dimension(M));
          const auto wide = build_cm_basis(M, g, J2);
          const double direct2 = hs_norm_direct(w, sigma, t, s, wide, *p, z, zeta);
          const double change = std::abs(direct2 - rep.direct) / direct2;
          table.row(family, noise, sigma.name(), wide.size(), direct2, rep.bound, direct2 / rep.bound, kappa,
                    verdict(change < 0.01));
          out.checks.push_back(
              check("hs", "truncation J->2J: " + family + "/" + sigma.name(), change, 0.01, change < 0.01));
        }
      }
    }
  }
  out.tables["hs"] = table.str();
  return out;
}

namespace {

RunConfig battery_problem(const RunConfig& base, const std::string& name) {
  RunConfig c = base;
  c.discretization.dt = 1e-2;
  c.discretization.T = 1.0;
  c.solver.ball_radius = 0.0;
  c.problem.u0 = InitialSpec{};
  c.problem.m0 = PotentialSpec{};
  c.problem.m1 = MagneticSpec{};
  c.noise.J = 0;
  if (name == "flat-gauss-power2") {
    c.problem.metric = MetricSpec{"flat", 0.0, {1.0, 0.0}};
    c.noise.type = "gaussian_density";
    c.noise.mass = 0.1;
    c.noise.scale = 1.0;
    c.problem.gamma = NonlinearitySpec{"power", 0.5, 0.0, 2};
    c.problem.sigma = NonlinearitySpec{"linear", 0.2, 0.0, 1};
  } else if (name == "bump-atoms-linear") {
    c.problem.metric = MetricSpec{"gauss_bump", 0.3, {1.0, 0.0}};
    c.noise.type = "atoms";
    const double xi = kPi * 3.0 / c.discretization.L;
    c.noise.atoms = {AtomSpec{{xi, 0.0}, 0.05}, AtomSpec{{-xi, 0.0}, 0.05}};
    if (c.discretization.d == 1)
      for (auto& a : c.noise.atoms) a.xi.resize(1);
    c.problem.gamma = NonlinearitySpec{"linear", 0.3, 0.0, 1};
    c.problem.sigma = NonlinearitySpec{"power", 0.2, 0.0, 2};
  } else {
    c.problem.metric = MetricSpec{"rational_decay", 0.3, {1.0, 0.0}};
    c.noise.type = "uniform_density";
    c.noise.mass = 0.1;
    c.noise.radius = 2.0;
    c.problem.gamma = NonlinearitySpec{"power", 0.3, 0.0, 3};
    c.problem.sigma = NonlinearitySpec{"linear", 0.2, 0.0, 1};
  }
  return c;
}

}  // namespace

SuiteResult verify_contraction(const RunConfig& cfg, unsigned workers) {
  SuiteResult out;
  const CounterRng rng(cfg.monte_carlo.seed.value_or(0));
  Csv table("problem,path,T0,K,iterations,max_ratio,residual,guess_distance,half_T0_ratio,verdict");
  const std::size_t paths = std::min<std::size_t>(cfg.monte_carlo.paths, 4);
  for (const std::string name : {"flat-gauss-power2", "bump-atoms-linear", "rational-uniform-power3"}) {
    const Problem p = build_problem(battery_problem(cfg, name));
    Plan plan;
    try {
      plan = plan_horizon(p);
    } catch (const std::exception& e) {
      out.checks.push_back(check("contraction", name + " horizon", 0.0, 0.0, false, e.what()));
      continue;
    }
    const SolveContext ctx = make_context(p, plan);
    SolveContext half = ctx;
    half.steps = std::max<std::size_t>(1, ctx.steps / 2);
    half.K = contraction_constant(half.time(half.steps), plan.horizon.C, plan.horizon.C_zz, plan.horizon.mass);

    struct PathResult {
      bool ok = false;
      std::string error;
      double max_ratio = 0.0, residual = 0.0, guess = 0.0, half_ratio = 0.0;
      std::size_t iterations = 0;
    };
    const auto results = parallel_map<PathResult>(paths, workers, [&](std::size_t i) {
      PathResult r;
      try {
        const WienerPath path = sample_path(p.basis->size(), ctx.dt, ctx.steps, rng, i);
        const Trajectory a = picard_solve(p.u0, ctx, p.gamma, p.sigma, path);
        const Trajectory b = picard_solve(p.u0, ctx, p.gamma, p.sigma, path, free_trajectory(0.5 * p.u0, ctx));
        const Trajectory h = picard_solve(p.u0, half, p.gamma, p.sigma, path);
        r.max_ratio = a.max_ratio;
        r.iterations = a.iterations;
        r.residual = residual_check(a, path, ctx, p.gamma, p.sigma, p.u0);
        r.guess = sup_distance(a, b, ctx.z, ctx.zeta);
        r.half_ratio = h.max_ratio;
        r.ok = a.contraction_ok && r.residual <= 10 * ctx.tol && r.guess <= 2 * ctx.tol;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      return r;
    });
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      const std::string tag = name + " path " + std::to_string(i);
      if (!r.error.empty()) {
        out.checks.push_back(check("contraction", tag, 0.0, 0.0, false, r.error));
        continue;
      }
      table.row(name, i, plan.horizon.T0, plan.horizon.K, r.iterations, r.max_ratio, r.residual, r.guess, r.half_ratio,
                verdict(r.ok));
      out.checks.push_back(check("contraction", tag + " ratio <= 1.5 K", r.max_ratio, 1.5 * ctx.K,
                                 r.max_ratio <= 1.5 * ctx.K));
      out.checks.push_back(check("contraction", tag + " residual", r.residual, 10 * ctx.tol, r.residual <= 10 * ctx.tol));
      out.checks.push_back(check("contraction", tag + " guess independence", r.guess, 2 * ctx.tol,
                                 r.guess <= 2 * ctx.tol));
      out.checks.push_back(check("contraction", tag + " ratio shrinks with T0", r.half_ratio, r.max_ratio,
                                 r.half_ratio < r.max_ratio));
    }
  }
  out.tables["contraction"] = table.str();

  // Scheme cross-check: em on a dt ladder against the Picard solution at the finest step.
  Csv ladder("problem,dt,error,order");
  const Grid g = grid_of(cfg);
  const Field u0 = gaussian(g);
  const double T = 0.5;
  const std::vector<double> dts{0.02, 0.01, 0.005, 0.0025};
  const double dt_ref = dts.front() / 64.0;
  const auto gamma = Nonlinearity::linear_in_u(1.0);
  const auto sigma = Nonlinearity::zero();
  const std::vector<std::pair<std::string, GeneratorBundle>> linear_problems{
      {"flat+harmonic", make_bundle(flat_metric(g.dim()), std::nullopt, harmonic_window_potential(g.dim(), 1.0, 5.0))},
      {"gauss_bump", make_bundle(gauss_bump_metric(g.dim(), 0.3, {1.0, 0.0}))},
  };
  for (const auto& [name, bundle] : linear_problems) {
    SolveContext ctx;
    ctx.propagator = propagator_for(bundle, g, 1e-3);
    ctx.z = cfg.solver.z;
    ctx.zeta = cfg.solver.zeta;
    ctx.dt = dt_ref;
    ctx.steps = static_cast<std::size_t>(std::llround(T / dt_ref));
    const Trajectory ref = picard_solve(u0, ctx, gamma, sigma, zero_path(0, dt_ref, ctx.steps));
    std::vector<double> errors;
    for (double dt : dts) {
      SolveContext c = ctx;
      c.dt = dt;
      c.steps = static_cast<std::size_t>(std::llround(T / dt));
      const Trajectory em = em_solve(u0, c, gamma, sigma, zero_path(0, dt, c.steps));
      const std::size_t stride = static_cast<std::size_t>(std::llround(dt / dt_ref));
      double e = 0.0;
      for (std::size_t k = 0; k <= c.steps; ++k)
        e = std::max(e, h_zz_norm(em.fields[k] - ref.fields[k * stride], ctx.z, ctx.zeta));
      errors.push_back(e);
    }
    double worst = INFINITY;
    for (std::size_t i = 0; i < dts.size(); ++i) {
      const double order = i == 0 ? NAN : std::log2(errors[i - 1] / errors[i]);
      if (i > 0) worst = std::min(worst, order);
      ladder.row(name, dts[i], errors[i], order);
    }
    out.checks.push_back(check("contraction", "em vs picard order: " + name, worst, 0.9, worst >= 0.9));
  }
  out.tables["scheme_order"] = ladder.str();
  return out;
}

}  // namespace schrocurve
