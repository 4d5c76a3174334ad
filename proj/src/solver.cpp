#include "schrocurve/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace schrocurve {

std::vector<double> lip_constants(const Nonlinearity& g, const Ball& ball, const std::vector<Field>& probes,
                                  const std::vector<double>& times, int z, int zeta) {
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (!ball.contains(probes[i], 1e-9)) {
      std::ostringstream msg;
      msg << "probe " << i << " lies at distance " << ball.distance(probes[i]) << " from the ball center, outside radius "
          << ball.radius;
      throw std::invalid_argument(msg.str());
    }
  }
  std::vector<double> out;
  out.reserve(times.size());
  if (g.is_zero()) return std::vector<double>(times.size(), 0.0);
  std::vector<double> probe_norms;
  for (const auto& v : probes) probe_norms.push_back(h_zz_norm(v, z, zeta));
  for (double t : times) {
    std::vector<Field> images;
    images.reserve(probes.size());
    for (const auto& v : probes) images.push_back(g.apply(t, v));
    double c = 0.0;
    for (std::size_t a = 0; a < probes.size(); ++a) {
      c = std::max(c, h_zz_norm(images[a], z, zeta) / (1.0 + probe_norms[a]));
      for (std::size_t b = a + 1; b < probes.size(); ++b) {
        const double den = h_zz_norm(probes[a] - probes[b], z, zeta);
        if (den <= 0.0) continue;
        c = std::max(c, h_zz_norm(images[a] - images[b], z, zeta) / den);
      }
    }
    out.push_back(c);
  }
  return out;
}

std::vector<Field> ball_probes(const Ball& ball, std::size_t directions) {
  const Grid& grid = ball.center.grid();
  const double L = grid.half_width();
  std::vector<Field> out{ball.center};
  for (std::size_t i = 0; i < directions; ++i) {
    const double shift = L * 0.15 * (static_cast<double>(i) - 0.5 * static_cast<double>(directions - 1));
    const double width = 1.0 + 0.5 * static_cast<double>(i % 3);
    const double momentum = 0.5 * static_cast<double>(i % 2);
    Field dir = Field::from_function(grid, [&](const Point& x) {
      const Point y{x[0] - shift, grid.dim() == 2 ? x[1] + 0.5 * shift : 0.0};
      return std::exp(-norm2(y) / (2.0 * width * width)) * std::polar(1.0, momentum * x[0]);
    });
    const double n = h_zz_norm(dir, ball.z, ball.zeta);
    for (double frac : {0.25, 0.5, 1.0}) {
      Field v = ball.center;
      v.axpy(frac * ball.radius / n * (1.0 - 1e-12), dir);
      out.push_back(std::move(v));
    }
  }
  return out;
}

double contraction_constant(double t, double C, double C_zz, double mass) {
  return std::exp(2.0 * C_zz * t) * C * C * t * (1.0 + mass);
}

Horizon pick_horizon(double T, double dt, const std::vector<double>& C_of_t, double C_zz, double mass) {
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("pick_horizon needs T > 0 and dt > 0");
  if (!std::isfinite(mass)) throw std::invalid_argument("spectral measure mass is not finite");
  Horizon h;
  h.C_zz = C_zz;
  h.mass = mass;
  for (double c : C_of_t) {
    if (!std::isfinite(c)) throw std::invalid_argument("Lipschitz constant samples must be finite");
    h.C = std::max(h.C, c);
  }
  const auto max_steps = static_cast<std::size_t>(std::llround(T / dt));
  if (h.C == 0.0) {
    h.steps = max_steps;
    h.T0 = static_cast<double>(max_steps) * dt;
    h.K = 0.0;
    return h;
  }
  // K is increasing in t, so bisect on the step count.
  auto K_at = [&](std::size_t k) { return contraction_constant(static_cast<double>(k) * dt, h.C, C_zz, mass); };
  if (!(K_at(1) < 1.0)) {
    std::ostringstream msg;
    msg << "no admissible horizon: K(dt) = " << K_at(1) << " >= 1 at dt = " << dt << " (C = " << h.C
        << ", C_zz = " << C_zz << ", mass = " << mass << "); use a smaller dt or a weaker noise";
    throw no_admissible_horizon(msg.str());
  }
  std::size_t lo = 1, hi = max_steps;
  if (K_at(hi) < 1.0) {
    lo = hi;
  } else {
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (K_at(mid) < 1.0 ? lo : hi) = mid;
    }
  }
  h.steps = lo;
  h.T0 = static_cast<double>(lo) * dt;
  h.K = K_at(lo);
  return h;
}

Horizon enforce_ball_drift(Horizon horizon, const Field& u0, double radius, const Propagator& propagator, int z,
                           int zeta) {
  const double dt = horizon.steps > 0 ? horizon.T0 / static_cast<double>(horizon.steps) : 0.0;
  Field u = u0;
  for (std::size_t k = 1; k <= horizon.steps; ++k) {
    u = propagator.evolve(u, dt);
    if (h_zz_norm(u - u0, z, zeta) > 0.5 * radius) {
      if (k == 1) {
        std::ostringstream msg;
        msg << "no admissible horizon: ||S(dt) u0 - u0|| exceeds R/2 = " << 0.5 * radius << " already at dt = " << dt;
        throw no_admissible_horizon(msg.str());
      }
      horizon.steps = k - 1;
      horizon.T0 = static_cast<double>(k - 1) * dt;
      horizon.K = contraction_constant(horizon.T0, horizon.C, horizon.C_zz, horizon.mass);
      horizon.shrunk_for_ball = true;
      break;
    }
  }
  return horizon;
}

double ball_self_map_bound(double t, const Horizon& horizon, double u0_norm, double radius) {
  const double c_t = std::exp(2.0 * horizon.C_zz * t) * horizon.C * horizon.C;
  return std::sqrt(t * c_t) * (1.0 + u0_norm + radius) * (std::sqrt(horizon.mass) + 1.0);
}

namespace {

void check_finite(const Field& f, const char* what, std::size_t step, std::size_t iterate) {
  if (f.all_finite()) return;
  std::ostringstream msg;
  msg << what << " produced a non-finite value at step " << step << " (t index), iterate " << iterate;
  throw std::runtime_error(msg.str());
}

/// T_k - i dt gamma(t_k, u_k) - i sigma(t_k, u_k) dXi_k, before the S(dt) step.
Field duhamel_increment(const Field& base, const Field& uk, double tk, std::size_t k, const WienerPath& path,
                        const SolveContext& ctx, const Nonlinearity& gamma, const Nonlinearity& sigma,
                        std::size_t iterate) {
  const cplx minus_i{0.0, -1.0};
  Field v = base;
  if (!gamma.is_zero()) {
    const Field g = gamma.apply(tk, uk);
    check_finite(g, "gamma", k, iterate);
    v.axpy(minus_i * ctx.dt, g);
  }
  if (!sigma.is_zero() && ctx.basis && path.modes > 0) {
    if (path.modes != ctx.basis->size() || path.steps < ctx.steps)
      throw std::invalid_argument("Wiener path does not match the basis size or the time grid");
    Field dxi = ctx.basis->combine(path.step_increments(k));
    const Field s = sigma.apply(tk, uk);
    check_finite(s, "sigma", k, iterate);
    dxi.multiply(s);
    v.axpy(minus_i, dxi);
  }
  return v;
}

Trajectory make_times(const SolveContext& ctx) {
  Trajectory t;
  t.times.resize(ctx.steps + 1);
  for (std::size_t k = 0; k <= ctx.steps; ++k) t.times[k] = ctx.time(k);
  return t;
}

void fill_norms(Trajectory& t, const SolveContext& ctx) {
  t.norms.clear();
  for (const auto& f : t.fields) t.norms.push_back(h_zz_norm(f, ctx.z, ctx.zeta));
}

}  // namespace

Trajectory free_trajectory(const Field& u0, const SolveContext& ctx) {
  Trajectory t = make_times(ctx);
  t.fields.reserve(ctx.steps + 1);
  t.fields.push_back(u0);
  for (std::size_t k = 0; k < ctx.steps; ++k) t.fields.push_back(ctx.propagator->evolve(t.fields.back(), ctx.dt));
  fill_norms(t, ctx);
  return t;
}

Trajectory apply_T(const Trajectory& u, const WienerPath& path, const SolveContext& ctx, const Nonlinearity& gamma,
                   const Nonlinearity& sigma, const Field& u0) {
  if (u.fields.size() != ctx.steps + 1) throw std::invalid_argument("trajectory does not cover the time grid");
  Trajectory out = make_times(ctx);
  out.fields.reserve(ctx.steps + 1);
  out.fields.push_back(u0);
  for (std::size_t k = 0; k < ctx.steps; ++k) {
    const Field v = duhamel_increment(out.fields.back(), u.fields[k], ctx.time(k), k, path, ctx, gamma, sigma, 0);
    out.fields.push_back(ctx.propagator->evolve(v, ctx.dt));
  }
  return out;
}

double sup_distance(const Trajectory& a, const Trajectory& b, int z, int zeta) {
  if (a.fields.size() != b.fields.size()) throw std::invalid_argument("trajectories have different lengths");
  double d = 0.0;
  for (std::size_t k = 0; k < a.fields.size(); ++k) d = std::max(d, h_zz_norm(a.fields[k] - b.fields[k], z, zeta));
  return d;
}

Trajectory picard_solve(const Field& u0, const SolveContext& ctx, const Nonlinearity& gamma, const Nonlinearity& sigma,
                        const WienerPath& path, const std::optional<Trajectory>& guess) {
  Trajectory u = guess ? *guess : free_trajectory(u0, ctx);
  if (u.fields.size() != ctx.steps + 1) throw std::invalid_argument("initial guess does not cover the time grid");
  std::vector<double> distances;
  for (int m = 0; m < ctx.max_iters; ++m) {
    Trajectory next = apply_T(u, path, ctx, gamma, sigma, u0);
    const double d = sup_distance(next, u, ctx.z, ctx.zeta);
    if (!std::isfinite(d)) {
      std::ostringstream msg;
      msg << "Picard distance became non-finite at iterate " << m;
      throw picard_divergence(msg.str(), distances);
    }
    distances.push_back(d);
    if (ctx.ball) {
      for (std::size_t k = 0; k < next.fields.size(); ++k) {
        const double r = ctx.ball->distance(next.fields[k]);
        if (r > ctx.ball->radius * (1.0 + 1e-9)) {
          std::ostringstream msg;
          msg << "Picard iterate " << m + 1 << " left the closed ball of radius " << ctx.ball->radius
              << " around u0 at t = " << next.times[k] << " (distance " << r
              << "); the local Lipschitz bound only holds inside the ball, so shrink T0 or the data";
          throw ball_exit_error(msg.str());
        }
      }
    }
    u = std::move(next);
    if (d < ctx.tol) {
      u.distances = distances;
      u.iterations = static_cast<std::size_t>(m + 1);
      for (std::size_t i = 1; i < distances.size(); ++i) {
        if (distances[i - 1] <= 0.0) continue;
        const double ratio = distances[i] / distances[i - 1];
        u.max_ratio = std::max(u.max_ratio, ratio);
        if (ratio > ctx.K * ctx.ratio_margin) u.contraction_ok = false;
      }
      fill_norms(u, ctx);
      return u;
    }
  }
  std::ostringstream msg;
  msg << "Picard iteration did not reach tol " << ctx.tol << " in " << ctx.max_iters << " iterations; distances:";
  for (double d : distances) msg << ' ' << d;
  throw picard_divergence(msg.str(), distances);
}

Trajectory em_solve(const Field& u0, const SolveContext& ctx, const Nonlinearity& gamma, const Nonlinearity& sigma,
                    const WienerPath& path) {
  Trajectory out = make_times(ctx);
  out.fields.reserve(ctx.steps + 1);
  out.fields.push_back(u0);
  for (std::size_t k = 0; k < ctx.steps; ++k) {
    const Field& uk = out.fields.back();
    const Field v = duhamel_increment(uk, uk, ctx.time(k), k, path, ctx, gamma, sigma, 0);
    out.fields.push_back(ctx.propagator->evolve(v, ctx.dt));
  }
  fill_norms(out, ctx);
  return out;
}

double residual_check(const Trajectory& u, const WienerPath& path, const SolveContext& ctx, const Nonlinearity& gamma,
                      const Nonlinearity& sigma, const Field& u0) {
  return sup_distance(u, apply_T(u, path, ctx, gamma, sigma, u0), ctx.z, ctx.zeta);
}

}  // namespace schrocurve
