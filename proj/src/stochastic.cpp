#include "schrocurve/stochastic.hpp"

#include "schrocurve/parallel.hpp"

#include <cmath>
#include <sstream>

namespace schrocurve {

double WienerPath::value(std::size_t j, std::size_t k) const {
  double s = 0.0;
  for (std::size_t m = 0; m < k; ++m) s += increment(j, m);
  return s;
}

std::vector<double> WienerPath::step_increments(std::size_t k) const {
  std::vector<double> out(modes);
  for (std::size_t j = 0; j < modes; ++j) out[j] = increment(j, k);
  return out;
}

WienerPath sample_path(std::size_t J, double dt, std::size_t steps, const CounterRng& rng, std::uint64_t sample) {
  if (!(dt >= 0.0)) throw std::invalid_argument("sample_path needs dt >= 0");
  WienerPath p = zero_path(J, dt, steps);
  if (dt == 0.0) return p;
  const double sdt = std::sqrt(dt);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < steps; ++k)
      p.increments[j * steps + k] =
          sdt * rng.normal(sample, static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(k));
  return p;
}

WienerPath zero_path(std::size_t J, double dt, std::size_t steps) {
  return WienerPath{J, steps, dt, std::vector<double>(J * steps, 0.0)};
}

double PathHistory::increment(std::size_t j, std::size_t k) const {
  if (k >= step_) {
    std::ostringstream msg;
    msg << "integrand at step " << step_ << " read increment " << k << "; integrands must be predictable";
    throw std::logic_error(msg.str());
  }
  return path_->increment(j, k);
}

Field stochastic_integral(const Integrand& integrand, const WienerPath& path, const Grid& grid) {
  Field out(grid);
  for (std::size_t k = 0; k < path.steps; ++k) {
    const PathHistory history(path, k);
    for (std::size_t j = 0; j < path.modes; ++j) {
      const double dw = path.increment(j, k);
      if (dw == 0.0) continue;
      out.axpy(dw, integrand(history, k, j));
    }
  }
  return out;
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  const double n = static_cast<double>(v.size());
  r.mean = pairwise_sum(v) / n;
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - r.mean) * (v[i] - r.mean);
  r.se = v.size() > 1 ? std::sqrt(pairwise_sum(dev) / (n - 1.0) / n) : 0.0;
  return r;
}

}  // namespace

IsometryReport ito_isometry_check(const Integrand& integrand, const Grid& grid, const IsometryConfig& cfg,
                                  const CounterRng& rng) {
  if (cfg.samples < 2) throw std::invalid_argument("isometry check needs at least two paths");
  IsometryReport rep;
  const std::size_t J = cfg.modes, K = cfg.steps;

  // Deterministic integrands: evaluate each Phi(s_k) e_j once.
  std::vector<Field> cached;
  double rhs_fixed = 0.0;
  if (cfg.deterministic) {
    const WienerPath blank = zero_path(J, cfg.dt, K);
    cached.reserve(J * K);
    for (std::size_t k = 0; k < K; ++k) {
      const PathHistory history(blank, k);
      for (std::size_t j = 0; j < J; ++j) {
        cached.push_back(integrand(history, k, j));
        rhs_fixed += cfg.dt * cfg.norm.hilbert_norm_sq(cached.back());
      }
    }
  }

  std::vector<double> lhs(cfg.samples), rhs(cfg.samples), diff(cfg.samples);
  parallel_for(cfg.samples, cfg.workers, [&](std::size_t s) {
    const WienerPath path = sample_path(J, cfg.dt, K, rng, cfg.sample_offset + s);
    Field integral(grid);
    double r = 0.0;
    if (cfg.deterministic) {
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j) integral.axpy(path.increment(j, k), cached[k * J + j]);
      r = rhs_fixed;
    } else {
      for (std::size_t k = 0; k < K; ++k) {
        const PathHistory history(path, k);
        for (std::size_t j = 0; j < J; ++j) {
          const Field phi = integrand(history, k, j);
          r += cfg.dt * cfg.norm.hilbert_norm_sq(phi);
          integral.axpy(path.increment(j, k), phi);
        }
      }
    }
    lhs[s] = cfg.norm.hilbert_norm_sq(integral);
    rhs[s] = r;
    diff[s] = lhs[s] - r;
  });

  const MeanSe l = mean_se(lhs), r = mean_se(rhs), d = mean_se(diff);
  rep.lhs = l.mean;
  rep.lhs_se = l.se;
  rep.rhs = r.mean;
  rep.rhs_se = r.se;
  rep.absolute_mode = rep.rhs == 0.0;
  if (rep.absolute_mode) {
    rep.rel_err = std::abs(rep.lhs);
    rep.rel_se = d.se;
    rep.pass = rep.lhs == 0.0;
  } else {
    rep.rel_err = std::abs(rep.lhs - rep.rhs) / rep.rhs;
    rep.rel_se = d.se / rep.rhs;
    rep.pass = rep.rel_err < 0.05;
  }
  return rep;
}

IsometryScaling isometry_scaling(const Integrand& integrand, const Grid& grid, const IsometryConfig& cfg,
                                 const CounterRng& rng) {
  IsometryScaling out;
  out.base = ito_isometry_check(integrand, grid, cfg, rng);
  IsometryConfig big = cfg;
  big.samples = 4 * cfg.samples;
  out.quadrupled = ito_isometry_check(integrand, grid, big, rng);
  out.error_ratio = out.base.rel_err > 0.0 ? out.quadrupled.rel_err / out.base.rel_err : 0.0;
  out.se_ratio = out.base.rel_se > 0.0 ? out.quadrupled.rel_se / out.base.rel_se : 0.0;
  out.pass = out.se_ratio >= 0.25 && out.se_ratio <= 0.75;
  return out;
}

std::vector<double> hs_partial_sums(const Field& w, const Nonlinearity& sigma, double t, double s,
                                    const CameronMartinBasis& basis, const Propagator& propagator, int z, int zeta) {
  if (s > t) throw std::invalid_argument("hs_norm_direct needs s <= t");
  std::vector<double> out;
  out.reserve(basis.size());
  double acc = 0.0;
  if (sigma.is_zero()) return std::vector<double>(basis.size(), 0.0);
  const Field sw = sigma.apply(s, w);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const Field image = propagator.evolve(pointwise_product(sw, basis.e(j)), t - s);
    const double nrm = h_zz_norm(image, z, zeta);
    acc += nrm * nrm;
    out.push_back(acc);
  }
  return out;
}

double hs_norm_direct(const Field& w, const Nonlinearity& sigma, double t, double s, const CameronMartinBasis& basis,
                      const Propagator& propagator, int z, int zeta) {
  const auto sums = hs_partial_sums(w, sigma, t, s, basis, propagator, z, zeta);
  return sums.empty() ? 0.0 : sums.back();
}

double hs_bound(const Field& w, std::optional<double> C_s, double t, double s, const SpectralMeasure& M, double C_zz,
                int z, int zeta) {
  if (!C_s) throw std::invalid_argument("hs_bound needs the Lipschitz constant C_s of sigma; measure it with lip_constants");
  if (s > t) throw std::invalid_argument("hs_bound needs s <= t");
  const double wn = h_zz_norm(w, z, zeta);
  return std::exp(2.0 * C_zz * t) * (*C_s) * (*C_s) * (1.0 + wn) * (1.0 + wn) * M.total_mass();
}

HSReport hs_report(double direct, double bound) {
  HSReport r{direct, bound, 0.0};
  r.ratio = bound > 0.0 ? direct / bound : (direct > 0.0 ? INFINITY : 0.0);
  return r;
}

double hs_convention_kappa(const Grid& grid, int z, int zeta, double weight) {
  const auto M = SpectralMeasure::from_atoms(grid.dim(), {{{0.0, 0.0}, weight}});
  const auto basis = build_cm_basis(M, grid, 1);
  const Propagator identity(default_propagator_config(free_bundle(grid.dim()), 1e-3), grid);
  const Field w(grid);
  const double direct = hs_norm_direct(w, Nonlinearity::constant(1.0), 0.0, 0.0, basis, identity, z, zeta);
  const double bound = hs_bound(w, 1.0, 0.0, 0.0, M, 0.0, z, zeta);
  return direct / bound;
}

}  // namespace schrocurve
