#include "schrocurve/quantization.hpp"

#include "schrocurve/conventions.hpp"
#include "schrocurve/norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace schrocurve {

namespace {

bool splittable(const Symbol& s) { return s.dependence() != Dependence::general; }

}  // namespace

bool GeneratorBundle::splits() const {
  return splittable(a) && splittable(a1) && splittable(m1) && splittable(m0);
}

cplx GeneratorBundle::multiplier(const Point& xi) const {
  cplx acc{};
  for (const Symbol* s : {&a, &a1, &m1, &m0})
    if (s->dependence() == Dependence::xi_only) acc += (*s)({0.0, 0.0}, xi);
  return acc;
}

cplx GeneratorBundle::potential(const Point& x) const {
  cplx acc{};
  for (const Symbol* s : {&a, &a1, &m1, &m0})
    if (s->dependence() == Dependence::x_only || s->dependence() == Dependence::constant)
      acc += (*s)(x, {0.0, 0.0});
  return acc;
}

GeneratorBundle zero_bundle(int dim) {
  return {Symbol::zero(dim, {0, 2}, "a"), Symbol::zero(dim, {-1, 1}, "a1"), Symbol::zero(dim, {0, 1}, "m1"),
          Symbol::zero(dim, {0, 0}, "m0"), 1.0};
}

GeneratorBundle free_bundle(int dim) { return make_bundle(flat_metric(dim)); }

GeneratorBundle make_bundle(const MetricCoefficients& metric, std::optional<Symbol> m1, std::optional<Symbol> m0) {
  const int d = metric.dim;
  GeneratorBundle g{build_hamiltonian(metric), build_lower_metric_term(metric),
                    m1 ? *m1 : Symbol::zero(d, {0, 1}, "m1"), m0 ? *m0 : Symbol::zero(d, {0, 0}, "m0"), 1.0};
  g.ellipticity_constant = check_ellipticity(metric, ellipticity_probe_grid(d)).constant;
  return g;
}

Symbol harmonic_window_potential(int dim, double omega, double radius) {
  return Symbol::x_only(dim, {0.0, 0.0},
                        [omega, radius](const Point& x) {
                          const double r2 = norm2(x);
                          return cplx{0.5 * omega * omega * r2 / (1.0 + r2 / (radius * radius))};
                        },
                        "harmonic_window");
}

Symbol shear_magnetic_term(int dim, double eps) {
  const int last = dim - 1;
  std::vector<SeparableTerm> terms{{[eps, last](const Point& x) { return cplx{eps * std::tanh(x[last])}; },
                                    [](const Point& xi) { return cplx{xi[0]}; }}};
  return Symbol::separable(dim, {0.0, 1.0}, std::move(terms), "shear");
}

Field apply_multiplier(const Field& f, const std::function<cplx(const Point&)>& m) {
  Field spec = forward_transform(f);
  const Grid& g = f.grid();
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= m(g.frequency_point(k));
  return inverse_transform(spec);
}

Field apply_op_direct(const Symbol& sym, const Field& f) {
  const Grid& g = f.grid();
  const Field spec = forward_transform(f);
  const double weight = conventions::inverse_prefactor(g.dim()) * g.frequency_cell_volume();
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.point(i);
    cplx acc{};
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Point xi = g.frequency_point(k);
      acc += std::polar(1.0, dot(x, xi)) * sym(x, xi) * spec[k];
    }
    out[i] = weight * acc;
  }
  return out;
}

Field apply_op(const Symbol& sym, const Field& f) {
  const Grid& g = f.grid();
  switch (sym.dependence()) {
    case Dependence::zero:
      return Field(g);
    case Dependence::constant:
      return sym({0.0, 0.0}, {0.0, 0.0}) * f;
    case Dependence::x_only: {
      Field out = f;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sym(g.point(i), {0.0, 0.0});
      return out;
    }
    case Dependence::xi_only:
      return apply_multiplier(f, [&sym](const Point& xi) { return sym({0.0, 0.0}, xi); });
    case Dependence::general:
      break;
  }
  if (const auto* terms = sym.terms()) {
    const Field spec = forward_transform(f);
    Field out(g);
    for (const auto& term : *terms) {
      Field s = spec;
      for (std::size_t k = 0; k < s.size(); ++k) s[k] *= term.xi_factor(g.frequency_point(k));
      Field t = inverse_transform(s);
      for (std::size_t i = 0; i < t.size(); ++i) out[i] += term.x_factor(g.point(i)) * t[i];
    }
    return out;
  }
  return apply_op_direct(sym, f);
}

OpApplication apply_op_checked(const Symbol& sym, const Field& f) {
  OpApplication result{apply_op(sym, f), {}};
  const double mass = boundary_mass(f);
  if (mass > kBoundaryMassThreshold) {
    std::ostringstream msg;
    msg << "boundary mass " << mass << " exceeds " << kBoundaryMassThreshold
        << "; periodization error may dominate";
    result.warnings.push_back(msg.str());
  }
  return result;
}

Field apply_generator(const GeneratorBundle& g, const Field& f) {
  Field out = apply_op(g.a, f);
  for (const Symbol* s : {&g.a1, &g.m1, &g.m0})
    if (!s->is_zero()) out += apply_op(*s, f);
  return out;
}

ContinuityReport continuity_probe(const Symbol& sym, SymbolOrder order, double r, double rho, const Grid& grid,
                                  const std::vector<FieldFactory>& samples) {
  auto measure = [&](const Grid& g) {
    double best = 0.0;
    for (const auto& make : samples) {
      const Field f = make(g);
      const double denom = sobolev_kato_norm(f, r, rho);
      if (denom == 0.0) continue;
      const double num = sobolev_kato_norm(apply_op(sym, f), r - order.m, rho - order.mu);
      best = std::max(best, num / denom);
    }
    return best;
  };
  ContinuityReport rep;
  rep.ratio = measure(grid);
  rep.refined_ratio = measure(grid.refined());
  const double drift = rep.ratio > 0.0 ? std::abs(rep.refined_ratio - rep.ratio) / rep.ratio : 0.0;
  rep.pass = std::isfinite(rep.ratio) && std::isfinite(rep.refined_ratio) && drift < 0.05;
  return rep;
}

}  // namespace schrocurve
