#include "schrocurve/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>

namespace schrocurve {

Symbol::Symbol(int dim, SymbolOrder order, SymbolFn eval, Dependence dependence, std::string name)
    : dim_(dim), order_(order), eval_(std::move(eval)), dependence_(dependence), name_(std::move(name)) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("symbol dimension must be 1 or 2");
}

Symbol Symbol::zero(int dim, SymbolOrder order, std::string name) {
  Symbol s(dim, order, [](const Point&, const Point&) { return cplx{}; }, Dependence::zero, std::move(name));
  s.terms_.emplace();
  s.oracle_ = [](const MultiIndex&, const MultiIndex&, const Point&, const Point&) { return cplx{}; };
  return s;
}

Symbol Symbol::constant(int dim, cplx value, std::string name) {
  Symbol s(dim, {0.0, 0.0}, [value](const Point&, const Point&) { return value; }, Dependence::constant,
           std::move(name));
  s.terms_ = std::vector<SeparableTerm>{
      {[value](const Point&) { return value; }, [](const Point&) { return cplx{1.0}; }}};
  s.oracle_ = [value](const MultiIndex& a, const MultiIndex& b, const Point&, const Point&) {
    return length(a) + length(b) == 0 ? value : cplx{};
  };
  return s;
}

Symbol Symbol::x_only(int dim, SymbolOrder order, PointFn c, std::string name) {
  Symbol s(dim, order, [c](const Point& x, const Point&) { return c(x); }, Dependence::x_only, std::move(name));
  s.terms_ = std::vector<SeparableTerm>{{std::move(c), [](const Point&) { return cplx{1.0}; }}};
  return s;
}

Symbol Symbol::xi_only(int dim, SymbolOrder order, PointFn m, std::string name) {
  Symbol s(dim, order, [m](const Point&, const Point& xi) { return m(xi); }, Dependence::xi_only,
           std::move(name));
  s.terms_ = std::vector<SeparableTerm>{{[](const Point&) { return cplx{1.0}; }, std::move(m)}};
  return s;
}

Symbol Symbol::separable(int dim, SymbolOrder order, std::vector<SeparableTerm> terms, std::string name) {
  if (terms.empty()) return zero(dim, order, std::move(name));
  auto shared = std::make_shared<std::vector<SeparableTerm>>(terms);
  SymbolFn eval = [shared](const Point& x, const Point& xi) {
    cplx acc{};
    for (const auto& t : *shared) acc += t.x_factor(x) * t.xi_factor(xi);
    return acc;
  };
  Symbol s(dim, order, std::move(eval), Dependence::general, std::move(name));
  s.terms_ = std::move(terms);
  return s;
}

Symbol Symbol::with_derivative_oracle(DerivativeOracle oracle) const {
  Symbol s = *this;
  s.oracle_ = std::move(oracle);
  return s;
}

Symbol Symbol::with_order(SymbolOrder order) const {
  Symbol s = *this;
  s.order_ = order;
  return s;
}

namespace {

Dependence combine_product(Dependence a, Dependence b) {
  if (a == Dependence::zero || b == Dependence::zero) return Dependence::zero;
  if (a == Dependence::constant) return b;
  if (b == Dependence::constant) return a;
  if (a == b) return a;
  return Dependence::general;
}

Dependence combine_sum(Dependence a, Dependence b) {
  if (a == Dependence::zero) return b;
  if (b == Dependence::zero) return a;
  if (a == b) return a;
  if (a == Dependence::constant) return b;
  if (b == Dependence::constant) return a;
  return Dependence::general;
}

}  // namespace

Symbol product(const Symbol& p, const Symbol& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("symbol dimensions differ");
  const SymbolOrder order = p.order() + q.order();
  const std::string name = p.name() + "*" + q.name();
  const Dependence dep = combine_product(p.dependence(), q.dependence());
  if (dep == Dependence::zero) return Symbol::zero(p.dim(), order, name);
  if (dep == Dependence::x_only)
    return Symbol::x_only(p.dim(), order, [p, q](const Point& x) { return p(x, {}) * q(x, {}); }, name);
  if (dep == Dependence::xi_only)
    return Symbol::xi_only(p.dim(), order, [p, q](const Point& xi) { return p({}, xi) * q({}, xi); }, name);
  if (dep == Dependence::constant) return Symbol::constant(p.dim(), p({}, {}) * q({}, {}), name);
  if (p.terms() && q.terms()) {
    std::vector<SeparableTerm> terms;
    for (const auto& a : *p.terms())
      for (const auto& b : *q.terms())
        terms.push_back({[ca = a.x_factor, cb = b.x_factor](const Point& x) { return ca(x) * cb(x); },
                         [ma = a.xi_factor, mb = b.xi_factor](const Point& xi) { return ma(xi) * mb(xi); }});
    return Symbol::separable(p.dim(), order, std::move(terms), name);
  }
  return Symbol(p.dim(), order, [p, q](const Point& x, const Point& xi) { return p(x, xi) * q(x, xi); }, dep,
                name);
}

Symbol sum(const Symbol& p, const Symbol& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("symbol dimensions differ");
  const SymbolOrder order{std::max(p.order().m, q.order().m), std::max(p.order().mu, q.order().mu)};
  const std::string name = p.name() + "+" + q.name();
  const Dependence dep = combine_sum(p.dependence(), q.dependence());
  if (dep == Dependence::zero) return Symbol::zero(p.dim(), order, name);
  if (p.is_zero()) return q.with_order(order);
  if (q.is_zero()) return p.with_order(order);
  if (dep == Dependence::x_only)
    return Symbol::x_only(p.dim(), order, [p, q](const Point& x) { return p(x, {}) + q(x, {}); }, name);
  if (dep == Dependence::xi_only)
    return Symbol::xi_only(p.dim(), order, [p, q](const Point& xi) { return p({}, xi) + q({}, xi); }, name);
  if (dep == Dependence::constant) return Symbol::constant(p.dim(), p({}, {}) + q({}, {}), name);
  if (p.terms() && q.terms()) {
    std::vector<SeparableTerm> terms = *p.terms();
    terms.insert(terms.end(), q.terms()->begin(), q.terms()->end());
    return Symbol::separable(p.dim(), order, std::move(terms), name);
  }
  return Symbol(p.dim(), order, [p, q](const Point& x, const Point& xi) { return p(x, xi) + q(x, xi); }, dep,
                name);
}

Symbol weight_symbol(int dim, double r, double rho) {
  const std::string name = "lambda_" + std::to_string(r) + "_" + std::to_string(rho);
  std::vector<SeparableTerm> terms{
      {[r](const Point& x) { return cplx{std::pow(bracket(x), r)}; },
       [rho](const Point& xi) { return cplx{std::pow(bracket(xi), rho)}; }}};
  if (r == 0.0 && rho == 0.0) return Symbol::constant(dim, 1.0, name);
  if (r == 0.0)
    return Symbol::xi_only(dim, {0.0, rho}, [rho](const Point& xi) { return cplx{std::pow(bracket(xi), rho)}; },
                           name);
  if (rho == 0.0)
    return Symbol::x_only(dim, {r, 0.0}, [r](const Point& x) { return cplx{std::pow(bracket(x), r)}; }, name);
  return Symbol::separable(dim, {r, rho}, std::move(terms), name);
}

// ---------------------------------------------------------------- metrics

double MetricCoefficients::derivative(const Point& x, int j, int l, int k) const {
  if (constant_coefficients) return 0.0;
  if (gradient) return (*gradient)(x, j, l, k);
  const double h = 1e-4 * bracket(x);
  auto central = [&](double step) {
    Point xp = x, xm = x;
    xp[k] += step;
    xm[k] -= step;
    return (entry(xp, j, l) - entry(xm, j, l)) / (2.0 * step);
  };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

MetricCoefficients flat_metric(int dim) {
  MetricCoefficients m;
  m.dim = dim;
  m.entry = [](const Point&, int j, int l) { return j == l ? 1.0 : 0.0; };
  m.gradient = [](const Point&, int, int, int) { return 0.0; };
  m.constant_coefficients = true;
  m.flat_at_infinity_rate = std::numeric_limits<double>::infinity();
  m.name = "flat";
  return m;
}

MetricCoefficients constant_metric(int dim, std::array<std::array<double, 2>, 2> matrix) {
  MetricCoefficients m;
  m.dim = dim;
  m.entry = [matrix](const Point&, int j, int l) { return matrix[j][l]; };
  m.gradient = [](const Point&, int, int, int) { return 0.0; };
  m.constant_coefficients = true;
  m.name = "constant";
  return m;
}

namespace {

Point unit_direction(int dim, Point v) {
  if (dim == 1) v[1] = 0.0;
  double len = std::sqrt(norm2(v));
  if (len == 0.0) throw invalid_metric("metric bump direction must be nonzero");
  return {v[0] / len, v[1] / len};
}

template <class Profile, class ProfileGrad>
MetricCoefficients rank_one_perturbation(int dim, double eps, Point direction, Profile g, ProfileGrad dg,
                                         double rate, std::string name) {
  const Point v = unit_direction(dim, direction);
  MetricCoefficients m;
  m.dim = dim;
  m.entry = [eps, v, g](const Point& x, int j, int l) { return (j == l ? 1.0 : 0.0) + eps * g(x) * v[j] * v[l]; };
  m.gradient = [eps, v, dg](const Point& x, int j, int l, int k) { return eps * dg(x, k) * v[j] * v[l]; };
  m.flat_at_infinity_rate = rate;
  m.name = std::move(name);
  return m;
}

}  // namespace

MetricCoefficients gauss_bump_metric(int dim, double eps, Point direction) {
  auto g = [](const Point& x) { return std::exp(-norm2(x)); };
  auto dg = [](const Point& x, int k) { return -2.0 * x[k] * std::exp(-norm2(x)); };
  return rank_one_perturbation(dim, eps, direction, g, dg, std::numeric_limits<double>::infinity(),
                               "gauss_bump");
}

MetricCoefficients rational_decay_metric(int dim, double eps, Point direction) {
  auto g = [](const Point& x) { return 1.0 / (1.0 + norm2(x)); };
  auto dg = [](const Point& x, int k) {
    double q = 1.0 / (1.0 + norm2(x));
    return -2.0 * x[k] * q * q;
  };
  return rank_one_perturbation(dim, eps, direction, g, dg, 2.0, "rational_decay");
}

MetricCoefficients metric_by_name(const std::string& family, int dim, double eps, Point direction) {
  if (family == "flat") return flat_metric(dim);
  if (family == "gauss_bump") return gauss_bump_metric(dim, eps, direction);
  if (family == "rational_decay") return rational_decay_metric(dim, eps, direction);
  throw invalid_metric("unknown metric family '" + family + "'");
}

void validate_metric(const MetricCoefficients& metric, const std::vector<Point>& samples) {
  if (!metric.entry) throw invalid_metric("metric has no coefficient function");
  for (const auto& x : samples)
    for (int j = 0; j < metric.dim; ++j)
      for (int l = j + 1; l < metric.dim; ++l) {
        double a = metric(x, j, l), b = metric(x, l, j);
        if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)))
          throw invalid_metric("metric is not symmetric: a_" + std::to_string(j + 1) + std::to_string(l + 1) +
                               " != a_" + std::to_string(l + 1) + std::to_string(j + 1) + " at x = (" +
                               std::to_string(x[0]) + ", " + std::to_string(x[1]) + ")");
      }
}

namespace {

std::vector<Point> validation_samples(int dim) {
  ProbeGrid g = ellipticity_probe_grid(dim);
  return g.x_points;
}

}  // namespace

Symbol build_hamiltonian(const MetricCoefficients& metric) {
  validate_metric(metric, validation_samples(metric.dim));
  const int d = metric.dim;
  const SymbolOrder order{0.0, 2.0};
  if (metric.constant_coefficients) {
    std::array<std::array<double, 2>, 2> a{};
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) a[j][l] = metric({0.0, 0.0}, j, l);
    return Symbol::xi_only(d, order,
                           [a, d](const Point& xi) {
                             double s = 0.0;
                             for (int j = 0; j < d; ++j)
                               for (int l = 0; l < d; ++l) s += a[j][l] * xi[j] * xi[l];
                             return cplx{-0.5 * s};
                           },
                           "hamiltonian_" + metric.name);
  }
  std::vector<SeparableTerm> terms;
  for (int j = 0; j < d; ++j)
    for (int l = j; l < d; ++l) {
      const double mult = j == l ? 1.0 : 2.0;
      auto entry = metric.entry;
      terms.push_back({[entry, j, l, mult](const Point& x) { return cplx{-0.5 * mult * entry(x, j, l)}; },
                       [j, l](const Point& xi) { return cplx{xi[j] * xi[l]}; }});
    }
  return Symbol::separable(d, order, std::move(terms), "hamiltonian_" + metric.name);
}

Symbol build_lower_metric_term(const MetricCoefficients& metric) {
  validate_metric(metric, validation_samples(metric.dim));
  const int d = metric.dim;
  const SymbolOrder order{-1.0, 1.0};
  if (metric.constant_coefficients) return Symbol::zero(d, order, "lower_metric_" + metric.name);
  std::vector<SeparableTerm> terms;
  for (int l = 0; l < d; ++l) {
    terms.push_back({[metric, l, d](const Point& x) {
                       double s = 0.0;
                       for (int j = 0; j < d; ++j) s += metric.derivative(x, j, l, j);
                       return cplx{0.0, 0.5 * s};
                     },
                     [l](const Point& xi) { return cplx{xi[l]}; }});
  }
  return Symbol::separable(d, order, std::move(terms), "lower_metric_" + metric.name);
}

// ---------------------------------------------------------------- estimates

ProbeGrid dyadic_probe_grid(int dim, int shells) {
  ProbeGrid g;
  g.shell_count = shells;
  for (int s = 0; s < shells; ++s) {
    const double r = std::ldexp(1.0, s);
    for (int axis = 0; axis < dim; ++axis)
      for (double sign : {1.0, -1.0}) {
        Point p{0.0, 0.0};
        p[axis] = sign * r;
        g.x_points.push_back(p);
        g.x_shell.push_back(s);
        g.xi_points.push_back(p);
        g.xi_shell.push_back(s);
      }
  }
  return g;
}

ProbeGrid ellipticity_probe_grid(int dim) {
  ProbeGrid g;
  g.shell_count = 1;
  const int directions = dim == 1 ? 2 : 16;
  auto dir = [&](int k) -> Point {
    if (dim == 1) return {k == 0 ? 1.0 : -1.0, 0.0};
    double t = 2.0 * std::numbers::pi * k / directions;
    return {std::cos(t), std::sin(t)};
  };
  g.x_points.push_back({0.0, 0.0});
  g.x_shell.push_back(0);
  for (double r : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0, 8.0, 16.0})
    for (int k = 0; k < directions; ++k) {
      Point u = dir(k);
      g.x_points.push_back({r * u[0], r * u[1]});
      g.x_shell.push_back(0);
    }
  for (double r : {1.0, 4.0})
    for (int k = 0; k < directions; ++k) {
      Point u = dir(k);
      g.xi_points.push_back({r * u[0], r * u[1]});
      g.xi_shell.push_back(0);
    }
  return g;
}

namespace {

// Step factor per total derivative order: 1e-4 up to third order, larger beyond
// so that the eps / h^k round-off stays near 1e-4 relative.
double step_factor(int total_order) {
  return std::pow(10.0, -std::min(4.0, 12.0 / std::max(1, total_order)));
}

cplx fd_recursive(const SymbolFn& f, MultiIndex alpha, MultiIndex beta, const Point& x, const Point& xi, double hx,
                  double hxi) {
  for (int i = 0; i < 2; ++i) {
    if (alpha[i] > 0) {
      MultiIndex a = alpha;
      --a[i];
      auto central = [&](double h) {
        Point p = xi, m = xi;
        p[i] += h;
        m[i] -= h;
        return (fd_recursive(f, a, beta, x, p, hx, hxi) - fd_recursive(f, a, beta, x, m, hx, hxi)) / (2.0 * h);
      };
      return (4.0 * central(0.5 * hxi) - central(hxi)) / 3.0;
    }
  }
  for (int i = 0; i < 2; ++i) {
    if (beta[i] > 0) {
      MultiIndex b = beta;
      --b[i];
      auto central = [&](double h) {
        Point p = x, m = x;
        p[i] += h;
        m[i] -= h;
        return (fd_recursive(f, alpha, b, p, xi, hx, hxi) - fd_recursive(f, alpha, b, m, xi, hx, hxi)) / (2.0 * h);
      };
      return (4.0 * central(0.5 * hx) - central(hx)) / 3.0;
    }
  }
  return f(x, xi);
}

std::vector<MultiIndex> multi_indices(int dim, int max_len) {
  std::vector<MultiIndex> out;
  for (int a0 = 0; a0 <= max_len; ++a0) {
    if (dim == 1) {
      out.push_back({a0, 0});
      continue;
    }
    for (int a1 = 0; a0 + a1 <= max_len; ++a1) out.push_back({a0, a1});
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

cplx finite_difference_derivative(const SymbolFn& f, const MultiIndex& alpha, const MultiIndex& beta, const Point& x,
                                  const Point& xi, int dim) {
  if (dim == 1 && (alpha[1] != 0 || beta[1] != 0)) return cplx{};
  const double c = step_factor(length(alpha) + length(beta));
  return fd_recursive(f, alpha, beta, x, xi, c * bracket(x), c * bracket(xi));
}

EstimateReport check_symbol_estimates(const Symbol& sym, int max_alpha, int max_beta, const ProbeGrid& probes) {
  EstimateReport report;
  report.symbol_name = sym.name();
  report.order = sym.order();
  const int d = sym.dim();
  const double m = sym.order().m;
  const double mu = sym.order().mu;

  double scale = 0.0;  // magnitude of the weighted symbol itself, for the noise floor
  for (const auto& alpha : multi_indices(d, max_alpha)) {
    for (const auto& beta : multi_indices(d, max_beta)) {
      EstimateEntry e;
      e.alpha = alpha;
      e.beta = beta;
      e.shell_sup.assign(static_cast<std::size_t>(probes.shell_count), 0.0);
      for (std::size_t ix = 0; ix < probes.x_points.size(); ++ix) {
        for (std::size_t ik = 0; ik < probes.xi_points.size(); ++ik) {
          const Point& x = probes.x_points[ix];
          const Point& xi = probes.xi_points[ik];
          cplx value = sym.derivative_oracle()
              ? (*sym.derivative_oracle())(alpha, beta, x, xi)
              : finite_difference_derivative([&sym](const Point& a, const Point& b) { return sym(a, b); }, alpha,
                                             beta, x, xi, d);
          const double weight = std::pow(bracket(x), length(beta) - m) * std::pow(bracket(xi), length(alpha) - mu);
          const double w = std::abs(value) * weight;
          if (!std::isfinite(w)) {
            e.derivative_failed = true;
            continue;
          }
          const int shell = std::max(probes.x_shell[ix], probes.xi_shell[ik]);
          auto& slot = e.shell_sup[static_cast<std::size_t>(shell)];
          slot = std::max(slot, w);
          e.constant = std::max(e.constant, w);
        }
      }
      if (length(alpha) == 0 && length(beta) == 0) scale = e.constant;
      report.entries.push_back(std::move(e));
    }
  }

  // Finite-difference noise floor: derivatives that vanish identically come out
  // as O(1e-4) relative round-off and are not growth.
  const double floor = sym.derivative_oracle() ? 0.0 : 1e-3 * std::max(scale, 1e-300);
  report.pass = true;
  for (auto& e : report.entries) {
    const double last = e.shell_sup.back();
    e.pass = !e.derivative_failed && last <= 4.0 * median(e.shell_sup) + floor;
    report.pass = report.pass && e.pass;
  }
  return report;
}

void EstimateReport::write_csv(std::ostream& out) const {
  out << "alpha0,alpha1,beta0,beta1";
  const std::size_t shells = entries.empty() ? 0 : entries.front().shell_sup.size();
  for (std::size_t s = 0; s < shells; ++s) out << ",shell" << s << "_sup";
  out << ",constant,verdict\n";
  out.precision(12);
  for (const auto& e : entries) {
    out << e.alpha[0] << ',' << e.alpha[1] << ',' << e.beta[0] << ',' << e.beta[1];
    for (double v : e.shell_sup) out << ',' << v;
    out << ',' << e.constant << ',' << (e.derivative_failed ? "ERROR" : e.pass ? "PASS" : "FAIL") << '\n';
  }
}

EllipticityResult check_ellipticity(const MetricCoefficients& metric, const ProbeGrid& probes) {
  if (probes.x_points.empty() || probes.xi_points.empty())
    throw std::invalid_argument("ellipticity probe grid is empty");
  EllipticityResult r;
  r.upper = 0.0;
  r.lower = std::numeric_limits<double>::infinity();
  const int d = metric.dim;
  for (const auto& x : probes.x_points) {
    for (const auto& xi : probes.xi_points) {
      const double xi2 = norm2(xi);
      if (xi2 == 0.0) throw std::invalid_argument("ellipticity probes must exclude xi = 0");
      double q = 0.0;
      for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) q += metric(x, j, l) * xi[j] * xi[l];
      q *= 0.5;
      if (!(q > 0.0))
        throw ellipticity_error("quadratic form is not positive at x = (" + std::to_string(x[0]) + ", " +
                                    std::to_string(x[1]) + "), xi = (" + std::to_string(xi[0]) + ", " +
                                    std::to_string(xi[1]) + "): q = " + std::to_string(q),
                                x, xi);
      r.upper = std::max(r.upper, q / xi2);
      r.lower = std::min(r.lower, q / xi2);
    }
  }
  r.constant = std::max({1.0, r.upper, 1.0 / r.lower});
  return r;
}

}  // namespace schrocurve
