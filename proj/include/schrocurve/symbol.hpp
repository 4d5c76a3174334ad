#pragma once

#include "schrocurve/grid.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrocurve {

/// Order (m, mu) of a symbol in S^{m,mu}: spatial weight m, frequency weight mu.
struct SymbolOrder {
  double m = 0.0;
  double mu = 0.0;

  SymbolOrder operator+(const SymbolOrder& o) const { return {m + o.m, mu + o.mu}; }
  bool operator==(const SymbolOrder&) const = default;
};

using MultiIndex = std::array<int, 2>;
inline int length(const MultiIndex& a) { return a[0] + a[1]; }

using SymbolFn = std::function<cplx(const Point& x, const Point& xi)>;
using PointFn = std::function<cplx(const Point&)>;
/// d^alpha_xi d^beta_x a(x, xi).
using DerivativeOracle =
    std::function<cplx(const MultiIndex& alpha, const MultiIndex& beta, const Point& x, const Point& xi)>;

/// One term c(x) m(xi) of a separable symbol.
struct SeparableTerm {
  PointFn x_factor;
  PointFn xi_factor;
};

enum class Dependence { zero, constant, x_only, xi_only, general };

/**
 * Order-tagged symbol a(x, xi) on R^d x R^d.
 *
 * Symbols are immutable after construction. When a separable decomposition
 * a = sum_p c_p(x) m_p(xi) is known it is kept alongside the pointwise
 * evaluator so that quantization can run at FFT cost.
 */
class Symbol {
public:
  Symbol(int dim, SymbolOrder order, SymbolFn eval, Dependence dependence, std::string name);

  static Symbol zero(int dim, SymbolOrder order = {}, std::string name = "zero");
  static Symbol constant(int dim, cplx value, std::string name = "constant");
  static Symbol x_only(int dim, SymbolOrder order, PointFn c, std::string name);
  static Symbol xi_only(int dim, SymbolOrder order, PointFn m, std::string name);
  static Symbol separable(int dim, SymbolOrder order, std::vector<SeparableTerm> terms, std::string name);

  cplx operator()(const Point& x, const Point& xi) const { return eval_(x, xi); }

  int dim() const { return dim_; }
  const SymbolOrder& order() const { return order_; }
  Dependence dependence() const { return dependence_; }
  const std::string& name() const { return name_; }
  bool is_zero() const { return dependence_ == Dependence::zero; }

  /// Separable decomposition, if any (x_only/xi_only/constant symbols always have one).
  const std::vector<SeparableTerm>* terms() const { return terms_ ? &*terms_ : nullptr; }

  const std::optional<DerivativeOracle>& derivative_oracle() const { return oracle_; }
  Symbol with_derivative_oracle(DerivativeOracle oracle) const;
  /// Same function, different declared order (used by class-membership checks).
  Symbol with_order(SymbolOrder order) const;

private:
  int dim_;
  SymbolOrder order_;
  SymbolFn eval_;
  Dependence dependence_;
  std::string name_;
  std::optional<std::vector<SeparableTerm>> terms_;
  std::optional<DerivativeOracle> oracle_;
};

/// Pointwise product; orders add, separable terms are multiplied out.
Symbol product(const Symbol& p, const Symbol& q);
/// Pointwise sum; the order is the componentwise max.
Symbol sum(const Symbol& p, const Symbol& q);

/// lambda_{r,rho}(x, xi) = <x>^r <xi>^rho, the Sobolev-Kato weight.
Symbol weight_symbol(int dim, double r, double rho);

class invalid_metric : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Symmetric, pointwise positive-definite coefficient matrix a_jl(x).
 *
 * The optional gradient returns d_{x_k} a_jl(x); finite differences stand in
 * when it is absent.
 */
struct MetricCoefficients {
  using Entry = std::function<double(const Point& x, int j, int l)>;
  using Gradient = std::function<double(const Point& x, int j, int l, int k)>;

  int dim = 1;
  Entry entry;
  double flat_at_infinity_rate = 2.0;
  std::optional<Gradient> gradient;
  /// True when a_jl does not depend on x.
  bool constant_coefficients = false;
  std::string name = "custom";

  double operator()(const Point& x, int j, int l) const { return entry(x, j, l); }
  double derivative(const Point& x, int j, int l, int k) const;
};

MetricCoefficients flat_metric(int dim);
MetricCoefficients constant_metric(int dim, std::array<std::array<double, 2>, 2> matrix);
/// delta_jl + eps e^{-|x|^2} v_j v_l.
MetricCoefficients gauss_bump_metric(int dim, double eps, Point direction);
/// delta_jl + eps (1 + |x|^2)^{-1} v_j v_l.
MetricCoefficients rational_decay_metric(int dim, double eps, Point direction);
MetricCoefficients metric_by_name(const std::string& family, int dim, double eps, Point direction);

/// Throws invalid_metric when a_jl != a_lj at any of the sample points.
void validate_metric(const MetricCoefficients& metric, const std::vector<Point>& samples);

/// a(x, xi) = -(1/2) sum a_jl(x) xi_j xi_l, order (0, 2).
Symbol build_hamiltonian(const MetricCoefficients& metric);
/// a_1(x, xi) = (i/2) sum d_{x_j} a_jl(x) xi_l, order (-1, 1).
Symbol build_lower_metric_term(const MetricCoefficients& metric);

/// Probe points grouped in dyadic shells.
struct ProbeGrid {
  std::vector<Point> x_points;
  std::vector<int> x_shell;
  std::vector<Point> xi_points;
  std::vector<int> xi_shell;
  int shell_count = 0;
};

/// |x|, |xi| in {1, 2, 4, 8, 16} along the 2d signed axis directions.
ProbeGrid dyadic_probe_grid(int dim, int shells = 5);

struct EstimateEntry {
  MultiIndex alpha{};
  MultiIndex beta{};
  /// Supremum of the weighted derivative per shell (shell of a probe pair = max of its two shells).
  std::vector<double> shell_sup;
  double constant = 0.0;
  bool derivative_failed = false;
  bool pass = false;
};

struct EstimateReport {
  std::string symbol_name;
  SymbolOrder order;
  std::vector<EstimateEntry> entries;
  bool pass = false;

  void write_csv(std::ostream& out) const;
};

/**
 * Certifies |d^alpha_xi d^beta_x a| <= C <x>^{m-|beta|} <xi>^{mu-|alpha|} on the
 * probe grid for |alpha| <= max_alpha, |beta| <= max_beta. An entry passes
 * when its largest-shell supremum is within a factor 4 of the median over shells.
 */
EstimateReport check_symbol_estimates(const Symbol& sym, int max_alpha, int max_beta, const ProbeGrid& probes);

/// Scale-aware central difference, Richardson-extrapolated once.
cplx finite_difference_derivative(const SymbolFn& f, const MultiIndex& alpha, const MultiIndex& beta,
                                  const Point& x, const Point& xi, int dim);

class ellipticity_error : public std::runtime_error {
public:
  ellipticity_error(const std::string& what, Point x, Point xi)
      : std::runtime_error(what), witness_x(x), witness_xi(xi) {}
  Point witness_x;
  Point witness_xi;
};

struct EllipticityResult {
  /// Smallest C >= 1 with C^{-1}|xi|^2 <= q(x, xi) <= C|xi|^2 on the probes.
  double constant = 1.0;
  /// max q / |xi|^2 on the probes.
  double upper = 0.0;
  /// min q / |xi|^2 on the probes.
  double lower = 0.0;
};

/// Ellipticity of q(x, xi) = (1/2) sum a_jl(x) xi_j xi_l. Throws ellipticity_error with a witness if q <= 0.
EllipticityResult check_ellipticity(const MetricCoefficients& metric, const ProbeGrid& probes);

/// Dyadic probes plus the origin and half-shells in x; used for ellipticity and CFL bounds.
ProbeGrid ellipticity_probe_grid(int dim);

}  // namespace schrocurve
