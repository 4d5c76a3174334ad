#pragma once

#include "schrocurve/grid.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace schrocurve {

/// Closed ball {v : ||v - center||_{H_{z,zeta}} <= radius}.
struct Ball {
  Field center;
  double radius = 0.0;
  int z = 0;
  int zeta = 0;

  double distance(const Field& v) const;
  bool contains(const Field& v, double slack = 1e-12) const;
};

using PointwiseFn = std::function<cplx(double t, const Point& x, cplx u)>;

/**
 * Nemytskii nonlinearity g(t, x, u) applied pointwise.
 * power(n) is c u^n; linear_in_u is lambda u.
 */
class Nonlinearity {
public:
  enum class Kind { zero, linear_in_u, power, custom };

  static Nonlinearity zero();
  static Nonlinearity linear_in_u(cplx lambda);
  static Nonlinearity power(int n, cplx coefficient = 1.0);
  static Nonlinearity custom(PointwiseFn fn, std::string name, bool nonlinear = true);
  /// g = c, independent of u.
  static Nonlinearity constant(cplx c);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  /// False for zero, linear and constant maps.
  bool genuinely_nonlinear() const { return nonlinear_; }
  cplx lambda() const { return coefficient_; }
  int exponent() const { return exponent_; }

  cplx eval(double t, const Point& x, cplx u) const;
  /// u(.) -> g(t, ., u(.)).
  Field apply(double t, const Field& u) const;

  const std::optional<Ball>& ball() const { return ball_; }
  Nonlinearity with_ball(Ball ball) const;

private:
  Kind kind_ = Kind::zero;
  std::string name_ = "zero";
  cplx coefficient_ = 0.0;
  int exponent_ = 0;
  bool nonlinear_ = false;
  PointwiseFn fn_;
  std::optional<Ball> ball_;
};

}  // namespace schrocurve
