#include "schrocurve/nonlinearity.hpp"

#include "schrocurve/norms.hpp"

#include <cmath>

namespace schrocurve {

double Ball::distance(const Field& v) const { return h_zz_norm(v - center, z, zeta); }

bool Ball::contains(const Field& v, double slack) const { return distance(v) <= radius * (1.0 + slack); }

Nonlinearity Nonlinearity::zero() { return Nonlinearity{}; }

Nonlinearity Nonlinearity::linear_in_u(cplx lambda) {
  Nonlinearity g;
  g.kind_ = Kind::linear_in_u;
  g.coefficient_ = lambda;
  g.name_ = "linear";
  return g;
}

Nonlinearity Nonlinearity::power(int n, cplx coefficient) {
  if (n < 1) throw std::invalid_argument("power nonlinearity needs n >= 1");
  Nonlinearity g;
  g.kind_ = Kind::power;
  g.exponent_ = n;
  g.coefficient_ = coefficient;
  g.nonlinear_ = n > 1;
  g.name_ = "power" + std::to_string(n);
  return g;
}

Nonlinearity Nonlinearity::custom(PointwiseFn fn, std::string name, bool nonlinear) {
  if (!fn) throw std::invalid_argument("custom nonlinearity needs a function");
  Nonlinearity g;
  g.kind_ = Kind::custom;
  g.fn_ = std::move(fn);
  g.name_ = std::move(name);
  g.nonlinear_ = nonlinear;
  return g;
}

Nonlinearity Nonlinearity::constant(cplx c) {
  return custom([c](double, const Point&, cplx) { return c; }, "constant", false);
}

cplx Nonlinearity::eval(double t, const Point& x, cplx u) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::linear_in_u: return coefficient_ * u;
    case Kind::power: {
      cplx p = u;
      for (int k = 1; k < exponent_; ++k) p *= u;
      return coefficient_ * p;
    }
    case Kind::custom: return fn_(t, x, u);
  }
  return 0.0;
}

Field Nonlinearity::apply(double t, const Field& u) const {
  Field out(u.grid());
  if (kind_ == Kind::zero) return out;
  const Grid& g = u.grid();
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = eval(t, g.point(i), u[i]);
  return out;
}

Nonlinearity Nonlinearity::with_ball(Ball ball) const {
  Nonlinearity g = *this;
  g.ball_ = std::move(ball);
  return g;
}

}  // namespace schrocurve
