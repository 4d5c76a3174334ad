#pragma once

#include <cmath>
#include <numbers>

// Fourier-transform constants shared by grid_fields, quantization and noise.
//
//   F f(xi)        = int e^{-i x.xi} f(x) dx
//   F^{-1} g(x)    = (2 pi)^{-d} int e^{i x.xi} g(xi) dxi
//   Op(a) f(x)     = (2 pi)^{-d} int e^{i x.xi} a(x, xi) F f(xi) dxi
//   Gamma          = F^{-1} M,  so Gamma(0) = (2 pi)^{-d} M(R^d)
//   e_j            = F(f_j M)   (Cameron-Martin basis image, no 2 pi)
//   E[Xi(phi)Xi(psi)] = dt * int F phi conj(F psi) dM
//
// Pointwise noise covariance E[dXi(x) dXi(y)] = dt * (2 pi)^d Gamma(x - y).

namespace schrocurve::conventions {

inline double two_pi_pow(int dim) { return std::pow(2.0 * std::numbers::pi, dim); }

/// Prefactor of the inverse transform and of Op(a).
inline double inverse_prefactor(int dim) { return 1.0 / two_pi_pow(dim); }

/// Gamma(0) for a spectral measure of the given total mass.
inline double correlation_at_origin(double total_mass, int dim) {
  return total_mass * inverse_prefactor(dim);
}

/// E[dXi(x) dXi(x + r)] / (dt * Gamma(r)).
inline double pointwise_covariance_factor(int dim) { return two_pi_pow(dim); }

}  // namespace schrocurve::conventions
