#pragma once

#include "schrocurve/grid.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace schrocurve {

/// ||Op(lambda_{r,rho}) f||_{L^2} = ||<x>^r <D>^rho f||_{L^2}.
double sobolev_kato_norm(const Field& f, double r, double rho);

/// sum_{j=0}^{z} ||f||_{H^{z-j, j+zeta}}. Throws std::invalid_argument for negative indices.
double h_zz_norm(const Field& f, int z, int zeta);

/// sum_{j=0}^{z} ||f||^2_{H^{z-j, j+zeta}}: the Hilbert form equivalent to h_zz_norm squared.
double h_zz_hilbert_norm_sq(const Field& f, int z, int zeta);

struct SobolevKatoIndex {
  double r = 0.0;
  double rho = 0.0;
};

struct HzzIndex {
  int z = 0;
  int zeta = 0;
};

/// Either a single Sobolev-Kato space or an H_{z,zeta} intersection.
struct NormSpec {
  std::variant<SobolevKatoIndex, HzzIndex> index = HzzIndex{};

  static NormSpec sobolev_kato(double r, double rho) { return {SobolevKatoIndex{r, rho}}; }
  static NormSpec hzz(int z, int zeta) { return {HzzIndex{z, zeta}}; }

  double norm(const Field& f) const;
  /// Squared norm of the underlying Hilbert structure (sum of squares for H_{z,zeta}).
  double hilbert_norm_sq(const Field& f) const;
};

using FieldPairFactory = std::function<std::pair<Field, Field>(const Grid&)>;

struct AlgebraProbe {
  double ratio = 0.0;          ///< max ||uv|| / (||u|| ||v||) at the base grid
  double refined_ratio = 0.0;  ///< same on the refined grid
  double drift = 0.0;          ///< |refined - base| / base
  bool hypothesis_met = false; ///< zeta > d/2
  bool pass = false;           ///< hypothesis met and drift < 5%
};

/// Probes the algebra constant of H_{z,zeta}; pairs with a zero factor are skipped.
AlgebraProbe algebra_constant_probe(int z, int zeta, const Grid& grid, const std::vector<FieldPairFactory>& samples);

}  // namespace schrocurve
