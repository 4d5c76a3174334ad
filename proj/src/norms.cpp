#include "schrocurve/norms.hpp"

#include "schrocurve/quantization.hpp"
#include "schrocurve/symbol.hpp"

#include <cmath>
#include <stdexcept>

namespace schrocurve {

double sobolev_kato_norm(const Field& f, double r, double rho) {
  return l2_norm(apply_op(weight_symbol(f.grid().dim(), r, rho), f));
}

namespace {
void require_nonnegative(int z, int zeta) {
  if (z < 0 || zeta < 0)
    throw std::invalid_argument("H_{z,zeta} indices must be nonnegative, got z=" + std::to_string(z) +
                                ", zeta=" + std::to_string(zeta));
}
}  // namespace

double h_zz_norm(const Field& f, int z, int zeta) {
  require_nonnegative(z, zeta);
  double sum = 0.0;
  for (int j = 0; j <= z; ++j) sum += sobolev_kato_norm(f, z - j, j + zeta);
  return sum;
}

double h_zz_hilbert_norm_sq(const Field& f, int z, int zeta) {
  require_nonnegative(z, zeta);
  double sum = 0.0;
  for (int j = 0; j <= z; ++j) {
    const double v = sobolev_kato_norm(f, z - j, j + zeta);
    sum += v * v;
  }
  return sum;
}

double NormSpec::norm(const Field& f) const {
  if (const auto* sk = std::get_if<SobolevKatoIndex>(&index)) return sobolev_kato_norm(f, sk->r, sk->rho);
  const auto& h = std::get<HzzIndex>(index);
  return h_zz_norm(f, h.z, h.zeta);
}

double NormSpec::hilbert_norm_sq(const Field& f) const {
  if (const auto* sk = std::get_if<SobolevKatoIndex>(&index)) {
    const double v = sobolev_kato_norm(f, sk->r, sk->rho);
    return v * v;
  }
  const auto& h = std::get<HzzIndex>(index);
  return h_zz_hilbert_norm_sq(f, h.z, h.zeta);
}

AlgebraProbe algebra_constant_probe(int z, int zeta, const Grid& grid, const std::vector<FieldPairFactory>& samples) {
  auto measure = [&](const Grid& g) {
    double best = 0.0;
    for (const auto& make : samples) {
      auto [u, v] = make(g);
      const double nu = h_zz_norm(u, z, zeta);
      const double nv = h_zz_norm(v, z, zeta);
      if (nu == 0.0 || nv == 0.0) continue;
      best = std::max(best, h_zz_norm(pointwise_product(u, v), z, zeta) / (nu * nv));
    }
    return best;
  };
  AlgebraProbe p;
  p.hypothesis_met = static_cast<double>(zeta) > 0.5 * grid.dim();
  p.ratio = measure(grid);
  p.refined_ratio = measure(grid.refined());
  p.drift = p.ratio > 0.0 ? std::abs(p.refined_ratio - p.ratio) / p.ratio : 0.0;
  p.pass = p.hypothesis_met && std::isfinite(p.ratio) && p.drift < 0.05;
  return p;
}

}  // namespace schrocurve
