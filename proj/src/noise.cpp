#include "schrocurve/noise.hpp"

#include "schrocurve/conventions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace schrocurve {

namespace {

constexpr double kPairTol = 1e-12;

bool same_point(const Point& a, const Point& b) {
  const double scale = 1.0 + std::sqrt(std::max(norm2(a), norm2(b)));
  return std::abs(a[0] - b[0]) <= kPairTol * scale && std::abs(a[1] - b[1]) <= kPairTol * scale;
}

bool is_origin(const Point& p) { return p[0] == 0.0 && p[1] == 0.0; }

Point negate(const Point& p) { return {-p[0], -p[1]}; }

/// Flat index of the node at -k, or size() for the unpaired Nyquist nodes.
std::size_t mirror_index(const Grid& grid, std::size_t flat) {
  const auto idx = grid.unflatten(flat);
  const std::size_t n = grid.n();
  std::array<std::size_t, 2> m{0, 0};
  for (int a = 0; a < grid.dim(); ++a) {
    if (idx[a] == n / 2) return grid.size();
    m[a] = (n - idx[a]) % n;
  }
  return grid.dim() == 1 ? grid.flatten(m[0]) : grid.flatten(m[0], m[1]);
}

/// Flat node index of xi on the grid, if xi is a non-Nyquist frequency node.
std::optional<std::size_t> node_of(const Grid& grid, const Point& xi) {
  const double dxi = grid.frequency_spacing();
  const long half = static_cast<long>(grid.n() / 2);
  std::array<std::size_t, 2> idx{0, 0};
  for (int a = 0; a < 2; ++a) {
    const double k = xi[a] / dxi;
    const long kr = std::lround(k);
    if (std::abs(k - static_cast<double>(kr)) > 1e-9) return std::nullopt;
    if (a >= grid.dim()) {
      if (kr != 0) return std::nullopt;
      continue;
    }
    if (kr <= -half || kr >= half) return std::nullopt;
    idx[a] = static_cast<std::size_t>(kr >= 0 ? kr : kr + static_cast<long>(grid.n()));
  }
  return grid.dim() == 1 ? grid.flatten(idx[0]) : grid.flatten(idx[0], idx[1]);
}

/// Node indices of every atom, or nullopt if any atom is off the grid.
std::optional<std::vector<std::size_t>> atom_nodes(const SpectralMeasure& M, const Grid& grid) {
  if (M.dim() != grid.dim()) return std::nullopt;
  std::vector<std::size_t> nodes;
  nodes.reserve(M.atoms().size());
  for (const auto& atom : M.atoms()) {
    auto node = node_of(grid, atom.xi);
    if (!node) return std::nullopt;
    nodes.push_back(*node);
  }
  return nodes;
}

struct Orbit {
  std::size_t rep;      // atom index of the representative
  std::size_t partner;  // rep itself for the origin
};

std::vector<Orbit> orbits_of(const SpectralMeasure& M) {
  std::vector<Orbit> orbits;
  const auto& atoms = M.atoms();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const std::size_t p = M.partner(k);
    if (p < k) continue;
    // Representative: first nonzero coordinate positive.
    const Point& xi = atoms[k].xi;
    const bool positive = xi[0] > 0.0 || (xi[0] == 0.0 && xi[1] >= 0.0);
    orbits.push_back(positive ? Orbit{k, p} : Orbit{p, k});
  }
  std::stable_sort(orbits.begin(), orbits.end(), [&](const Orbit& a, const Orbit& b) {
    const Point& xa = atoms[a.rep].xi;
    const Point& xb = atoms[b.rep].xi;
    const double na = norm2(xa), nb = norm2(xb);
    if (na != nb) return na < nb;
    if (xa[0] != xb[0]) return xa[0] > xb[0];
    return xa[1] > xb[1];
  });
  return orbits;
}

}  // namespace

SpectralMeasure::SpectralMeasure(int dim, std::vector<Atom> atoms, std::optional<Grid> grid,
                                 std::vector<double> density)
    : dim_(dim), atoms_(std::move(atoms)), density_grid_(std::move(grid)), density_(std::move(density)) {
  if (dim_ != 1 && dim_ != 2) throw invalid_measure("spectral measure dimension must be 1 or 2");
  partner_.assign(atoms_.size(), atoms_.size());
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const auto& a = atoms_[k];
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
      std::ostringstream msg;
      msg << "atom " << k << " has invalid weight " << a.weight << "; weights must be finite and nonnegative";
      throw invalid_measure(msg.str());
    }
    if (dim_ == 1 && a.xi[1] != 0.0) throw invalid_measure("1-d atom with a nonzero second coordinate");
  }
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    if (partner_[k] != atoms_.size()) continue;
    if (is_origin(atoms_[k].xi)) {
      partner_[k] = k;
      continue;
    }
    const Point target = negate(atoms_[k].xi);
    for (std::size_t q = k + 1; q < atoms_.size(); ++q) {
      if (partner_[q] != atoms_.size() || !same_point(atoms_[q].xi, target)) continue;
      const double wk = atoms_[k].weight, wq = atoms_[q].weight;
      if (std::abs(wk - wq) > kPairTol * std::max(wk, wq)) continue;
      partner_[k] = q;
      partner_[q] = k;
      break;
    }
    if (partner_[k] == atoms_.size()) {
      std::ostringstream msg;
      msg << "measure is not symmetric: atom at (" << atoms_[k].xi[0] << ", " << atoms_[k].xi[1]
          << ") with weight " << atoms_[k].weight << " has no mirror atom of equal weight";
      throw invalid_measure(msg.str());
    }
  }
}

SpectralMeasure SpectralMeasure::from_atoms(int dim, std::vector<Atom> atoms) {
  for (const auto& a : atoms)
    if (a.weight < 0.0) throw invalid_measure("negative atom weight " + std::to_string(a.weight));
  std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });
  return SpectralMeasure(dim, std::move(atoms), std::nullopt, {});
}

SpectralMeasure SpectralMeasure::from_density(const Grid& grid, std::vector<double> density) {
  if (density.size() != grid.size()) throw invalid_measure("density size does not match the grid");
  for (std::size_t k = 0; k < density.size(); ++k) {
    if (!(density[k] >= 0.0) || !std::isfinite(density[k]))
      throw invalid_measure("density must be finite and nonnegative (node " + std::to_string(k) + ")");
  }
  std::vector<Atom> atoms;
  const double cell = grid.frequency_cell_volume();
  for (std::size_t k = 0; k < density.size(); ++k) {
    const std::size_t m = mirror_index(grid, k);
    if (m == grid.size()) {
      density[k] = 0.0;
      continue;
    }
    if (std::abs(density[k] - density[m]) > 1e-12 * std::max(density[k], density[m]))
      throw invalid_measure("density is not even under xi -> -xi (node " + std::to_string(k) + ")");
  }
  for (std::size_t k = 0; k < density.size(); ++k) {
    const std::size_t m = mirror_index(grid, k);
    if (m == grid.size() || density[k] == 0.0) continue;
    // Pair weights must agree exactly; use the smaller-index node's value.
    const double w = density[std::min(k, m)] * cell;
    atoms.push_back({grid.frequency_point(k), w});
  }
  return SpectralMeasure(grid.dim(), std::move(atoms), grid, std::move(density));
}

SpectralMeasure SpectralMeasure::from_density_function(const Grid& grid,
                                                       const std::function<double(const Point&)>& density) {
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = density(grid.frequency_point(k));
  // Symmetrize exactly so round-off in the user function cannot break evenness.
  for (std::size_t k = 0; k < values.size(); ++k) {
    const std::size_t m = mirror_index(grid, k);
    if (m < k) values[k] = values[m];
  }
  return from_density(grid, std::move(values));
}

SpectralMeasure SpectralMeasure::gaussian_density(const Grid& grid, double mass, double scale) {
  if (!(scale > 0.0)) throw invalid_measure("gaussian density needs a positive scale");
  auto shape = from_density_function(grid, [scale](const Point& xi) { return std::exp(-norm2(xi) / (2 * scale * scale)); });
  const double m = shape.total_mass();
  return m > 0.0 ? shape.scaled(mass / m) : shape;
}

SpectralMeasure SpectralMeasure::uniform_density(const Grid& grid, double mass, double radius) {
  if (!(radius >= 0.0)) throw invalid_measure("uniform density needs a nonnegative radius");
  auto shape = from_density_function(grid, [radius](const Point& xi) { return norm2(xi) <= radius * radius ? 1.0 : 0.0; });
  const double m = shape.total_mass();
  if (m == 0.0 && mass > 0.0) throw invalid_measure("uniform density radius contains no frequency node");
  return m > 0.0 ? shape.scaled(mass / m) : shape;
}

double SpectralMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

double SpectralMeasure::moment(double p) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight * std::pow(norm2(a.xi), p);
  return s;
}

SpectralMeasure SpectralMeasure::scaled(double factor) const {
  if (!(factor >= 0.0)) throw invalid_measure("measure scale factor must be nonnegative");
  SpectralMeasure out = *this;
  for (auto& a : out.atoms_) a.weight *= factor;
  for (auto& v : out.density_) v *= factor;
  if (factor == 0.0) {
    out.atoms_.clear();
    out.partner_.clear();
  }
  return out;
}

double CorrelationMeasure::at_origin() const {
  const Grid& g = samples.grid();
  const std::size_t mid = g.n() / 2;  // x = 0 sits at index n/2 on each axis
  return samples[g.dim() == 1 ? g.flatten(mid) : g.flatten(mid, mid)].real();
}

CorrelationMeasure correlation_from_spectral(const SpectralMeasure& M, const Grid& grid) {
  if (M.dim() != grid.dim()) throw std::invalid_argument("measure and grid dimensions differ");
  if (auto nodes = atom_nodes(M, grid)) {
    Field spectrum(grid);
    const double cell = grid.frequency_cell_volume();
    for (std::size_t k = 0; k < nodes->size(); ++k) spectrum[(*nodes)[k]] += M.atoms()[k].weight / cell;
    Field gamma = inverse_transform(spectrum);
    for (std::size_t i = 0; i < gamma.size(); ++i) gamma[i] = gamma[i].real();
    return {gamma};
  }
  const double pre = conventions::inverse_prefactor(grid.dim());
  Field gamma = Field::from_function(grid, [&](const Point& x) {
    double s = 0.0;
    for (const auto& a : M.atoms()) s += a.weight * std::cos(dot(x, a.xi));
    return cplx{pre * s, 0.0};
  });
  return {gamma};
}

CameronMartinBasis::CameronMartinBasis(SpectralMeasure measure, Grid grid, std::vector<CameronMartinMode> modes)
    : measure_(std::move(measure)), grid_(grid), modes_(std::move(modes)) {}

double CameronMartinBasis::inner(const std::vector<cplx>& f, const std::vector<cplx>& g) const {
  const auto& atoms = measure_.atoms();
  double s = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) s += atoms[k].weight * (f[k] * std::conj(g[k])).real();
  return s;
}

std::vector<double> CameronMartinBasis::gram() const {
  const std::size_t J = size();
  std::vector<double> g(J * J);
  for (std::size_t i = 0; i < J; ++i)
    for (std::size_t j = 0; j < J; ++j) g[i * J + j] = inner(modes_[i].f, modes_[j].f);
  return g;
}

Field CameronMartinBasis::combine(const std::vector<double>& coefficients) const {
  if (coefficients.size() != size()) throw std::invalid_argument("coefficient count does not match the basis size");
  Field out(grid_);
  for (std::size_t j = 0; j < size(); ++j)
    if (coefficients[j] != 0.0) out.axpy(coefficients[j], modes_[j].e);
  return out;
}

std::size_t cm_dimension(const SpectralMeasure& M, BasisParity parity) {
  if (parity == BasisParity::hermitian) return M.atoms().size();
  return orbits_of(M).size();
}

std::size_t default_truncation(const SpectralMeasure& M, BasisParity parity) {
  return std::min<std::size_t>(64, cm_dimension(M, parity));
}

namespace {

Field image_of(const SpectralMeasure& M, const Grid& grid, const std::vector<cplx>& f,
               const std::optional<std::vector<std::size_t>>& nodes) {
  const auto& atoms = M.atoms();
  if (nodes) {
    // e(x) = sum_k c_k e^{-i x xi_k} = sum_m S_m e^{i x xi_m} with S at the mirrored node.
    Field spectrum(grid);
    const double cell = grid.frequency_cell_volume();
    for (std::size_t k = 0; k < atoms.size(); ++k)
      spectrum[(*nodes)[M.partner(k)]] += f[k] * atoms[k].weight * conventions::two_pi_pow(grid.dim()) / cell;
    Field e = inverse_transform(spectrum);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = e[i].real();
    return e;
  }
  return Field::from_function(grid, [&](const Point& x) {
    cplx s = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) s += f[k] * atoms[k].weight * std::polar(1.0, -dot(x, atoms[k].xi));
    return cplx{s.real(), 0.0};
  });
}

}  // namespace

CameronMartinBasis build_cm_basis(const SpectralMeasure& M, const Grid& grid, std::optional<std::size_t> J,
                                  BasisParity parity) {
  if (M.dim() != grid.dim()) throw std::invalid_argument("measure and grid dimensions differ");
  const std::size_t dim = cm_dimension(M, parity);
  const std::size_t want = J.value_or(default_truncation(M, parity));
  if (want > dim) {
    std::ostringstream msg;
    msg << "requested J=" << want << " exceeds the dimension " << dim
        << " of the discretized Cameron-Martin space; the achievable maximum is " << dim;
    throw std::invalid_argument(msg.str());
  }

  const std::size_t atoms = M.atoms().size();
  auto inner = [&](const std::vector<cplx>& f, const std::vector<cplx>& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < atoms; ++k) s += M.atoms()[k].weight * (f[k] * std::conj(g[k])).real();
    return s;
  };

  std::vector<std::vector<cplx>> fs;
  auto push_seed = [&](std::vector<cplx> seed) {
    // Modified Gram-Schmidt, twice for stability.
    const double before = std::sqrt(inner(seed, seed));
    if (before == 0.0) return;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : fs) {
        const double c = inner(seed, q);
        for (std::size_t k = 0; k < atoms; ++k) seed[k] -= c * q[k];
      }
    const double nrm = std::sqrt(inner(seed, seed));
    if (nrm < 1e-10 * before) return;
    for (auto& v : seed) v /= nrm;
    fs.push_back(std::move(seed));
  };

  for (const auto& orbit : orbits_of(M)) {
    if (fs.size() >= want) break;
    std::vector<cplx> even(atoms, 0.0);
    even[orbit.rep] = 1.0;
    even[orbit.partner] = 1.0;
    push_seed(std::move(even));
    if (parity == BasisParity::even_only || orbit.rep == orbit.partner || fs.size() >= want) continue;
    std::vector<cplx> odd(atoms, 0.0);
    odd[orbit.rep] = cplx{0.0, 1.0};
    odd[orbit.partner] = cplx{0.0, -1.0};
    push_seed(std::move(odd));
  }

  const auto nodes = atom_nodes(M, grid);
  std::vector<CameronMartinMode> modes;
  modes.reserve(fs.size());
  for (auto& f : fs) {
    Field e = image_of(M, grid, f, nodes);
    modes.push_back({std::move(f), std::move(e)});
  }
  return CameronMartinBasis(M, grid, std::move(modes));
}

std::vector<cplx> transform_at_atoms(const SpectralMeasure& M, const Field& phi) {
  const Grid& grid = phi.grid();
  std::vector<cplx> out(M.atoms().size());
  if (auto nodes = atom_nodes(M, grid)) {
    const Field spectrum = forward_transform(phi);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = spectrum[(*nodes)[k]];
    return out;
  }
  const double cell = grid.cell_volume();
  for (std::size_t k = 0; k < out.size(); ++k) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += phi[i] * std::polar(1.0, -dot(grid.point(i), M.atoms()[k].xi));
    out[k] = cell * s;
  }
  return out;
}

std::vector<double> bessel_partial_sums(const CameronMartinBasis& basis, const std::vector<cplx>& g) {
  std::vector<double> out;
  out.reserve(basis.size());
  const auto& atoms = basis.measure().atoms();
  double acc = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    cplx c = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) c += atoms[k].weight * g[k] * std::conj(basis.mode(j).f[k]);
    acc += std::norm(c);
    out.push_back(acc);
  }
  return out;
}

namespace {

/// int e_j phi dx for every mode.
std::vector<cplx> project(const CameronMartinBasis& basis, const Field& phi) {
  const double cell = phi.grid().cell_volume();
  std::vector<cplx> c(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    cplx s = 0.0;
    const Field& e = basis.e(j);
    for (std::size_t i = 0; i < phi.size(); ++i) s += e[i] * phi[i];
    c[j] = cell * s;
  }
  return c;
}

double l1_norm(const Field& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i]);
  return s * f.grid().cell_volume();
}

}  // namespace

CovarianceReport covariance_check(const CameronMartinBasis& basis, const Field& phi, const Field& psi, double dt,
                                  std::size_t samples, const CounterRng& rng, std::uint32_t step) {
  if (samples < 2) throw std::invalid_argument("covariance_check needs at least two samples");
  if (!(phi.grid() == basis.grid()) || !(psi.grid() == basis.grid()))
    throw std::invalid_argument("test fields must live on the basis grid");
  CovarianceReport rep;
  const auto& atoms = basis.measure().atoms();
  const auto fphi = transform_at_atoms(basis.measure(), phi);
  const auto fpsi = transform_at_atoms(basis.measure(), psi);
  for (std::size_t k = 0; k < atoms.size(); ++k) rep.analytic += dt * atoms[k].weight * fphi[k] * std::conj(fpsi[k]);

  const auto cphi = project(basis, phi);
  const auto cpsi = project(basis, psi);
  for (std::size_t j = 0; j < basis.size(); ++j) rep.truncated += dt * cphi[j] * std::conj(cpsi[j]);

  const double sdt = std::sqrt(dt);
  std::vector<cplx> products(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    cplx a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double dw = sdt * rng.normal(s, static_cast<std::uint32_t>(j), step);
      a += dw * cphi[j];
      b += dw * cpsi[j];
    }
    products[s] = a * std::conj(b);
  }
  cplx mean = 0.0;
  for (const auto& p : products) mean += p;
  mean /= static_cast<double>(samples);
  double var = 0.0;
  for (const auto& p : products) var += std::norm(p - mean);
  var /= static_cast<double>(samples - 1);
  rep.empirical = mean;
  rep.std_error = std::sqrt(var / static_cast<double>(samples));

  // |F phi| <= ||phi||_1, so this bounds |analytic| for any placement of the atoms.
  const double scale = dt * basis.measure().total_mass() * l1_norm(phi) * l1_norm(psi);
  rep.absolute_mode = std::abs(rep.analytic) <= 1e-12 * scale;
  if (rep.absolute_mode) {
    rep.rel_err = std::abs(rep.empirical - rep.analytic);
    rep.pass = std::abs(rep.empirical) <= 3.0 * rep.std_error + 1e-12 * scale;
  } else {
    rep.rel_err = std::abs(rep.empirical - rep.analytic) / std::abs(rep.analytic);
    rep.pass = rep.rel_err < 0.05;
  }
  return rep;
}

std::vector<PointCovariance> point_covariance(const CameronMartinBasis& basis,
                                              const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                              double dt, std::size_t samples, const CounterRng& rng) {
  const Grid& grid = basis.grid();
  const auto& atoms = basis.measure().atoms();
  std::vector<PointCovariance> out;
  const double sdt = std::sqrt(dt);
  for (const auto& [xi, yi] : pairs) {
    PointCovariance pc{xi, yi, 0.0, 0.0, 0.0};
    Point r{grid.point(xi)[0] - grid.point(yi)[0], grid.point(xi)[1] - grid.point(yi)[1]};
    for (const auto& a : atoms) pc.analytic += dt * a.weight * std::cos(dot(r, a.xi));
    for (std::size_t j = 0; j < basis.size(); ++j) pc.truncated += dt * basis.e(j)[xi].real() * basis.e(j)[yi].real();
    double acc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      double a = 0.0, b = 0.0;
      for (std::size_t j = 0; j < basis.size(); ++j) {
        const double dw = sdt * rng.normal(s, static_cast<std::uint32_t>(j), 0);
        a += dw * basis.e(j)[xi].real();
        b += dw * basis.e(j)[yi].real();
      }
      acc += a * b;
    }
    pc.empirical = acc / static_cast<double>(samples);
    out.push_back(pc);
  }
  return out;
}

}  // namespace schrocurve
