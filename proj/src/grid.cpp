#include "schrocurve/grid.hpp"

#include "schrocurve/conventions.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace schrocurve {

double bracket(const Point& p) { return std::sqrt(1.0 + norm2(p)); }

Grid::Grid(int dim, std::size_t n, double half_width) : dim_(dim), n_(n), half_width_(half_width) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (n < 8 || (n & (n - 1)) != 0)
    throw std::invalid_argument("grid size must be a power of two >= 8, got " + std::to_string(n));
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("grid half width must be positive");
}

double Grid::frequency_spacing() const { return std::numbers::pi / half_width_; }

std::size_t Grid::size() const { return dim_ == 1 ? n_ : n_ * n_; }

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

double Grid::frequency_cell_volume() const { return std::pow(frequency_spacing(), dim_); }

double Grid::coordinate(std::size_t i) const {
  return -half_width_ + static_cast<double>(i) * spacing();
}

long Grid::wavenumber(std::size_t i) const {
  const long k = static_cast<long>(i);
  return i < n_ / 2 ? k : k - static_cast<long>(n_);
}

double Grid::frequency(std::size_t i) const {
  return static_cast<double>(wavenumber(i)) * frequency_spacing();
}

std::array<std::size_t, 2> Grid::unflatten(std::size_t flat) const {
  if (dim_ == 1) return {flat, 0};
  return {flat / n_, flat % n_};
}

std::size_t Grid::flatten(std::size_t i0, std::size_t i1) const {
  return dim_ == 1 ? i0 : i0 * n_ + i1;
}

Point Grid::point(std::size_t flat) const {
  auto idx = unflatten(flat);
  if (dim_ == 1) return {coordinate(idx[0]), 0.0};
  return {coordinate(idx[0]), coordinate(idx[1])};
}

Point Grid::frequency_point(std::size_t flat) const {
  auto idx = unflatten(flat);
  if (dim_ == 1) return {frequency(idx[0]), 0.0};
  return {frequency(idx[0]), frequency(idx[1])};
}

Field::Field(Grid grid) : grid_(grid), values_(grid.size(), cplx{0.0, 0.0}) {}

Field::Field(Grid grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("field value count does not match grid size");
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

namespace {
void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("field grids differ");
}
}  // namespace

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(cplx scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

Field& Field::axpy(cplx scale, const Field& other) {
  require_same_grid(*this, other);
  // spelled out: std::complex operator* goes through the slow inf/nan-aware path
  const double a = scale.real(), b = scale.imag();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double x = other.values_[i].real(), y = other.values_[i].imag();
    values_[i] += cplx{a * x - b * y, a * y + b * x};
  }
  return *this;
}

Field& Field::multiply(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double a = values_[i].real(), b = values_[i].imag();
    const double x = other.values_[i].real(), y = other.values_[i].imag();
    values_[i] = cplx{a * x - b * y, a * y + b * x};
  }
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }
Field pointwise_product(Field a, const Field& b) { return a.multiply(b); }

double l2_norm(const Field& f) {
  double sum = 0.0;
  for (const auto& v : f.values()) sum += std::norm(v);
  return std::sqrt(sum * f.grid().cell_volume());
}

double frequency_l2_norm(const Field& spectrum) {
  double sum = 0.0;
  for (const auto& v : spectrum.values()) sum += std::norm(v);
  return std::sqrt(sum * spectrum.grid().frequency_cell_volume());
}

namespace {

// e^{i L xi_k} = (-1)^k per axis; the sign pattern is its own inverse.
void apply_checkerboard(Field& f) {
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto idx = g.unflatten(i);
    long parity = g.wavenumber(idx[0]) + (g.dim() == 2 ? g.wavenumber(idx[1]) : 0);
    if (parity & 1) f[i] = -f[i];
  }
}

}  // namespace

Field forward_transform(const Field& f) {
  const Grid& g = f.grid();
  Field out = f;
  detail::fft_inplace(out.data(), g.dim(), g.n(), -1);
  apply_checkerboard(out);
  out *= g.cell_volume();
  return out;
}

Field inverse_transform(const Field& spectrum) {
  const Grid& g = spectrum.grid();
  Field out = spectrum;
  apply_checkerboard(out);
  detail::fft_inplace(out.data(), g.dim(), g.n(), +1);
  out *= conventions::inverse_prefactor(g.dim()) * g.frequency_cell_volume();
  return out;
}

double boundary_mass(const Field& f) {
  const Grid& g = f.grid();
  const std::size_t band = std::max<std::size_t>(1, g.n() / 16);
  auto in_band = [&](std::size_t i) { return i < band || i >= g.n() - band; };
  double edge = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double w = std::norm(f[i]);
    total += w;
    auto idx = g.unflatten(i);
    if (in_band(idx[0]) || (g.dim() == 2 && in_band(idx[1]))) edge += w;
  }
  if (total == 0.0) return 0.0;
  return std::sqrt(edge / total);
}

}  // namespace schrocurve
