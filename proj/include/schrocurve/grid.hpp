#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace schrocurve {

using cplx = std::complex<double>;

/// Point in R^d for d <= 2; unused coordinates are zero.
using Point = std::array<double, 2>;

inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm2(const Point& a) { return dot(a, a); }

/// Japanese bracket <p> = (1 + |p|^2)^{1/2}.
double bracket(const Point& p);

/**
 * Uniform periodic grid on [-L, L)^d.
 *
 * Spatial node i sits at -L + i*h with h = 2L/n. Frequency samples are stored
 * in FFT order: index i < n/2 holds k = i, otherwise k = i - n, and the node
 * is xi_k = pi*k/L.
 */
class Grid {
public:
  Grid(int dim, std::size_t n, double half_width);

  int dim() const { return dim_; }
  std::size_t n() const { return n_; }
  double half_width() const { return half_width_; }
  double spacing() const { return 2.0 * half_width_ / static_cast<double>(n_); }
  double frequency_spacing() const;
  /// Number of samples, n^d.
  std::size_t size() const;
  /// h^d, the spatial quadrature weight.
  double cell_volume() const;
  /// (pi/L)^d, the frequency quadrature weight.
  double frequency_cell_volume() const;

  double coordinate(std::size_t i) const;
  /// Signed wavenumber k of axis index i (FFT order).
  long wavenumber(std::size_t i) const;
  double frequency(std::size_t i) const;

  Point point(std::size_t flat) const;
  Point frequency_point(std::size_t flat) const;
  /// Row-major multi-index of a flat index; axis 0 is the slow axis.
  std::array<std::size_t, 2> unflatten(std::size_t flat) const;
  std::size_t flatten(std::size_t i0, std::size_t i1 = 0) const;

  /// The same domain at twice the resolution.
  Grid refined() const { return Grid(dim_, 2 * n_, half_width_); }

  bool operator==(const Grid&) const = default;

private:
  int dim_;
  std::size_t n_;
  double half_width_;
};

/// Complex samples on a Grid. Value type; arithmetic requires matching grids.
class Field {
public:
  explicit Field(Grid grid);
  Field(Grid grid, std::vector<cplx> values);

  template <class Fn>
  static Field from_function(const Grid& grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f.values_[i] = fn(grid.point(i));
    return f;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  cplx* data() { return values_.data(); }
  const cplx* data() const { return values_.data(); }

  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx scale);
  /// this += scale * other
  Field& axpy(cplx scale, const Field& other);
  /// Pointwise product.
  Field& multiply(const Field& other);

  bool operator==(const Field&) const = default;

private:
  Grid grid_;
  std::vector<cplx> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);
Field pointwise_product(Field a, const Field& b);

/// Discrete L^2 norm, (h^d sum |f|^2)^{1/2}.
double l2_norm(const Field& f);
/// Frequency-side L^2 norm, (Dxi^d sum |F|^2)^{1/2}.
double frequency_l2_norm(const Field& spectrum);

/**
 * Trapezoidal approximation of F f(xi) = int e^{-i x xi} f(x) dx at the grid
 * frequencies. No 2*pi prefactor on the forward side.
 */
Field forward_transform(const Field& f);
/// Inverse of forward_transform; carries the (2 pi)^{-d} factor.
Field inverse_transform(const Field& spectrum);

/// Relative L^2 mass of f in the outer band (last n/16 nodes per axis side).
double boundary_mass(const Field& f);

/// Threshold above which boundary mass invalidates norm claims.
inline constexpr double kBoundaryMassThreshold = 1e-8;

}  // namespace schrocurve
