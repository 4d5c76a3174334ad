#pragma once

#include <complex>
#include <cstddef>

namespace schrocurve::detail {

/// Unnormalized in-place DFT of a row-major n^dim array.
/// sign = -1: sum_j x_j e^{-2 pi i jk/n};  sign = +1: the conjugate kernel.
/// Thread-safe; plans are shared and created once per (dim, n, sign).
void fft_inplace(std::complex<double>* data, int dim, std::size_t n, int sign);

}  // namespace schrocurve::detail
