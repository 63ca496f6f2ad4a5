#pragma once

#include <complex>
#include <span>
#include <vector>

#include "adeb/field.hpp"

namespace adeb {

using Complex = std::complex<double>;

// Unnormalized 3-D DFT coefficients in row-major order of (kx, ky, kz).
struct ComplexGrid {
  Dims3 dims;
  std::vector<Complex> data;
};

bool is_power_of_two(std::size_t n);

// Forward transform, X(k) = sum_n x(n) exp(-2 pi i n.k / N). Requires
// power-of-two dims.
ComplexGrid fft3(const Field3D& field);
ComplexGrid fft3(std::span<const double> values, const Dims3& dims);

// Any dims; used by synthesis. Inverse is unnormalized as well.
ComplexGrid dft3_forward(std::span<const double> values, const Dims3& dims);
void dft3_inverse_inplace(ComplexGrid& grid);

// Signed frequency of index i on an axis of length n, in [-n/2, n/2).
inline long signed_frequency(std::size_t i, std::size_t n) {
  return i < (n + 1) / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

}  // namespace adeb
