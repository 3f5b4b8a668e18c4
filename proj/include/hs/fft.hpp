#pragma once

#include <complex>
#include <vector>

namespace hs {

using cplx = std::complex<double>;

bool is_power_of_two(long n);

/// In-place radix-2 FFT on a power-of-two length vector.
/// Forward uses the e^{-2pi i jk/N} convention; inverse divides by N.
void fft_inplace(std::vector<cplx>& a, bool inverse);

/// Row-major 2-D transform (rows x cols, both powers of two).
void fft2_inplace(std::vector<cplx>& a, int rows, int cols, bool inverse);

}  // namespace hs
