#include "hs/fft.hpp"

#include <cmath>

#include "hs/error.hpp"

namespace hs {

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::vector<cplx>& a, bool inverse) {
  const size_t n = a.size();
  if (!is_power_of_two(static_cast<long>(n)))
    fail(Err::NonPowerOfTwo, "fft length " + std::to_string(n));
  if (n == 1) return;

  // bit reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        cplx u = a[i + k];
        cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

void fft2_inplace(std::vector<cplx>& a, int rows, int cols, bool inverse) {
  if (static_cast<long>(a.size()) != static_cast<long>(rows) * cols)
    fail(Err::BadInput, "fft2 shape mismatch");
  std::vector<cplx> tmp;
  // rows
  for (int r = 0; r < rows; ++r) {
    tmp.assign(a.begin() + static_cast<long>(r) * cols,
               a.begin() + static_cast<long>(r + 1) * cols);
    fft_inplace(tmp, inverse);
    std::copy(tmp.begin(), tmp.end(), a.begin() + static_cast<long>(r) * cols);
  }
  // columns
  tmp.resize(rows);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) tmp[r] = a[static_cast<long>(r) * cols + c];
    fft_inplace(tmp, inverse);
    for (int r = 0; r < rows; ++r) a[static_cast<long>(r) * cols + c] = tmp[r];
  }
}

}  // namespace hs
