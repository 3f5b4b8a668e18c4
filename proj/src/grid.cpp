#include "hs/grid.hpp"

#include <cmath>

#include "hs/error.hpp"

namespace hs {

BoundaryGrid make_grid(int dim, double R, int N) {
  if (dim != 1 && dim != 2) fail(Err::BadInput, "grid dim must be 1 or 2");
  if (!(R > 0.0)) fail(Err::BadInput, "grid half-width must be positive");
  if (N < 8 || !is_power_of_two(N))
    fail(Err::NonPowerOfTwo, "N must be a power of two >= 8, got " + std::to_string(N));
  BoundaryGrid g;
  g.dim = dim;
  g.R = R;
  g.N = N;
  g.h = 2.0 * R / N;
  return g;
}

double BoundaryField::modulus(long node) const {
  double s = 0.0;
  for (int c = 0; c < channels; ++c) s += std::norm(at(node, c));
  return std::sqrt(s);
}

double HalfSpaceField::modulus(int slice, long node) const {
  double s = 0.0;
  for (int c = 0; c < channels; ++c) s += std::norm(at(slice, node, c));
  return std::sqrt(s);
}

BoundaryField make_field(const BoundaryGrid& grid, int channels) {
  BoundaryField f;
  f.grid = grid;
  f.channels = channels;
  f.values.assign(grid.nodes() * channels, cplx(0.0, 0.0));
  return f;
}

BoundaryField sample(const BoundaryGrid& grid, int M, const SampleFn& fn) {
  BoundaryField f = make_field(grid, M);
  const long n = grid.nodes();
  double x[2];
  std::vector<cplx> out(M);
  for (long k = 0; k < n; ++k) {
    grid.node_coords(k, x);
    fn(x, out.data());
    for (int c = 0; c < M; ++c) {
      if (!std::isfinite(out[c].real()) || !std::isfinite(out[c].imag()))
        fail(Err::NonFiniteSample,
             "non-finite sample at node " + std::to_string(k) + " channel " + std::to_string(c));
      f.at(k, c) = out[c];
    }
  }
  return f;
}

BoundaryField sample_scalar(const BoundaryGrid& grid,
                            const std::function<double(const double*)>& fn) {
  return sample(grid, 1, [&fn](const double* x, cplx* out) { out[0] = cplx(fn(x), 0.0); });
}

std::vector<cplx> integrate(const BoundaryField& f) {
  std::vector<cplx> acc(f.channels, cplx(0.0, 0.0));
  const long n = f.grid.nodes();
  for (long k = 0; k < n; ++k)
    for (int c = 0; c < f.channels; ++c) acc[c] += f.at(k, c);
  const double m = f.grid.cell_measure();
  for (auto& v : acc) v *= m;
  return acc;
}

KernelMatrix make_kernel(const BoundaryGrid& grid, int M, double t) {
  KernelMatrix k;
  k.grid = grid;
  k.M = M;
  k.t = t;
  k.is_profile = (t == 1.0);
  k.values.assign(grid.nodes() * M * M, cplx(0.0, 0.0));
  return k;
}

KernelMatrix sample_kernel(const BoundaryGrid& grid, int M, double t, const KernelFn& fn,
                           int images) {
  KernelMatrix k = make_kernel(grid, M, t);
  const long n = grid.nodes();
  const int mm = M * M;
  std::vector<cplx> out(mm), acc(mm);
  double x[2], xs[2];
  for (long node = 0; node < n; ++node) {
    grid.node_coords(node, x);
    std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
    if (grid.dim == 1) {
      for (int l = -images; l <= images; ++l) {
        xs[0] = x[0] + 2.0 * grid.R * l;
        fn(xs, out.data());
        for (int c = 0; c < mm; ++c) acc[c] += out[c];
      }
    } else {
      for (int l0 = -images; l0 <= images; ++l0)
        for (int l1 = -images; l1 <= images; ++l1) {
          xs[0] = x[0] + 2.0 * grid.R * l0;
          xs[1] = x[1] + 2.0 * grid.R * l1;
          fn(xs, out.data());
          for (int c = 0; c < mm; ++c) acc[c] += out[c];
        }
    }
    for (int c = 0; c < mm; ++c) {
      if (!std::isfinite(acc[c].real()) || !std::isfinite(acc[c].imag()))
        fail(Err::NonFiniteSample, "non-finite kernel sample at node " + std::to_string(node));
      k.values[node * mm + c] = acc[c];
    }
  }
  return k;
}

HalfSpaceField make_halfspace_field(const BoundaryGrid& grid,
                                    const std::vector<double>& heights, int channels) {
  if (heights.empty()) fail(Err::EmptyHeights, "half-space field needs at least one height");
  for (size_t i = 0; i < heights.size(); ++i) {
    if (!(heights[i] > 0.0)) fail(Err::BadInput, "heights must be positive");
    if (i > 0 && !(heights[i] > heights[i - 1]))
      fail(Err::BadInput, "heights must be strictly increasing");
  }
  HalfSpaceField u;
  u.grid = grid;
  u.heights = heights;
  u.channels = channels;
  u.values.assign(static_cast<long>(heights.size()) * grid.nodes() * channels, cplx(0.0, 0.0));
  return u;
}

namespace {

// Displacement-indexed kernel: node index of x_j maps to displacement (j - N/2)*h,
// so the circular-convolution kernel array is the half-period rotation of the samples.
void shift_kernel_channel(const KernelMatrix& k, int a, int b, std::vector<cplx>& out) {
  const BoundaryGrid& g = k.grid;
  out.resize(g.nodes());
  if (g.dim == 1) {
    for (int d = 0; d < g.N; ++d) out[d] = k.at((d + g.N / 2) % g.N, a, b);
  } else {
    for (int d0 = 0; d0 < g.N; ++d0)
      for (int d1 = 0; d1 < g.N; ++d1) {
        long src = static_cast<long>((d0 + g.N / 2) % g.N) * g.N + (d1 + g.N / 2) % g.N;
        out[static_cast<long>(d0) * g.N + d1] = k.at(src, a, b);
      }
  }
}

void forward(const BoundaryGrid& g, std::vector<cplx>& a) {
  if (g.dim == 1)
    fft_inplace(a, false);
  else
    fft2_inplace(a, g.N, g.N, false);
}

void backward(const BoundaryGrid& g, std::vector<cplx>& a) {
  if (g.dim == 1)
    fft_inplace(a, true);
  else
    fft2_inplace(a, g.N, g.N, true);
}

}  // namespace

BoundaryField fft_convolve(const KernelMatrix& kernel, const BoundaryField& f) {
  if (!(kernel.grid == f.grid)) fail(Err::GridMismatch, "kernel and field grids differ");
  if (kernel.M != f.channels) fail(Err::GridMismatch, "kernel channels != field channels");
  const BoundaryGrid& g = f.grid;
  const long n = g.nodes();
  const int M = f.channels;

  std::vector<std::vector<cplx>> fhat(M);
  for (int c = 0; c < M; ++c) {
    fhat[c].resize(n);
    for (long k = 0; k < n; ++k) fhat[c][k] = f.at(k, c);
    forward(g, fhat[c]);
  }

  const double scale = g.cell_measure();
  BoundaryField out = make_field(g, M);
  std::vector<cplx> khat, acc(n);
  for (int a = 0; a < M; ++a) {
    std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
    for (int b = 0; b < M; ++b) {
      shift_kernel_channel(kernel, a, b, khat);
      forward(g, khat);
      for (long k = 0; k < n; ++k) acc[k] += khat[k] * fhat[b][k];
    }
    backward(g, acc);
    for (long k = 0; k < n; ++k) out.at(k, a) = acc[k] * scale;
  }
  return out;
}

BoundaryField direct_convolve(const KernelMatrix& kernel, const BoundaryField& f) {
  if (!(kernel.grid == f.grid)) fail(Err::GridMismatch, "kernel and field grids differ");
  if (kernel.M != f.channels) fail(Err::GridMismatch, "kernel channels != field channels");
  const BoundaryGrid& g = f.grid;
  const int M = f.channels;
  const int N = g.N;
  const double scale = g.cell_measure();
  BoundaryField out = make_field(g, M);

  if (g.dim == 1) {
    for (int k = 0; k < N; ++k)
      for (int m = 0; m < N; ++m) {
        int d = k - m + N / 2;
        if (d < 0 || d >= N) continue;
        for (int a = 0; a < M; ++a) {
          cplx s(0.0, 0.0);
          for (int b = 0; b < M; ++b) s += kernel.at(d, a, b) * f.at(m, b);
          out.at(k, a) += s;
        }
      }
  } else {
    for (int k0 = 0; k0 < N; ++k0)
      for (int k1 = 0; k1 < N; ++k1) {
        long knode = static_cast<long>(k0) * N + k1;
        for (int m0 = 0; m0 < N; ++m0) {
          int d0 = k0 - m0 + N / 2;
          if (d0 < 0 || d0 >= N) continue;
          for (int m1 = 0; m1 < N; ++m1) {
            int d1 = k1 - m1 + N / 2;
            if (d1 < 0 || d1 >= N) continue;
            long dnode = static_cast<long>(d0) * N + d1;
            long mnode = static_cast<long>(m0) * N + m1;
            for (int a = 0; a < M; ++a) {
              cplx s(0.0, 0.0);
              for (int b = 0; b < M; ++b) s += kernel.at(dnode, a, b) * f.at(mnode, b);
              out.at(knode, a) += s;
            }
          }
        }
      }
  }
  for (auto& v : out.values) v *= scale;
  return out;
}

KernelMatrix convolve_kernels(const KernelMatrix& a, const KernelMatrix& b) {
  if (!(a.grid == b.grid)) fail(Err::GridMismatch, "kernel grids differ");
  if (a.M != b.M) fail(Err::GridMismatch, "kernel sizes differ");
  const BoundaryGrid& g = a.grid;
  const long n = g.nodes();
  const int M = a.M;

  // DFT of every channel of both kernels (a shifted, b plain).
  std::vector<std::vector<cplx>> ah(M * M), bh(M * M);
  std::vector<cplx> tmp;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      shift_kernel_channel(a, i, j, tmp);
      forward(g, tmp);
      ah[i * M + j] = tmp;
      tmp.resize(n);
      for (long k = 0; k < n; ++k) tmp[k] = b.at(k, i, j);
      forward(g, tmp);
      bh[i * M + j] = tmp;
    }

  KernelMatrix out = make_kernel(g, M, a.t + b.t);
  out.is_profile = false;
  const double scale = g.cell_measure();
  std::vector<cplx> acc(n);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
      for (int c = 0; c < M; ++c)
        for (long k = 0; k < n; ++k) acc[k] += ah[i * M + c][k] * bh[c * M + j][k];
      backward(g, acc);
      for (long k = 0; k < n; ++k) out.at(k, i, j) = acc[k] * scale;
    }
  return out;
}

}  // namespace hs
