#pragma once

#include <functional>
#include <vector>

#include "hs/fft.hpp"

namespace hs {

/// Uniform periodized grid on [-R,R)^dim with N (power of two) nodes per axis.
/// Node coordinates are x_k = -R + k*h componentwise, h = 2R/N.
struct BoundaryGrid {
  int dim = 1;  // 1 or 2
  double R = 0.0;
  int N = 0;
  double h = 0.0;

  long nodes() const {
    long m = N;
    for (int d = 1; d < dim; ++d) m *= N;
    return m;
  }
  double coord(int k) const { return -R + k * h; }

  /// Multi-index of a flat node id (row-major, axis 0 outermost).
  void unflatten(long node, int* idx) const {
    if (dim == 1) {
      idx[0] = static_cast<int>(node);
    } else {
      idx[0] = static_cast<int>(node / N);
      idx[1] = static_cast<int>(node % N);
    }
  }
  long flatten(const int* idx) const {
    return dim == 1 ? idx[0] : static_cast<long>(idx[0]) * N + idx[1];
  }
  void node_coords(long node, double* x) const {
    int idx[2];
    unflatten(node, idx);
    for (int d = 0; d < dim; ++d) x[d] = coord(idx[d]);
  }
  double cell_measure() const {
    double m = h;
    for (int d = 1; d < dim; ++d) m *= h;
    return m;
  }
  bool operator==(const BoundaryGrid& o) const {
    return dim == o.dim && R == o.R && N == o.N;
  }
};

BoundaryGrid make_grid(int dim, double R, int N);

/// C^M-valued samples on a BoundaryGrid, stored node-major.
struct BoundaryField {
  BoundaryGrid grid;
  int channels = 1;
  std::vector<cplx> values;  // [node*channels + c]

  cplx& at(long node, int c) { return values[node * channels + c]; }
  const cplx& at(long node, int c) const { return values[node * channels + c]; }
  /// Euclidean modulus over channels at a node.
  double modulus(long node) const;
};

BoundaryField make_field(const BoundaryGrid& grid, int channels);

using SampleFn = std::function<void(const double* x, cplx* out)>;

/// Pointwise sampling; rejects non-finite values.
BoundaryField sample(const BoundaryGrid& grid, int M, const SampleFn& fn);
BoundaryField sample_scalar(const BoundaryGrid& grid,
                            const std::function<double(const double*)>& fn);

/// Left-endpoint Riemann sum h^dim * sum of values, per channel.
std::vector<cplx> integrate(const BoundaryField& f);

/// Matrix-valued kernel samples on a grid; t > 0 is the slice height,
/// is_profile marks the canonical t = 1 profile.
struct KernelMatrix {
  BoundaryGrid grid;
  int M = 1;
  double t = 1.0;
  bool is_profile = true;
  std::vector<cplx> values;  // [node*M*M + a*M + b]

  cplx& at(long node, int a, int b) { return values[(node * M + a) * M + b]; }
  const cplx& at(long node, int a, int b) const { return values[(node * M + a) * M + b]; }
};

KernelMatrix make_kernel(const BoundaryGrid& grid, int M, double t);

using KernelFn = std::function<void(const double* x, cplx* out)>;  // writes M*M row-major

/// Samples an analytic kernel; images > 0 wraps onto the torus by summing
/// lattice shifts x + 2R*l, |l| <= images, per axis.
KernelMatrix sample_kernel(const BoundaryGrid& grid, int M, double t, const KernelFn& fn,
                           int images);

/// C^M-valued samples on t-slices of the half-space.
struct HalfSpaceField {
  BoundaryGrid grid;
  std::vector<double> heights;  // strictly increasing, > 0
  int channels = 1;
  std::vector<cplx> values;  // [slice*nodes*channels + node*channels + c]

  cplx& at(int slice, long node, int c) {
    return values[(static_cast<long>(slice) * grid.nodes() + node) * channels + c];
  }
  const cplx& at(int slice, long node, int c) const {
    return values[(static_cast<long>(slice) * grid.nodes() + node) * channels + c];
  }
  double modulus(int slice, long node) const;
};

HalfSpaceField make_halfspace_field(const BoundaryGrid& grid,
                                    const std::vector<double>& heights, int channels);

/// Circular convolution of a matrix kernel with a vector field, scaled by h^dim.
BoundaryField fft_convolve(const KernelMatrix& kernel, const BoundaryField& f);

/// O(nodes^2) truncated (non-periodized) convolution; oracle for fft_convolve.
BoundaryField direct_convolve(const KernelMatrix& kernel, const BoundaryField& f);

/// Kernel-kernel circular convolution (matrix product in the channel indices).
KernelMatrix convolve_kernels(const KernelMatrix& a, const KernelMatrix& b);

}  // namespace hs
