#include "hs/kernels.hpp"

#include <cmath>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "hs/error.hpp"

namespace hs {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

double omega_sphere(int n) {  // area of S^{n-1}
  return n == 2 ? 2.0 * M_PI : 4.0 * M_PI;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

MatrixXcd symbol_matrix(const EllipticSystem& sys, const double* xi) {
  auto flat = symbol(sys, xi);
  MatrixXcd m(sys.M, sys.M);
  for (int a = 0; a < sys.M; ++a)
    for (int b = 0; b < sys.M; ++b) m(a, b) = flat[static_cast<size_t>(a) * sys.M + b];
  return m;
}

MatrixXcd symbol_inverse(const EllipticSystem& sys, const double* xi) {
  MatrixXcd m = symbol_matrix(sys, xi);
  double scale = std::max(1.0, m.norm());
  cplx det = m.determinant();
  if (std::abs(det) < 1e-12 * std::pow(scale, sys.M))
    fail(Err::SingularSymbol, "symbol nearly singular at a quadrature node");
  return m.inverse();
}

std::vector<cplx> to_flat(const MatrixXcd& m) {
  std::vector<cplx> out(static_cast<size_t>(m.rows()) * m.cols());
  for (int a = 0; a < m.rows(); ++a)
    for (int b = 0; b < m.cols(); ++b) out[static_cast<size_t>(a) * m.cols() + b] = m(a, b);
  return out;
}

MatrixXcd from_flat(const std::vector<cplx>& v, int M) {
  MatrixXcd m(M, M);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) m(a, b) = v[static_cast<size_t>(a) * M + b];
  return m;
}

// Rotation taking e_z (n=3) or e_x (n=2) to the unit vector v.
void aligned_frame(int n, const double* v, double R[3][3]) {
  if (n == 2) {
    R[0][0] = v[0];
    R[0][1] = -v[1];
    R[1][0] = v[1];
    R[1][1] = v[0];
    return;
  }
  double c = v[2];
  if (c > 1.0 - 1e-14) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) R[i][j] = (i == j) ? 1.0 : 0.0;
    return;
  }
  if (c < -1.0 + 1e-14) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) R[i][j] = 0.0;
    R[0][0] = 1.0;
    R[1][1] = -1.0;
    R[2][2] = -1.0;
    return;
  }
  double ax = -v[1], ay = v[0];
  double s2 = ax * ax + ay * ay;
  double k = (1.0 - c) / s2;
  R[0][0] = c + k * ax * ax;
  R[0][1] = k * ax * ay;
  R[0][2] = ay;
  R[1][0] = k * ax * ay;
  R[1][1] = c + k * ay * ay;
  R[1][2] = -ax;
  R[2][0] = -ay;
  R[2][1] = ax;
  R[2][2] = c;
}

}  // namespace

FundamentalSolution scalar_fundamental_solution(int n, const std::vector<cplx>& A) {
  if (n != 2 && n != 3) fail(Err::BadInput, "space dimension must be 2 or 3");
  if (static_cast<int>(A.size()) != n * n) fail(Err::BadInput, "coefficient matrix must be n x n");

  MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = A[static_cast<size_t>(i) * n + j];

  // strong ellipticity screen on a uniform angular sample
  const int samples = 720;
  for (int k = 0; k < samples; ++k) {
    double xi[3];
    if (n == 2) {
      double th = 2.0 * M_PI * k / samples;
      xi[0] = std::cos(th);
      xi[1] = std::sin(th);
    } else {
      double u = -1.0 + 2.0 * (k + 0.5) / samples;
      double th = M_PI * (1.0 + std::sqrt(5.0)) * k;
      double s = std::sqrt(std::max(0.0, 1.0 - u * u));
      xi[0] = s * std::cos(th);
      xi[1] = s * std::sin(th);
      xi[2] = u;
    }
    cplx q(0.0, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q += a(i, j) * xi[i] * xi[j];
    if (!(q.real() > 1e-9))
      fail(Err::NotStronglyElliptic, "Re[A xi.xi] not bounded below on the sphere");
  }

  MatrixXcd asym = 0.5 * (a + a.transpose());
  MatrixXcd ainv = asym.inverse();
  cplx det = asym.determinant();
  cplx sqrt_det = std::sqrt(det);
  const double omega = omega_sphere(n);

  auto quad = [ainv, n](const double* x) {
    cplx q(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
      cplx row(0.0, 0.0);
      for (int j = 0; j < n; ++j) row += ainv(i, j) * x[j];
      q += row * x[i];
    }
    return q;
  };

  FundamentalSolution E;
  E.construction = FundamentalSolution::Construction::ScalarClosedForm;
  E.n = n;
  E.M = 1;
  if (n == 2) {
    E.eval = [quad, sqrt_det](const double* x) {
      return std::vector<cplx>{std::log(quad(x)) / (4.0 * M_PI * sqrt_det)};
    };
    E.grad_n = [quad, ainv, sqrt_det, n](const double* x) {
      cplx ax(0.0, 0.0);
      for (int j = 0; j < n; ++j) ax += ainv(n - 1, j) * x[j];
      return std::vector<cplx>{ax / (2.0 * M_PI * sqrt_det * quad(x))};
    };
  } else {
    E.eval = [quad, sqrt_det, omega](const double* x) {
      cplx q = quad(x);
      return std::vector<cplx>{-std::exp(-0.5 * std::log(q)) / (sqrt_det * omega)};
    };
    E.grad_n = [quad, ainv, sqrt_det, omega, n](const double* x) {
      cplx ax(0.0, 0.0);
      for (int j = 0; j < n; ++j) ax += ainv(n - 1, j) * x[j];
      cplx q = quad(x);
      return std::vector<cplx>{ax * std::exp(-1.5 * std::log(q)) / (omega * sqrt_det)};
    };
  }
  return E;
}

FundamentalSolution sphere_quadrature_fundamental_solution(const EllipticSystem& sys,
                                                           int quad_points, double fd_step) {
  if (!weak_ellipticity(sys, 2000)) fail(Err::SingularSymbol, "system is not weakly elliptic");
  const int n = sys.n;
  const int M = sys.M;
  if (quad_points <= 0) quad_points = (n == 2) ? 512 : 590;

  // Surface integral of the plane-wave factor against the inverse symbol,
  // taken in a frame aligned with x so the |x.xi| kink sits on a fixed panel
  // boundary and the quadrature error varies smoothly with x.
  std::function<MatrixXcd(const double*)> surface;
  if (n == 2) {
    int half = std::max(16, quad_points / 2);
    std::vector<double> gx, gw;
    gauss_legendre(half, gx, gw);
    EllipticSystem sc = sys;
    surface = [gx, gw, sc](const double* x) {
      double r = std::hypot(x[0], x[1]);
      double v[2] = {x[0] / r, x[1] / r};
      MatrixXcd acc = MatrixXcd::Zero(sc.M, sc.M);
      for (int panel = 0; panel < 2; ++panel) {
        double lo = panel == 0 ? -M_PI / 2 : M_PI / 2;
        double hi = lo + M_PI;
        for (size_t i = 0; i < gx.size(); ++i) {
          double phi = 0.5 * (hi + lo) + 0.5 * (hi - lo) * gx[i];
          double wgt = 0.5 * (hi - lo) * gw[i];
          double c = std::cos(phi), s = std::sin(phi);
          double dot = r * c;
          if (std::abs(dot) < 1e-300) continue;  // integrand vanishes there
          double xi[2] = {v[0] * c - v[1] * s, v[1] * c + v[0] * s};
          acc += wgt * (dot * dot * std::log(std::abs(dot))) * symbol_inverse(sc, xi);
        }
      }
      return acc;
    };
  } else {
    int nphi = std::max(12, static_cast<int>(std::lround(std::sqrt(quad_points))));
    int nhalf = std::max(6, quad_points / nphi / 2);
    std::vector<double> gx, gw;
    gauss_legendre(nhalf, gx, gw);
    EllipticSystem sc = sys;
    surface = [gx, gw, nphi, sc](const double* x) {
      double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      double v[3] = {x[0] / r, x[1] / r, x[2] / r};
      double R[3][3];
      aligned_frame(3, v, R);
      MatrixXcd acc = MatrixXcd::Zero(sc.M, sc.M);
      for (int panel = 0; panel < 2; ++panel) {
        double lo = panel == 0 ? -1.0 : 0.0;  // u = cos(theta) halves
        for (size_t i = 0; i < gx.size(); ++i) {
          double u = lo + 0.5 * (1.0 + gx[i]);
          double wu = 0.5 * gw[i];
          double s = std::sqrt(std::max(0.0, 1.0 - u * u));
          double dot = r * u;
          if (std::abs(dot) < 1e-300) continue;
          for (int j = 0; j < nphi; ++j) {
            double phi = 2.0 * M_PI * (j + 0.5) / nphi;
            double loc[3] = {s * std::cos(phi), s * std::sin(phi), u};
            double xi[3];
            for (int row = 0; row < 3; ++row)
              xi[row] = R[row][0] * loc[0] + R[row][1] * loc[1] + R[row][2] * loc[2];
            acc += (wu * 2.0 * M_PI / nphi) * std::abs(dot) * symbol_inverse(sc, xi);
          }
        }
      }
      return acc;
    };
  }

  const double pref = (n == 3) ? -1.0 / (16.0 * M_PI * M_PI) : 1.0 / (8.0 * M_PI * M_PI);

  auto evalE = [surface, pref, fd_step, n, M](const double* x) {
    double r = 0.0;
    for (int d = 0; d < n; ++d) r += x[d] * x[d];
    r = std::sqrt(r);
    double s = fd_step * r;
    MatrixXcd lap = MatrixXcd::Zero(M, M);
    MatrixXcd center = surface(x);
    double xs[3];
    for (int d = 0; d < n; ++d) {
      for (int dd = 0; dd < n; ++dd) xs[dd] = x[dd];
      xs[d] = x[d] + s;
      MatrixXcd plus = surface(xs);
      xs[d] = x[d] - s;
      MatrixXcd minus = surface(xs);
      lap += (plus + minus - 2.0 * center) / (s * s);
    }
    return to_flat(MatrixXcd(pref * lap));
  };

  FundamentalSolution E;
  E.construction = FundamentalSolution::Construction::SphereQuadrature;
  E.n = n;
  E.M = M;
  E.eval = evalE;
  E.grad_n = nullptr;  // consumers fall back to central differences
  return E;
}

bool is_radial(const FundamentalSolution& E, int samples) {
  if (E.radial_cache) return *E.radial_cache;
  const int n = E.n;
  // finite-difference constructions carry lattice-anisotropic truncation noise,
  // so the relative tolerance cannot resolve below that floor
  double tol = E.construction == FundamentalSolution::Construction::SphereQuadrature ? 1e-3 : 1e-6;
  double worst = 0.0, scale = 0.0;
  for (double r : {0.6, 1.0, 1.7, 2.8}) {
    std::vector<cplx> ref;
    for (int k = 0; k < samples; ++k) {
      double x[3] = {0, 0, 0};
      double th = 2.39996322972865332 * (k + 1);  // golden-angle sweep
      if (n == 2) {
        x[0] = r * std::cos(th);
        x[1] = r * std::sin(th);
      } else {
        double u = -0.95 + 1.9 * (k + 0.5) / samples;
        double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        x[0] = r * s * std::cos(th);
        x[1] = r * s * std::sin(th);
        x[2] = r * u;
      }
      auto val = E.eval(x);
      for (const cplx& v : val) scale = std::max(scale, std::abs(v));
      if (ref.empty()) {
        ref = val;
        continue;
      }
      for (size_t i = 0; i < val.size(); ++i)
        worst = std::max(worst, std::abs(val[i] - ref[i]));
    }
  }
  bool radial = worst <= tol * std::max(scale, 1e-30);
  E.radial_cache = radial;
  return radial;
}

std::vector<cplx> green_reflection(const FundamentalSolution& E, const std::vector<double>& x,
                                   const std::vector<double>& y) {
  const int n = E.n;
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    fail(Err::BadInput, "green_reflection points must have dimension n");
  if (!(y[n - 1] > 0.0)) fail(Err::BadInput, "source point must lie in the open half-space");
  if (!is_radial(E)) fail(Err::NotRadial, "reflection formula needs a radial fundamental solution");
  double d2 = 0.0;
  for (int i = 0; i < n; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  if (d2 < 1e-28) fail(Err::CoincidentPoints, "green_reflection at coincident points");

  double diff[3], diffbar[3];
  for (int i = 0; i < n; ++i) {
    diff[i] = x[i] - y[i];
    diffbar[i] = x[i] - y[i];
  }
  diffbar[n - 1] = x[n - 1] + y[n - 1];
  auto a = E.eval(diff);
  auto b = E.eval(diffbar);
  for (size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

namespace {

KernelMatrix sample_profile(const BoundaryGrid& grid, int M,
                            const std::function<std::vector<cplx>(const double*, double)>& keval,
                            double t, int images) {
  return sample_kernel(
      grid, M, t,
      [&keval, t](const double* x, cplx* out) {
        auto v = keval(x, t);
        std::copy(v.begin(), v.end(), out);
      },
      images);
}

}  // namespace

KernelMatrix PoissonConstruction::slice(double t, bool periodized) const {
  if (method == Method::FourierSymbol) return symbol_slice(t);
  return sample_profile(grid, M, keval, t, periodized ? 3 : 0);
}

PoissonConstruction harmonic_poisson(int n, const BoundaryGrid& grid) {
  if (n != 2 && n != 3) fail(Err::BadInput, "space dimension must be 2 or 3");
  if (grid.dim != n - 1) fail(Err::GridMismatch, "grid dimension must be n-1");
  const double amp = 2.0 / omega_sphere(n);
  PoissonConstruction pc;
  pc.method = PoissonConstruction::Method::HarmonicExplicit;
  pc.system = laplacian(n, 1);
  pc.grid = grid;
  pc.M = 1;
  pc.keval = [amp, n](const double* xp, double t) {
    double r2 = xp[0] * xp[0] + (n == 3 ? xp[1] * xp[1] : 0.0);
    double val = amp * std::pow(t, 1 - n) / std::pow(1.0 + r2 / (t * t), 0.5 * n);
    return std::vector<cplx>{cplx(val, 0.0)};
  };
  pc.profile = sample_profile(pc.grid, 1, pc.keval, 1.0, 0);
  return pc;
}

PoissonConstruction poisson_from_green_radial(const FundamentalSolution& E,
                                              const EllipticSystem& sys,
                                              const BoundaryGrid& grid) {
  if (E.n != sys.n || E.M != sys.M)
    fail(Err::BadInput, "fundamental solution does not match the system");
  if (grid.dim != sys.n - 1) fail(Err::GridMismatch, "grid dimension must be n-1");
  if (!is_radial(E)) fail(Err::NotRadial, "radial-reflection kernel needs a radial E");
  const int n = sys.n;
  const int M = sys.M;

  auto Ecopy = E;  // capture evaluators by value
  auto dnE = [Ecopy, n](const double* x) {
    if (Ecopy.grad_n) return Ecopy.grad_n(x);
    const double step = 1e-4;
    double plus[3], minus[3];
    for (int d = 0; d < n; ++d) {
      plus[d] = x[d];
      minus[d] = x[d];
    }
    plus[n - 1] += step;
    minus[n - 1] -= step;
    auto a = Ecopy.eval(plus);
    auto b = Ecopy.eval(minus);
    for (size_t i = 0; i < a.size(); ++i) a[i] = (a[i] - b[i]) / (2.0 * step);
    return a;
  };

  EllipticSystem sys_copy = sys;
  auto peval = [dnE, sys_copy, n, M](const double* zp) {
    double x[3];
    for (int d = 0; d < n - 1; ++d) x[d] = zp[d];
    x[n - 1] = 1.0;
    auto de = dnE(x);  // (gamma, beta) row-major
    std::vector<cplx> out(static_cast<size_t>(M) * M, cplx(0.0, 0.0));
    for (int ga = 0; ga < M; ++ga)
      for (int al = 0; al < M; ++al) {
        cplx acc(0.0, 0.0);
        for (int be = 0; be < M; ++be)
          acc += sys_copy.coef(be, al, n - 1, n - 1) * de[static_cast<size_t>(ga) * M + be];
        out[static_cast<size_t>(ga) * M + al] = 2.0 * acc;
      }
    return out;
  };

  PoissonConstruction pc;
  pc.method = PoissonConstruction::Method::RadialReflection;
  pc.system = sys;
  pc.grid = grid;
  pc.M = M;
  pc.keval = [peval, n](const double* xp, double t) {
    double z[2];
    for (int d = 0; d < n - 1; ++d) z[d] = xp[d] / t;
    auto v = peval(z);
    double scale = std::pow(t, 1 - n);
    for (auto& c : v) c *= scale;
    return v;
  };
  pc.profile = sample_profile(pc.grid, M, pc.keval, 1.0, 0);
  return pc;
}

PoissonConstruction fourier_symbol_poisson(const EllipticSystem& sys, const BoundaryGrid& grid,
                                           const std::vector<double>& t_list) {
  const int n = sys.n;
  const int M = sys.M;
  if (grid.dim != n - 1) fail(Err::GridMismatch, "grid dimension must be n-1");
  auto lh = legendre_hadamard(sys, 20000, 200);
  if (!(lh.kappa_o > 0.0)) fail(Err::SplittingFailure, "system fails the Legendre-Hadamard screen");

  MatrixXcd Ann(M, M);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) Ann(a, b) = sys.coef(a, b, n - 1, n - 1);
  MatrixXcd AnnInv = Ann.inverse();

  // The decaying invariant subspace is extracted from an ordered Schur form
  // rather than an eigenvector basis: repeated pencil roots (the Lame system
  // has a double root at tau = -|xi|) make the eigenbasis defective, while the
  // Schur vectors stay orthonormal and exp(T11 t) carries the Jordan coupling.
  struct FreqMode {
    MatrixXcd P, Pinv;  // Dirichlet trace block of the subspace basis
    MatrixXcd T11;      // restriction of the companion matrix
    bool identity = false;
  };
  auto modes = std::make_shared<std::vector<FreqMode>>(grid.nodes());

  const int N = grid.N;
  auto freq_of = [N](int j) { return j < N / 2 ? j : j - N; };
  const double dxi = M_PI / grid.R;

  for (long node = 0; node < grid.nodes(); ++node) {
    int idx[2] = {0, 0};
    grid.unflatten(node, idx);
    double xi[2] = {0.0, 0.0};
    for (int d = 0; d < grid.dim; ++d) xi[d] = dxi * freq_of(idx[d]);
    double xnorm = std::hypot(xi[0], grid.dim == 2 ? xi[1] : 0.0);
    FreqMode& fm = (*modes)[node];
    if (xnorm == 0.0) {
      fm.identity = true;  // constant data propagates unchanged
      continue;
    }
    MatrixXcd B = MatrixXcd::Zero(M, M), C = MatrixXcd::Zero(M, M);
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b) {
        cplx bb(0.0, 0.0), cc(0.0, 0.0);
        for (int r = 0; r < n - 1; ++r) {
          bb += xi[r] * (sys.coef(a, b, r, n - 1) + sys.coef(a, b, n - 1, r));
          for (int s = 0; s < n - 1; ++s) cc += xi[r] * xi[s] * sys.coef(a, b, r, s);
        }
        B(a, b) = bb;
        C(a, b) = cc;
      }
    MatrixXcd Z = MatrixXcd::Zero(2 * M, 2 * M);
    Z.topRightCorner(M, M) = MatrixXcd::Identity(M, M);
    Z.bottomLeftCorner(M, M) = AnnInv * C;
    Z.bottomRightCorner(M, M) = cplx(0.0, -1.0) * (AnnInv * B);

    Eigen::ComplexSchur<MatrixXcd> schur(Z, true);
    if (schur.info() != Eigen::Success)
      fail(Err::SplittingFailure, "Schur decomposition failed at a frequency");
    MatrixXcd T = schur.matrixT();
    MatrixXcd U = schur.matrixU();

    auto decaying = [xnorm](const cplx& tau) { return tau.real() < -1e-10 * xnorm; };
    const int dim = 2 * M;
    // bubble the decaying eigenvalues to the leading diagonal with unitary
    // swaps of adjacent Schur entries
    for (int pass = 0; pass < dim; ++pass)
      for (int k = 0; k + 1 < dim; ++k) {
        if (decaying(T(k, k)) || !decaying(T(k + 1, k + 1))) continue;
        cplx a = T(k, k), b = T(k, k + 1), c = T(k + 1, k + 1);
        // eigenvector of the 2x2 block for eigenvalue c is (b, c-a)
        double nrm = std::sqrt(std::norm(b) + std::norm(c - a));
        if (nrm < 1e-300) continue;  // equal entries, nothing to move
        cplx w1 = b / nrm, w2 = (c - a) / nrm;
        MatrixXcd G = MatrixXcd::Identity(dim, dim);
        G(k, k) = w1;
        G(k + 1, k) = w2;
        G(k, k + 1) = -std::conj(w2);
        G(k + 1, k + 1) = std::conj(w1);
        T = G.adjoint() * T * G;
        U = U * G;
        T(k + 1, k) = cplx(0.0, 0.0);
      }
    int nkeep = 0;
    while (nkeep < dim && decaying(T(nkeep, nkeep))) ++nkeep;
    int total = 0;
    for (int k = 0; k < dim; ++k)
      if (decaying(T(k, k))) ++total;
    if (nkeep != M || total != M)
      fail(Err::SplittingFailure,
           "expected exactly M decaying modes, found " + std::to_string(total));

    fm.T11 = T.topLeftCorner(M, M);
    fm.P = U.topLeftCorner(M, M);
    Eigen::JacobiSVD<MatrixXcd> svd(fm.P);
    double smin = svd.singularValues()(M - 1), smax = svd.singularValues()(0);
    if (!(smin > 0.0) || smax / smin > 1e8)
      fail(Err::IllConditionedBasis, "Dirichlet trace of the decaying subspace is singular");
    fm.Pinv = fm.P.inverse();
  }

  auto khat_at = [modes, M](long node, double t) {
    const FreqMode& fm = (*modes)[node];
    if (fm.identity) return MatrixXcd(MatrixXcd::Identity(M, M));
    MatrixXcd expT = MatrixXcd(fm.T11 * t).exp();
    return MatrixXcd(fm.P * expT * fm.Pinv);
  };

  BoundaryGrid g = grid;
  auto build_slice = [khat_at, g, M](double t) {
    KernelMatrix out = make_kernel(g, M, t);
    const long nn = g.nodes();
    std::vector<MatrixXcd> khat(nn);
    for (long node = 0; node < nn; ++node) khat[node] = khat_at(node, t);
    std::vector<cplx> buf(nn);
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b) {
        for (long node = 0; node < nn; ++node) {
          int idx[2] = {0, 0};
          g.unflatten(node, idx);
          int par = idx[0] + (g.dim == 2 ? idx[1] : 0);
          double sgn = (par % 2 == 0) ? 1.0 : -1.0;  // phase of x = -R grid origin
          buf[node] = sgn * khat[node](a, b);
        }
        if (g.dim == 1)
          fft_inplace(buf, true);
        else
          fft2_inplace(buf, g.N, g.N, true);
        double scale = 1.0 / g.cell_measure();
        for (long node = 0; node < nn; ++node) out.at(node, a, b) = buf[node] * scale;
      }
    return out;
  };

  PoissonConstruction pc;
  pc.method = PoissonConstruction::Method::FourierSymbol;
  pc.system = sys;
  pc.grid = grid;
  pc.M = M;
  pc.symbol_slice = build_slice;
  pc.profile = build_slice(1.0);
  // pointwise synthesis of the periodized kernel for off-grid probes
  pc.keval = [khat_at, g, M](const double* xp, double t) {
    const int N = g.N;
    auto freq_of2 = [N](int j) { return j < N / 2 ? j : j - N; };
    const double dxi2 = M_PI / g.R;
    MatrixXcd acc = MatrixXcd::Zero(M, M);
    for (long node = 0; node < g.nodes(); ++node) {
      int idx[2] = {0, 0};
      g.unflatten(node, idx);
      double phase = dxi2 * freq_of2(idx[0]) * xp[0];
      if (g.dim == 2) phase += dxi2 * freq_of2(idx[1]) * xp[1];
      acc += khat_at(node, t) * std::polar(1.0, phase);
    }
    double scale = 1.0;
    for (int d = 0; d < g.dim; ++d) scale /= 2.0 * g.R;
    return to_flat(MatrixXcd(acc * scale));
  };
  for (double t : t_list)
    pc.stored.push_back(t == 1.0 ? pc.profile : build_slice(t));
  return pc;
}

namespace {

// second-order stencil residual of L applied to the columns of K at a point
double pde_residual_at(const PoissonConstruction& pc, const double* x0, double step) {
  const EllipticSystem& sys = pc.system;
  const int n = sys.n;
  const int M = pc.M;
  auto evalK = [&pc, n](const double* x) { return from_flat(pc.keval(x, x[n - 1]), pc.M); };
  std::vector<MatrixXcd> d2(static_cast<size_t>(n) * n);
  double xs[3];
  MatrixXcd center = evalK(x0);
  for (int r = 0; r < n; ++r) {
    for (int d = 0; d < n; ++d) xs[d] = x0[d];
    xs[r] = x0[r] + step;
    MatrixXcd plus = evalK(xs);
    xs[r] = x0[r] - step;
    MatrixXcd minus = evalK(xs);
    d2[static_cast<size_t>(r) * n + r] = (plus + minus - 2.0 * center) / (step * step);
  }
  for (int r = 0; r < n; ++r)
    for (int s = r + 1; s < n; ++s) {
      MatrixXcd acc = MatrixXcd::Zero(M, M);
      for (int sr : {-1, 1})
        for (int ss : {-1, 1}) {
          for (int d = 0; d < n; ++d) xs[d] = x0[d];
          xs[r] += sr * step;
          xs[s] += ss * step;
          acc += static_cast<double>(sr * ss) * evalK(xs);
        }
      acc /= 4.0 * step * step;
      d2[static_cast<size_t>(r) * n + s] = acc;
      d2[static_cast<size_t>(s) * n + r] = acc;
    }
  double worst = 0.0;
  for (int al = 0; al < M; ++al)
    for (int be = 0; be < M; ++be) {
      cplx res(0.0, 0.0);
      for (int ga = 0; ga < M; ++ga)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s)
            res += sys.coef(al, ga, r, s) * d2[static_cast<size_t>(r) * n + s](ga, be);
      worst = std::max(worst, std::abs(res));
    }
  return worst;
}

}  // namespace

PoissonReport verify_poisson_properties(const PoissonConstruction& pc, bool extended) {
  PoissonReport rep;
  const BoundaryGrid& g = pc.grid;
  const int n = pc.system.n;
  const int M = pc.M;

  // (a) pointwise decay of the t = 1 profile
  double x[2];
  for (long k = 0; k < g.nodes(); ++k) {
    g.node_coords(k, x);
    double r2 = x[0] * x[0] + (g.dim == 2 ? x[1] * x[1] : 0.0);
    double weight = std::pow(1.0 + r2, 0.5 * n);
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b)
        rep.decay_sup = std::max(rep.decay_sup, std::abs(pc.profile.at(k, a, b)) * weight);
  }

  // (b) normalization of the t = 1 profile
  const double cell = g.cell_measure();
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      cplx acc(0.0, 0.0);
      for (long k = 0; k < g.nodes(); ++k) acc += pc.profile.at(k, a, b);
      acc *= cell;
      if (a == b) acc -= 1.0;
      rep.norm_deviation = std::max(rep.norm_deviation, std::abs(acc));
    }

  // (c) interior PDE residual at generic probes, with one step halving
  std::vector<std::vector<double>> probes;
  if (n == 2) {
    probes = {{0.37, 0.9}, {-1.21, 1.4}, {2.13, 0.7}};
  } else {
    probes = {{0.37, -0.22, 0.9}, {-1.21, 0.48, 1.4}, {0.73, 1.31, 0.7}};
  }
  double res_coarse = 0.0, res_fine = 0.0;
  for (const auto& p : probes) {
    double s0 = 0.08;
    res_coarse = std::max(res_coarse, pde_residual_at(pc, p.data(), s0));
    res_fine = std::max(res_fine, pde_residual_at(pc, p.data(), s0 / 2.0));
  }
  rep.pde_residual_coarse = res_coarse;
  rep.pde_residual = res_fine;
  rep.pde_order = res_fine > 0.0 ? std::log2(res_coarse / res_fine) : INFINITY;

  // homogeneity K(l x) = l^{1-n} K(x) across the t = 1 and t = 2 slices
  KernelMatrix p2 = pc.slice(2.0, false);
  double peak = 0.0;
  for (const cplx& v : pc.profile.values) peak = std::max(peak, std::abs(v));
  double herr = 0.0;
  const int N = g.N;
  auto check_node = [&](long knode, long k2node) {
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b) {
        cplx lhs = p2.at(k2node, a, b);
        cplx rhs = std::pow(2.0, 1 - n) * pc.profile.at(knode, a, b);
        herr = std::max(herr, std::abs(lhs - rhs) / peak);
      }
  };
  if (g.dim == 1) {
    for (int k = 3 * N / 8; k < 5 * N / 8; ++k) check_node(k, 2 * k - N / 2);
  } else {
    for (int i = 3 * N / 8; i < 5 * N / 8; ++i)
      for (int j = 3 * N / 8; j < 5 * N / 8; ++j)
        check_node(static_cast<long>(i) * N + j,
                   static_cast<long>(2 * i - N / 2) * N + (2 * j - N / 2));
  }
  rep.homogeneity_err = herr;

  // extended: Green consistency for the explicit harmonic kernel, n = 3
  if (extended && pc.method == PoissonConstruction::Method::HarmonicExplicit && n == 3) {
    auto Eharm = scalar_fundamental_solution(
        3, {cplx(1, 0), 0, 0, 0, cplx(1, 0), 0, 0, 0, cplx(1, 0)});
    std::vector<double> y = {0.0, 0.0, 1.0};
    BoundaryField trace = sample(g, 1, [&Eharm, &y](const double* zp, cplx* out) {
      double d[3] = {zp[0] - y[0], zp[1] - y[1], -y[2]};
      out[0] = Eharm.eval(d)[0];
    });
    double t = 1.0;
    KernelMatrix kt = pc.slice(t, true);
    BoundaryField conv = fft_convolve(kt, trace);
    double worst = 0.0;
    for (long k = 0; k < g.nodes(); ++k) {
      g.node_coords(k, x);
      double rr = std::hypot(x[0], x[1]);
      if (rr > g.R / 4.0 || rr < 2.0 * g.h) continue;  // stay off the source column
      std::vector<double> xx = {x[0], x[1], t};
      cplx lhs = green_reflection(Eharm, xx, y)[0];
      double dxy[3] = {xx[0] - y[0], xx[1] - y[1], xx[2] - y[2]};
      cplx rhs = Eharm.eval(dxy)[0] - conv.at(k, 0);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    rep.green_consistency = worst;
  }
  return rep;
}

}  // namespace hs
