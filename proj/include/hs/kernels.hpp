#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hs/grid.hpp"
#include "hs/systems.hpp"

namespace hs {

/// M x M matrix values returned row-major.
using MatrixFn = std::function<std::vector<cplx>(const double* x)>;

/// Fundamental solution E with L E = delta * I, evaluated pointwise away
/// from the origin.
struct FundamentalSolution {
  enum class Construction { ScalarClosedForm, SphereQuadrature };
  Construction construction = Construction::ScalarClosedForm;
  int n = 2;
  int M = 1;
  MatrixFn eval;
  MatrixFn grad_n;  // analytic d/dx_n when available; falls back to differences
  mutable std::optional<bool> radial_cache;
};

/// Closed-form fundamental solution of div A grad for a strongly elliptic
/// n x n matrix A (principal-branch logarithm in the plane).
FundamentalSolution scalar_fundamental_solution(int n, const std::vector<cplx>& A);

/// Sphere-quadrature fundamental solution of a weakly elliptic system: the
/// surface integral is taken in a frame aligned with x so the kink of the
/// plane-wave factor sits on a fixed panel boundary, then one finite-difference
/// Laplacian with step fd_step*|x| is applied.
FundamentalSolution sphere_quadrature_fundamental_solution(const EllipticSystem& sys,
                                                           int quad_points = 0,
                                                           double fd_step = 1e-2);

/// Tests E(x) = E(y) over random pairs with |x| = |y| (1e-6 relative).
bool is_radial(const FundamentalSolution& E, int samples = 24);

/// Green function by reflection: G(x,y) = E(x-y) - E(x-y*), y* the mirror of
/// y across the boundary. Requires a radial E, x != y, y interior.
std::vector<cplx> green_reflection(const FundamentalSolution& E, const std::vector<double>& x,
                                   const std::vector<double>& y);

struct PoissonConstruction {
  enum class Method { HarmonicExplicit, RadialReflection, FourierSymbol };
  Method method = Method::HarmonicExplicit;
  EllipticSystem system;
  BoundaryGrid grid;
  int M = 1;
  KernelMatrix profile;  // t = 1 samples (raw for analytic methods)

  /// Analytic K(x', t) = t^{1-n} P(x'/t); for the symbol method this is the
  /// periodized kernel synthesized from the stored frequency modes.
  std::function<std::vector<cplx>(const double* xp, double t)> keval;

  /// Kernel slice at height t; periodized wraps 3 lattice images per axis
  /// for the analytic constructions (symbol slices are periodic already).
  KernelMatrix slice(double t, bool periodized) const;

  std::function<KernelMatrix(double t)> symbol_slice;  // FourierSymbol only
  std::vector<KernelMatrix> stored;                    // slices built at construction
};

/// Classical half-space kernel (2/omega_{n-1}) (1+|x'|^2)^{-n/2}, scalar.
PoissonConstruction harmonic_poisson(int n, const BoundaryGrid& grid);

/// Boundary kernel from the reflected Green function of a radial E:
/// P_{ga}(z') = 2 a^{ba}_{nn} (d_n E_{gb})(z', 1).
PoissonConstruction poisson_from_green_radial(const FundamentalSolution& E,
                                              const EllipticSystem& sys,
                                              const BoundaryGrid& grid);

/// Tangential Fourier construction: per grid frequency the quadratic pencil
/// A_nn tau^2 + i B(xi') tau - C(xi') is linearized to a 2M x 2M companion
/// problem, the M decaying modes are kept, and K^(xi', t) = V exp(tau t) V^{-1}
/// propagates boundary data; xi' = 0 carries the identity.
PoissonConstruction fourier_symbol_poisson(const EllipticSystem& sys, const BoundaryGrid& grid,
                                           const std::vector<double>& t_list = {1.0});

struct PoissonReport {
  double decay_sup = 0.0;        // sup |P|(1+|x'|^2)^{n/2} over nodes
  double norm_deviation = 0.0;   // max entry of |integral of P_1 - I|
  double pde_residual = 0.0;     // max |L K| over probe points, finer stencil
  double pde_residual_coarse = 0.0;
  double pde_order = 0.0;        // observed stencil-convergence order
  double homogeneity_err = 0.0;  // peak-relative error of K(lx) vs l^{1-n}K(x)
  double green_consistency = 0.0;  // extended harmonic check; 0 when skipped
};

PoissonReport verify_poisson_properties(const PoissonConstruction& pc, bool extended = false);

}  // namespace hs
