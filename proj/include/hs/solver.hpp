#pragma once

#include <string>
#include <vector>

#include "hs/kernels.hpp"
#include "hs/maxop.hpp"
#include "hs/spaces.hpp"

namespace hs {

enum class KernelMethod { HarmonicExplicit, RadialReflection, FourierSymbol };

KernelMethod kernel_method_from_string(const std::string& name);
std::string kernel_method_name(KernelMethod m);

/// Builds the Poisson construction for a system on a grid by the chosen route.
PoissonConstruction build_kernel(const EllipticSystem& sys, const BoundaryGrid& grid,
                                 KernelMethod method);

struct DirichletProblem {
  EllipticSystem system;
  BoundaryField datum;
  std::vector<double> heights;
  KernelMethod method = KernelMethod::FourierSymbol;
};

/// Geometric default heights {2h 2^k} capped at R/8.
std::vector<double> default_heights(const BoundaryGrid& grid);

/// Per-height convolution of the periodized kernel slice with the datum.
HalfSpaceField solve(const DirichletProblem& prob);
HalfSpaceField solve_with_kernel(const PoissonConstruction& pc, const BoundaryField& datum,
                                 const std::vector<double>& heights);

/// Band-limited bump data with a fixed seed (sum of Gaussians supported in
/// |x| <= support_radius); positive = true keeps all amplitudes positive.
BoundaryField random_bumps(const BoundaryGrid& grid, int channels, unsigned seed, bool positive,
                           double support_radius);

struct TraceReport {
  double max_deviation = 0.0;  // |u(., t_min) - f| over probe nodes
  double decay_rate = 0.0;     // slope of log deviation vs log t
  long probe_count = 0;
};

/// Boundary-trace deviation at the smallest stored height, probed away from
/// grid discontinuities of the datum.
TraceReport trace_convergence(const HalfSpaceField& u, const BoundaryField& f,
                              const ConeSpec& cone);

struct NtDominationReport {
  std::vector<double> per_trial;  // max node ratio N u / M f per trial
  double global_max = 0.0;
};

NtDominationReport nt_domination(const EllipticSystem& sys, const BoundaryGrid& grid,
                                 KernelMethod method, const ConeSpec& cone, int trials,
                                 unsigned seed = 1u);

struct SemigroupReport {
  double residual = 0.0;     // max entry |P_t1 * P_t2 - P_{t1+t2}|
  double commutator = 0.0;   // max entry |P_t1 * P_t2 - P_t2 * P_t1|
  double peak = 0.0;         // max entry |P_{t1+t2}| for scale
};

SemigroupReport semigroup_check(const PoissonConstruction& pc, double t1, double t2);

struct FatouReport {
  double residual = 0.0;  // max |u(., t_big) - P_{t_big - t_small} * u(., t_small)|
};

FatouReport fatou_reconstruction(const HalfSpaceField& u, const PoissonConstruction& pc,
                                 double t_small, double t_big);

struct AtomDecayReport {
  double off_cube_sup = 0.0;   // sup of N u |x - x_Q|^n / l(Q) off 2 sqrt(n) Q
  double l1_mass = 0.0;        // integral of N u
  double decay_exponent = 0.0; // fitted decay power of N u away from the cube
  double beurling_sum = 0.0;   // annulus-weighted norm of N u (central atoms)
};

AtomDecayReport atom_decay(const Atom& atom, const EllipticSystem& sys, KernelMethod method,
                           const ConeSpec& cone);

struct WellposednessRow {
  std::string system;
  std::string space;
  double max_ratio = 0.0;  // max over trials of ||N u||_X / ||f||_X
};

/// Screens each spec for maximal-operator boundedness, then tabulates the
/// nontangential-to-datum norm ratios over seeded random data.
std::vector<WellposednessRow> wellposedness_table(const std::vector<EllipticSystem>& systems,
                                                  const std::vector<NormSpec>& specs,
                                                  const BoundaryGrid& grid, KernelMethod method,
                                                  const ConeSpec& cone, int trials,
                                                  unsigned seed = 2u);

struct OperatorBoundReport {
  std::vector<double> t;
  std::vector<double> max_ratio;  // max over trials of ||T_t f|| / ||f||
  double global_max = 0.0;
};

OperatorBoundReport semigroup_operator_bound(const PoissonConstruction& pc, const NormSpec& spec,
                                             const std::vector<double>& t_list, int trials,
                                             unsigned seed = 3u);

}  // namespace hs
