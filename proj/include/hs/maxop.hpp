#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hs/grid.hpp"

namespace hs {

/// Nontangential approach cone |x'-y'| < kappa*t, optionally truncated to t < eps.
struct ConeSpec {
  double kappa = 1.0;
  std::optional<double> eps;
};

/// Positive real-valued field used as a measure density.
struct Weight {
  BoundaryField field;
  std::string label;
};

Weight make_weight(const BoundaryField& f, const std::string& label);

struct ApReport {
  double p = 1.0;
  double constant = 1.0;
  std::vector<double> argmax_center;
  double argmax_side = 0.0;
};

/// Hardy-Littlewood maximal function over the discrete cube family: all
/// axis-aligned windows of 2^j consecutive cells per axis, any position,
/// with the field extended by zero outside the grid.
BoundaryField hl_maximal(const BoundaryField& f);

/// Two-fold composition M(M f).
BoundaryField iterated_maximal(const BoundaryField& f);

struct MBallReport {
  double m_ratio_min = 0.0;    // min over |x| <= R/2 of M(1_B)(x)*(1+|x|^{n-1})
  double m_ratio_max = 0.0;
  double m2_ratio_min = 0.0;   // same for M^2 against (1+log+|x|)/(1+|x|^{n-1})
  double m2_ratio_max = 0.0;
  std::vector<double> abscissa;  // |x| per tabulated node (dim = 1 only)
  std::vector<double> m_ratio;
  std::vector<double> m2_ratio;
};

/// Tabulates the unit-ball maximal-function envelopes on a fresh grid.
MBallReport m_ball_profile(int dim, double R, int N);

/// Nontangential maximal function over the stored height slab.
BoundaryField nontangential_max(const HalfSpaceField& u, const ConeSpec& cone);

/// Muckenhoupt constant over the discrete cube family (windows fully inside
/// the grid). p = 1 uses the grid minimum in place of the essential infimum.
ApReport ap_constant(const Weight& w, double p);

/// Brute-force all-intervals A_p sweep (dim = 1 only); oracle for ap_constant.
ApReport ap_constant_all_intervals(const Weight& w, double p);

struct ApertureRow {
  double kappa = 0.0;
  double norm = 0.0;
};

struct ApertureReport {
  std::vector<ApertureRow> rows;
  std::vector<std::vector<double>> ratio;  // ratio[i][j] = norm_i / norm_j
  double max_ratio = 0.0;
};

/// ||N_kappa u||_{L^p(w)} for each aperture, plus all pairwise ratios.
ApertureReport cone_aperture_comparison(const HalfSpaceField& u,
                                        const std::vector<double>& kappas, double p,
                                        const Weight* w = nullptr);

}  // namespace hs
