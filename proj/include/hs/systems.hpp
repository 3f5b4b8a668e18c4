#pragma once

#include <string>
#include <vector>

#include "hs/fft.hpp"

namespace hs {

/// Constant-coefficient second-order M x M system, stored as the tensor
/// a[alpha][beta][r][s] acting by (L u)_alpha = d_r(a^{ab}_{rs} d_s u_beta).
struct EllipticSystem {
  int n = 2;  // space dimension (2 or 3)
  int M = 1;  // system size
  std::vector<cplx> a;  // [((alpha*M + beta)*n + r)*n + s]
  std::string label;

  cplx& coef(int alpha, int beta, int r, int s) {
    return a[((static_cast<size_t>(alpha) * M + beta) * n + r) * n + s];
  }
  const cplx& coef(int alpha, int beta, int r, int s) const {
    return a[((static_cast<size_t>(alpha) * M + beta) * n + r) * n + s];
  }
};

EllipticSystem laplacian(int n, int M);

/// mu*Laplace + (lambda+mu)*grad div with the tensor writing
/// a^{ab}_{rs} = mu d_rs d_ab + (lambda+mu) d_ra d_sb. Other writings of the
/// same operator differ by divergence-free rearrangements of the tensor.
EllipticSystem lame(int n, double mu, double lambda);

EllipticSystem transpose(const EllipticSystem& sys);

/// Matrix symbol sum_{r,s} a^{ab}_{rs} xi_r xi_s, row-major M x M.
std::vector<cplx> symbol(const EllipticSystem& sys, const double* xi);

struct EllipticityReport {
  double kappa_o = 0.0;   // max(0, min_ratio)
  double min_ratio = 0.0; // min over unit xi, eta of Re[a xi xi eta~ eta]
  std::vector<double> argmin_xi;
  std::vector<cplx> argmin_eta;
  bool weakly_elliptic = false;
};

/// Certified-by-sampling estimate of the Legendre-Hadamard constant:
/// quasi-random sampling over unit (xi, eta) pairs plus Nelder-Mead polish.
EllipticityReport legendre_hadamard(const EllipticSystem& sys, long samples = 20000,
                                    int refine_iters = 200);

/// True iff min over sampled unit xi of |det symbol| exceeds 1e-9.
bool weak_ellipticity(const EllipticSystem& sys, long samples = 20000);

void save_system(const EllipticSystem& sys, const std::string& path);
EllipticSystem load_system(const std::string& path);

}  // namespace hs
