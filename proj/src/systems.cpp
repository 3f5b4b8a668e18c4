#include "hs/systems.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <json.hpp>

#include "hs/error.hpp"
#include "hs/io.hpp"

namespace hs {

namespace {

void check_dims(int n, int M) {
  if (n != 2 && n != 3) fail(Err::BadInput, "space dimension must be 2 or 3");
  if (M < 1) fail(Err::BadInput, "system size must be >= 1");
}

}  // namespace

EllipticSystem laplacian(int n, int M) {
  check_dims(n, M);
  EllipticSystem sys;
  sys.n = n;
  sys.M = M;
  sys.a.assign(static_cast<size_t>(M) * M * n * n, cplx(0.0, 0.0));
  for (int al = 0; al < M; ++al)
    for (int r = 0; r < n; ++r) sys.coef(al, al, r, r) = 1.0;
  sys.label = "laplacian(n=" + std::to_string(n) + ",M=" + std::to_string(M) + ")";
  return sys;
}

EllipticSystem lame(int n, double mu, double lambda) {
  check_dims(n, n);
  EllipticSystem sys;
  sys.n = n;
  sys.M = n;
  sys.a.assign(static_cast<size_t>(n) * n * n * n, cplx(0.0, 0.0));
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          double v = 0.0;
          if (r == s && al == be) v += mu;
          if (r == al && s == be) v += lambda + mu;
          if (v != 0.0) sys.coef(al, be, r, s) = v;
        }
  sys.label = "lame(n=" + std::to_string(n) + ",mu=" + fmt17(mu) + ",lambda=" + fmt17(lambda) + ")";
  return sys;
}

EllipticSystem transpose(const EllipticSystem& sys) {
  EllipticSystem t = sys;
  for (int al = 0; al < sys.M; ++al)
    for (int be = 0; be < sys.M; ++be)
      for (int r = 0; r < sys.n; ++r)
        for (int s = 0; s < sys.n; ++s) t.coef(al, be, r, s) = sys.coef(be, al, s, r);
  t.label = sys.label + "^T";
  return t;
}

std::vector<cplx> symbol(const EllipticSystem& sys, const double* xi) {
  std::vector<cplx> m(static_cast<size_t>(sys.M) * sys.M, cplx(0.0, 0.0));
  for (int al = 0; al < sys.M; ++al)
    for (int be = 0; be < sys.M; ++be) {
      cplx acc(0.0, 0.0);
      for (int r = 0; r < sys.n; ++r)
        for (int s = 0; s < sys.n; ++s) acc += sys.coef(al, be, r, s) * (xi[r] * xi[s]);
      m[static_cast<size_t>(al) * sys.M + be] = acc;
    }
  return m;
}

namespace {

// Kronecker low-discrepancy sequence in d dimensions.
struct Kronecker {
  std::vector<double> alpha;
  explicit Kronecker(int d) : alpha(d) {
    // generalized golden ratios: x = 1/phi_d^k
    double g = 2.0;
    for (int it = 0; it < 64; ++it) g = std::pow(1.0 + g, 1.0 / (d + 1));
    for (int k = 0; k < d; ++k) alpha[k] = std::fmod(1.0 / std::pow(g, k + 1), 1.0);
  }
  void point(long i, double* u) const {
    for (size_t k = 0; k < alpha.size(); ++k) u[k] = std::fmod(0.5 + (i + 1) * alpha[k], 1.0);
  }
};

// Gaussians from a uniform pair (Box-Muller); deterministic.
void box_muller(double u1, double u2, double& g1, double& g2) {
  u1 = std::max(u1, 1e-16);
  double r = std::sqrt(-2.0 * std::log(u1));
  g1 = r * std::cos(2.0 * M_PI * u2);
  g2 = r * std::sin(2.0 * M_PI * u2);
}

// Legendre-Hadamard quadratic form ratio on the unit spheres.
// Point layout: v = [xi (n reals), eta (2M reals as re/im)].
double lh_ratio(const EllipticSystem& sys, const double* v) {
  const int n = sys.n, M = sys.M;
  double nx = 0.0;
  for (int r = 0; r < n; ++r) nx += v[r] * v[r];
  double ne = 0.0;
  for (int c = 0; c < 2 * M; ++c) ne += v[n + c] * v[n + c];
  if (nx < 1e-300 || ne < 1e-300) return 1e300;
  cplx acc(0.0, 0.0);
  for (int al = 0; al < M; ++al)
    for (int be = 0; be < M; ++be) {
      cplx ea(v[n + 2 * al], v[n + 2 * al + 1]);
      cplx eb(v[n + 2 * be], v[n + 2 * be + 1]);
      cplx xx(0.0, 0.0);
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) xx += sys.coef(al, be, r, s) * (v[r] * v[s]);
      acc += xx * std::conj(ea) * eb;
    }
  return acc.real() / (nx * ne);
}

// Minimal Nelder-Mead on the scale-invariant objective.
std::vector<double> nelder_mead(const EllipticSystem& sys, std::vector<double> start,
                                int iters) {
  const int d = static_cast<int>(start.size());
  std::vector<std::vector<double>> simplex(d + 1, start);
  for (int k = 0; k < d; ++k) simplex[k + 1][k] += 0.1;
  std::vector<double> fv(d + 1);
  for (int i = 0; i <= d; ++i) fv[i] = lh_ratio(sys, simplex[i].data());

  auto order = [&] {
    std::vector<int> idx(d + 1);
    for (int i = 0; i <= d; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2(d + 1);
    std::vector<double> f2(d + 1);
    for (int i = 0; i <= d; ++i) {
      s2[i] = simplex[idx[i]];
      f2[i] = fv[idx[i]];
    }
    simplex.swap(s2);
    fv.swap(f2);
  };

  for (int it = 0; it < iters; ++it) {
    order();
    std::vector<double> centroid(d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) centroid[k] += simplex[i][k] / d;
    auto probe = [&](double coef) {
      std::vector<double> p(d);
      for (int k = 0; k < d; ++k) p[k] = centroid[k] + coef * (centroid[k] - simplex[d][k]);
      return p;
    };
    auto refl = probe(1.0);
    double fr = lh_ratio(sys, refl.data());
    if (fr < fv[0]) {
      auto exp_ = probe(2.0);
      double fe = lh_ratio(sys, exp_.data());
      if (fe < fr) {
        simplex[d] = exp_;
        fv[d] = fe;
      } else {
        simplex[d] = refl;
        fv[d] = fr;
      }
    } else if (fr < fv[d - 1]) {
      simplex[d] = refl;
      fv[d] = fr;
    } else {
      auto contr = probe(-0.5);
      double fc = lh_ratio(sys, contr.data());
      if (fc < fv[d]) {
        simplex[d] = contr;
        fv[d] = fc;
      } else {
        for (int i = 1; i <= d; ++i) {
          for (int k = 0; k < d; ++k) simplex[i][k] = 0.5 * (simplex[i][k] + simplex[0][k]);
          fv[i] = lh_ratio(sys, simplex[i].data());
        }
      }
    }
  }
  order();
  return simplex[0];
}

}  // namespace

EllipticityReport legendre_hadamard(const EllipticSystem& sys, long samples, int refine_iters) {
  if (samples < 1000) fail(Err::BadInput, "legendre_hadamard needs >= 1e3 samples");
  const int n = sys.n, M = sys.M;
  const int d = n + 2 * M;
  const int dpairs = (d + 1) / 2 * 2;
  Kronecker seq(dpairs);

  std::vector<double> u(dpairs), g(dpairs), best(d);
  double best_val = 1e300;
  std::vector<double> v(d);
  for (long i = 0; i < samples; ++i) {
    seq.point(i, u.data());
    for (int k = 0; k < dpairs; k += 2) box_muller(u[k], u[k + 1], g[k], g[k + 1]);
    std::copy(g.begin(), g.begin() + d, v.begin());
    double val = lh_ratio(sys, v.data());
    if (val < best_val) {
      best_val = val;
      best = v;
    }
  }
  best = nelder_mead(sys, best, refine_iters);
  best_val = lh_ratio(sys, best.data());

  EllipticityReport rep;
  rep.min_ratio = best_val;
  rep.kappa_o = std::max(0.0, best_val);
  double nx = 0.0, ne = 0.0;
  for (int r = 0; r < n; ++r) nx += best[r] * best[r];
  for (int c = 0; c < 2 * M; ++c) ne += best[n + c] * best[n + c];
  nx = std::sqrt(nx);
  ne = std::sqrt(ne);
  rep.argmin_xi.resize(n);
  rep.argmin_eta.resize(M);
  for (int r = 0; r < n; ++r) rep.argmin_xi[r] = best[r] / nx;
  for (int c = 0; c < M; ++c)
    rep.argmin_eta[c] = cplx(best[n + 2 * c], best[n + 2 * c + 1]) / ne;
  rep.weakly_elliptic = weak_ellipticity(sys, std::max<long>(samples, 1000));
  return rep;
}

bool weak_ellipticity(const EllipticSystem& sys, long samples) {
  if (samples < 1000) fail(Err::BadInput, "weak_ellipticity needs >= 1e3 samples");
  const int n = sys.n, M = sys.M;
  const int dpairs = (n + 1) / 2 * 2;
  Kronecker seq(dpairs);
  std::vector<double> u(dpairs), g(dpairs);
  Eigen::MatrixXcd m(M, M);
  double min_det = 1e300;
  for (long i = 0; i < samples; ++i) {
    seq.point(i, u.data());
    for (int k = 0; k < dpairs; k += 2) box_muller(u[k], u[k + 1], g[k], g[k + 1]);
    double nx = 0.0;
    for (int r = 0; r < n; ++r) nx += g[r] * g[r];
    nx = std::sqrt(nx);
    if (nx < 1e-12) continue;
    std::vector<double> xi(n);
    for (int r = 0; r < n; ++r) xi[r] = g[r] / nx;
    auto sym = symbol(sys, xi.data());
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b) m(a, b) = sym[static_cast<size_t>(a) * M + b];
    min_det = std::min(min_det, std::abs(m.determinant()));
  }
  return min_det > 1e-9;
}

void save_system(const EllipticSystem& sys, const std::string& path) {
  nlohmann::json entries = nlohmann::json::array();
  for (int al = 0; al < sys.M; ++al)
    for (int be = 0; be < sys.M; ++be)
      for (int r = 0; r < sys.n; ++r)
        for (int s = 0; s < sys.n; ++s) {
          const cplx& c = sys.coef(al, be, r, s);
          if (c != cplx(0.0, 0.0))
            entries.push_back({al + 1, be + 1, r + 1, s + 1, c.real(), c.imag()});
        }
  nlohmann::json j = {{"n", sys.n}, {"M", sys.M}, {"entries", entries}, {"label", sys.label}};
  write_text_file(path, j.dump(2) + "\n");
}

EllipticSystem load_system(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  int n = j.at("n").get<int>();
  int M = j.at("M").get<int>();
  check_dims(n, M >= 1 ? n : 2);
  EllipticSystem sys;
  sys.n = n;
  sys.M = M;
  sys.a.assign(static_cast<size_t>(M) * M * n * n, cplx(0.0, 0.0));
  sys.label = j.value("label", "");
  for (const auto& e : j.at("entries")) {
    int al = e.at(0).get<int>() - 1;
    int be = e.at(1).get<int>() - 1;
    int r = e.at(2).get<int>() - 1;
    int s = e.at(3).get<int>() - 1;
    if (al < 0 || al >= M || be < 0 || be >= M || r < 0 || r >= n || s < 0 || s >= n)
      fail(Err::BadInput, "coefficient index out of range in " + path);
    sys.coef(al, be, r, s) = cplx(e.at(4).get<double>(), e.at(5).get<double>());
  }
  return sys;
}

}  // namespace hs
