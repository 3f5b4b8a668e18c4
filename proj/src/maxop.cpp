#include "hs/maxop.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "hs/error.hpp"

namespace hs {

Weight make_weight(const BoundaryField& f, const std::string& label) {
  if (f.channels != 1) fail(Err::BadInput, "weights are scalar fields");
  for (long k = 0; k < f.grid.nodes(); ++k) {
    double v = f.at(k, 0).real();
    if (!(v > 0.0) || f.at(k, 0).imag() != 0.0 || !std::isfinite(v))
      fail(Err::NonPositiveWeight, "weight must be positive and finite at every node");
  }
  return Weight{f, label};
}

namespace {

// Sliding maximum of q over windows of length w; out[k] = max(q[k-w+1..k]),
// indices outside [0,n) skipped. Monotone deque, O(n).
void sliding_max(const std::vector<double>& q, int w, std::vector<double>& out) {
  const int n = static_cast<int>(q.size());
  out.assign(n, 0.0);
  std::deque<int> dq;
  for (int k = 0; k < n; ++k) {
    while (!dq.empty() && q[dq.back()] <= q[k]) dq.pop_back();
    dq.push_back(k);
    if (dq.front() <= k - w) dq.pop_front();
    out[k] = q[dq.front()];
  }
}

// Window means of length w cells over g (zero extension): mean[i] for start
// offset i in [-(w-1), n-1], returned shifted so that out[k] covers windows
// containing node k (start in [k-w+1, k]).
void window_max_means_1d(const std::vector<double>& g, int w, std::vector<double>& out) {
  const int n = static_cast<int>(g.size());
  if (w == 1) {  // singleton window: exact point value, no prefix-sum rounding
    out = g;
    return;
  }
  // prefix sums with clamping
  std::vector<double> pref(n + 1, 0.0);
  for (int i = 0; i < n; ++i) pref[i + 1] = pref[i] + g[i];
  auto range_sum = [&](int lo, int hi) {  // sum over [lo, hi)
    lo = std::max(lo, 0);
    hi = std::min(hi, n);
    return lo >= hi ? 0.0 : pref[hi] - pref[lo];
  };
  // means indexed by start i + (w-1) so sliding_max sees a plain array
  std::vector<double> means(n + w - 1);
  for (int i = -(w - 1); i < n; ++i) means[i + w - 1] = range_sum(i, i + w) / w;
  std::vector<double> sm;
  sliding_max(means, w, sm);
  out.assign(n, 0.0);
  for (int k = 0; k < n; ++k) out[k] = sm[k + w - 1];
}

std::vector<double> modulus_of(const BoundaryField& f) {
  std::vector<double> g(f.grid.nodes());
  for (long k = 0; k < f.grid.nodes(); ++k) g[k] = f.modulus(k);
  return g;
}

std::vector<double> maximal_values(const BoundaryGrid& grid, const std::vector<double>& g) {
  const int N = grid.N;
  std::vector<double> m(g.size(), 0.0);
  if (grid.dim == 1) {
    std::vector<double> cur;
    for (int w = 1; w <= N; w *= 2) {
      window_max_means_1d(g, w, cur);
      for (int k = 0; k < N; ++k) m[k] = std::max(m[k], cur[k]);
    }
  } else {
    // 2-D: square windows; window sums via 2-D prefix, then separable sliding max.
    std::vector<double> pref(static_cast<size_t>(N + 1) * (N + 1), 0.0);
    auto P = [&](int i, int j) -> double& { return pref[static_cast<size_t>(i) * (N + 1) + j]; };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        P(i + 1, j + 1) = g[static_cast<size_t>(i) * N + j] + P(i, j + 1) + P(i + 1, j) - P(i, j);
    auto box_sum = [&](int i0, int j0, int i1, int j1) {  // [i0,i1) x [j0,j1)
      i0 = std::max(i0, 0);
      j0 = std::max(j0, 0);
      i1 = std::min(i1, N);
      j1 = std::min(j1, N);
      if (i0 >= i1 || j0 >= j1) return 0.0;
      return P(i1, j1) - P(i0, j1) - P(i1, j0) + P(i0, j0);
    };
    for (long k = 0; k < grid.nodes(); ++k) m[k] = g[k];  // singleton window, exact
    for (int w = 2; w <= N; w *= 2) {
      const int rows = N + w - 1;
      std::vector<double> means(static_cast<size_t>(rows) * rows);
      for (int i = -(w - 1); i < N; ++i)
        for (int j = -(w - 1); j < N; ++j)
          means[static_cast<size_t>(i + w - 1) * rows + (j + w - 1)] =
              box_sum(i, j, i + w, j + w) / (static_cast<double>(w) * w);
      // sliding max along rows then columns
      std::vector<double> rowmax(means.size()), row(rows), sm;
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < rows; ++j) row[j] = means[static_cast<size_t>(i) * rows + j];
        sliding_max(row, w, sm);
        for (int j = 0; j < rows; ++j) rowmax[static_cast<size_t>(i) * rows + j] = sm[j];
      }
      std::vector<double> col(rows);
      for (int j = w - 1; j < rows; ++j) {
        for (int i = 0; i < rows; ++i) col[i] = rowmax[static_cast<size_t>(i) * rows + j];
        sliding_max(col, w, sm);
        for (int i = w - 1; i < rows; ++i) {
          int ki = i - (w - 1), kj = j - (w - 1);
          double& dst = m[static_cast<size_t>(ki) * N + kj];
          dst = std::max(dst, sm[i]);
        }
      }
    }
  }
  return m;
}

BoundaryField values_to_field(const BoundaryGrid& grid, const std::vector<double>& v) {
  BoundaryField out = make_field(grid, 1);
  for (long k = 0; k < grid.nodes(); ++k) out.at(k, 0) = cplx(v[k], 0.0);
  return out;
}

}  // namespace

BoundaryField hl_maximal(const BoundaryField& f) {
  return values_to_field(f.grid, maximal_values(f.grid, modulus_of(f)));
}

BoundaryField iterated_maximal(const BoundaryField& f) {
  auto m1 = maximal_values(f.grid, modulus_of(f));
  return values_to_field(f.grid, maximal_values(f.grid, m1));
}

MBallReport m_ball_profile(int dim, double R, int N) {
  if (R < 32.0) fail(Err::BadInput, "m_ball_profile needs R >= 32");
  BoundaryGrid grid = make_grid(dim, R, N);
  BoundaryField ind = sample_scalar(grid, [dim](const double* x) {
    double r2 = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
    return r2 < 1.0 ? 1.0 : 0.0;
  });
  auto m1 = maximal_values(grid, modulus_of(ind));
  auto m2 = maximal_values(grid, m1);

  MBallReport rep;
  rep.m_ratio_min = rep.m2_ratio_min = 1e300;
  rep.m_ratio_max = rep.m2_ratio_max = 0.0;
  const int d = dim;
  double x[2];
  for (long k = 0; k < grid.nodes(); ++k) {
    grid.node_coords(k, x);
    double r = std::sqrt(x[0] * x[0] + (d == 2 ? x[1] * x[1] : 0.0));
    if (r > R / 2.0) continue;
    double denom1 = 1.0 / (1.0 + std::pow(r, d));
    double denom2 = (1.0 + std::max(0.0, std::log(std::max(r, 1.0)))) / (1.0 + std::pow(r, d));
    double q1 = m1[k] / denom1;
    double q2 = m2[k] / denom2;
    rep.m_ratio_min = std::min(rep.m_ratio_min, q1);
    rep.m_ratio_max = std::max(rep.m_ratio_max, q1);
    rep.m2_ratio_min = std::min(rep.m2_ratio_min, q2);
    rep.m2_ratio_max = std::max(rep.m2_ratio_max, q2);
    if (d == 1) {
      rep.abscissa.push_back(r);
      rep.m_ratio.push_back(q1);
      rep.m2_ratio.push_back(q2);
    }
  }
  return rep;
}

BoundaryField nontangential_max(const HalfSpaceField& u, const ConeSpec& cone) {
  if (u.heights.empty()) fail(Err::EmptyHeights, "nontangential_max needs stored heights");
  const BoundaryGrid& g = u.grid;
  const int N = g.N;
  std::vector<double> best(g.nodes(), 0.0);
  bool any_height = false;

  for (size_t s = 0; s < u.heights.size(); ++s) {
    double t = u.heights[s];
    if (cone.eps && !(t < *cone.eps)) continue;
    any_height = true;
    // window radius in cells: |x-y| < kappa*t
    int rad = static_cast<int>(std::ceil(cone.kappa * t / g.h)) - 1;
    if (cone.kappa * t > (rad + 1) * g.h) rad += 1;  // strict inequality boundary
    rad = std::max(rad, 0);
    int w = 2 * rad + 1;
    if (g.dim == 1) {
      std::vector<double> q(N), sm;
      for (int k = 0; k < N; ++k) q[k] = u.modulus(static_cast<int>(s), k);
      // centered window max: shift by rad
      std::vector<double> padded(N + 2 * rad, 0.0);
      for (int k = 0; k < N; ++k) padded[k + rad] = q[k];
      sliding_max(padded, w, sm);
      for (int k = 0; k < N; ++k) best[k] = std::max(best[k], sm[k + 2 * rad]);
    } else {
      std::vector<double> q(g.nodes());
      for (long k = 0; k < g.nodes(); ++k) q[k] = u.modulus(static_cast<int>(s), k);
      const int rows = N + 2 * rad;
      std::vector<double> padded(static_cast<size_t>(rows) * rows, 0.0);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          padded[static_cast<size_t>(i + rad) * rows + (j + rad)] =
              q[static_cast<size_t>(i) * N + j];
      std::vector<double> row(rows), sm, rowmax(padded.size());
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < rows; ++j) row[j] = padded[static_cast<size_t>(i) * rows + j];
        sliding_max(row, w, sm);
        for (int j = 0; j < rows; ++j) rowmax[static_cast<size_t>(i) * rows + j] = sm[j];
      }
      std::vector<double> col(rows);
      for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < rows; ++i) col[i] = rowmax[static_cast<size_t>(i) * rows + j];
        sliding_max(col, w, sm);
        for (int i = 0; i < rows; ++i) col[i] = sm[i];
        for (int i = 2 * rad; i < rows; ++i) {
          int ki = i - 2 * rad, kj = j - 2 * rad;
          if (kj < 0 || kj >= N || ki >= N) continue;
          double& dst = best[static_cast<size_t>(ki) * N + kj];
          dst = std::max(dst, col[i]);
        }
      }
    }
  }
  if (!any_height)
    std::fill(best.begin(), best.end(), 0.0);  // empty cone-slab intersection
  return values_to_field(g, best);
}

namespace {

struct WindowScan {
  double best = 0.0;
  long arg_start = 0;
  int arg_w = 1;
};

// max over fully-in-grid windows of avg(w)*phi(window) where phi is supplied
// per window via a second average array.
void ap_scan_1d(const std::vector<double>& w, const std::vector<double>& sig, double pm1,
                WindowScan& out) {
  const int n = static_cast<int>(w.size());
  std::vector<double> pw(n + 1, 0.0), ps(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    pw[i + 1] = pw[i] + w[i];
    ps[i + 1] = ps[i] + sig[i];
  }
  for (int win = 1; win <= n; win *= 2)
    for (int i = 0; i + win <= n; ++i) {
      double aw = (pw[i + win] - pw[i]) / win;
      double as = (ps[i + win] - ps[i]) / win;
      double v = aw * std::pow(as, pm1);
      if (v > out.best) {
        out.best = v;
        out.arg_start = i;
        out.arg_w = win;
      }
    }
}

void a1_scan_1d(const std::vector<double>& w, WindowScan& out) {
  const int n = static_cast<int>(w.size());
  std::vector<double> pw(n + 1, 0.0);
  for (int i = 0; i < n; ++i) pw[i + 1] = pw[i] + w[i];
  // sliding minimum per window size
  for (int win = 1; win <= n; win *= 2) {
    std::deque<int> dq;
    for (int i = 0; i < n; ++i) {
      while (!dq.empty() && w[dq.back()] >= w[i]) dq.pop_back();
      dq.push_back(i);
      if (dq.front() <= i - win) dq.pop_front();
      if (i >= win - 1) {
        int start = i - win + 1;
        double avg = (pw[i + 1] - pw[start]) / win;
        double v = avg / w[dq.front()];
        if (v > out.best) {
          out.best = v;
          out.arg_start = start;
          out.arg_w = win;
        }
      }
    }
  }
}

}  // namespace

ApReport ap_constant(const Weight& w, double p) {
  if (p < 1.0) fail(Err::BadInput, "A_p requires p >= 1");
  const BoundaryGrid& g = w.field.grid;
  std::vector<double> wv(g.nodes());
  for (long k = 0; k < g.nodes(); ++k) wv[k] = w.field.at(k, 0).real();

  WindowScan scan;
  if (g.dim == 1) {
    if (p == 1.0) {
      a1_scan_1d(wv, scan);
    } else {
      double pprime = p / (p - 1.0);
      std::vector<double> sig(wv.size());
      for (size_t i = 0; i < wv.size(); ++i) sig[i] = std::pow(wv[i], 1.0 - pprime);
      ap_scan_1d(wv, sig, p - 1.0, scan);
    }
  } else {
    // 2-D: direct loop over square windows (grids in scope are small).
    const int N = g.N;
    std::vector<double> sig(wv.size(), 0.0);
    double pprime = p > 1.0 ? p / (p - 1.0) : 2.0;
    if (p > 1.0)
      for (size_t i = 0; i < wv.size(); ++i) sig[i] = std::pow(wv[i], 1.0 - pprime);
    std::vector<double> pw(static_cast<size_t>(N + 1) * (N + 1), 0.0),
        psig(static_cast<size_t>(N + 1) * (N + 1), 0.0);
    auto idx = [N](int i, int j) { return static_cast<size_t>(i) * (N + 1) + j; };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        pw[idx(i + 1, j + 1)] =
            wv[static_cast<size_t>(i) * N + j] + pw[idx(i, j + 1)] + pw[idx(i + 1, j)] -
            pw[idx(i, j)];
        psig[idx(i + 1, j + 1)] = sig[static_cast<size_t>(i) * N + j] + psig[idx(i, j + 1)] +
                                  psig[idx(i + 1, j)] - psig[idx(i, j)];
      }
    auto box = [&](const std::vector<double>& pp, int i, int j, int win) {
      return pp[idx(i + win, j + win)] - pp[idx(i, j + win)] - pp[idx(i + win, j)] +
             pp[idx(i, j)];
    };
    for (int win = 1; win <= N; win *= 2)
      for (int i = 0; i + win <= N; ++i)
        for (int j = 0; j + win <= N; ++j) {
          double cells = static_cast<double>(win) * win;
          double aw = box(pw, i, j, win) / cells;
          double v;
          if (p == 1.0) {
            // TODO: separable sliding-window minimum; the direct scan is
            // quadratic in the window size
            double mn = 1e300;
            for (int a = i; a < i + win; ++a)
              for (int b = j; b < j + win; ++b)
                mn = std::min(mn, wv[static_cast<size_t>(a) * N + b]);
            v = aw / mn;
          } else {
            double as = box(psig, i, j, win) / cells;
            v = aw * std::pow(as, p - 1.0);
          }
          if (v > scan.best) {
            scan.best = v;
            scan.arg_start = static_cast<long>(i) * N + j;
            scan.arg_w = win;
          }
        }
  }

  ApReport rep;
  rep.p = p;
  rep.constant = scan.best;
  rep.argmax_side = scan.arg_w * g.h;
  if (g.dim == 1) {
    rep.argmax_center = {g.coord(static_cast<int>(scan.arg_start)) + rep.argmax_side / 2.0};
  } else {
    int i = static_cast<int>(scan.arg_start / g.N), j = static_cast<int>(scan.arg_start % g.N);
    rep.argmax_center = {g.coord(i) + rep.argmax_side / 2.0, g.coord(j) + rep.argmax_side / 2.0};
  }
  return rep;
}

ApReport ap_constant_all_intervals(const Weight& w, double p) {
  if (p < 1.0) fail(Err::BadInput, "A_p requires p >= 1");
  const BoundaryGrid& g = w.field.grid;
  if (g.dim != 1) fail(Err::BadInput, "all-intervals sweep is dim=1 only");
  const int n = g.N;
  std::vector<double> wv(n), sig(n);
  for (int k = 0; k < n; ++k) wv[k] = w.field.at(k, 0).real();
  double pprime = p > 1.0 ? p / (p - 1.0) : 2.0;
  for (int k = 0; k < n; ++k) sig[k] = p > 1.0 ? std::pow(wv[k], 1.0 - pprime) : 0.0;
  std::vector<double> pw(n + 1, 0.0), ps(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    pw[i + 1] = pw[i] + wv[i];
    ps[i + 1] = ps[i] + sig[i];
  }
  ApReport rep;
  rep.p = p;
  rep.constant = 0.0;
  for (int i = 0; i < n; ++i) {
    double mn = 1e300;
    for (int j = i; j < n; ++j) {
      int len = j - i + 1;
      double aw = (pw[j + 1] - pw[i]) / len;
      double v;
      if (p == 1.0) {
        mn = std::min(mn, wv[j]);
        v = aw / mn;
      } else {
        double as = (ps[j + 1] - ps[i]) / len;
        v = aw * std::pow(as, p - 1.0);
      }
      if (v > rep.constant) {
        rep.constant = v;
        rep.argmax_center = {g.coord(i) + len * g.h / 2.0};
        rep.argmax_side = len * g.h;
      }
    }
  }
  return rep;
}

ApertureReport cone_aperture_comparison(const HalfSpaceField& u,
                                        const std::vector<double>& kappas, double p,
                                        const Weight* w) {
  if (!(p > 0.0)) fail(Err::BadInput, "aperture comparison requires p > 0");
  ApertureReport rep;
  const double cell = u.grid.cell_measure();
  for (double kappa : kappas) {
    BoundaryField nu = nontangential_max(u, ConeSpec{kappa, std::nullopt});
    double acc = 0.0;
    for (long k = 0; k < u.grid.nodes(); ++k) {
      double wk = w ? w->field.at(k, 0).real() : 1.0;
      acc += std::pow(nu.at(k, 0).real(), p) * wk;
    }
    rep.rows.push_back({kappa, std::pow(acc * cell, 1.0 / p)});
  }
  const size_t m = rep.rows.size();
  rep.ratio.assign(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < m; ++j) {
      double denom = rep.rows[j].norm;
      rep.ratio[i][j] = denom > 0.0 ? rep.rows[i].norm / denom : 0.0;
      rep.max_ratio = std::max(rep.max_ratio, rep.ratio[i][j]);
    }
  return rep;
}

}  // namespace hs
