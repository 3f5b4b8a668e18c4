#include "hs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hs/error.hpp"

namespace hs {

KernelMethod kernel_method_from_string(const std::string& name) {
  if (name == "explicit") return KernelMethod::HarmonicExplicit;
  if (name == "radial") return KernelMethod::RadialReflection;
  if (name == "symbol") return KernelMethod::FourierSymbol;
  fail(Err::BadInput, "unknown kernel method: " + name + " (explicit|radial|symbol)");
}

std::string kernel_method_name(KernelMethod m) {
  switch (m) {
    case KernelMethod::HarmonicExplicit: return "explicit";
    case KernelMethod::RadialReflection: return "radial";
    case KernelMethod::FourierSymbol: return "symbol";
  }
  return "?";
}

namespace {

bool is_scaled_laplacian(const EllipticSystem& sys, double* scale_out) {
  cplx c = sys.coef(0, 0, 0, 0);
  if (!(c.real() > 0.0) || c.imag() != 0.0) return false;
  for (int al = 0; al < sys.M; ++al)
    for (int be = 0; be < sys.M; ++be)
      for (int r = 0; r < sys.n; ++r)
        for (int s = 0; s < sys.n; ++s) {
          cplx expect = (al == be && r == s) ? c : cplx(0.0, 0.0);
          if (std::abs(sys.coef(al, be, r, s) - expect) > 1e-14 * std::abs(c)) return false;
        }
  if (scale_out) *scale_out = c.real();
  return true;
}

double urand(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PoissonConstruction build_kernel(const EllipticSystem& sys, const BoundaryGrid& grid,
                                 KernelMethod method) {
  switch (method) {
    case KernelMethod::HarmonicExplicit: {
      double scale = 0.0;
      if (!is_scaled_laplacian(sys, &scale))
        fail(Err::BadInput, "the explicit kernel is defined for the Laplacian only");
      PoissonConstruction base = harmonic_poisson(sys.n, grid);
      if (sys.M == 1) return base;
      // decoupled channels share the scalar kernel
      PoissonConstruction pc = base;
      pc.system = sys;
      pc.M = sys.M;
      int M = sys.M;
      auto scalar = base.keval;
      pc.keval = [scalar, M](const double* xp, double t) {
        cplx v = scalar(xp, t)[0];
        std::vector<cplx> out(static_cast<size_t>(M) * M, cplx(0.0, 0.0));
        for (int a = 0; a < M; ++a) out[static_cast<size_t>(a) * M + a] = v;
        return out;
      };
      pc.profile = pc.slice(1.0, false);
      return pc;
    }
    case KernelMethod::RadialReflection: {
      FundamentalSolution E;
      if (sys.M == 1) {
        std::vector<cplx> A(static_cast<size_t>(sys.n) * sys.n);
        for (int r = 0; r < sys.n; ++r)
          for (int s = 0; s < sys.n; ++s)
            A[static_cast<size_t>(r) * sys.n + s] = sys.coef(0, 0, r, s);
        E = scalar_fundamental_solution(sys.n, A);
      } else {
        E = sphere_quadrature_fundamental_solution(sys);
      }
      return poisson_from_green_radial(E, sys, grid);
    }
    case KernelMethod::FourierSymbol:
      return fourier_symbol_poisson(sys, grid);
  }
  fail(Err::BadInput, "unreachable kernel method");
}

std::vector<double> default_heights(const BoundaryGrid& grid) {
  std::vector<double> out;
  double t = 2.0 * grid.h;
  while (t <= grid.R / 8.0) {
    out.push_back(t);
    t *= 2.0;
  }
  if (out.empty()) out.push_back(2.0 * grid.h);
  return out;
}

HalfSpaceField solve_with_kernel(const PoissonConstruction& pc, const BoundaryField& datum,
                                 const std::vector<double>& heights) {
  if (!(pc.grid == datum.grid)) fail(Err::GridMismatch, "datum and kernel grids differ");
  if (pc.M != datum.channels) fail(Err::GridMismatch, "datum channels must match the system");
  for (double t : heights)
    if (t < 2.0 * datum.grid.h * (1.0 - 1e-12))
      fail(Err::BadInput, "heights must stay above 2h to resolve the kernel peak");
  HalfSpaceField u = make_halfspace_field(datum.grid, heights, datum.channels);
  for (size_t s = 0; s < heights.size(); ++s) {
    KernelMatrix kt = pc.slice(heights[s], true);
    BoundaryField slice = fft_convolve(kt, datum);
    for (long k = 0; k < datum.grid.nodes(); ++k)
      for (int c = 0; c < datum.channels; ++c) u.at(static_cast<int>(s), k, c) = slice.at(k, c);
  }
  return u;
}

HalfSpaceField solve(const DirichletProblem& prob) {
  PoissonConstruction pc = build_kernel(prob.system, prob.datum.grid, prob.method);
  return solve_with_kernel(pc, prob.datum, prob.heights);
}

BoundaryField random_bumps(const BoundaryGrid& grid, int channels, unsigned seed, bool positive,
                           double support_radius) {
  std::mt19937_64 rng(seed);
  struct Bump {
    double amp, c0, c1, width;
  };
  std::vector<std::vector<Bump>> bumps(channels);
  for (int c = 0; c < channels; ++c)
    for (int b = 0; b < 6; ++b) {
      Bump bp;
      bp.amp = 0.3 + 0.7 * urand(rng);
      double flip = urand(rng);
      if (!positive && flip < 0.5) bp.amp = -bp.amp;
      bp.c0 = (2.0 * urand(rng) - 1.0) * support_radius * 0.8;
      bp.c1 = (2.0 * urand(rng) - 1.0) * support_radius * 0.8;
      bp.width = 0.5 + 1.5 * urand(rng);
      bumps[c].push_back(bp);
    }
  return sample(grid, channels, [&](const double* x, cplx* out) {
    for (int c = 0; c < channels; ++c) {
      double acc = 0.0;
      for (const Bump& b : bumps[c]) {
        double d2 = (x[0] - b.c0) * (x[0] - b.c0);
        if (grid.dim == 2) d2 += (x[1] - b.c1) * (x[1] - b.c1);
        acc += b.amp * std::exp(-d2 / (b.width * b.width));
      }
      out[c] = cplx(acc, 0.0);
    }
  });
}

TraceReport trace_convergence(const HalfSpaceField& u, const BoundaryField& f,
                              const ConeSpec& cone) {
  (void)cone;
  const BoundaryGrid& g = u.grid;
  if (!(g == f.grid)) fail(Err::GridMismatch, "trace check needs one grid");
  // jump detector: increments far above the smooth-field scale
  double fmax = 0.0;
  for (long k = 0; k < g.nodes(); ++k) fmax = std::max(fmax, f.modulus(k));
  std::vector<bool> jump(g.nodes(), false);
  const int N = g.N;
  auto mark = [&](long a, long b) {
    double d = 0.0;
    for (int c = 0; c < f.channels; ++c) d = std::max(d, std::abs(f.at(a, c) - f.at(b, c)));
    if (d > 0.1 * fmax) jump[a] = jump[b] = true;
  };
  if (g.dim == 1) {
    for (int k = 0; k + 1 < N; ++k) mark(k, k + 1);
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j + 1 < N; ++j) {
        mark(static_cast<long>(i) * N + j, static_cast<long>(i) * N + j + 1);
        mark(static_cast<long>(j) * N + i, static_cast<long>(j + 1) * N + i);
      }
  }
  const int guard = 4;
  std::vector<bool> probe(g.nodes(), true);
  for (long k = 0; k < g.nodes(); ++k) {
    if (!jump[k]) continue;
    int idx[2] = {0, 0};
    g.unflatten(k, idx);
    for (int di = -guard; di <= guard; ++di)
      for (int dj = (g.dim == 2 ? -guard : 0); dj <= (g.dim == 2 ? guard : 0); ++dj) {
        int ii = idx[0] + di, jj = g.dim == 2 ? idx[1] + dj : 0;
        if (ii < 0 || ii >= N || (g.dim == 2 && (jj < 0 || jj >= N))) continue;
        int id2[2] = {ii, jj};
        probe[g.flatten(id2)] = false;
      }
  }

  TraceReport rep;
  std::vector<double> devs(u.heights.size(), 0.0);
  for (size_t s = 0; s < u.heights.size(); ++s)
    for (long k = 0; k < g.nodes(); ++k) {
      if (!probe[k]) continue;
      double d = 0.0;
      for (int c = 0; c < f.channels; ++c)
        d = std::max(d, std::abs(u.at(static_cast<int>(s), k, c) - f.at(k, c)));
      devs[s] = std::max(devs[s], d);
      if (s == 0) ++rep.probe_count;
    }
  rep.max_deviation = devs.empty() ? 0.0 : devs[0];
  // rate fit over the decreasing tail only; large heights sit outside the
  // linear regime
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  size_t fit_count = devs.size() / 2 + 1;
  for (size_t s = 0; s < std::min(fit_count, devs.size()); ++s) {
    if (!(devs[s] > 0.0)) continue;
    double lx = std::log(u.heights[s]), ly = std::log(devs[s]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  rep.decay_rate = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
  return rep;
}

NtDominationReport nt_domination(const EllipticSystem& sys, const BoundaryGrid& grid,
                                 KernelMethod method, const ConeSpec& cone, int trials,
                                 unsigned seed) {
  if (trials < 1) fail(Err::BadInput, "nt_domination needs at least one trial");
  PoissonConstruction pc = build_kernel(sys, grid, method);
  auto heights = default_heights(grid);
  NtDominationReport rep;
  for (int trial = 0; trial < trials; ++trial) {
    BoundaryField f = random_bumps(grid, pc.M, seed + trial, true, grid.R / 4.0);
    HalfSpaceField u = solve_with_kernel(pc, f, heights);
    BoundaryField nu = nontangential_max(u, cone);
    BoundaryField mf = hl_maximal(f);
    double mfmax = 0.0;
    for (long k = 0; k < grid.nodes(); ++k) mfmax = std::max(mfmax, mf.at(k, 0).real());
    double worst = 0.0;
    for (long k = 0; k < grid.nodes(); ++k) {
      double denom = mf.at(k, 0).real();
      if (denom <= 1e-14 * mfmax) continue;  // 0/0 guard
      worst = std::max(worst, nu.at(k, 0).real() / denom);
    }
    rep.per_trial.push_back(worst);
    rep.global_max = std::max(rep.global_max, worst);
  }
  return rep;
}

SemigroupReport semigroup_check(const PoissonConstruction& pc, double t1, double t2) {
  const BoundaryGrid& g = pc.grid;
  for (double t : {t1, t2, t1 + t2}) {
    if (t < 2.0 * g.h * (1.0 - 1e-12)) fail(Err::BadInput, "semigroup times must stay above 2h");
    if (t > g.R / 8.0 * (1.0 + 1e-12)) fail(Err::BadInput, "semigroup times must stay below R/8");
  }
  KernelMatrix p1 = pc.slice(t1, true);
  KernelMatrix p2 = pc.slice(t2, true);
  KernelMatrix p12 = pc.slice(t1 + t2, true);
  KernelMatrix a = convolve_kernels(p1, p2);
  KernelMatrix b = convolve_kernels(p2, p1);

  SemigroupReport rep;
  for (size_t i = 0; i < p12.values.size(); ++i) {
    rep.residual = std::max(rep.residual, std::abs(a.values[i] - p12.values[i]));
    rep.commutator = std::max(rep.commutator, std::abs(a.values[i] - b.values[i]));
    rep.peak = std::max(rep.peak, std::abs(p12.values[i]));
  }
  return rep;
}

FatouReport fatou_reconstruction(const HalfSpaceField& u, const PoissonConstruction& pc,
                                 double t_small, double t_big) {
  if (!(t_small < t_big)) fail(Err::BadInput, "need t_small < t_big");
  int is = -1, ib = -1;
  for (size_t s = 0; s < u.heights.size(); ++s) {
    if (u.heights[s] == t_small) is = static_cast<int>(s);
    if (u.heights[s] == t_big) ib = static_cast<int>(s);
  }
  if (is < 0 || ib < 0) fail(Err::BadInput, "both heights must be stored in the field");

  BoundaryField trace = make_field(u.grid, u.channels);
  for (long k = 0; k < u.grid.nodes(); ++k)
    for (int c = 0; c < u.channels; ++c) trace.at(k, c) = u.at(is, k, c);
  KernelMatrix kt = pc.slice(t_big - t_small, true);
  BoundaryField rec = fft_convolve(kt, trace);

  FatouReport rep;
  for (long k = 0; k < u.grid.nodes(); ++k)
    for (int c = 0; c < u.channels; ++c)
      rep.residual = std::max(rep.residual, std::abs(rec.at(k, c) - u.at(ib, k, c)));
  return rep;
}

AtomDecayReport atom_decay(const Atom& atom, const EllipticSystem& sys, KernelMethod method,
                           const ConeSpec& cone) {
  const BoundaryGrid& g = atom.field.grid;
  if (atom.field.channels != sys.M)
    fail(Err::InvalidAtom, "atom channel count must match the system size");
  PoissonConstruction pc = build_kernel(sys, g, method);
  HalfSpaceField u = solve_with_kernel(pc, atom.field, default_heights(g));
  BoundaryField nu = nontangential_max(u, cone);

  AtomDecayReport rep;
  double cell = g.cell_measure();
  double mass = 0.0;
  for (long k = 0; k < g.nodes(); ++k) mass += nu.at(k, 0).real();
  rep.l1_mass = mass * cell;

  const int n = sys.n;
  double ell = atom.cube.side;
  double off_radius = std::sqrt(static_cast<double>(n)) * ell;  // covers 2 sqrt(n) Q
  // slope fit beyond the near-field transition zone, inside the wrap-clean core
  double fit_lo = std::max(off_radius, 2.0 * ell);
  double fit_hi = g.R / 3.0;
  double x[2];
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (long k = 0; k < g.nodes(); ++k) {
    g.node_coords(k, x);
    double d2 = 0.0;
    for (int dd = 0; dd < g.dim; ++dd)
      d2 += (x[dd] - atom.cube.center[dd]) * (x[dd] - atom.cube.center[dd]);
    double dist = std::sqrt(d2);
    if (dist <= off_radius) continue;
    double v = nu.at(k, 0).real();
    rep.off_cube_sup = std::max(rep.off_cube_sup, v * std::pow(dist, n) / ell);
    if (dist > fit_lo && dist <= fit_hi && v > 0.0) {
      double lx = std::log(dist), ly = std::log(v);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++m;
    }
  }
  rep.decay_exponent = m >= 2 ? -(m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
  if (atom.flavor == AtomFlavor::BeurlingCentral)
    rep.beurling_sum = beurling_norm(nu, atom.exponent);
  return rep;
}

namespace {

void screen_spec(const NormSpec& spec) {
  switch (spec.kind) {
    case NormSpec::Kind::Lebesgue:
    case NormSpec::Kind::Lorentz:
    case NormSpec::Kind::Orlicz:
    case NormSpec::Kind::Zygmund: {
      BoydReport b = boyd_indices(spec);
      if (!(b.p_lower > 1.01))
        fail(Err::SpecScreenFailed, spec.label() + ": lower Boyd index estimate <= 1");
      return;
    }
    case NormSpec::Kind::WeightedLebesgue: {
      if (!(spec.p > 1.0)) fail(Err::SpecScreenFailed, "weighted Lebesgue needs p > 1");
      ApReport ap = ap_constant(*spec.weight, spec.p);
      if (!(ap.constant < 1e6))
        fail(Err::SpecScreenFailed, spec.label() + ": A_p constant screen failed");
      return;
    }
    case NormSpec::Kind::WeightedRI: {
      BoydReport b = boyd_indices(*spec.base);
      if (!(b.p_lower > 1.01))
        fail(Err::SpecScreenFailed, spec.label() + ": base lower Boyd index <= 1");
      ApReport ap = ap_constant(*spec.weight, b.p_lower);
      if (!(ap.constant < 1e6))
        fail(Err::SpecScreenFailed, spec.label() + ": A_p constant screen failed");
      return;
    }
    case NormSpec::Kind::VariableExponent:
      if (!(spec.p > 1.05))
        fail(Err::SpecScreenFailed, "variable exponent needs p- bounded away from 1");
      return;
  }
}

}  // namespace

std::vector<WellposednessRow> wellposedness_table(const std::vector<EllipticSystem>& systems,
                                                  const std::vector<NormSpec>& specs,
                                                  const BoundaryGrid& grid, KernelMethod method,
                                                  const ConeSpec& cone, int trials,
                                                  unsigned seed) {
  for (const NormSpec& spec : specs) screen_spec(spec);
  std::vector<WellposednessRow> table;
  for (const EllipticSystem& sys : systems) {
    PoissonConstruction pc = build_kernel(sys, grid, method);
    auto heights = default_heights(grid);
    for (const NormSpec& spec : specs) {
      WellposednessRow row;
      row.system = sys.label;
      row.space = spec.label();
      for (int trial = 0; trial < trials; ++trial) {
        BoundaryField f = random_bumps(grid, pc.M, seed + trial, false, grid.R / 4.0);
        HalfSpaceField u = solve_with_kernel(pc, f, heights);
        BoundaryField nu = nontangential_max(u, cone);
        double nf = norm(f, spec);
        if (!(nf > 0.0)) continue;
        row.max_ratio = std::max(row.max_ratio, norm(nu, spec) / nf);
      }
      table.push_back(row);
    }
  }
  return table;
}

OperatorBoundReport semigroup_operator_bound(const PoissonConstruction& pc, const NormSpec& spec,
                                             const std::vector<double>& t_list, int trials,
                                             unsigned seed) {
  screen_spec(spec);
  // bump trials plus one spread-out probe: narrow data decays under T_t in
  // scale-sensitive norms while the operator norm itself stays flat in t
  std::vector<BoundaryField> data;
  for (int trial = 0; trial < trials; ++trial)
    data.push_back(random_bumps(pc.grid, pc.M, seed + trial, true, pc.grid.R / 4.0));
  double wide = pc.grid.R / 3.0;
  data.push_back(sample(pc.grid, pc.M, [&](const double* x, cplx* out) {
    double r2 = x[0] * x[0] + (pc.grid.dim == 2 ? x[1] * x[1] : 0.0);
    for (int c = 0; c < pc.M; ++c) out[c] = cplx(std::exp(-r2 / (wide * wide)), 0.0);
  }));
  // the constant attains the torus operator norm for mass-one kernels
  data.push_back(sample(pc.grid, pc.M, [&](const double*, cplx* out) {
    for (int c = 0; c < pc.M; ++c) out[c] = cplx(1.0, 0.0);
  }));

  OperatorBoundReport rep;
  for (double t : t_list) {
    KernelMatrix kt = pc.slice(t, true);
    double worst = 0.0;
    for (const BoundaryField& f : data) {
      double nf = norm(f, spec);
      if (!(nf > 0.0)) continue;  // 0/0 guard
      BoundaryField tf = fft_convolve(kt, f);
      worst = std::max(worst, norm(tf, spec) / nf);
    }
    rep.t.push_back(t);
    rep.max_ratio.push_back(worst);
    rep.global_max = std::max(rep.global_max, worst);
  }
  return rep;
}

}  // namespace hs
