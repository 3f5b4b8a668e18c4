#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hs/error.hpp"
#include "hs/solver.hpp"

using namespace hs;

TEST_CASE("constant datum propagates unchanged up to the tail budget") {
  BoundaryGrid g = make_grid(1, 32.0, 1024);
  BoundaryField f = sample_scalar(g, [](const double*) { return 0.8; });
  DirichletProblem prob{laplacian(2, 1), f, default_heights(g), KernelMethod::HarmonicExplicit};
  HalfSpaceField u = solve(prob);
  for (size_t s = 0; s < u.heights.size(); ++s) {
    // 3-image periodization covers [-7R, 7R): the missing kernel mass at
    // height t is 1 - (2/pi) atan(7R/t)
    double t = u.heights[s];
    double budget = 0.8 * (1.0 - 2.0 / M_PI * std::atan(7.0 * g.R / t)) * 1.5 + 1e-6;
    for (long k = 0; k < g.nodes(); ++k)
      CHECK(std::abs(u.at(static_cast<int>(s), k, 0) - cplx(0.8, 0.0)) < budget);
  }
}

TEST_CASE("closed-form indicator solve: u(0,1) = (2/pi) atan(1/t)") {
  // R controls the periodization tail, h the open-endpoint quadrature bias;
  // both must sit below the 1e-3 target
  BoundaryGrid g = make_grid(1, 32.0, 65536);
  BoundaryField f = sample_scalar(g, [](const double* x) { return std::abs(x[0]) < 1.0 ? 1.0 : 0.0; });
  DirichletProblem prob{laplacian(2, 1), f, {0.5, 1.0, 2.0}, KernelMethod::HarmonicExplicit};
  HalfSpaceField u = solve(prob);
  long center = g.N / 2;
  for (size_t s = 0; s < u.heights.size(); ++s) {
    double t = u.heights[s];
    double expect = 2.0 / M_PI * std::atan(1.0 / t);
    CHECK(std::abs(u.at(static_cast<int>(s), center, 0).real() - expect) < 1e-3);
  }
  CHECK(std::abs(u.at(1, center, 0).real() - 0.5) < 1e-3);
}

TEST_CASE("solve linearity") {
  BoundaryGrid g = make_grid(1, 16.0, 512);
  BoundaryField f = random_bumps(g, 1, 11, false, 4.0);
  BoundaryField h = random_bumps(g, 1, 12, false, 4.0);
  BoundaryField sum = make_field(g, 1);
  for (long k = 0; k < g.nodes(); ++k) sum.at(k, 0) = f.at(k, 0) + h.at(k, 0);

  PoissonConstruction pc = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
  auto hh = default_heights(g);
  HalfSpaceField uf = solve_with_kernel(pc, f, hh);
  HalfSpaceField uh = solve_with_kernel(pc, h, hh);
  HalfSpaceField us = solve_with_kernel(pc, sum, hh);
  for (size_t i = 0; i < us.values.size(); ++i)
    CHECK(std::abs(us.values[i] - uf.values[i] - uh.values[i]) < 1e-12);
}

TEST_CASE("translation equivariance on the periodic grid") {
  BoundaryGrid g = make_grid(1, 16.0, 512);
  BoundaryField f = random_bumps(g, 1, 21, false, 4.0);
  int shift = 37;
  BoundaryField fs = make_field(g, 1);
  for (long k = 0; k < g.nodes(); ++k) fs.at((k + shift) % g.N, 0) = f.at(k, 0);

  PoissonConstruction pc = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
  HalfSpaceField u = solve_with_kernel(pc, f, {1.0});
  HalfSpaceField us = solve_with_kernel(pc, fs, {1.0});
  for (long k = 0; k < g.nodes(); ++k)
    CHECK(std::abs(us.at(0, (k + shift) % g.N, 0) - u.at(0, k, 0)) < 1e-12);
}

TEST_CASE("harmonic scaling consistency across dilated grids") {
  // u_half solves with datum f(2x) on the R/2 grid; nodes align exactly
  BoundaryGrid gfull = make_grid(1, 32.0, 1024);
  BoundaryGrid ghalf = make_grid(1, 16.0, 1024);
  auto ffun = [](double x) { return std::exp(-x * x / 9.0); };
  BoundaryField f = sample_scalar(gfull, [&](const double* x) { return ffun(x[0]); });
  BoundaryField fh = sample_scalar(ghalf, [&](const double* x) { return ffun(2.0 * x[0]); });

  PoissonConstruction pf = build_kernel(laplacian(2, 1), gfull, KernelMethod::HarmonicExplicit);
  PoissonConstruction ph = build_kernel(laplacian(2, 1), ghalf, KernelMethod::HarmonicExplicit);
  HalfSpaceField uf = solve_with_kernel(pf, f, {2.0});
  HalfSpaceField uh = solve_with_kernel(ph, fh, {1.0});
  for (long k = 0; k < ghalf.nodes(); ++k)
    CHECK(std::abs(uh.at(0, k, 0) - uf.at(0, k, 0)) < 2e-3);
}

TEST_CASE("trace convergence for smooth and constant data") {
  BoundaryGrid g = make_grid(1, 16.0, 1024);
  BoundaryField f = sample_scalar(g, [](const double* x) { return std::exp(-x[0] * x[0]); });
  std::vector<double> heights;
  for (double t = 2.0 * g.h; t <= 1.0; t *= 2.0) heights.push_back(t);
  DirichletProblem prob{laplacian(2, 1), f, heights, KernelMethod::HarmonicExplicit};
  HalfSpaceField u = solve(prob);
  TraceReport rep = trace_convergence(u, f, ConeSpec{1.0, std::nullopt});
  CHECK(rep.max_deviation < 0.1);
  CHECK(rep.decay_rate > 0.8);  // first order in t

  BoundaryField c = sample_scalar(g, [](const double*) { return 0.6; });
  HalfSpaceField uc = solve(DirichletProblem{laplacian(2, 1), c, heights,
                                             KernelMethod::HarmonicExplicit});
  TraceReport repc = trace_convergence(uc, c, ConeSpec{1.0, std::nullopt});
  CHECK(repc.max_deviation < 3e-3);

  // jump nodes of an indicator are excluded from the probe set
  BoundaryField ind = sample_scalar(g, [](const double* x) { return std::abs(x[0]) < 1.0 ? 1.0 : 0.0; });
  HalfSpaceField ui = solve(DirichletProblem{laplacian(2, 1), ind, heights,
                                             KernelMethod::HarmonicExplicit});
  TraceReport repi = trace_convergence(ui, ind, ConeSpec{1.0, std::nullopt});
  CHECK(repi.probe_count < g.nodes());
  CHECK(repi.probe_count > 0);
  CHECK(repi.max_deviation < 0.2);
}

TEST_CASE("nontangential domination by the maximal function") {
  BoundaryGrid g = make_grid(1, 32.0, 1024);
  NtDominationReport rep = nt_domination(laplacian(2, 1), g, KernelMethod::HarmonicExplicit,
                                         ConeSpec{1.0, std::nullopt}, 5, 100);
  CHECK(rep.global_max < 25.0);
  CHECK(rep.global_max > 0.5);

  // a delta-like single-cell datum stays under the same envelope
  {
    PoissonConstruction pc = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
    BoundaryField d = make_field(g, 1);
    d.at(g.N / 2, 0) = cplx(1.0, 0.0);
    HalfSpaceField u = solve_with_kernel(pc, d, default_heights(g));
    BoundaryField nu = nontangential_max(u, ConeSpec{1.0, std::nullopt});
    BoundaryField md = hl_maximal(d);
    double mmax = 0.0, worst = 0.0;
    for (long k = 0; k < g.nodes(); ++k) mmax = std::max(mmax, md.at(k, 0).real());
    for (long k = 0; k < g.nodes(); ++k) {
      double den = md.at(k, 0).real();
      if (den <= 1e-14 * mmax) continue;
      worst = std::max(worst, nu.at(k, 0).real() / den);
    }
    CHECK(worst <= 1.3);
  }

  // constant datum: both sides equal the constant
  BoundaryField c = sample_scalar(g, [](const double*) { return 1.0; });
  PoissonConstruction pc = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
  HalfSpaceField u = solve_with_kernel(pc, c, default_heights(g));
  BoundaryField nu = nontangential_max(u, ConeSpec{1.0, std::nullopt});
  BoundaryField mc = hl_maximal(c);
  for (long k = 0; k < g.nodes(); ++k)
    CHECK(nu.at(k, 0).real() / mc.at(k, 0).real() == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("semigroup: harmonic within budget, symbol route near exact") {
  BoundaryGrid g = make_grid(1, 64.0, 4096);
  PoissonConstruction ph = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
  SemigroupReport rh = semigroup_check(ph, 1.0, 1.0);
  CHECK(rh.residual <= 1e-4);
  CHECK(rh.commutator <= 1e-4);

  BoundaryGrid gs = make_grid(1, 32.0, 1024);
  PoissonConstruction ps = build_kernel(lame(2, 1.0, 1.0), gs, KernelMethod::FourierSymbol);
  SemigroupReport rs = semigroup_check(ps, 1.0, 2.0);
  CHECK(rs.residual <= 5e-3);
  CHECK(rs.commutator <= 5e-3);

  // delta-like role of small times: P_{t} * delta = P_{t}
  KernelMatrix p1 = ph.slice(1.0, true);
  KernelMatrix delta = make_kernel(g, 1, 0.0);
  delta.at(g.N / 2, 0, 0) = cplx(1.0 / g.h, 0.0);
  KernelMatrix conv = convolve_kernels(p1, delta);
  double worst = 0.0;
  for (long k = 0; k < g.nodes(); ++k)
    worst = std::max(worst, std::abs(conv.at(k, 0, 0) - p1.at(k, 0, 0)));
  CHECK(worst < 1e-12);

  CHECK_THROWS_AS(semigroup_check(ph, g.h, 1.0), Error);
}

TEST_CASE("fatou reconstruction from an interior trace") {
  BoundaryGrid g = make_grid(1, 32.0, 2048);
  PoissonConstruction ph = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
  BoundaryField f = random_bumps(g, 1, 31, false, 8.0);
  HalfSpaceField u = solve_with_kernel(ph, f, {1.0, 2.0, 3.0});
  FatouReport rep = fatou_reconstruction(u, ph, 1.0, 3.0);
  CHECK(rep.residual <= 1e-4);

  BoundaryField c = sample_scalar(g, [](const double*) { return 0.5; });
  HalfSpaceField uc = solve_with_kernel(ph, c, {1.0, 2.0, 3.0});
  FatouReport repc = fatou_reconstruction(uc, ph, 1.0, 3.0);
  CHECK(repc.residual <= 2e-3);

  BoundaryGrid gs = make_grid(1, 32.0, 1024);
  PoissonConstruction ps = build_kernel(lame(2, 1.0, 1.0), gs, KernelMethod::FourierSymbol);
  BoundaryField f2 = random_bumps(gs, 2, 32, false, 8.0);
  HalfSpaceField us = solve_with_kernel(ps, f2, {1.0, 2.0, 3.0});
  FatouReport reps = fatou_reconstruction(us, ps, 1.0, 3.0);
  CHECK(reps.residual <= 5e-3);

  CHECK_THROWS_AS(fatou_reconstruction(u, ph, 3.0, 1.0), Error);
  CHECK_THROWS_AS(fatou_reconstruction(u, ph, 0.7, 3.0), Error);
}

TEST_CASE("nontangential maximal grows with the stored height set") {
  BoundaryGrid g = make_grid(1, 16.0, 512);
  PoissonConstruction ph = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
  BoundaryField f = random_bumps(g, 1, 41, true, 4.0);
  HalfSpaceField u_coarse = solve_with_kernel(ph, f, {0.5, 2.0});
  HalfSpaceField u_fine = solve_with_kernel(ph, f, {0.5, 1.0, 2.0});
  BoundaryField n_coarse = nontangential_max(u_coarse, ConeSpec{1.0, std::nullopt});
  BoundaryField n_fine = nontangential_max(u_fine, ConeSpec{1.0, std::nullopt});
  for (long k = 0; k < g.nodes(); ++k)
    CHECK(n_fine.at(k, 0).real() >= n_coarse.at(k, 0).real() - 1e-14);
}

TEST_CASE("atom decay for scaled atoms and the linearity of the report") {
  BoundaryGrid g = make_grid(1, 32.0, 2048);
  BoundaryField a = sample_scalar(g, [](const double* x) {
    if (x[0] >= 0.0 && x[0] < 1.0) return 0.5;
    if (x[0] >= -1.0 && x[0] < 0.0) return -0.5;
    return 0.0;
  });
  Atom atom = validate_atom(a, Cube{{0.0}, 2.0}, AtomFlavor::H1, 2.0);
  AtomDecayReport rep = atom_decay(atom, laplacian(2, 1), KernelMethod::HarmonicExplicit,
                                   ConeSpec{1.0, std::nullopt});
  CHECK(rep.l1_mass <= 10.0);
  CHECK(rep.off_cube_sup > 0.0);
  CHECK(std::isfinite(rep.off_cube_sup));
  CHECK(rep.decay_exponent >= 2.0 - 0.2);

  // a/2 halves every linear report entry
  BoundaryField ah = a;
  for (auto& v : ah.values) v *= 0.5;
  Atom atom_h = validate_atom(ah, Cube{{0.0}, 2.0}, AtomFlavor::H1, 2.0);
  AtomDecayReport rep_h = atom_decay(atom_h, laplacian(2, 1), KernelMethod::HarmonicExplicit,
                                     ConeSpec{1.0, std::nullopt});
  CHECK(rep_h.l1_mass == doctest::Approx(rep.l1_mass / 2.0).epsilon(1e-9));
  CHECK(rep_h.off_cube_sup == doctest::Approx(rep.off_cube_sup / 2.0).epsilon(1e-9));

  // central atoms also report the annulus-weighted sum
  Atom batom = validate_atom(a, Cube{{0.0}, 2.0}, AtomFlavor::BeurlingCentral, 2.0);
  AtomDecayReport brep = atom_decay(batom, laplacian(2, 1), KernelMethod::HarmonicExplicit,
                                    ConeSpec{1.0, std::nullopt});
  CHECK(brep.beurling_sum > 0.0);
  CHECK(std::isfinite(brep.beurling_sum));
}

TEST_CASE("wellposedness table and the norm-spec screen") {
  BoundaryGrid g = make_grid(1, 32.0, 1024);
  Weight w = make_weight(
      sample_scalar(g, [&g](const double* x) { return std::sqrt(std::max(std::abs(x[0]), g.h)); }),
      "|x|^1/2");
  std::vector<NormSpec> specs = {lebesgue(2.0), lorentz(2.0, 1.0), zygmund(2.0, 1.0),
                                 weighted_lebesgue(2.0, w)};
  auto table = wellposedness_table({laplacian(2, 1)}, specs, g, KernelMethod::HarmonicExplicit,
                                   ConeSpec{1.0, std::nullopt}, 3);
  REQUIRE(table.size() == 4);
  for (const auto& row : table) {
    CHECK(row.max_ratio > 0.0);
    CHECK(row.max_ratio < 100.0);
  }

  // Lebesgue(1) fails the maximal-operator screen
  CHECK_THROWS_AS(wellposedness_table({laplacian(2, 1)}, {lebesgue(1.0)}, g,
                                      KernelMethod::HarmonicExplicit,
                                      ConeSpec{1.0, std::nullopt}, 1),
                  Error);
}

TEST_CASE("uniform operator bound for positive kernels on Lebesgue spaces") {
  BoundaryGrid g = make_grid(1, 32.0, 1024);
  PoissonConstruction ph = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
  OperatorBoundReport rep = semigroup_operator_bound(ph, lebesgue(2.0), {1.0, 2.0, 4.0}, 4);
  // positive kernel with unit mass: ratios stay below 1 + tail tolerance
  for (double r : rep.max_ratio) {
    CHECK(r <= 1.0 + 1e-2);
    CHECK(r > 0.3);
  }
  // flat in t within 10%
  double lo = *std::min_element(rep.max_ratio.begin(), rep.max_ratio.end());
  double hi = *std::max_element(rep.max_ratio.begin(), rep.max_ratio.end());
  CHECK(hi / lo <= 1.1);
}

TEST_CASE("Lame symbol solve stays under the domination envelope") {
  BoundaryGrid g = make_grid(1, 32.0, 1024);
  NtDominationReport rep = nt_domination(lame(2, 1.0, 1.0), g, KernelMethod::FourierSymbol,
                                         ConeSpec{1.0, std::nullopt}, 3, 1000);
  CHECK(rep.global_max <= 1.3);
  CHECK(rep.global_max > 0.3);
}

TEST_CASE("operator bounds hold beyond Lebesgue spaces") {
  BoundaryGrid g = make_grid(1, 32.0, 512);
  PoissonConstruction ph = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
  for (const NormSpec& s : {lorentz(2.0, 1.0), zygmund(2.0, 1.0)}) {
    OperatorBoundReport rep = semigroup_operator_bound(ph, s, {1.0, 2.0}, 3);
    for (double r : rep.max_ratio) {
      CHECK(std::isfinite(r));
      CHECK(r > 0.3);
      CHECK(r < 3.0);
    }
  }
}

TEST_CASE("planar boundary (n = 3): constant datum propagates") {
  BoundaryGrid g = make_grid(2, 16.0, 64);
  BoundaryField f = sample_scalar(g, [](const double*) { return 0.5; });
  DirichletProblem prob{laplacian(3, 1), f, {1.0, 2.0}, KernelMethod::HarmonicExplicit};
  HalfSpaceField u = solve(prob);
  for (size_t s = 0; s < u.heights.size(); ++s)
    for (long k = 0; k < g.nodes(); ++k)
      CHECK(std::abs(u.at(static_cast<int>(s), k, 0) - cplx(0.5, 0.0)) < 0.02);
  BoundaryField nu = nontangential_max(u, ConeSpec{1.0, std::nullopt});
  for (long k = 0; k < g.nodes(); ++k)
    CHECK(nu.at(k, 0).real() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("solver contract errors") {
  BoundaryGrid g = make_grid(1, 16.0, 512);
  BoundaryField f = random_bumps(g, 1, 51, false, 4.0);
  DirichletProblem bad{laplacian(2, 1), f, {g.h}, KernelMethod::HarmonicExplicit};
  CHECK_THROWS_AS(solve(bad), Error);

  DirichletProblem notlap{lame(2, 1.0, 1.0), f, {1.0}, KernelMethod::HarmonicExplicit};
  CHECK_THROWS_AS(solve(notlap), Error);

  // radial route rejects the Lame system
  BoundaryField f2 = random_bumps(g, 2, 52, false, 4.0);
  DirichletProblem lame_radial{lame(2, 1.0, 1.0), f2, {1.0}, KernelMethod::RadialReflection};
  CHECK_THROWS_AS(solve(lame_radial), Error);
}
