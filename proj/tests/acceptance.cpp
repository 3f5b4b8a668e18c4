// Acceptance suite: every committed contract of the library, run at the
// reference scales with the tolerances pinned below. One line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hs/error.hpp"
#include "hs/experiments.hpp"
#include "hs/io.hpp"
#include "hs/solver.hpp"

using namespace hs;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double urand(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Envelopes env;

// ---------------------------------------------------------------------------
// 1. symbol-built harmonic kernel matches the closed form up to the image tail
void criterion_1() {
  auto t0 = std::chrono::steady_clock::now();
  BoundaryGrid g = make_grid(1, 64.0, 4096);
  PoissonConstruction ps = fourier_symbol_poisson(laplacian(2, 1), g);
  auto pk = [](double x) { return (1.0 / M_PI) / (1.0 + x * x); };
  bool ok = true;
  double worst_excess = 0.0;
  for (int k = 0; k < g.N; ++k) {
    double x = g.coord(k);
    if (std::abs(x) > 16.0) continue;
    double tail = 0.0;
    for (int l = 1; l <= 64; ++l) tail += pk(x + 2.0 * g.R * l) + pk(x - 2.0 * g.R * l);
    double err = std::abs(ps.profile.at(k, 0, 0) - cplx(pk(x), 0.0));
    worst_excess = std::max(worst_excess, err - 1.02 * tail);
    if (err > 1e-6 + 1.02 * tail) ok = false;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > 10.0) ok = false;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "harmonic symbol kernel exact to 1e-6 + image tail (excess %.2e, %.2fs)",
                worst_excess, secs);
  report(1, ok, buf);
}

// 2. kernel normalization: harmonic tail closed form, Lame identity matrix
void criterion_2() {
  BoundaryGrid g = make_grid(1, 64.0, 4096);
  PoissonConstruction ph = harmonic_poisson(2, g);
  cplx total(0, 0);
  for (long k = 0; k < g.nodes(); ++k) total += ph.profile.at(k, 0, 0);
  double dev_h = std::abs(total * g.cell_measure() - 2.0 / M_PI * std::atan(g.R));

  PoissonConstruction pl = fourier_symbol_poisson(lame(2, 1.0, 1.0), g);
  double dev_l = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      cplx acc(0, 0);
      for (long k = 0; k < g.nodes(); ++k) acc += pl.profile.at(k, a, b);
      acc *= g.cell_measure();
      if (a == b) acc -= 1.0;
      dev_l = std::max(dev_l, std::abs(acc));
    }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "normalization: harmonic dev %.2e <= 1e-9, Lame dev %.2e <= 5e-3", dev_h, dev_l);
  report(2, dev_h <= 1e-9 && dev_l <= 5e-3, buf);
}

// 3. semigroup composition with decreasing residual under refinement
void criterion_3() {
  BoundaryGrid g = make_grid(1, 64.0, 4096);
  PoissonConstruction ph = harmonic_poisson(2, g);
  SemigroupReport h_fine = semigroup_check(ph, 1.0, 1.0);
  BoundaryGrid gc = make_grid(1, 32.0, 2048);
  SemigroupReport h_coarse = semigroup_check(harmonic_poisson(2, gc), 1.0, 1.0);

  PoissonConstruction pl = fourier_symbol_poisson(lame(2, 1.0, 1.0), g);
  SemigroupReport l_fine = semigroup_check(pl, 1.0, 2.0);
  SemigroupReport l_coarse =
      semigroup_check(fourier_symbol_poisson(lame(2, 1.0, 1.0), gc), 1.0, 2.0);

  bool ok = h_fine.residual <= 1e-4 && h_fine.commutator <= 1e-4 && l_fine.residual <= 5e-3 &&
            l_fine.commutator <= 5e-3 &&
            h_fine.residual <= h_coarse.residual * 1.05 + 1e-10 &&
            l_fine.residual <= l_coarse.residual * 1.05 + 1e-10;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "semigroup: harmonic %.2e (coarse %.2e), Lame %.2e (coarse %.2e), commutators ok",
                h_fine.residual, h_coarse.residual, l_fine.residual, l_coarse.residual);
  report(3, ok, buf);
}

// 4. radial-reflection kernel reproduces the harmonic closed form
void criterion_4() {
  bool ok = true;
  double worst = 0.0;
  for (int n : {2, 3}) {
    BoundaryGrid g = make_grid(n - 1, 16.0, n == 2 ? 1024 : 64);
    PoissonConstruction pr = build_kernel(laplacian(n, 1), g, KernelMethod::RadialReflection);
    PoissonConstruction ph = harmonic_poisson(n, g);
    for (long k = 0; k < g.nodes(); ++k) {
      double a = pr.profile.at(k, 0, 0).real();
      double b = ph.profile.at(k, 0, 0).real();
      double rel = std::abs(a - b) / std::abs(b);
      worst = std::max(worst, rel);
      if (rel > 1e-8) ok = false;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "radial reflection matches the harmonic kernel (rel %.2e)",
                worst);
  report(4, ok, buf);
}

// 5. sphere-quadrature fundamental solution against the closed forms
void criterion_5() {
  bool ok = true;
  auto Eq3 = sphere_quadrature_fundamental_solution(laplacian(3, 1), 590, 1e-2);
  std::vector<cplx> eye3 = {cplx(1, 0), 0, 0, 0, cplx(1, 0), 0, 0, 0, cplx(1, 0)};
  auto E3 = scalar_fundamental_solution(3, eye3);
  double worst = 0.0;
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    double x[3] = {r * 0.36, -r * 0.48, r * 0.8};
    double got = Eq3.eval(x)[0].real();
    double ref = E3.eval(x)[0].real();
    worst = std::max(worst, std::abs(got - ref) / std::abs(ref));
  }
  if (worst > 1e-3) ok = false;

  auto Eq2 = sphere_quadrature_fundamental_solution(laplacian(2, 1), 512, 1e-2);
  double pin[2] = {1.0, 0.0};
  double c0 = Eq2.eval(pin)[0].real();
  double worst2 = 0.0;
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    double x[2] = {r * 0.6, r * 0.8};
    double got = Eq2.eval(x)[0].real() - c0;
    double ref = std::log(r) / (2.0 * M_PI);
    worst2 = std::max(worst2, std::abs(got - ref) / std::max(std::abs(ref), 0.1));
  }
  if (worst2 > 1e-3) ok = false;

  double sym = 0.0;
  for (double r : {0.5, 2.0}) {
    double x[3] = {r * 0.36, -r * 0.48, r * 0.8};
    double xm[3] = {-x[0], -x[1], -x[2]};
    double a = Eq3.eval(x)[0].real(), b = Eq3.eval(xm)[0].real();
    sym = std::max(sym, std::abs(a - b) / std::abs(a));
  }
  if (sym > 1e-9) ok = false;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "sphere-quadrature E: n=3 rel %.2e, n=2 pinned rel %.2e, symmetry %.2e", worst,
                worst2, sym);
  report(5, ok, buf);
}

// 6. unit-ball maximal envelopes and the exact dyadic-aligned values
void criterion_6() {
  BoundaryGrid g = make_grid(1, 64.0, 8192);
  BoundaryField ball = sample_scalar(g, [](const double* x) { return std::abs(x[0]) < 1.0 ? 1.0 : 0.0; });
  BoundaryField m1 = hl_maximal(ball);
  BoundaryField m2 = iterated_maximal(ball);
  bool ok = true;
  double m2lo = 1e300, m2hi = 0.0;
  for (long k = 0; k < g.nodes(); ++k) {
    double x = std::abs(g.coord(static_cast<int>(k)));
    if (x > 32.0) continue;
    double q1 = m1.at(k, 0).real() * (1.0 + x);
    if (q1 < 0.9 || q1 > 2.1) ok = false;
    double q2 = m2.at(k, 0).real() * (1.0 + x) / (1.0 + std::max(0.0, std::log(std::max(x, 1.0))));
    m2lo = std::min(m2lo, q2);
    m2hi = std::max(m2hi, q2);
  }
  if (m2hi / m2lo > 50.0) ok = false;
  // dyadic-aligned probes where the optimizing interval lies in the family
  double worst = 0.0;
  for (double xp : {3.0, 7.0, 15.0, 31.0, -3.0, -7.0, -15.0, -31.0}) {
    long k = static_cast<long>((xp + g.R) / g.h + 0.5);
    double got = m1.at(k, 0).real();
    double expect = 2.0 / (1.0 + std::abs(xp));
    worst = std::max(worst, std::abs(got - expect));
    if (std::abs(got - expect) > 2.0 * g.h) ok = false;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "maximal envelopes in [0.9,2.1], iterated spread %.2f <= 50, probes off %.2e",
                m2hi / m2lo, worst);
  report(6, ok, buf);
}

// 7. nontangential domination by the maximal function, stable across R
void criterion_7() {
  double cap = env.at("nt_domination.max_ratio");
  double stability = env.at("nt_domination.r_stability");
  std::vector<double> maxima;
  for (double R : {32.0, 64.0}) {
    BoundaryGrid g = make_grid(1, R, static_cast<int>(64 * R));
    auto rep = nt_domination(laplacian(2, 1), g, KernelMethod::HarmonicExplicit,
                             ConeSpec{1.0, std::nullopt}, 20, 1000);
    maxima.push_back(rep.global_max);
  }
  bool ok = maxima[0] <= cap && maxima[1] <= cap &&
            std::abs(maxima[1] - maxima[0]) <= stability * std::min(maxima[0], maxima[1]);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "cone-vs-maximal ratio %.3f / %.3f within envelope %.2f, stable to 20%%",
                maxima[0], maxima[1], cap);
  report(7, ok, buf);
}

// 8. closed-form indicator solve
void criterion_8() {
  BoundaryGrid g = make_grid(1, 32.0, 65536);
  BoundaryField f = sample_scalar(g, [](const double* x) { return std::abs(x[0]) < 1.0 ? 1.0 : 0.0; });
  HalfSpaceField u = solve(DirichletProblem{laplacian(2, 1), f, {1.0},
                                            KernelMethod::HarmonicExplicit});
  double got = u.at(0, g.N / 2, 0).real();
  char buf[120];
  std::snprintf(buf, sizeof(buf), "indicator solve u(0,1) = %.6f vs 0.5 (err %.2e <= 1e-3)", got,
                std::abs(got - 0.5));
  report(8, std::abs(got - 0.5) <= 1e-3, buf);
}

// 9. norm engine: Lorentz closed forms, Orlicz power match, Holder pairs
void criterion_9() {
  BoundaryGrid g = make_grid(1, 16.0, 2048);
  bool ok = true;
  int combo = 0;
  double lens[3] = {0.5, 2.0, 8.0};
  for (double p : {1.5, 2.0, 3.0})
    for (double q : {1.0, 2.0, 4.0}) {
      double len = lens[combo % 3];
      ++combo;
      BoundaryField f = sample_scalar(
          g, [len](const double* x) { return (x[0] >= 0.0 && x[0] < len) ? 1.0 : 0.0; });
      double got = norm(f, lorentz(p, q));
      double hi = std::pow(p / q, 1.0 / q) * std::pow(len + g.h, 1.0 / p);
      double lo = std::pow(p / q, 1.0 / q) * std::pow(len - g.h, 1.0 / p);
      if (got < lo - 1e-12 || got > hi + 1e-12) ok = false;
    }

  std::mt19937_64 rng(99);
  BoundaryGrid gs = make_grid(1, 8.0, 256);
  for (int trial = 0; trial < 100; ++trial) {
    BoundaryField f = make_field(gs, 1);
    for (long k = 0; k < gs.nodes(); ++k) f.at(k, 0) = cplx(urand(rng) - 0.5, 0.0);
    for (double p : {2.0}) {
      double a = norm(f, orlicz(young_power(p)));
      double b = norm(f, lebesgue(p));
      if (std::abs(a - b) > 1e-9 * std::max(1.0, b)) ok = false;
    }
  }

  for (unsigned seed = 500; seed < 600; ++seed) {
    std::mt19937_64 r2(seed);
    BoundaryField f = make_field(gs, 1), h = make_field(gs, 1);
    for (long k = 0; k < gs.nodes(); ++k) {
      f.at(k, 0) = cplx(urand(r2) - 0.5, 0.0);
      h.at(k, 0) = cplx(urand(r2) - 0.5, 0.0);
    }
    for (const NormSpec& s : {lebesgue(3.0), lorentz(2.0, 1.0)}) {
      HolderPair pr = holder_pairing(f, h, s);
      if (pr.lhs > pr.rhs * (1.0 + 1e-9)) ok = false;
    }
  }
  report(9, ok, "norm engine: Lorentz indicators, Orlicz power match, Holder pairs");
}

// 10. Boyd index recovery
void criterion_10() {
  double tol = env.at("boyd.tolerance");
  bool ok = true;
  double worst = 0.0;
  struct Case {
    NormSpec spec;
    double expect;
  };
  std::vector<Case> cases;
  cases.push_back({lebesgue(2.0), 2.0});
  cases.push_back({lorentz(3.0, 1.0), 3.0});
  cases.push_back({zygmund(2.0, 1.0), 2.0});
  for (auto& c : cases) {
    BoydReport b = boyd_indices(c.spec);
    worst = std::max({worst, std::abs(b.p_lower - c.expect), std::abs(b.q_upper - c.expect)});
    if (std::abs(b.p_lower - c.expect) > tol || std::abs(b.q_upper - c.expect) > tol) ok = false;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "Boyd indices recovered within %.2f (worst %.3f)", tol, worst);
  report(10, ok, buf);
}

// 11. aperture comparability with exact monotonicity
void criterion_11() {
  double cap = env.at("aperture.max_ratio");
  BoundaryGrid g = make_grid(1, 64.0, 4096);
  PoissonConstruction pc = build_kernel(laplacian(2, 1), g, KernelMethod::HarmonicExplicit);
  auto heights = default_heights(g);
  bool ok = true;
  double worst = 0.0;
  for (unsigned seed = 2000; seed < 2006; ++seed) {
    BoundaryField f = random_bumps(g, 1, seed, false, g.R / 4.0);
    HalfSpaceField u = solve_with_kernel(pc, f, heights);
    auto rep = cone_aperture_comparison(u, {0.5, 1.0, 2.0}, 2.0);
    worst = std::max(worst, rep.max_ratio);
    for (size_t i = 0; i + 1 < rep.rows.size(); ++i)
      if (rep.rows[i + 1].norm < rep.rows[i].norm * (1.0 - 1e-12)) ok = false;
    if (rep.max_ratio > cap || rep.max_ratio < 1.0) ok = false;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "aperture norm ratios in [1, %.2f] (max %.3f), monotone", cap,
                worst);
  report(11, ok, buf);
}

// 12. atom suite: seeded atoms within envelopes, invalid candidates rejected
void criterion_12() {
  double mass_env = env.at("atom.l1_mass");
  double margin = env.at("atom.decay_margin");
  BoundaryGrid g = make_grid(1, 64.0, 4096);
  bool ok = true;
  double worst_mass = 0.0, worst_fit = 1e300;
  for (unsigned k = 0; k < 10; ++k) {
    std::mt19937_64 rng(3000 + k);
    auto ur = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    double side = 1.0 + 3.0 * ur();
    double center = std::round((2.0 * ur() - 1.0) * 8.0 / g.h) * g.h;
    BoundaryField a = make_field(g, 1);
    long inside = 0;
    for (long nd = 0; nd < g.nodes(); ++nd) {
      double x = g.coord(static_cast<int>(nd));
      if (std::abs(x - center) < side / 2.0) {
        a.at(nd, 0) = cplx(2.0 * ur() - 1.0, 0.0);
        ++inside;
      }
    }
    cplx mean(0, 0);
    for (long nd = 0; nd < g.nodes(); ++nd) mean += a.at(nd, 0);
    mean /= static_cast<double>(inside);
    for (long nd = 0; nd < g.nodes(); ++nd)
      if (std::abs(a.at(nd, 0)) > 0.0) a.at(nd, 0) -= mean;
    double l2 = norm(a, lebesgue(2.0));
    for (auto& v : a.values) v *= std::pow(side, -0.5) * 0.999 / l2;
    Atom atom = validate_atom(a, Cube{{center}, side}, AtomFlavor::H1, 2.0);
    AtomDecayReport rep = atom_decay(atom, laplacian(2, 1), KernelMethod::HarmonicExplicit,
                                     ConeSpec{1.0, std::nullopt});
    worst_mass = std::max(worst_mass, rep.l1_mass);
    worst_fit = std::min(worst_fit, rep.decay_exponent);
  }
  if (worst_mass > mass_env || worst_fit < 2.0 - margin) ok = false;

  // rejection paths with the correct error codes
  BoundaryField bad_mean = sample_scalar(g, [](const double* x) {
    return (x[0] >= -1.0 && x[0] < 1.0) ? 0.5 : 0.0;
  });
  try {
    validate_atom(bad_mean, Cube{{0.0}, 2.0}, AtomFlavor::H1, 2.0);
    ok = false;
  } catch (const Error& e) {
    if (e.code() != Err::MeanNotZero) ok = false;
  }
  BoundaryField small = sample_scalar(g, [](const double* x) {
    if (x[0] >= 0.0 && x[0] < 0.25) return 2.0;
    if (x[0] >= -0.25 && x[0] < 0.0) return -2.0;
    return 0.0;
  });
  try {
    validate_atom(small, Cube{{0.0}, 0.5}, AtomFlavor::BeurlingCentral, 2.0);
    ok = false;
  } catch (const Error& e) {
    if (e.code() != Err::SizeViolation) ok = false;
  }
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "atoms: mass %.3f <= %.1f, decay fit %.3f >= %.1f, rejections typed", worst_mass,
                mass_env, worst_fit, 2.0 - margin);
  report(12, ok, buf);
}

// 13. ellipticity gate over the Lame modulus sweep
void criterion_13() {
  bool ok = true;
  for (double mu : {0.5, 1.0, 2.0})
    for (int lam = -3; lam <= 3; ++lam) {
      double predicted = std::min(mu, 2.0 * mu + lam);
      auto rep = legendre_hadamard(lame(2, mu, lam), 8000, 200);
      double tol = 2e-3;
      if (predicted > tol && !(rep.min_ratio > 0.0)) ok = false;
      if (predicted < -tol && !(rep.min_ratio < 0.0)) ok = false;
      if (std::abs(predicted) <= tol && std::abs(rep.min_ratio) > 2.0 * tol) ok = false;
      if (std::abs(rep.min_ratio - predicted) > 5e-3 * std::max(1.0, std::abs(predicted)))
        ok = false;
    }
  report(13, ok, "Lame modulus sweep reproduces the sign of the ellipticity constant");
}

// 14. byte-identical verify summaries across two process invocations
void criterion_14() {
  namespace fs = std::filesystem;
  fs::path tmp = fs::temp_directory_path() / "hs_acceptance";
  fs::create_directories(tmp);
  std::string cfg = std::string("{\n") +
                    "  \"seed\": 42,\n" +
                    "  \"grid\": {\"dim\": 1, \"R\": 32, \"N\": 1024},\n" +
                    "  \"system\": {\"kind\": \"laplacian\", \"n\": 2, \"M\": 1},\n" +
                    "  \"method\": \"explicit\",\n" +
                    "  \"experiments\": [\"ellipticity\", \"semigroup\", \"boyd\", \"xw_decay\"],\n" +
                    "  \"envelopes\": \"" + std::string(HS_DATA_DIR) + "/envelopes.json\"\n" +
                    "}\n";
  write_text_file((tmp / "cfg.json").string(), cfg);
  auto invoke = [&tmp](const char* out) {
    std::string cmd = std::string(HS_CLI_PATH) + " verify --config " + (tmp / "cfg.json").string() +
                      " --out " + (tmp / out).string() + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  int rc1 = invoke("sum_a.json");
  int rc2 = invoke("sum_b.json");
  std::string a = read_text_file((tmp / "sum_a.json").string());
  std::string b = read_text_file((tmp / "sum_b.json").string());
  bool ok = rc1 == 0 && rc2 == 0 && !a.empty() && a == b;
  report(14, ok, "verify summaries byte-identical across process invocations");
}

}  // namespace

int main() {
  env = load_envelopes(std::string(HS_DATA_DIR) + "/envelopes.json");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  criterion_13();
  criterion_14();
  if (failures == 0) {
    std::printf("ACCEPTANCE: all 14 criteria passed\n");
    return 0;
  }
  std::printf("ACCEPTANCE: %d criteria failed\n", failures);
  return 1;
}
