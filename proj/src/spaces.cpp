#include "hs/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "hs/error.hpp"
#include "hs/io.hpp"

namespace hs {

double Rearrangement::total_mass() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

Rearrangement decreasing_rearrangement(const BoundaryField& f, const Weight* w) {
  const long n = f.grid.nodes();
  const double cell = f.grid.cell_measure();
  std::vector<std::pair<double, double>> vm(n);  // (value, mass)
  for (long k = 0; k < n; ++k) {
    double mass = cell * (w ? w->field.at(k, 0).real() : 1.0);
    vm[k] = {f.modulus(k), mass};
  }
  std::sort(vm.begin(), vm.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  Rearrangement r;
  r.value.reserve(n);
  r.mass.reserve(n);
  for (const auto& [v, m] : vm) {
    if (v <= 0.0) break;  // trailing zeros carry no mass in any norm below
    if (!r.value.empty() && r.value.back() == v) {
      r.mass.back() += m;
    } else {
      r.value.push_back(v);
      r.mass.push_back(m);
    }
  }
  return r;
}

YoungFunction young_power(double p) {
  return {[p](double t) { return std::pow(t, p); }, "t^" + fmt17(p)};
}

YoungFunction young_zygmund(double p, double alpha) {
  return {[p, alpha](double t) { return std::pow(t, p) * std::pow(std::log(M_E + t), alpha); },
          "t^" + fmt17(p) + " log(e+t)^" + fmt17(alpha)};
}

void validate_young(const YoungFunction& yf) {
  if (!yf.phi) fail(Err::SpecViolation, "Young function has no evaluator");
  if (yf.phi(0.0) != 0.0) fail(Err::SpecViolation, "Young function must vanish at 0");
  double prev = 0.0;
  std::vector<double> grid;
  for (int k = -24; k <= 24; ++k) grid.push_back(std::pow(2.0, k));
  for (double t : grid) {
    double v = yf.phi(t);
    if (!(v > prev)) fail(Err::SpecViolation, "Young function must be strictly increasing");
    prev = v;
  }
  // convexity spot-check on the log grid (midpoint inequality)
  for (size_t i = 0; i + 2 < grid.size(); ++i) {
    double a = grid[i], b = grid[i + 2], m = grid[i + 1];
    double lam = (b - m) / (b - a);
    double chord = lam * yf.phi(a) + (1.0 - lam) * yf.phi(b);
    if (yf.phi(m) > chord * (1.0 + 1e-9))
      fail(Err::SpecViolation, "Young function fails convexity spot-check");
  }
}

bool NormSpec::rearrangement_invariant() const {
  switch (kind) {
    case Kind::Lebesgue:
    case Kind::Lorentz:
    case Kind::Orlicz:
    case Kind::Zygmund:
      return true;
    default:
      return false;
  }
}

std::string NormSpec::label() const {
  switch (kind) {
    case Kind::Lebesgue: return "L^" + fmt17(p);
    case Kind::WeightedLebesgue: return "L^" + fmt17(p) + "(" + weight->label + ")";
    case Kind::Lorentz: return "L^{" + fmt17(p) + "," + (std::isinf(q) ? "inf" : fmt17(q)) + "}";
    case Kind::Orlicz: return "Orlicz[" + young.label + "]";
    case Kind::Zygmund: return "L^" + fmt17(p) + "(logL)^" + fmt17(alpha);
    case Kind::VariableExponent: return "L^{p(.)}";
    case Kind::WeightedRI: return base->label() + "(" + weight->label + ")";
  }
  return "?";
}

namespace {

void require_p_range(double p) {
  if (!(p >= 1.0) || std::isinf(p)) fail(Err::SpecViolation, "exponent p must lie in [1,inf)");
}

}  // namespace

NormSpec lebesgue(double p) {
  require_p_range(p);
  NormSpec s;
  s.kind = NormSpec::Kind::Lebesgue;
  s.p = p;
  return s;
}

NormSpec weighted_lebesgue(double p, const Weight& w) {
  require_p_range(p);
  NormSpec s;
  s.kind = NormSpec::Kind::WeightedLebesgue;
  s.p = p;
  s.weight = std::make_shared<Weight>(w);
  return s;
}

NormSpec lorentz(double p, double q) {
  require_p_range(p);
  if (!(q >= 1.0)) fail(Err::SpecViolation, "Lorentz q must lie in [1,inf]");
  NormSpec s;
  s.kind = NormSpec::Kind::Lorentz;
  s.p = p;
  s.q = q;
  return s;
}

NormSpec orlicz(const YoungFunction& phi) {
  validate_young(phi);
  NormSpec s;
  s.kind = NormSpec::Kind::Orlicz;
  s.young = phi;
  return s;
}

NormSpec zygmund(double p, double alpha) {
  require_p_range(p);
  NormSpec s;
  s.kind = NormSpec::Kind::Zygmund;
  s.p = p;
  s.alpha = alpha;
  s.young = young_zygmund(p, alpha);
  return s;
}

NormSpec variable_exponent(const BoundaryField& pfun) {
  double pmin = 1e300, pmax = 0.0;
  for (long k = 0; k < pfun.grid.nodes(); ++k) {
    double v = pfun.at(k, 0).real();
    if (!(v > 1.0) || !std::isfinite(v))
      fail(Err::SpecViolation, "variable exponent must take values in (1,inf)");
    pmin = std::min(pmin, v);
    pmax = std::max(pmax, v);
  }
  NormSpec s;
  s.kind = NormSpec::Kind::VariableExponent;
  s.p = pmin;
  s.q = pmax;
  s.exponent_field = std::make_shared<BoundaryField>(pfun);
  return s;
}

NormSpec weighted_ri(const NormSpec& base, const Weight& w) {
  if (!base.rearrangement_invariant())
    fail(Err::SpecViolation, "weighted spaces need a rearrangement-invariant base");
  NormSpec s;
  s.kind = NormSpec::Kind::WeightedRI;
  s.base = std::make_shared<NormSpec>(base);
  s.weight = std::make_shared<Weight>(w);
  return s;
}

namespace {

// Smallest lambda with modular(lambda) <= 1, by log-bisection.
// modular(lambda) = sum_i mass[i] * phi(value[i]/lambda, i).
double luxemburg(const std::vector<double>& value, const std::vector<double>& mass,
                 const std::function<double(double, size_t)>& phi) {
  double vmax = 0.0;
  for (double v : value) vmax = std::max(vmax, v);
  if (vmax == 0.0) return 0.0;
  auto modular = [&](double lam) {
    double s = 0.0;
    for (size_t i = 0; i < value.size(); ++i)
      if (value[i] > 0.0) s += mass[i] * phi(value[i] / lam, i);
    return s;
  };
  double lo = 1e-12 * vmax, hi = 1e12 * vmax;
  if (modular(hi) > 1.0) return INFINITY;  // modular never reaches 1 in bracket
  if (modular(lo) <= 1.0) return lo;
  for (int it = 0; it < 60; ++it) {
    double mid = std::sqrt(lo * hi);
    if (modular(mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::vector<double> modulus_vector(const BoundaryField& f) {
  std::vector<double> v(f.grid.nodes());
  for (long k = 0; k < f.grid.nodes(); ++k) v[k] = f.modulus(k);
  return v;
}

double lorentz_of_steps(const Rearrangement& r, double p, double q) {
  if (r.value.empty()) return 0.0;
  if (std::isinf(q)) {
    double sup = 0.0, acc = 0.0;
    for (size_t i = 0; i < r.value.size(); ++i) {
      acc += r.mass[i];
      sup = std::max(sup, r.value[i] * std::pow(acc, 1.0 / p));
    }
    return sup;
  }
  double acc = 0.0, integral = 0.0;
  double expnt = q / p;
  for (size_t i = 0; i < r.value.size(); ++i) {
    double s0 = acc, s1 = acc + r.mass[i];
    integral += std::pow(r.value[i], q) * (p / q) * (std::pow(s1, expnt) - std::pow(s0, expnt));
    acc = s1;
  }
  return std::pow(integral, 1.0 / q);
}

}  // namespace

double norm_of_rearrangement(const Rearrangement& r, const NormSpec& spec) {
  switch (spec.kind) {
    case NormSpec::Kind::Lebesgue: {
      double s = 0.0;
      for (size_t i = 0; i < r.value.size(); ++i) s += std::pow(r.value[i], spec.p) * r.mass[i];
      return std::pow(s, 1.0 / spec.p);
    }
    case NormSpec::Kind::Lorentz:
      return lorentz_of_steps(r, spec.p, spec.q);
    case NormSpec::Kind::Orlicz:
    case NormSpec::Kind::Zygmund: {
      auto phi = spec.young.phi;
      return luxemburg(r.value, r.mass, [&phi](double t, size_t) { return phi(t); });
    }
    default:
      fail(Err::SpecViolation, "norm_of_rearrangement needs a rearrangement-invariant spec");
  }
}

double norm(const BoundaryField& f, const NormSpec& spec) {
  const double cell = f.grid.cell_measure();
  switch (spec.kind) {
    case NormSpec::Kind::Lebesgue: {
      double s = 0.0;
      for (long k = 0; k < f.grid.nodes(); ++k) s += std::pow(f.modulus(k), spec.p);
      return std::pow(s * cell, 1.0 / spec.p);
    }
    case NormSpec::Kind::WeightedLebesgue: {
      double s = 0.0;
      for (long k = 0; k < f.grid.nodes(); ++k)
        s += std::pow(f.modulus(k), spec.p) * spec.weight->field.at(k, 0).real();
      return std::pow(s * cell, 1.0 / spec.p);
    }
    case NormSpec::Kind::Lorentz:
      return lorentz_of_steps(decreasing_rearrangement(f), spec.p, spec.q);
    case NormSpec::Kind::Orlicz:
    case NormSpec::Kind::Zygmund: {
      auto vals = modulus_vector(f);
      std::vector<double> mass(vals.size(), cell);
      auto phi = spec.young.phi;
      return luxemburg(vals, mass, [&phi](double t, size_t) { return phi(t); });
    }
    case NormSpec::Kind::VariableExponent: {
      auto vals = modulus_vector(f);
      std::vector<double> mass(vals.size(), cell);
      const BoundaryField& pf = *spec.exponent_field;
      if (!(pf.grid == f.grid)) fail(Err::GridMismatch, "exponent field grid differs");
      return luxemburg(vals, mass, [&pf](double t, size_t i) {
        return std::pow(t, pf.at(static_cast<long>(i), 0).real());
      });
    }
    case NormSpec::Kind::WeightedRI: {
      if (!(spec.weight->field.grid == f.grid))
        fail(Err::GridMismatch, "weight grid differs from field grid");
      Rearrangement rw = decreasing_rearrangement(f, spec.weight.get());
      return norm_of_rearrangement(rw, *spec.base);
    }
  }
  fail(Err::SpecViolation, "unreachable norm kind");
}

NormSpec dual_spec(const NormSpec& spec) {
  auto conj = [](double r) { return std::isinf(r) ? 1.0 : (r == 1.0 ? INFINITY : r / (r - 1.0)); };
  switch (spec.kind) {
    case NormSpec::Kind::Lebesgue:
      if (spec.p == 1.0) fail(Err::NoDualImplemented, "dual of L^1 is not in the norm engine");
      return lebesgue(conj(spec.p));
    case NormSpec::Kind::Lorentz: {
      if (spec.p == 1.0) fail(Err::NoDualImplemented, "dual of L^{1,q} is not implemented");
      return lorentz(conj(spec.p), conj(spec.q));
    }
    default:
      fail(Err::NoDualImplemented, "no Kothe dual implemented for " + spec.label());
  }
}

HolderPair holder_pairing(const BoundaryField& f, const BoundaryField& g, const NormSpec& spec) {
  if (!(f.grid == g.grid)) fail(Err::GridMismatch, "Holder pairing needs one grid");
  NormSpec dual = dual_spec(spec);
  HolderPair out;
  double s = 0.0;
  for (long k = 0; k < f.grid.nodes(); ++k) s += f.modulus(k) * g.modulus(k);
  out.lhs = s * f.grid.cell_measure();
  out.rhs = norm(f, spec) * norm(g, dual);
  return out;
}

namespace {

// Probes live in the dilation-clean regime (large supports, slowly varying
// Young response) so the h_X lower bounds track the asymptotic slope; the
// true sup is over the whole space, so every estimate stays a lower bound.
std::vector<Rearrangement> boyd_probes() {
  std::vector<Rearrangement> probes;
  for (int k = 3; k <= 5; ++k) {
    Rearrangement r;
    r.value = {1.0};
    r.mass = {std::pow(10.0, k)};
    probes.push_back(std::move(r));
  }
  for (double gamma : {0.25, 0.4, 0.5}) {
    Rearrangement r;
    const int steps = 160;
    double ratio = std::pow(1e6, 1.0 / steps);
    double s = 1.0;
    for (int i = 0; i < steps; ++i) {
      double s1 = s * ratio;
      r.value.push_back(std::pow(s, -gamma));
      r.mass.push_back(s1 - s);
      s = s1;
    }
    probes.push_back(std::move(r));
  }
  return probes;
}

Rearrangement dilate(const Rearrangement& r, double t) {
  Rearrangement out = r;
  for (double& m : out.mass) m *= t;
  return out;
}

}  // namespace

BoydReport boyd_indices(const NormSpec& spec, const std::vector<double>& t_grid_in) {
  if (!spec.rearrangement_invariant())
    fail(Err::SpecViolation, "Boyd indices need a rearrangement-invariant spec");
  std::vector<double> t_grid = t_grid_in;
  if (t_grid.empty())
    for (int k = -6; k <= 6; ++k)
      if (k != 0) t_grid.push_back(std::pow(2.0, k));

  auto probes = boyd_probes();
  std::vector<double> base_norm(probes.size());
  for (size_t i = 0; i < probes.size(); ++i) base_norm[i] = norm_of_rearrangement(probes[i], spec);

  BoydReport rep;
  rep.p_lower = INFINITY;
  rep.q_upper = 0.0;
  for (double t : t_grid) {
    double h = 0.0;
    for (size_t i = 0; i < probes.size(); ++i) {
      if (!(base_norm[i] > 0.0) || std::isinf(base_norm[i])) continue;
      h = std::max(h, norm_of_rearrangement(dilate(probes[i], t), spec) / base_norm[i]);
    }
    rep.t.push_back(t);
    rep.h.push_back(h);
    // conservative aggregation: smallest slope estimate above 1, largest below
    if (t > 1.0 && h > 1.0) rep.p_lower = std::min(rep.p_lower, std::log(t) / std::log(h));
    if (t < 1.0 && h < 1.0 && h > 0.0)
      rep.q_upper = std::max(rep.q_upper, std::log(t) / std::log(h));
  }
  return rep;
}

XwDecayReport xw_decay_check(const NormSpec& spec, const BoundaryField& h) {
  if (spec.kind != NormSpec::Kind::WeightedRI)
    fail(Err::SpecViolation, "decay check is defined for weighted r.i. specs");
  BoydReport boyd = boyd_indices(*spec.base);
  if (!(boyd.p_lower > 1.0))
    fail(Err::SpecViolation, "base space fails the lower Boyd index screen");
  ApReport ap = ap_constant(*spec.weight, boyd.p_lower);
  if (!std::isfinite(ap.constant)) fail(Err::SpecViolation, "weight fails the A_p screen");

  const BoundaryGrid& g = h.grid;
  BoundaryField ball = sample_scalar(g, [&g](const double* x) {
    double r2 = x[0] * x[0] + (g.dim == 2 ? x[1] * x[1] : 0.0);
    return r2 < 1.0 ? 1.0 : 0.0;
  });
  BoundaryField m2 = iterated_maximal(ball);
  double lhs = 0.0;
  for (long k = 0; k < g.nodes(); ++k) lhs += h.modulus(k) * m2.at(k, 0).real();
  lhs *= g.cell_measure();

  XwDecayReport rep;
  rep.lhs = lhs;
  double ball_norm = norm(ball, spec);
  rep.rhs = norm(h, spec) / ball_norm;
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : INFINITY;
  return rep;
}

Atom validate_atom(const BoundaryField& candidate, const Cube& cube, AtomFlavor flavor,
                   double exponent) {
  const BoundaryGrid& g = candidate.grid;
  if (static_cast<int>(cube.center.size()) != g.dim)
    fail(Err::BadInput, "cube center dimension mismatch");
  if (!(cube.side > 0.0)) fail(Err::BadInput, "cube side must be positive");
  if (!(exponent > 1.0)) fail(Err::BadInput, "atom exponent must exceed 1");

  if (flavor == AtomFlavor::BeurlingCentral) {
    for (double c : cube.center)
      if (std::abs(c) > g.h / 2.0)
        fail(Err::SupportViolation, "Beurling atoms must be centered at the origin");
    if (cube.side < 1.0) fail(Err::SizeViolation, "Beurling atoms need side length >= 1");
  }

  // support within the cube, one-cell tolerance
  double maxmod = 0.0;
  for (long k = 0; k < g.nodes(); ++k) maxmod = std::max(maxmod, candidate.modulus(k));
  double x[2];
  for (long k = 0; k < g.nodes(); ++k) {
    g.node_coords(k, x);
    bool inside = true;
    for (int d = 0; d < g.dim; ++d)
      if (std::abs(x[d] - cube.center[d]) > cube.side / 2.0 + g.h * (1.0 + 1e-12)) inside = false;
    if (!inside && candidate.modulus(k) > 1e-14 * maxmod)
      fail(Err::SupportViolation, "atom support escapes the cube");
  }

  // size normalization ||a||_q <= |Q|^{1/q-1}
  double lq = norm(candidate, lebesgue(exponent));
  double measure = std::pow(cube.side, g.dim);
  double bound = std::pow(measure, 1.0 / exponent - 1.0);
  if (lq > bound * (1.0 + 1e-9))
    fail(Err::SizeViolation, "atom L^q size " + fmt17(lq) + " exceeds " + fmt17(bound));

  // mean zero per channel with quadrature tolerance h ||a||_1
  auto means = integrate(candidate);
  double l1 = 0.0;
  for (long k = 0; k < g.nodes(); ++k) l1 += candidate.modulus(k);
  l1 *= g.cell_measure();
  for (const cplx& m : means)
    if (std::abs(m) > g.h * l1 + 1e-14)
      fail(Err::MeanNotZero, "atom mean " + fmt17(std::abs(m)) + " exceeds tolerance");

  Atom a;
  a.field = candidate;
  a.cube = cube;
  a.flavor = flavor;
  a.exponent = exponent;
  return a;
}

double beurling_norm(const BoundaryField& f, double p) {
  if (!(p > 1.0) || std::isinf(p)) fail(Err::BadInput, "Beurling norm needs p in (1,inf)");
  const BoundaryGrid& g = f.grid;
  const double pprime = p / (p - 1.0);
  double diag = g.R * std::sqrt(static_cast<double>(g.dim));
  int kmax = std::max(0, static_cast<int>(std::ceil(std::log2(diag))) + 1);
  double x[2];
  std::vector<double> shell(kmax + 1, 0.0);
  for (long k = 0; k < g.nodes(); ++k) {
    g.node_coords(k, x);
    double r = std::sqrt(x[0] * x[0] + (g.dim == 2 ? x[1] * x[1] : 0.0));
    int idx = r < 1.0 ? 0 : static_cast<int>(std::floor(std::log2(r))) + 1;
    if (idx > kmax) idx = kmax;
    shell[idx] += std::pow(f.modulus(k), p);
  }
  double total = 0.0;
  for (int k = 0; k <= kmax; ++k)
    total += std::pow(2.0, k * g.dim / pprime) * std::pow(shell[k] * g.cell_measure(), 1.0 / p);
  return total;
}

double llogl_local_norm(const BoundaryField& f, const Cube& cube) {
  const BoundaryGrid& g = f.grid;
  if (static_cast<int>(cube.center.size()) != g.dim)
    fail(Err::BadInput, "cube center dimension mismatch");
  if (!(cube.side > 0.0)) fail(Err::BadInput, "cube side must be positive");
  std::vector<double> vals;
  double x[2];
  for (long k = 0; k < g.nodes(); ++k) {
    g.node_coords(k, x);
    bool inside = true;
    for (int d = 0; d < g.dim; ++d)
      if (std::abs(x[d] - cube.center[d]) > cube.side / 2.0) inside = false;
    if (inside) vals.push_back(f.modulus(k));
  }
  if (vals.empty()) fail(Err::BadInput, "cube contains no grid nodes");
  std::vector<double> mass(vals.size(), 1.0 / static_cast<double>(vals.size()));
  auto phi = [](double t) { return t * std::log(M_E + t); };
  return luxemburg(vals, mass, [&phi](double t, size_t) { return phi(t); });
}

namespace {

using nlohmann::json;

json spec_to_json_obj(const NormSpec& s) {
  switch (s.kind) {
    case NormSpec::Kind::Lebesgue: return {{"kind", "lebesgue"}, {"p", s.p}};
    case NormSpec::Kind::WeightedLebesgue:
      return {{"kind", "weighted_lebesgue"}, {"p", s.p}, {"weight", s.weight->label}};
    case NormSpec::Kind::Lorentz:
      return {{"kind", "lorentz"}, {"p", s.p}, {"q", std::isinf(s.q) ? json("inf") : json(s.q)}};
    case NormSpec::Kind::Orlicz: return {{"kind", "orlicz"}, {"young", s.young.label}};
    case NormSpec::Kind::Zygmund: return {{"kind", "zygmund"}, {"p", s.p}, {"alpha", s.alpha}};
    case NormSpec::Kind::VariableExponent: return {{"kind", "variable_exponent"}};
    case NormSpec::Kind::WeightedRI:
      return {{"kind", "weighted_ri"},
              {"base", spec_to_json_obj(*s.base)},
              {"weight", s.weight->label}};
  }
  return {};
}

Weight load_weight_ref(const json& j, const std::string& base_dir) {
  std::string ref = j.get<std::string>();
  std::filesystem::path p = std::filesystem::path(base_dir) / ref;
  BoundaryField f = load_field(p.string());
  return make_weight(f, ref);
}

NormSpec spec_from_json_obj(const json& j, const std::string& base_dir) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "lebesgue") return lebesgue(j.at("p").get<double>());
  if (kind == "weighted_lebesgue")
    return weighted_lebesgue(j.at("p").get<double>(), load_weight_ref(j.at("weight"), base_dir));
  if (kind == "lorentz") {
    double q = j.at("q").is_string() ? INFINITY : j.at("q").get<double>();
    return lorentz(j.at("p").get<double>(), q);
  }
  if (kind == "orlicz") return orlicz(young_power(j.at("p").get<double>()));
  if (kind == "zygmund") return zygmund(j.at("p").get<double>(), j.at("alpha").get<double>());
  if (kind == "variable_exponent") {
    std::filesystem::path p = std::filesystem::path(base_dir) / j.at("field").get<std::string>();
    return variable_exponent(load_field(p.string()));
  }
  if (kind == "weighted_ri")
    return weighted_ri(spec_from_json_obj(j.at("base"), base_dir),
                       load_weight_ref(j.at("weight"), base_dir));
  fail(Err::BadInput, "unknown norm spec kind: " + kind);
}

}  // namespace

std::string spec_to_json(const NormSpec& spec) { return spec_to_json_obj(spec).dump(2); }

NormSpec spec_from_json_text(const std::string& text, const std::string& base_dir) {
  return spec_from_json_obj(nlohmann::json::parse(text), base_dir);
}

NormSpec spec_from_json_file(const std::string& path) {
  std::filesystem::path p(path);
  return spec_from_json_text(read_text_file(path), p.parent_path().string());
}

}  // namespace hs
