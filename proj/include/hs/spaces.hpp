#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hs/grid.hpp"
#include "hs/maxop.hpp"

namespace hs {

/// Decreasing step function on [0, infinity): value[i] on a step of width
/// mass[i], zero beyond the last breakpoint.
struct Rearrangement {
  std::vector<double> value;  // nonincreasing, nonnegative
  std::vector<double> mass;   // positive widths
  double total_mass() const;
};

/// Sorts |f| descending and accumulates cell masses h^dim (or w h^dim).
Rearrangement decreasing_rearrangement(const BoundaryField& f, const Weight* w = nullptr);

struct YoungFunction {
  std::function<double(double)> phi;
  std::string label;
};

/// Power Young function t^p.
YoungFunction young_power(double p);
/// Zygmund-type Young function t^p log(e+t)^alpha.
YoungFunction young_zygmund(double p, double alpha);

/// Checks phi(0) = 0, strict growth and convexity on a log-spaced grid.
void validate_young(const YoungFunction& phi);

struct NormSpec {
  enum class Kind {
    Lebesgue,
    WeightedLebesgue,
    Lorentz,
    Orlicz,
    Zygmund,
    VariableExponent,
    WeightedRI,
  };
  Kind kind = Kind::Lebesgue;
  double p = 2.0;
  double q = 2.0;      // Lorentz second index; may be INFINITY
  double alpha = 0.0;  // Zygmund exponent
  YoungFunction young;
  std::shared_ptr<const BoundaryField> exponent_field;  // VariableExponent
  std::shared_ptr<const Weight> weight;                 // WeightedLebesgue / WeightedRI
  std::shared_ptr<const NormSpec> base;                 // WeightedRI

  bool rearrangement_invariant() const;
  std::string label() const;
};

NormSpec lebesgue(double p);
NormSpec weighted_lebesgue(double p, const Weight& w);
NormSpec lorentz(double p, double q);
NormSpec orlicz(const YoungFunction& phi);
NormSpec zygmund(double p, double alpha);
NormSpec variable_exponent(const BoundaryField& pfun);
NormSpec weighted_ri(const NormSpec& base, const Weight& w);

/// Function norm of a field. Returns +infinity when the Luxemburg modular
/// cannot be brought below one within the bisection bracket.
double norm(const BoundaryField& f, const NormSpec& spec);

/// Norm of a step rearrangement in a rearrangement-invariant spec.
double norm_of_rearrangement(const Rearrangement& r, const NormSpec& spec);

/// Kothe dual for the implemented pairs (Lebesgue p <-> p',
/// Lorentz (p,q) <-> (p',q')). Throws NoDualImplemented otherwise.
NormSpec dual_spec(const NormSpec& spec);

struct HolderPair {
  double lhs = 0.0;  // integral of |f g|
  double rhs = 0.0;  // ||f||_X ||g||_X'
};
HolderPair holder_pairing(const BoundaryField& f, const BoundaryField& g, const NormSpec& spec);

struct BoydReport {
  double p_lower = 0.0;  // estimate of the lower Boyd index
  double q_upper = 0.0;  // estimate of the upper Boyd index
  std::vector<double> t;
  std::vector<double> h;  // dilation-norm estimates h_X(t)
};

/// Estimates the Boyd indices by probing the dilation operator with
/// indicators and truncated power profiles; the probe h values are lower
/// bounds on the true dilation norm.
BoydReport boyd_indices(const NormSpec& spec,
                        const std::vector<double>& t_grid = {});

struct XwDecayReport {
  double lhs = 0.0;    // integral of |h| M^2(1_B)
  double rhs = 0.0;    // ||1_B||^{-1}_{X(w)} ||h||_{X(w)}
  double ratio = 0.0;  // lhs / rhs
};

/// Weighted-space decay pairing for a WeightedRI spec; screens the base Boyd
/// index and the weight's Muckenhoupt constant first.
XwDecayReport xw_decay_check(const NormSpec& spec, const BoundaryField& h);

struct Cube {
  std::vector<double> center;
  double side = 0.0;
};

enum class AtomFlavor { H1, BeurlingCentral };

struct Atom {
  BoundaryField field;
  Cube cube;
  AtomFlavor flavor = AtomFlavor::H1;
  double exponent = 2.0;  // q for H1, p for Beurling
};

/// Validates support, size normalization and mean-zero (tolerance h ||a||_1).
Atom validate_atom(const BoundaryField& candidate, const Cube& cube, AtomFlavor flavor,
                   double exponent);

/// Annulus-weighted norm sum_k 2^{k(n-1)/p'} ||f 1_{C_k}||_{L^p} over dyadic
/// shells C_0 = {|x|<1}, C_k = {2^{k-1} <= |x| < 2^k}.
double beurling_norm(const BoundaryField& f, double p);

/// Localized normalized Luxemburg norm over a cube with Phi(t) = t log(e+t).
/// Companion diagnostic for the iterated maximal operator; the equivalence
/// constants are recorded by callers, never asserted.
double llogl_local_norm(const BoundaryField& f, const Cube& cube);

/// Tagged-union JSON form used by the CLI. Weight and exponent fields are
/// referenced by field base path, resolved against base_dir.
std::string spec_to_json(const NormSpec& spec);
NormSpec spec_from_json_text(const std::string& text, const std::string& base_dir);
NormSpec spec_from_json_file(const std::string& path);

}  // namespace hs
