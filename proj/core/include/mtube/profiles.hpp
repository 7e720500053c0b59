#pragma once

#include "mtube/garding.hpp"
#include "mtube/model.hpp"

namespace mtube {

/// Value and first two r-derivatives of a radial function.
struct DerivTriple {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  DerivTriple operator*(double c) const { return {c * value, c * d1, c * d2}; }
  DerivTriple operator+(const DerivTriple& o) const {
    return {value + o.value, d1 + o.d1, d2 + o.d2};
  }
};

/// Chain rule through two derivative triples: (g o f)(r).
inline DerivTriple compose(const DerivTriple& g, const DerivTriple& f) {
  return {g.value, g.d1 * f.d1, g.d2 * f.d1 * f.d1 + g.d1 * f.d2};
}

enum class WeightKind { GSub, GSuper, GPure, FNu, MinimalReal };

std::string to_string(WeightKind k);

/// A closed-form radial weight family.
///
/// The g-kinds evaluate gamma * G(h(r_eps)) with G = log for m = k and
/// G(t) = -t^{2-2k/m} for m < k, h(s) = s + A s^{1+delta}, r_eps =
/// sqrt(r^2 + eps).  FNu evaluates gamma * F_nu(h(r_eps)), MinimalReal is the
/// real-codimension harmonic pole -gamma * r^{2-kappa}.
struct WeightFamily {
  WeightKind kind = WeightKind::GPure;
  int k = 2;
  int m = 2;
  double delta = 2.0;   ///< perturbation exponent (g-sub/g-super)
  int A = 0;            ///< perturbation sign: +1 sub, -1 super, 0 pure
  double nu = 0.0;      ///< only for FNu
  double epsilon = 0.0; ///< regularization r_eps = sqrt(r^2 + eps)
  double gamma = 1.0;   ///< positive multiplier
  int kappa = 3;        ///< real codimension, only for MinimalReal

  static WeightFamily g_pure(int k, int m, double gamma = 1.0, double epsilon = 0.0);
  static WeightFamily g_sub(int k, int m, double delta, double epsilon = 0.0);
  static WeightFamily g_super(int k, int m, double delta);
  static WeightFamily f_nu(int k, int m, double nu, double delta, double epsilon = 0.0);
  static WeightFamily minimal_real(int kappa);

  /// True when the value tends to -infinity as r -> 0 with eps = 0.
  bool singular_at_zero() const;

  void validate() const;
};

/// Admissibility bound for the perturbation exponent: max{1, 2(k/m - 1)}.
inline double delta_lower_bound(int k, int m) {
  return std::max(1.0, 2.0 * (double(k) / double(m) - 1.0));
}

/// value / d(dr) / d2(dr2) of the weight at radius r.
DerivTriple eval_weight(const WeightFamily& w, double r);

/// Exact eigenvalues of the coordinate complex Hessian of a radial function
/// f(|z'|) on C^k x C^{n-k}:
///   lambda_tan = f'/(2r) (multiplicity k-1),
///   lambda_rad = (f'' + f'/r)/4,
/// and n-k zeros along V.
EigenProfile radial_eigprofile(const DerivTriple& d, double r, const FlatModel& model);
EigenProfile radial_eigprofile(const DerivTriple& d, double r, int k, int n);

/// lambda_rad / lambda_tan of the weight's profile at r; equals 1 - k/m for
/// every unperturbed g-pure weight.
double profile_ratio_check(const WeightFamily& w, double r);

}  // namespace mtube
