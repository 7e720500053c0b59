#include "mtube/profiles.hpp"

#include <cmath>

namespace mtube {

std::string to_string(WeightKind k) {
  switch (k) {
    case WeightKind::GSub: return "g-sub";
    case WeightKind::GSuper: return "g-super";
    case WeightKind::GPure: return "g-pure";
    case WeightKind::FNu: return "f-nu";
    case WeightKind::MinimalReal: return "minimal-real";
  }
  return "?";
}

WeightFamily WeightFamily::g_pure(int k, int m, double gamma, double epsilon) {
  WeightFamily w;
  w.kind = WeightKind::GPure;
  w.k = k;
  w.m = m;
  w.A = 0;
  w.gamma = gamma;
  w.epsilon = epsilon;
  w.validate();
  return w;
}

WeightFamily WeightFamily::g_sub(int k, int m, double delta, double epsilon) {
  WeightFamily w;
  w.kind = WeightKind::GSub;
  w.k = k;
  w.m = m;
  w.delta = delta;
  w.A = 1;
  w.epsilon = epsilon;
  w.validate();
  return w;
}

WeightFamily WeightFamily::g_super(int k, int m, double delta) {
  WeightFamily w;
  w.kind = WeightKind::GSuper;
  w.k = k;
  w.m = m;
  w.delta = delta;
  w.A = -1;
  w.validate();
  return w;
}

WeightFamily WeightFamily::f_nu(int k, int m, double nu, double delta, double epsilon) {
  WeightFamily w;
  w.kind = WeightKind::FNu;
  w.k = k;
  w.m = m;
  w.nu = nu;
  w.delta = delta;
  w.A = 1;
  w.epsilon = epsilon;
  w.validate();
  return w;
}

WeightFamily WeightFamily::minimal_real(int kappa) {
  WeightFamily w;
  w.kind = WeightKind::MinimalReal;
  w.kappa = kappa;
  w.A = 0;
  if (kappa < 3)
    throw ConstraintError("minimal-real weight requires real codimension >= 3");
  return w;
}

bool WeightFamily::singular_at_zero() const {
  switch (kind) {
    case WeightKind::GSub:
    case WeightKind::GSuper:
    case WeightKind::GPure:
      return true;
    case WeightKind::FNu:
      return nu >= 1.0;
    case WeightKind::MinimalReal:
      return true;
  }
  return true;
}

void WeightFamily::validate() const {
  if (gamma <= 0.0) throw ConstraintError("weight multiplier gamma must be positive");
  if (epsilon < 0.0) throw ConstraintError("epsilon must be >= 0");
  switch (kind) {
    case WeightKind::GSub:
    case WeightKind::GSuper: {
      if (m > k) throw ConstraintError("g-family requires m <= k");
      const double bound = delta_lower_bound(k, m);
      if (delta <= bound)
        throw ConstraintError("delta must exceed max{1, 2(k/m-1)} = " +
                              std::to_string(bound));
      break;
    }
    case WeightKind::GPure:
      if (m > k) throw ConstraintError("g-family requires m <= k");
      break;
    case WeightKind::FNu:
      if (m > k) throw ConstraintError("f-nu requires m <= k");
      if (nu >= double(k) / double(m))
        throw ConstraintError("f-nu requires nu < k/m");
      break;
    case WeightKind::MinimalReal:
      if (kappa < 3) throw ConstraintError("minimal-real requires kappa >= 3");
      break;
  }
}

namespace {

DerivTriple triple_r_eps(double r, double eps) {
  const double v = std::sqrt(r * r + eps);
  return {v, r / v, eps / (v * v * v)};
}

DerivTriple triple_h(double s, int A, double delta) {
  if (A == 0) return {s, 1.0, 0.0};
  const double sd = std::pow(s, delta);
  return {s + A * s * sd, 1.0 + A * (1.0 + delta) * sd,
          A * (1.0 + delta) * delta * sd / s};
}

DerivTriple triple_pow(double t, double p) {
  const double tp = std::pow(t, p);
  return {tp, p * tp / t, p * (p - 1.0) * tp / (t * t)};
}

DerivTriple triple_log(double t) {
  return {std::log(t), 1.0 / t, -1.0 / (t * t)};
}

// G_m on the h-variable: log for m = k, -t^{2-2k/m} for m < k.
DerivTriple triple_g(double t, int k, int m) {
  if (m == k) return triple_log(t);
  const double p = 2.0 - 2.0 * double(k) / double(m);
  return triple_pow(t, p) * -1.0;
}

// F_nu: t^{2-2nu} for nu < 1, log for nu = 1, -t^{2-2nu} for nu > 1.
DerivTriple triple_f(double t, double nu) {
  if (nu == 1.0) return triple_log(t);
  const double p = 2.0 - 2.0 * nu;
  return nu < 1.0 ? triple_pow(t, p) : triple_pow(t, p) * -1.0;
}

}  // namespace

DerivTriple eval_weight(const WeightFamily& w, double r) {
  if (r < 0.0) throw ConstraintError("eval_weight: r must be >= 0");
  if (w.kind == WeightKind::MinimalReal) {
    if (r == 0.0) throw SingularityError("minimal-real weight is -infinity at r = 0");
    return triple_pow(r, 2.0 - double(w.kappa)) * -w.gamma;
  }
  if (r == 0.0 && w.epsilon == 0.0)
    throw SingularityError("unregularized weight cannot be evaluated on V");

  const DerivTriple re = triple_r_eps(r, w.epsilon);
  const DerivTriple h = triple_h(re.value, w.A, w.delta);
  const DerivTriple outer = w.kind == WeightKind::FNu
                                ? triple_f(h.value, w.nu)
                                : triple_g(h.value, w.k, w.m);
  return compose(outer, compose(h, re)) * w.gamma;
}

EigenProfile radial_eigprofile(const DerivTriple& d, double r, int k, int n) {
  if (r <= 0.0) throw ConstraintError("radial_eigprofile: r must be positive");
  return {(d.d2 + d.d1 / r) / 4.0, d.d1 / (2.0 * r), k, n};
}

EigenProfile radial_eigprofile(const DerivTriple& d, double r, const FlatModel& model) {
  return radial_eigprofile(d, r, model.k, model.n);
}

double profile_ratio_check(const WeightFamily& w, double r) {
  const EigenProfile p = radial_eigprofile(eval_weight(w, r), r, w.k, w.k);
  if (p.lambda_tan == 0.0)
    throw SingularityError("profile_ratio_check: degenerate profile (lambda_tan = 0)");
  return p.lambda_rad / p.lambda_tan;
}

}  // namespace mtube
