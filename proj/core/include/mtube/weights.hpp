#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtube/profiles.hpp"

namespace mtube {

/// Constants of the exact radial expansion of the perturbed weight Hessian:
///   radial slot:     1 - k/m + A B1 r_eps^delta + (eps/r_eps^2)(k/m + A B3 r_eps^delta)
///   tangential slot: 1 + A B2 r_eps^delta
/// after multiplying the profile by 2 D h^{2k/m}.
struct ExpansionConstants {
  double D = 1.0;
  double B1 = 0.0;
  double B2 = 0.0;
  double B3 = 0.0;
};

ExpansionConstants expansion_constants(int k, int m, double delta);

/// Leading coefficient delta (delta/2 - (k/m - 1)) of r^delta in sigma_m of
/// the scaled subweight profile (before the combinatorial factor C(k-1,m-1)).
double sigma_m_leading(int k, int m, double delta);

/// The scaled profile 2 D h^{2k/m} * (coordinate Hessian profile) of
/// G_m(h(r_eps)); the normalization makes the unperturbed tangential slot 1.
EigenProfile scaled_profile(const WeightFamily& w, double r, int n);

/// Per-radius record of a certification scan.
struct CertificatePoint {
  double r = 0.0;
  std::vector<double> sigma;  ///< normalized sigma_1..sigma_m of the scaled profile
  double margin = 0.0;
  double sigma_m_raw = 0.0;   ///< un-normalized sigma_m of the scaled profile
};

struct Certificate {
  std::vector<CertificatePoint> points;
  double fitted_exponent = 0.0;      ///< log-log slope of |sigma_m| over the middle decade
  double fitted_coefficient = 0.0;   ///< |sigma_m| ~ coeff * r^exponent
  double fit_rms = 0.0;
  std::string to_json() const;
};

struct CertifiedWeight {
  WeightFamily family;
  double certified_radius = 0.0;
  Certificate certificate;
};

/// Builds and certifies a sub- or superweight on a geometric radius grid
/// (64 points per decade over 3 decades, largest radius tube_radius/2).
CertifiedWeight make_weight(WeightKind kind, int k, int m, double delta,
                            double epsilon, const FlatModel& model,
                            double tolerance = 1e-9);

struct ExpansionReport {
  std::vector<double> r_values;
  std::vector<double> residuals;       ///< max over the two slots
  double fitted_exponent = 0.0;
  double fit_rms = 0.0;
  bool exponent_exceeds_delta = false;
};

/// Subtracts the closed-form expansion (through order r_eps^delta, including
/// the eps-block) from the exact scaled profile and fits the residual's
/// r-exponent, which must exceed delta.
ExpansionReport verify_expansion(int k, int m, double delta, double epsilon, int A,
                                 const std::vector<double>& r_grid);

/// The two-parameter maximal radial family a * G_m + b, characterized by
/// sigma_m of its profile vanishing identically.
class MaximalRadialWeight {
 public:
  MaximalRadialWeight(int k, int m, double a, double b);

  DerivTriple eval(double r) const;
  /// sigma_m of the exact profile at r; identically zero up to roundoff.
  double ode_residual(double r) const;

  int k() const { return k_; }
  int m() const { return m_; }
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  int k_;
  int m_;
  double a_;
  double b_;
};

/// RK4 integration of the radial maximality ODE t f''(t) = -(k/m) f'(t)
/// (t = r^2) inward from boundary data at r = r_end; returns sample radii and
/// integrated values on [r_start, r_end].
struct OdeSolution {
  std::vector<double> r_values;
  std::vector<double> f_values;
};
OdeSolution integrate_maximal_ode(int k, int m, double r_end, double f_end,
                                  double df_end, double r_start, int steps = 4000);

/// The harmonic pole -r^{2-kappa} for a linear minimal submanifold of real
/// codimension kappa >= 3.
WeightFamily minimal_real_weight(int kappa);

/// Radial real Laplacian f'' + (kappa-1) f'/r of a weight; vanishes for the
/// minimal-real family away from V.
double laplacian_residual(const WeightFamily& w, double r);

/// Same, for explicit radial derivative data in kappa real dimensions.
double radial_laplacian(const DerivTriple& d, int kappa, double r);

}  // namespace mtube
