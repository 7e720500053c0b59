#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mtube/fields.hpp"

namespace mtube {

/// The reference weight psi_V = G_m(|z'|) of the model: log for m = k, the
/// negative power otherwise.
WeightFamily reference_weight(const FlatModel& model);

/// psi_V value at radius r, and the radius of the sublevel set {psi_V < s}.
double reference_value(const FlatModel& model, double r);
double reference_level_radius(const FlatModel& model, double s);

enum class TubeMethod { RadialQuadrature, Flux, MonteCarlo };

struct IntegralParams {
  std::uint64_t seed = 1;
  int samples_per_stratum = 512;
  int strata = 8;
  int shell_torus = 32;   ///< shell sampling for flux / sublevel series
  int shell_sphere = 32;
  int threads = 1;
};

struct TubeValue {
  double value = 0.0;
  double std_error = 0.0;  ///< monte-carlo only
  bool mc_warning = false; ///< relative standard error above 5%
};

/// Integral over the tube {r < s} of the mixed density
///   C(k-1, m-1) tr_normal(H_F) + C(k, m-1) tr_tangent(H_F),
/// the coordinate form of dd^c F wedged with (dd^c r^2)^{m-1} and the
/// complementary metric powers.  radial-quadrature reduces radial fields to a
/// 1-D integral; flux (m = 1 only) integrates dF/dr over the boundary shell,
/// capturing the distributional mass on V; monte-carlo samples the tube with
/// log-radius stratification.
TubeValue tube_integral(const ScalarField& f, const FlatModel& model, double s,
                        TubeMethod method, const IntegralParams& params = {});

struct TubeSeries {
  std::vector<double> s_values;       ///< decreasing
  std::vector<double> raw_integrals;
  std::vector<double> scaled_values;
  std::vector<double> std_errors;     ///< zero outside monte-carlo
  double extrapolated_limit = 0.0;
  double fit_alpha = 0.0;
  double fit_coeff = 0.0;
  double fit_rms = 0.0;
  bool fit_ok = false;
  bool monotone = false;  ///< raw sequence nonincreasing as s decreases

  std::string to_json() const;
  std::string to_csv() const;
};

struct Calibration {
  int k = 1;
  int m = 1;
  double C_km = 1.0;     ///< fixed so that the limit for psi_V itself is 1
  double V_volume = 1.0; ///< torus volume from the periods
};

/// Normalizes the tube-limit constant against psi_V (flux for m = 1, radial
/// quadrature otherwise).  Deterministic.
Calibration calibrate(const FlatModel& model);

/// Geometric grid of tube radii for the scaled-limit series.
std::vector<double> default_s_grid(const FlatModel& model, int count = 7);

/// Scaled tube series raw * C_km / s^{2k - 2k/m} and its extrapolated limit
/// (fit scaled(s) = nu + b s^alpha with alpha free).
TubeSeries lelong_series(const ScalarField& f, const FlatModel& model,
                         const std::vector<double>& s_grid, TubeMethod method,
                         const Calibration& calib,
                         const IntegralParams& params = {});

/// The extrapolated limit; throws ConstructionError when the fit diagnostics
/// failed.
double lelong_number(const TubeSeries& ts);

/// Weight levels s_j = psi_V(r_j) on a geometric radius grid, for the
/// sublevel-set series.
std::vector<double> default_level_grid(const FlatModel& model, int count = 8);

/// Sublevel-set series over W_s = {psi_V < s}: the boundary-flux form of the
/// mixed integral against (dd^c psi_V)^{m-1}, which captures the mass on V.
/// scaled_values are normalized so the series for psi_V itself is
/// identically 1; the limit is directly comparable to the calibrated Lelong
/// number.
TubeSeries sublevel_series(const ScalarField& f, const FlatModel& model,
                           const std::vector<double>& levels,
                           const IntegralParams& params = {});

/// Density of the V-mass over a torus sub-box (intervals per real torus
/// coordinate): the patch-restricted sublevel limit, normalized like
/// sublevel_series.  For a localized weight it estimates the patch mean of
/// theta.
double polar_density(const ScalarField& f, const FlatModel& model,
                     const std::vector<std::pair<double, double>>& patch,
                     const std::vector<double>& levels,
                     const IntegralParams& params = {});

/// The convex increasing reparametrization H_m(t) = (-t)^{-m/(k-m)} linking
/// the sublevel series to the tube series (m < k only).
struct ReweightMap {
  int k = 2;
  int m = 1;
  double apply(double t) const;
  double derivative(double t) const;
};
ReweightMap reweight_map(int k, int m);

/// Average of dF/dr over the shell {r} x torus; exact for radial fields,
/// sampled (deterministically) otherwise.
double shell_average_radial_derivative(const ScalarField& f,
                                       const FlatModel& model, double r,
                                       const IntegralParams& params = {});

}  // namespace mtube
