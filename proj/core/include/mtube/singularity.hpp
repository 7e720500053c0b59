#pragma once

#include <string>
#include <vector>

#include "mtube/measures.hpp"

namespace mtube {

/// Maximum of F over the sublevel set {psi_V < s}, estimated on the level
/// shell (torus x sphere sampling) with interior spot checks; for the
/// laboratory's field classes the maximum sits on the shell.
double sublevel_max(const ScalarField& f, const FlatModel& model, double s,
                    int n_torus = 32, int n_sphere = 32, int threads = 1);

struct SlopeSeries {
  std::vector<double> s_values;  ///< decreasing weight levels
  std::vector<double> M_values;  ///< sublevel maxima
  std::vector<double> secants;   ///< (M(s0) - M(s)) / (s0 - s)
  double sigma_hat = 0.0;
  bool convexity_ok = false;       ///< second divided differences >= -1e-6
  bool secants_monotone = false;   ///< nonincreasing as s decreases
  double fit_alpha = 0.0;
  double fit_rms = 0.0;

  std::string to_json() const;
  std::string to_csv() const;
};

/// Relative type as the extrapolated limit of secant slopes of s -> M_s.
SlopeSeries relative_type(const ScalarField& f, const FlatModel& model,
                          const std::vector<double>& s_grid, int n_torus = 32,
                          int n_sphere = 32, int threads = 1);

std::vector<double> default_type_levels(const FlatModel& model, int count = 8);

struct LProbe {
  Eigen::VectorXcd base_point;   ///< torus point on V
  std::vector<double> radii;     ///< decreasing approach radii
  std::vector<double> ratios;    ///< min over directions of F / psi_V
  double liminf_estimate = 0.0;  ///< running min over the last 4 ratios
};

/// Pointwise singularity weight along V: liminf of F / psi_V on shrinking
/// spheres around (0, z0), minimized over sampled directions.
LProbe l_pointwise(const ScalarField& f, const FlatModel& model,
                   const Eigen::VectorXcd& z0, const std::vector<double>& radii,
                   int n_sphere = 16);

std::vector<double> default_probe_radii(const FlatModel& model, int count = 12);

/// Product grid of torus points, `per_dim` per real coordinate.
std::vector<Eigen::VectorXcd> v_grid(const FlatModel& model, int per_dim = 16);

struct MinRelationReport {
  double sigma_hat = 0.0;
  double min_l = 0.0;
  double max_shortfall = 0.0;  ///< max over the grid of sigma_hat - L
  bool consistent = false;     ///< min L == sigma_hat within tolerance
};

/// The relative type as the minimum of the pointwise weight over V.
MinRelationReport min_relation_check(const ScalarField& f, const FlatModel& model,
                                     int grid_per_dim = 16, int threads = 1,
                                     double tolerance = 0.05);

struct BoundsReport {
  double sigma_hat = 0.0;
  double nu_hat = 0.0;
  bool holds = false;  ///< sigma_hat <= nu_hat + tolerance
};

/// The type / Lelong-number inequality with the calibrated normalization.
BoundsReport compare_bounds(const ScalarField& f, const FlatModel& model,
                            const Calibration& calib, TubeMethod method,
                            const IntegralParams& params = {},
                            double tolerance = 0.02);

struct SiuReport {
  bool falsifier_mode = false;
  // certified mode: constancy of the pointwise weight along V
  double l_min = 0.0;
  double l_max = 0.0;
  double spread = 0.0;
  double sigma_hat = 0.0;
  bool constant_ok = false;
  // falsifier mode: a located cone violation
  ScanReport scan;
  bool violation_found = false;

  bool passed() const {
    return falsifier_mode ? violation_found : constant_ok;
  }
  std::string to_json() const;
};

/// Constancy of the pointwise weight along V for k < m.  Certified fields
/// must have constant L equal to the relative type; a scaled-log candidate
/// with nonconstant theta must instead fail the cone scan (the contrapositive
/// of the constancy theorem).
SiuReport siu_scan(const ScalarField& f, const FlatModel& model,
                   int grid_per_dim = 16, int threads = 1,
                   double spread_tolerance = 0.03);

}  // namespace mtube
