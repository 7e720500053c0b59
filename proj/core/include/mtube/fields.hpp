#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtube/weights.hpp"

namespace mtube {

/// One term of a real trigonometric polynomial on the torus:
///   amplitude * cos(sum_d freq[d] * 2 pi x_d / period_d + phase),
/// indexed over the 2(n-k) real torus coordinates.
struct TrigTerm {
  std::vector<int> freq;
  double amplitude = 0.0;
  double phase = 0.0;
};

/// A nonnegative trigonometric polynomial theta(z'') on the torus.
/// Nonnegativity is checked by dense sampling at construction; the mean is
/// exact (terms with a nonzero frequency integrate to zero).
class ThetaField {
 public:
  ThetaField(double offset, std::vector<TrigTerm> terms,
             std::vector<double> periods);

  /// Constant theta == c.
  static ThetaField constant(double c, std::vector<double> periods);

  /// Parses {"offset": x, "periods": [...], "terms": [{"freq": [...],
  /// "amplitude": a, "phase": p}, ...]}.
  static ThetaField from_json(const std::string& text);

  double eval(const Eigen::VectorXcd& tangent) const;

  double mean() const { return offset_; }
  double sampled_min() const { return min_; }
  double sampled_max() const { return max_; }
  bool is_constant() const { return terms_.empty(); }
  const std::vector<double>& periods() const { return periods_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  double offset() const { return offset_; }

  /// Mean of theta over a torus sub-box, by dense sampling of the box.
  double patch_mean(const std::vector<std::pair<double, double>>& box) const;

 private:
  double offset_;
  std::vector<TrigTerm> terms_;
  std::vector<double> periods_;  ///< per complex torus coordinate
  double min_ = 0.0;
  double max_ = 0.0;
};

/// Scalar fields on the tube: the tagged union of everything the laboratory
/// evaluates.  Copy is cheap (shared immutable payload).
class ScalarField {
 public:
  enum class Arm { Radial, Localized, ScaledLog, NormSq, Affine, Floored };

  /// f(|z'|) for a closed-form weight family.
  static ScalarField radial(WeightFamily fam);
  static ScalarField radial(const CertifiedWeight& w) { return radial(w.family); }

  /// theta_bar(z) * G_m(r) + C * F_nu(r), with theta_bar = theta(z'')
  /// times a smooth radial cutoff equal to 1 below tube_radius/2.
  static ScalarField localized(ThetaField theta, int k, int m, double nu,
                               double C, const FlatModel& model);

  /// theta(z'') * log|z'|; the constancy-theorem falsifier when theta is
  /// nonconstant and m > k.
  static ScalarField scaled_log(ThetaField theta);

  /// |z'|^2, optionally plus |z''|^2.
  static ScalarField norm_sq(bool include_tangent = false);

  /// sum_i coeff_i * field_i + constant (coefficients >= 0 preserve
  /// m-subharmonicity; negative coefficients are allowed but uncertified).
  static ScalarField affine(std::vector<std::pair<double, ScalarField>> parts,
                            double constant = 0.0);

  /// max(inner, level): bounded truncation of a singular field.
  static ScalarField floored(ScalarField inner, double level);

  Arm arm() const;
  bool singular_on_v() const;

  /// Exact eigenvalue profile of the complex Hessian when the field reduces
  /// to a radial function of |z'| (radial arm, normal-only norm_sq, affine
  /// combinations of those); nullopt otherwise.
  std::optional<EigenProfile> radial_profile(double r, const FlatModel& model) const;

  /// Localized-arm accessors (throw on other arms).
  const ThetaField& theta() const;
  double localization_constant() const;

  double eval(const Point& p) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

inline double eval_field(const ScalarField& f, const Point& p) { return f.eval(p); }

/// Step policy near V: relative accuracy of the difference stencils requires
/// steps proportional to the distance from the singularity.
inline double fd_default_step(double r) { return std::min(1e-3, r / 10.0); }

/// Coordinate complex Hessian (d^2 F / dz_i dz_bar_j) by central differences:
/// diagonal entries from the real/imaginary axis pair, off-diagonal entries
/// from four-point stencils; symmetrized to exact Hermitian.
HermitianMatrix fd_hessian(const ScalarField& f, const Point& p,
                           const FlatModel& model, double step);

/// Sum of H_ii over the normal block and over the tangent block.
struct BlockTraces {
  double normal = 0.0;
  double tangent = 0.0;
};
BlockTraces fd_block_traces(const ScalarField& f, const Point& p,
                            const FlatModel& model, double step);

/// Deterministic scan grid: log-spaced radii x a fixed lattice of torus
/// points x seeded sphere directions in the normal factor.
std::vector<Point> scan_grid(const FlatModel& model, double r_lo, double r_hi,
                             int n_r = 20, int n_torus = 16, int n_sphere = 16,
                             std::uint64_t seed = 2026);

struct ScanReport {
  std::size_t point_count = 0;
  std::size_t violations = 0;
  std::size_t geometry_errors = 0;
  std::optional<std::size_t> first_violation;  ///< grid index
  double first_violation_r = 0.0;
  double min_margin = 0.0;

  bool passed() const { return violations == 0; }
  std::string to_json() const;
};

/// Gamma^m membership at every grid point via finite-difference Hessians;
/// step <= 0 selects fd_default_step(r) per point.  Deterministic in the
/// thread count (per-index slots, in-order reduction).
ScanReport gamma_m_scan(const ScalarField& f, const FlatModel& model,
                        const std::vector<Point>& grid, double step = 0.0,
                        double tolerance = 1e-9, int threads = 1);

struct LocalizeSearch {
  double c_start = 1.0;
  double c_cap = double(1 << 20);
  int n_r = 20;
  int n_torus = 16;
  int n_sphere = 16;
  double scan_tolerance = 2e-3;  ///< absorbs the O(step^2) stencil error
  int threads = 1;
};

struct LocalizedField {
  ScalarField field;
  double C = 0.0;
  ScanReport certificate;
};

/// Doubling search for the smallest power-of-two multiple C of the strictly
/// m-subharmonic F_nu term that makes theta * G_m + C * F_nu pass a full
/// Gamma^m scan on the certification grid.
LocalizedField make_localized(const ThetaField& theta, double nu, int k, int m,
                              const FlatModel& model,
                              const LocalizeSearch& search = {});

/// Admissible localization exponent range: [k/m - 1/2, k/m) for m >= 2,
/// [k-1, k) for m = 1.
void check_nu_range(double nu, int k, int m);

}  // namespace mtube
