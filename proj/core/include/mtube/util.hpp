#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mtube {

inline double binom(int n, int j) {
  if (j < 0 || j > n) return 0.0;
  double b = 1.0;
  for (int i = 0; i < j; ++i) b = b * double(n - i) / double(i + 1);
  return b;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= double(i);
  return f;
}

/// Surface area of the unit sphere S^{d-1} in R^d.
inline double sphere_area(int d) {
  // 2 pi^{d/2} / Gamma(d/2)
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Geometric grid of `count` values from `lo` to `hi` (inclusive, increasing).
std::vector<double> log_grid(double lo, double hi, int count);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// Least-squares line through (x_i, y_i).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares fit of y ~ c * x^p in log-log space; returns {p, log c, rms}.
LineFit fit_power_law(std::span<const double> x, std::span<const double> y);

/// Fit of y ~ limit + coeff * x^alpha with alpha free (grid search over alpha,
/// linear least squares for the other two).  Used to extrapolate scaled tube
/// series and secant-slope series to x -> 0.
struct PowerOffsetFit {
  double limit = 0.0;
  double coeff = 0.0;
  double alpha = 0.0;
  double rms_residual = 0.0;
};

PowerOffsetFit fit_power_offset(std::span<const double> x, std::span<const double> y);

/// Stable 64-bit FNV-1a string hash, used to name run directories.
std::uint64_t fnv1a(std::string_view s);

}  // namespace mtube
