#include "mtube/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtube {

std::vector<double> log_grid(double lo, double hi, int count) {
  if (lo <= 0.0 || hi <= lo || count < 2)
    throw std::invalid_argument("log_grid: need 0 < lo < hi and count >= 2");
  std::vector<double> g(static_cast<std::size_t>(count));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (count - 1));
  return g;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("fit_line: bad sizes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

LineFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) continue;  // log-log fit ignores non-positive samples
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  if (lx.size() < 2) throw std::invalid_argument("fit_power_law: too few positive samples");
  return fit_line(lx, ly);
}

namespace {

// Given alpha, the best (limit, coeff) solve a 2x2 normal system.
PowerOffsetFit solve_for_alpha(std::span<const double> x, std::span<const double> y,
                               double alpha) {
  const std::size_t n = x.size();
  double s1 = double(n), sp = 0, spp = 0, sy = 0, spy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::pow(x[i], alpha);
    sp += p;
    spp += p * p;
    sy += y[i];
    spy += p * y[i];
  }
  const double det = s1 * spp - sp * sp;
  PowerOffsetFit f;
  f.alpha = alpha;
  if (std::abs(det) < 1e-300) {
    f.limit = sy / s1;
    f.coeff = 0.0;
  } else {
    f.limit = (spp * sy - sp * spy) / det;
    f.coeff = (s1 * spy - sp * sy) / det;
  }
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.limit - f.coeff * std::pow(x[i], alpha);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

}  // namespace

PowerOffsetFit fit_power_offset(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3)
    throw std::invalid_argument("fit_power_offset: need at least 3 samples");
  double ymin = y[0], ymax = y[0];
  for (double v : y) {
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  const double spread = ymax - ymin;
  if (spread <= 1e-12 * (1.0 + std::abs(ymax))) {
    // Constant series: the limit is the mean, the rate is immaterial.
    double sy = 0;
    for (double v : y) sy += v;
    return {sy / n, 0.0, 1.0, 0.0};
  }

  PowerOffsetFit best;
  best.rms_residual = std::numeric_limits<double>::infinity();
  constexpr int kCoarse = 96;
  const double lo = std::log(0.05), hi = std::log(8.0);
  for (int i = 0; i <= kCoarse; ++i) {
    const double a = std::exp(lo + (hi - lo) * i / kCoarse);
    const PowerOffsetFit f = solve_for_alpha(x, y, a);
    if (f.rms_residual < best.rms_residual) best = f;
  }
  // One refinement pass around the coarse winner.
  for (int i = -8; i <= 8; ++i) {
    const double a = best.alpha * std::exp(i * (hi - lo) / (kCoarse * 8.0));
    const PowerOffsetFit f = solve_for_alpha(x, y, a);
    if (f.rms_residual < best.rms_residual) best = f;
  }
  return best;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace mtube
