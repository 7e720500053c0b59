#include "mtube/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mtube/parallel.hpp"
#include "mtube/util.hpp"

namespace mtube {

namespace {

double frac(double x) { return x - std::floor(x); }

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double lattice_alpha(std::size_t d) {
  const double s = std::sqrt(double(kPrimes[d % std::size(kPrimes)]));
  return s - std::floor(s);
}

std::vector<Eigen::VectorXcd> torus_points(const FlatModel& model, int count) {
  std::vector<Eigen::VectorXcd> pts;
  const int tk = model.n - model.k;
  if (tk == 0) {
    pts.emplace_back(Eigen::VectorXcd::Zero(0));
    return pts;
  }
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXcd z(tk);
    for (int a = 0; a < tk; ++a) {
      const double period = model.torus_periods[static_cast<std::size_t>(a)];
      z[a] = {period * frac((j + 0.5) * lattice_alpha(2 * a)),
              period * frac((j + 0.5) * lattice_alpha(2 * a + 1))};
    }
    pts.push_back(std::move(z));
  }
  return pts;
}

std::vector<Eigen::VectorXcd> directions(int k, int count) {
  std::vector<Eigen::VectorXcd> dirs;
  if (k == 1) {
    for (int s = 0; s < count; ++s) {
      Eigen::VectorXcd u(1);
      u[0] = std::polar(1.0, 2.0 * M_PI * s / count);
      dirs.push_back(std::move(u));
    }
    return dirs;
  }
  std::mt19937_64 rng(2026);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < count; ++s) {
    Eigen::VectorXcd u(k);
    for (int a = 0; a < k; ++a) u[a] = {gauss(rng), gauss(rng)};
    u /= u.norm();
    dirs.push_back(std::move(u));
  }
  return dirs;
}

}  // namespace

double sublevel_max(const ScalarField& f, const FlatModel& model, double s,
                    int n_torus, int n_sphere, int threads) {
  const double r_s = reference_level_radius(model, s);
  if (r_s >= model.tube_radius)
    throw GeometryError("sublevel_max: the sublevel set leaves the tube");
  const auto torus = torus_points(model, n_torus);
  const auto dirs = directions(model.k, n_sphere);

  // Shell sampling plus interior spot checks at ~1% density.
  std::vector<double> shell_r{r_s};
  const std::size_t interior = std::max<std::size_t>(
      1, torus.size() * dirs.size() / 100);
  for (std::size_t i = 0; i < interior; ++i)
    shell_r.push_back(r_s * (0.25 + 0.5 * (i + 0.5) / interior));

  std::vector<double> vals(torus.size() * dirs.size());
  parallel_for(vals.size(), threads, [&](std::size_t i) {
    const auto& t = torus[i / dirs.size()];
    const auto& u = dirs[i % dirs.size()];
    double best = -std::numeric_limits<double>::infinity();
    // The shell carries the max for monotone radial parts; a thin interior
    // subsample guards the assumption.
    best = std::max(best, f.eval(Point{r_s * u, t}));
    if (i < interior)
      best = std::max(best, f.eval(Point{shell_r[i + 1] * u, t}));
    vals[i] = best;
  });
  double m = -std::numeric_limits<double>::infinity();
  for (double v : vals) m = std::max(m, v);
  return m;
}

std::vector<double> default_type_levels(const FlatModel& model, int count) {
  return default_level_grid(model, count);
}

SlopeSeries relative_type(const ScalarField& f, const FlatModel& model,
                          const std::vector<double>& s_grid, int n_torus,
                          int n_sphere, int threads) {
  if (s_grid.size() < 6)
    throw ConstraintError("relative_type: need at least 6 levels");
  for (std::size_t i = 0; i + 1 < s_grid.size(); ++i)
    if (s_grid[i + 1] >= s_grid[i])
      throw ConstraintError("relative_type: levels must decrease");

  SlopeSeries ss;
  ss.s_values = s_grid;
  ss.M_values.resize(s_grid.size());
  for (std::size_t i = 0; i < s_grid.size(); ++i)
    ss.M_values[i] = sublevel_max(f, model, s_grid[i], n_torus, n_sphere, threads);

  // Convexity of s -> M_s: nonnegative second divided differences.
  double slope_scale = 1e-12;
  for (std::size_t i = 1; i < s_grid.size(); ++i)
    slope_scale = std::max(slope_scale,
                           std::abs((ss.M_values[i] - ss.M_values[0]) /
                                    (s_grid[i] - s_grid[0])));
  ss.convexity_ok = true;
  for (std::size_t i = 0; i + 2 < s_grid.size(); ++i) {
    const double d1 = (ss.M_values[i + 1] - ss.M_values[i]) /
                      (s_grid[i + 1] - s_grid[i]);
    const double d2 = (ss.M_values[i + 2] - ss.M_values[i + 1]) /
                      (s_grid[i + 2] - s_grid[i + 1]);
    const double dd = (d2 - d1) / (s_grid[i + 2] - s_grid[i]);
    if (dd < -1e-6 * (1.0 + slope_scale)) ss.convexity_ok = false;
  }

  // Slopes between consecutive levels share the limit of the anchored
  // secants but shed their slowly decaying 1/|s| tail, so the power-offset
  // extrapolation below sees a clean power of the shell radius.
  std::vector<double> radii;
  for (std::size_t i = 1; i < s_grid.size(); ++i) {
    ss.secants.push_back((ss.M_values[i - 1] - ss.M_values[i]) /
                         (s_grid[i - 1] - s_grid[i]));
    radii.push_back(reference_level_radius(model, s_grid[i]));
  }
  ss.secants_monotone = true;
  for (std::size_t i = 0; i + 1 < ss.secants.size(); ++i)
    if (ss.secants[i + 1] > ss.secants[i] + 1e-9 * (1.0 + slope_scale))
      ss.secants_monotone = false;

  const PowerOffsetFit fit = fit_power_offset(radii, ss.secants);
  ss.sigma_hat = fit.limit;
  ss.fit_alpha = fit.alpha;
  ss.fit_rms = fit.rms_residual;
  return ss;
}

std::string SlopeSeries::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "s,M,secant\n";
  for (std::size_t i = 0; i < s_values.size(); ++i)
    os << s_values[i] << "," << M_values[i] << ","
       << (i ? secants[i - 1] : 0.0) << "\n";
  return os.str();
}

std::string SlopeSeries::to_json() const {
  std::ostringstream os;
  os.precision(17);
  auto arr = [&os](const std::vector<double>& v) {
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << "]";
  };
  os << "{\"s\":";
  arr(s_values);
  os << ",\"M\":";
  arr(M_values);
  os << ",\"secants\":";
  arr(secants);
  os << ",\"sigma\":" << sigma_hat
     << ",\"convex\":" << (convexity_ok ? "true" : "false")
     << ",\"secants_monotone\":" << (secants_monotone ? "true" : "false")
     << "}";
  return os.str();
}

std::vector<double> default_probe_radii(const FlatModel& model, int count) {
  std::vector<double> radii;
  double r = model.tube_radius / 8.0;
  for (int i = 0; i < count; ++i) {
    radii.push_back(r);
    r /= 2.0;
  }
  return radii;
}

LProbe l_pointwise(const ScalarField& f, const FlatModel& model,
                   const Eigen::VectorXcd& z0, const std::vector<double>& radii,
                   int n_sphere) {
  if (radii.size() < 8)
    throw ConstraintError("l_pointwise: need at least 8 approach radii");
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    if (radii[i + 1] >= radii[i])
      throw ConstraintError("l_pointwise: radii must decrease");

  const auto dirs = directions(model.k, n_sphere);
  LProbe probe;
  probe.base_point = z0;
  probe.radii = radii;
  for (const double r : radii) {
    const double psi = reference_value(model, r);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& u : dirs)
      worst = std::min(worst, f.eval(Point{r * u, z0}) / psi);
    probe.ratios.push_back(worst);
  }
  const std::size_t tail = std::min<std::size_t>(4, probe.ratios.size());
  double liminf = std::numeric_limits<double>::infinity();
  for (std::size_t i = probe.ratios.size() - tail; i < probe.ratios.size(); ++i)
    liminf = std::min(liminf, probe.ratios[i]);
  probe.liminf_estimate = liminf;
  return probe;
}

std::vector<Eigen::VectorXcd> v_grid(const FlatModel& model, int per_dim) {
  const int tk = model.n - model.k;
  std::vector<Eigen::VectorXcd> pts;
  if (tk == 0) {
    pts.emplace_back(Eigen::VectorXcd::Zero(0));
    return pts;
  }
  const int dims = 2 * tk;
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  while (true) {
    Eigen::VectorXcd z(tk);
    for (int a = 0; a < tk; ++a) {
      const double period = model.torus_periods[static_cast<std::size_t>(a)];
      z[a] = {period * idx[static_cast<std::size_t>(2 * a)] / double(per_dim),
              period * idx[static_cast<std::size_t>(2 * a + 1)] / double(per_dim)};
    }
    pts.push_back(std::move(z));
    int d = 0;
    for (; d < dims; ++d) {
      if (++idx[static_cast<std::size_t>(d)] < per_dim) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d == dims) break;
  }
  return pts;
}

MinRelationReport min_relation_check(const ScalarField& f, const FlatModel& model,
                                     int grid_per_dim, int threads,
                                     double tolerance) {
  const auto grid = v_grid(model, grid_per_dim);
  const auto radii = default_probe_radii(model);
  std::vector<double> l_hat(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    l_hat[i] = l_pointwise(f, model, grid[i], radii).liminf_estimate;
  });

  const SlopeSeries ss = relative_type(f, model, default_type_levels(model),
                                       32, 32, threads);
  MinRelationReport rep;
  rep.sigma_hat = ss.sigma_hat;
  rep.min_l = *std::min_element(l_hat.begin(), l_hat.end());
  rep.max_shortfall = 0.0;
  for (double l : l_hat)
    rep.max_shortfall = std::max(rep.max_shortfall, ss.sigma_hat - l);
  const double scale = std::max({1.0, std::abs(rep.sigma_hat), std::abs(rep.min_l)});
  rep.consistent = std::abs(rep.min_l - rep.sigma_hat) <= tolerance * scale &&
                   rep.max_shortfall <= 0.01 * scale + 0.01;
  return rep;
}

BoundsReport compare_bounds(const ScalarField& f, const FlatModel& model,
                            const Calibration& calib, TubeMethod method,
                            const IntegralParams& params, double tolerance) {
  const SlopeSeries ss =
      relative_type(f, model, default_type_levels(model), 32, 32, params.threads);
  const TubeSeries ts =
      lelong_series(f, model, default_s_grid(model), method, calib, params);
  BoundsReport rep;
  rep.sigma_hat = ss.sigma_hat;
  rep.nu_hat = lelong_number(ts);
  const double scale = std::max(1.0, std::abs(rep.nu_hat));
  rep.holds = rep.sigma_hat <= rep.nu_hat + tolerance * scale;
  return rep;
}

std::string SiuReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"falsifier\":" << (falsifier_mode ? "true" : "false");
  if (falsifier_mode) {
    os << ",\"violation_found\":" << (violation_found ? "true" : "false")
       << ",\"scan\":" << scan.to_json();
  } else {
    os << ",\"l_min\":" << l_min << ",\"l_max\":" << l_max
       << ",\"spread\":" << spread << ",\"sigma\":" << sigma_hat
       << ",\"constant\":" << (constant_ok ? "true" : "false");
  }
  os << "}";
  return os.str();
}

SiuReport siu_scan(const ScalarField& f, const FlatModel& model,
                   int grid_per_dim, int threads, double spread_tolerance) {
  if (model.k >= model.m)
    throw ConstraintError("constancy scan requires codimension k < m");

  SiuReport rep;
  if (f.arm() == ScalarField::Arm::ScaledLog && !f.theta().is_constant()) {
    rep.falsifier_mode = true;
    const auto grid = scan_grid(model, model.tube_radius / 50.0,
                                model.tube_radius / 2.0);
    rep.scan = gamma_m_scan(f, model, grid, 0.0, 1e-9, threads);
    rep.violation_found = rep.scan.violations > 0;
    return rep;
  }

  const auto grid = v_grid(model, grid_per_dim);
  const auto radii = default_probe_radii(model);
  std::vector<double> l_hat(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    l_hat[i] = l_pointwise(f, model, grid[i], radii).liminf_estimate;
  });
  rep.l_min = *std::min_element(l_hat.begin(), l_hat.end());
  rep.l_max = *std::max_element(l_hat.begin(), l_hat.end());
  rep.spread = rep.l_max - rep.l_min;
  const SlopeSeries ss =
      relative_type(f, model, default_type_levels(model), 32, 32, threads);
  rep.sigma_hat = ss.sigma_hat;
  const double scale = std::max(1.0, std::abs(rep.l_max));
  rep.constant_ok = rep.spread <= spread_tolerance * scale &&
                    std::abs(rep.l_min - rep.sigma_hat) <=
                        spread_tolerance * scale;
  return rep;
}

}  // namespace mtube
