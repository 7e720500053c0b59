#include "mtube/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mtube/parallel.hpp"
#include "mtube/util.hpp"

namespace mtube {

WeightFamily reference_weight(const FlatModel& model) {
  return WeightFamily::g_pure(model.k, std::min(model.m, model.k));
}

double reference_value(const FlatModel& model, double r) {
  return eval_weight(reference_weight(model), r).value;
}

double reference_level_radius(const FlatModel& model, double s) {
  const int k = model.k, m = std::min(model.m, model.k);
  if (m == k) return std::exp(s);
  if (s >= 0.0) throw ConstraintError("sublevel radius: level must be negative");
  const double q = 2.0 * double(k) / double(m) - 2.0;
  return std::pow(-s, -1.0 / q);
}

namespace {

double frac(double x) { return x - std::floor(x); }

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double lattice_alpha(std::size_t d) {
  const double s = std::sqrt(double(kPrimes[d % std::size(kPrimes)]));
  return s - std::floor(s);
}

std::vector<Eigen::VectorXcd> torus_lattice(const FlatModel& model, int count) {
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

std::vector<Eigen::VectorXcd> torus_lattice_in_patch(
    const FlatModel& model, int count,
    const std::vector<std::pair<double, double>>& patch) {
  const int tk = model.n - model.k;
  if (static_cast<int>(patch.size()) != 2 * tk)
    throw ConstraintError("patch must have 2(n-k) intervals");
  for (const auto& [lo, hi] : patch)
    if (hi <= lo) throw ConstraintError("patch interval is empty");
  std::vector<Eigen::VectorXcd> pts;
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXcd z(tk);
    for (int a = 0; a < tk; ++a) {
      const auto& [xlo, xhi] = patch[static_cast<std::size_t>(2 * a)];
      const auto& [ylo, yhi] = patch[static_cast<std::size_t>(2 * a + 1)];
      z[a] = {xlo + (xhi - xlo) * frac((j + 0.5) * lattice_alpha(2 * a)),
              ylo + (yhi - ylo) * frac((j + 0.5) * lattice_alpha(2 * a + 1))};
    }
    pts.push_back(std::move(z));
  }
  return pts;
}

std::vector<Eigen::VectorXcd> sphere_directions(int k, int count,
                                                std::uint64_t seed) {
  std::vector<Eigen::VectorXcd> dirs;
  if (k == 1) {
    for (int s = 0; s < count; ++s) {
      Eigen::VectorXcd u(1);
      u[0] = std::polar(1.0, 2.0 * M_PI * s / count);
      dirs.push_back(std::move(u));
    }
    return dirs;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < count; ++s) {
    Eigen::VectorXcd u(k);
    for (int a = 0; a < k; ++a) u[a] = {gauss(rng), gauss(rng)};
    u /= u.norm();
    dirs.push_back(std::move(u));
  }
  return dirs;
}

double density_constant(const FlatModel& model) {
  return binom(model.k - 1, model.m - 1);
}

double scale_exponent(const FlatModel& model) {
  return 2.0 * model.k - 2.0 * double(model.k) / double(model.m);
}

TubeValue radial_quadrature(const ScalarField& f, const FlatModel& model,
                            double s) {
  const double area = sphere_area(2 * model.k);
  const double vol = model.torus_volume();
  const double c = density_constant(model);
  // log-substitution Simpson: integrand density(r) r^{2k} du, u = log r.
  const int panels = 2048;
  const double u_hi = std::log(s), u_lo = u_hi - 30.0;
  const double h = (u_hi - u_lo) / panels;
  auto integrand = [&](double u) {
    const double r = std::exp(u);
    const auto prof = f.radial_profile(r, model);
    if (!prof)
      throw ConstraintError("radial-quadrature requires a radial field");
    const double dens =
        c * (prof->lambda_rad + (model.k - 1) * prof->lambda_tan);
    return dens * std::pow(r, 2.0 * model.k);
  };
  double acc = integrand(u_lo) + integrand(u_hi);
  for (int i = 1; i < panels; ++i)
    acc += integrand(u_lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return {acc * h / 3.0 * area * vol, 0.0, false};
}

TubeValue flux_integral(const ScalarField& f, const FlatModel& model, double s,
                        const IntegralParams& params) {
  if (model.m != 1)
    throw ConstraintError("flux tube integral is defined for m = 1 only");
  const double avg = shell_average_radial_derivative(f, model, s, params);
  const double area = sphere_area(2 * model.k);
  return {0.25 * avg * area * std::pow(s, 2.0 * model.k - 1.0) *
              model.torus_volume(),
          0.0, false};
}

TubeValue monte_carlo_integral(const ScalarField& f, const FlatModel& model,
                               double s, const IntegralParams& params) {
  const double area = sphere_area(2 * model.k);
  const double vol = model.torus_volume();
  const double c1 = binom(model.k - 1, model.m - 1);
  const double c2 = binom(model.k, model.m - 1);
  const double u_hi = std::log(s), u_lo = u_hi - 6.0;
  const int S = params.strata;
  const double du = (u_hi - u_lo) / S;

  struct Slot {
    double mean = 0.0;
    double var = 0.0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(S));
  parallel_for(static_cast<std::size_t>(S), params.threads, [&](std::size_t j) {
    std::mt19937_64 rng(params.seed * 0x9E3779B97F4A7C15ull + j + 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss;
    const double lo = u_lo + j * du;
    double sum = 0.0, sum2 = 0.0;
    const int N = params.samples_per_stratum;
    for (int i = 0; i < N; ++i) {
      const double u = lo + du * unif(rng);
      const double r = std::exp(u);
      Eigen::VectorXcd dir(model.k);
      for (int a = 0; a < model.k; ++a) dir[a] = {gauss(rng), gauss(rng)};
      dir *= r / dir.norm();
      Eigen::VectorXcd tan(model.n - model.k);
      for (int a = 0; a < model.n - model.k; ++a) {
        const double period = model.torus_periods[static_cast<std::size_t>(a)];
        tan[a] = {period * unif(rng), period * unif(rng)};
      }
      const Point p{std::move(dir), std::move(tan)};
      const BlockTraces t =
          fd_block_traces(f, p, model, fd_default_step(r));
      const double val =
          (c1 * t.normal + c2 * t.tangent) * std::pow(r, 2.0 * model.k);
      sum += val;
      sum2 += val * val;
    }
    const double mean = sum / N;
    slots[j].mean = mean;
    slots[j].var = std::max(0.0, sum2 / N - mean * mean) / N;
  });

  TubeValue out;
  double var = 0.0;
  for (const Slot& sl : slots) {
    out.value += sl.mean * du;
    var += sl.var * du * du;
  }
  out.value *= area * vol;
  out.std_error = std::sqrt(var) * area * vol;
  out.mc_warning = out.std_error > 0.05 * std::abs(out.value) + 1e-12;
  return out;
}

}  // namespace

double shell_average_radial_derivative(const ScalarField& f,
                                       const FlatModel& model, double r,
                                       const IntegralParams& params) {
  if (const auto prof = f.radial_profile(r, model))
    return 2.0 * r * prof->lambda_tan;  // f'(r), exactly

  const auto torus = torus_lattice(model, params.shell_torus);
  const auto dirs = sphere_directions(model.k, params.shell_sphere, 2026);
  const double h = 1e-5 * r;
  std::vector<double> vals(torus.size() * dirs.size());
  parallel_for(vals.size(), params.threads, [&](std::size_t i) {
    const auto& t = torus[i / dirs.size()];
    const auto& u = dirs[i % dirs.size()];
    const Point pp{(r + h) * u, t};
    const Point pm{(r - h) * u, t};
    vals[i] = (f.eval(pp) - f.eval(pm)) / (2.0 * h);
  });
  double sum = 0.0;
  for (double v : vals) sum += v;
  return sum / static_cast<double>(vals.size());
}

TubeValue tube_integral(const ScalarField& f, const FlatModel& model, double s,
                        TubeMethod method, const IntegralParams& params) {
  if (s <= 0.0 || s > model.tube_radius)
    throw ConstraintError("tube_integral: need 0 < s <= tube_radius");
  switch (method) {
    case TubeMethod::RadialQuadrature:
      return radial_quadrature(f, model, s);
    case TubeMethod::Flux:
      return flux_integral(f, model, s, params);
    case TubeMethod::MonteCarlo:
      return monte_carlo_integral(f, model, s, params);
  }
  throw ConstraintError("tube_integral: unknown method");
}

std::vector<double> default_s_grid(const FlatModel& model, int count) {
  std::vector<double> g;
  double s = model.tube_radius / 2.0;
  for (int i = 0; i < count; ++i) {
    g.push_back(s);
    s /= 2.0;
  }
  return g;
}

std::string TubeSeries::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "s,raw,scaled,std_error\n";
  for (std::size_t i = 0; i < s_values.size(); ++i)
    os << s_values[i] << "," << raw_integrals[i] << "," << scaled_values[i]
       << "," << std_errors[i] << "\n";
  return os.str();
}

std::string TubeSeries::to_json() const {
  std::ostringstream os;
  os.precision(17);
  auto arr = [&os](const std::vector<double>& v) {
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << "]";
  };
  os << "{\"s\":";
  arr(s_values);
  os << ",\"raw\":";
  arr(raw_integrals);
  os << ",\"scaled\":";
  arr(scaled_values);
  os << ",\"limit\":" << extrapolated_limit << ",\"alpha\":" << fit_alpha
     << ",\"rms\":" << fit_rms << ",\"fit_ok\":" << (fit_ok ? "true" : "false")
     << ",\"monotone\":" << (monotone ? "true" : "false") << "}";
  return os.str();
}

namespace {

void finish_series(TubeSeries& ts, const std::vector<double>& fit_x) {
  const PowerOffsetFit fit = fit_power_offset(fit_x, ts.scaled_values);
  ts.extrapolated_limit = fit.limit;
  ts.fit_alpha = fit.alpha;
  ts.fit_coeff = fit.coeff;
  ts.fit_rms = fit.rms_residual;
  double scale = 1e-9;
  double err = 0.0;
  for (double v : ts.scaled_values) scale = std::max(scale, std::abs(v));
  for (double e : ts.std_errors) err += e;
  err /= static_cast<double>(ts.std_errors.size());
  ts.fit_ok =
      fit.alpha > 0.0 && fit.rms_residual <= 0.02 * scale + 2.0 * err + 1e-9;

  ts.monotone = true;
  for (std::size_t i = 0; i + 1 < ts.raw_integrals.size(); ++i) {
    const double slack = 1e-9 * std::abs(ts.raw_integrals[i]) +
                         3.0 * (ts.std_errors[i] + ts.std_errors[i + 1]) + 1e-12;
    if (ts.raw_integrals[i + 1] > ts.raw_integrals[i] + slack) ts.monotone = false;
  }
}

}  // namespace

TubeSeries lelong_series(const ScalarField& f, const FlatModel& model,
                         const std::vector<double>& s_grid, TubeMethod method,
                         const Calibration& calib,
                         const IntegralParams& params) {
  if (s_grid.size() < 6)
    throw ConstraintError("lelong_series: need at least 6 tube radii");
  for (std::size_t i = 0; i + 1 < s_grid.size(); ++i)
    if (s_grid[i + 1] > 0.5000001 * s_grid[i])
      throw ConstraintError("lelong_series: grid must be geometric with ratio <= 1/2");

  const double p = scale_exponent(model);
  TubeSeries ts;
  std::vector<TubeValue> vals(s_grid.size());
  // Each radius is independent; MC already parallelizes internally, so the
  // outer loop stays sequential for determinism of the per-radius seeds.
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    IntegralParams pp = params;
    pp.seed = params.seed + i;
    vals[i] = tube_integral(f, model, s_grid[i], method, pp);
  }
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    ts.s_values.push_back(s);
    ts.raw_integrals.push_back(vals[i].value);
    ts.scaled_values.push_back(vals[i].value * calib.C_km / std::pow(s, p));
    ts.std_errors.push_back(vals[i].std_error * calib.C_km / std::pow(s, p));
  }
  finish_series(ts, ts.s_values);
  return ts;
}

double lelong_number(const TubeSeries& ts) {
  if (!ts.fit_ok)
    throw ConstructionError("lelong_number: extrapolation diagnostics failed");
  return std::max(ts.extrapolated_limit, 0.0);
}

Calibration calibrate(const FlatModel& model) {
  const ScalarField psi = ScalarField::radial(reference_weight(model));
  Calibration c;
  c.k = model.k;
  c.m = model.m;
  c.V_volume = model.torus_volume();
  Calibration unit = c;
  unit.C_km = 1.0;
  const TubeMethod method =
      model.m == 1 ? TubeMethod::Flux : TubeMethod::RadialQuadrature;
  const TubeSeries ts =
      lelong_series(psi, model, default_s_grid(model), method, unit);
  if (!(ts.extrapolated_limit > 0.0))
    throw ConstructionError("calibrate: degenerate raw limit");
  c.C_km = 1.0 / ts.extrapolated_limit;
  return c;
}

std::vector<double> default_level_grid(const FlatModel& model, int count) {
  std::vector<double> levels;
  double r = model.tube_radius / 4.0;
  for (int i = 0; i < count; ++i) {
    levels.push_back(reference_value(model, r));
    r /= 2.0;
  }
  return levels;
}

namespace {

TubeSeries sublevel_series_impl(const ScalarField& f, const FlatModel& model,
                                const std::vector<double>& levels,
                                const IntegralParams& params,
                                const std::vector<std::pair<double, double>>* patch) {
  if (levels.size() < 3)
    throw ConstraintError("sublevel series: need at least 3 levels");
  for (std::size_t i = 0; i + 1 < levels.size(); ++i)
    if (levels[i + 1] >= levels[i])
      throw ConstraintError("sublevel series: levels must decrease");

  const WeightFamily g = reference_weight(model);
  const int m = std::min(model.m, model.k);
  const double cflux =
      binom(model.k - 1, m - 1) / (4.0 * std::pow(2.0, m - 1)) *
      sphere_area(2 * model.k) * model.torus_volume();

  TubeSeries ts;
  std::vector<double> radii;
  for (const double s : levels) {
    const double r = reference_level_radius(model, s);
    const double gp = eval_weight(g, r).d1;
    double avg;
    if (patch) {
      const auto torus = torus_lattice_in_patch(model, params.shell_torus, *patch);
      const auto dirs = sphere_directions(model.k, params.shell_sphere, 2026);
      std::vector<double> vals(torus.size() * dirs.size());
      const double h = 1e-5 * r;
      parallel_for(vals.size(), params.threads, [&](std::size_t i) {
        const auto& t = torus[i / dirs.size()];
        const auto& u = dirs[i % dirs.size()];
        vals[i] = (f.eval(Point{(r + h) * u, t}) - f.eval(Point{(r - h) * u, t})) /
                  (2.0 * h);
      });
      double sum = 0.0;
      for (double v : vals) sum += v;
      avg = sum / static_cast<double>(vals.size());
    } else {
      avg = shell_average_radial_derivative(f, model, r, params);
    }
    radii.push_back(r);
    ts.s_values.push_back(s);
    ts.raw_integrals.push_back(cflux * avg * std::pow(gp, m - 1) *
                               std::pow(r, 2.0 * model.k - m));
    ts.scaled_values.push_back(avg / gp);
    ts.std_errors.push_back(0.0);
  }
  finish_series(ts, radii);
  return ts;
}

}  // namespace

TubeSeries sublevel_series(const ScalarField& f, const FlatModel& model,
                           const std::vector<double>& levels,
                           const IntegralParams& params) {
  return sublevel_series_impl(f, model, levels, params, nullptr);
}

double polar_density(const ScalarField& f, const FlatModel& model,
                     const std::vector<std::pair<double, double>>& patch,
                     const std::vector<double>& levels,
                     const IntegralParams& params) {
  const TubeSeries ts = sublevel_series_impl(f, model, levels, params, &patch);
  return ts.extrapolated_limit;
}

ReweightMap reweight_map(int k, int m) {
  if (m >= k) throw ConstraintError("reweight map requires m < k");
  return {k, m};
}

double ReweightMap::apply(double t) const {
  if (t >= 0.0) throw ConstraintError("reweight map domain is t < 0");
  return std::pow(-t, -double(m) / double(k - m));
}

double ReweightMap::derivative(double t) const {
  if (t >= 0.0) throw ConstraintError("reweight map domain is t < 0");
  const double p = double(m) / double(k - m);
  return p * std::pow(-t, -p - 1.0);
}

}  // namespace mtube
