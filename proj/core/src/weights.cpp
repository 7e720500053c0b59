#include "mtube/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mtube/util.hpp"

namespace mtube {

ExpansionConstants expansion_constants(int k, int m, double delta) {
  if (m < 1 || m > k) throw ConstraintError("expansion_constants: need 1 <= m <= k");
  const double bound = delta_lower_bound(k, m);
  if (delta <= bound)
    throw ConstraintError("expansion_constants: delta must exceed max{1, 2(k/m-1)} = " +
                          std::to_string(bound));
  const double km = double(k) / double(m);
  ExpansionConstants c;
  c.D = (k == m) ? 1.0 : 1.0 / (2.0 * km - 2.0);
  c.B1 = 2.0 * (1.0 - km + (1.0 - km) * delta + delta * delta / 4.0);
  c.B2 = 2.0 + delta;
  c.B3 = 2.0 * (km + delta * (km - 0.5) - delta * delta / 4.0);
  return c;
}

double sigma_m_leading(int k, int m, double delta) {
  if (m > k) throw ConstraintError("sigma_m_leading: need m <= k");
  return delta * (delta / 2.0 - (double(k) / double(m) - 1.0));
}

EigenProfile scaled_profile(const WeightFamily& w, double r, int n) {
  if (w.kind == WeightKind::FNu || w.kind == WeightKind::MinimalReal)
    throw ConstraintError("scaled_profile: only defined for the g-family");
  const double km = double(w.k) / double(w.m);
  const double d = (w.k == w.m) ? 1.0 : 1.0 / (2.0 * km - 2.0);
  const double re = std::sqrt(r * r + w.epsilon);
  const double h = re + w.A * std::pow(re, 1.0 + w.delta);
  const double scale = 2.0 * d * std::pow(h, 2.0 * km) / w.gamma;
  return radial_eigprofile(eval_weight(w, r), r, w.k, n).scaled(scale);
}

std::string Certificate::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"fitted_exponent\":" << fitted_exponent
     << ",\"fitted_coefficient\":" << fitted_coefficient
     << ",\"fit_rms\":" << fit_rms << ",\"points\":[";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    os << (i ? "," : "") << "{\"r\":" << p.r << ",\"margin\":" << p.margin
       << ",\"sigma_m\":" << p.sigma_m_raw << ",\"sigma\":[";
    for (std::size_t j = 0; j < p.sigma.size(); ++j)
      os << (j ? "," : "") << p.sigma[j];
    os << "]}";
  }
  os << "]}";
  return os.str();
}

CertifiedWeight make_weight(WeightKind kind, int k, int m, double delta,
                            double epsilon, const FlatModel& model,
                            double tolerance) {
  if (kind != WeightKind::GSub && kind != WeightKind::GSuper)
    throw ConstraintError("make_weight: kind must be g-sub or g-super");
  if (kind == WeightKind::GSuper && epsilon != 0.0)
    throw ConstraintError("make_weight: the superweight is unregularized (epsilon = 0)");

  WeightFamily fam = (kind == WeightKind::GSub)
                         ? WeightFamily::g_sub(k, m, delta, epsilon)
                         : WeightFamily::g_super(k, m, delta);

  const double r_max = model.tube_radius / 2.0;
  constexpr int kDecades = 3;
  constexpr int kPerDecade = 64;
  const std::vector<double> grid =
      log_grid(r_max * std::pow(10.0, -kDecades), r_max, kDecades * kPerDecade + 1);

  CertifiedWeight out;
  out.family = fam;
  std::size_t pass_prefix = 0;
  for (const double r : grid) {
    const EigenProfile sp = scaled_profile(fam, r, model.n);
    const double scale = std::max(std::abs(sp.lambda_rad), std::abs(sp.lambda_tan));

    CertificatePoint pt;
    pt.r = r;
    bool ok = true;
    double margin = std::numeric_limits<double>::infinity();
    double scale_pow = 1.0;
    for (int j = 1; j <= m; ++j) {
      scale_pow *= std::max(scale, 1e-300);
      const double sj = sigma_profile(sp, j) / scale_pow;
      pt.sigma.push_back(sj);
      if (kind == WeightKind::GSub) {
        ok = ok && sj >= -tolerance;
        margin = std::min(margin, sj);
      } else {
        // superweight: sigma_m <= 0, lower symmetric functions positive
        if (j < m) {
          ok = ok && sj > tolerance;
          margin = std::min(margin, sj);
        } else {
          ok = ok && sj <= tolerance;
          margin = std::min(margin, -sj);
        }
      }
    }
    pt.margin = margin;
    pt.sigma_m_raw = sigma_profile(sp, m);
    if (ok && pass_prefix == out.certificate.points.size())
      pass_prefix = out.certificate.points.size() + 1;
    out.certificate.points.push_back(std::move(pt));
  }

  if (pass_prefix == 0)
    throw ConstructionError(
        "make_weight: sign conditions fail at the smallest grid radius; "
        "check the delta configuration");
  out.certified_radius = out.certificate.points[pass_prefix - 1].r;
  out.certificate.points.resize(pass_prefix);

  // Exponent fit over the middle decade of the certified range, avoiding both
  // the higher-order contamination at large radii and cancellation noise at
  // the smallest ones.
  std::vector<double> xs, ys;
  for (const auto& p : out.certificate.points) {
    if (p.r >= out.certified_radius * 1e-2 && p.r <= out.certified_radius * 1e-1) {
      xs.push_back(p.r);
      ys.push_back(std::abs(p.sigma_m_raw));
    }
  }
  if (xs.size() >= 4) {
    const LineFit f = fit_power_law(xs, ys);
    out.certificate.fitted_exponent = f.slope;
    out.certificate.fitted_coefficient = std::exp(f.intercept);
    out.certificate.fit_rms = f.rms_residual;
  }
  return out;
}

ExpansionReport verify_expansion(int k, int m, double delta, double epsilon, int A,
                                 const std::vector<double>& r_grid) {
  const ExpansionConstants c = expansion_constants(k, m, delta);
  const double km = double(k) / double(m);

  WeightFamily fam;
  fam.kind = A > 0 ? WeightKind::GSub : (A < 0 ? WeightKind::GSuper : WeightKind::GPure);
  fam.k = k;
  fam.m = m;
  fam.delta = delta;
  fam.A = A;
  fam.epsilon = epsilon;

  ExpansionReport rep;
  for (const double r : r_grid) {
    if (r <= 0.0) throw ConstraintError("verify_expansion: grid must be positive");
    const double re = std::sqrt(r * r + epsilon);
    const double red = std::pow(re, delta);
    const EigenProfile sp = scaled_profile(fam, r, k);
    const double expected_rad = 1.0 - km + A * c.B1 * red +
                                epsilon / (re * re) * (km + A * c.B3 * red);
    const double expected_tan = 1.0 + A * c.B2 * red;
    rep.r_values.push_back(re);
    rep.residuals.push_back(std::max(std::abs(sp.lambda_rad - expected_rad),
                                     std::abs(sp.lambda_tan - expected_tan)));
  }

  // Fit only samples above the roundoff floor; residuals of high order sink
  // below it at small radii and would drag the slope toward zero.
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < rep.residuals.size(); ++i) {
    if (rep.residuals[i] > 1e-13) {
      fx.push_back(rep.r_values[i]);
      fy.push_back(rep.residuals[i]);
    }
  }
  if (fx.size() < 4) {
    // Residual indistinguishable from zero (exact agreement); report a
    // sentinel exponent.
    rep.fitted_exponent = std::numeric_limits<double>::infinity();
    rep.exponent_exceeds_delta = true;
    return rep;
  }
  const LineFit f = fit_power_law(fx, fy);
  rep.fitted_exponent = f.slope;
  rep.fit_rms = f.rms_residual;
  rep.exponent_exceeds_delta = f.slope > delta;
  return rep;
}

MaximalRadialWeight::MaximalRadialWeight(int k, int m, double a, double b)
    : k_(k), m_(m), a_(a), b_(b) {
  if (a < 0.0)
    throw ConstraintError("MaximalRadialWeight: a < 0 is not m-subharmonic");
  if (m > k) throw ConstraintError("MaximalRadialWeight: need m <= k");
}

DerivTriple MaximalRadialWeight::eval(double r) const {
  if (a_ == 0.0) return {b_, 0.0, 0.0};
  DerivTriple t = eval_weight(WeightFamily::g_pure(k_, m_), r) * a_;
  t.value += b_;
  return t;
}

double MaximalRadialWeight::ode_residual(double r) const {
  const EigenProfile p = radial_eigprofile(eval(r), r, k_, k_);
  return sigma_profile(p, m_);
}

OdeSolution integrate_maximal_ode(int k, int m, double r_end, double f_end,
                                  double df_end, double r_start, int steps) {
  if (r_start <= 0.0 || r_end <= r_start)
    throw ConstraintError("integrate_maximal_ode: need 0 < r_start < r_end");
  const double km = double(k) / double(m);
  // In u = log(t), t = r^2: f_u = w, w_u = (1 - k/m) w.
  const double u_end = 2.0 * std::log(r_end);
  const double u_start = 2.0 * std::log(r_start);
  const double hstep = (u_start - u_end) / steps;  // negative: integrate inward

  double f = f_end;
  double w = r_end * df_end / 2.0;  // t f_t at the boundary
  const double cw = 1.0 - km;

  OdeSolution sol;
  sol.r_values.push_back(r_end);
  sol.f_values.push_back(f);
  double u = u_end;
  for (int i = 0; i < steps; ++i) {
    // RK4 on the linear system (f' = w, w' = cw * w).
    const double k1f = w, k1w = cw * w;
    const double k2f = w + 0.5 * hstep * k1w, k2w = cw * k2f;
    const double k3f = w + 0.5 * hstep * k2w, k3w = cw * k3f;
    const double k4f = w + hstep * k3w, k4w = cw * k4f;
    f += hstep / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    w += hstep / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    u += hstep;
    sol.r_values.push_back(std::exp(0.5 * u));
    sol.f_values.push_back(f);
  }
  return sol;
}

WeightFamily minimal_real_weight(int kappa) {
  return WeightFamily::minimal_real(kappa);
}

double radial_laplacian(const DerivTriple& d, int kappa, double r) {
  if (r <= 0.0) throw ConstraintError("radial_laplacian: r must be positive");
  return d.d2 + (kappa - 1.0) * d.d1 / r;
}

double laplacian_residual(const WeightFamily& w, double r) {
  if (w.kind != WeightKind::MinimalReal)
    throw ConstraintError("laplacian_residual: weight is not minimal-real");
  return radial_laplacian(eval_weight(w, r), w.kappa, r);
}

}  // namespace mtube
