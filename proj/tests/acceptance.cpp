// Acceptance gate: one pass/fail line per criterion, each at its stated
// tolerance.  Exit code is the number of failing criteria.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtube/runner.hpp"
#include "mtube/util.hpp"
#include "mtube/weights.hpp"

using namespace mtube;

namespace {

struct Tuple {
  int k, m;
  double delta;
};
const std::vector<Tuple> kTuples = {
    {2, 1, 3.0}, {3, 1, 5.0}, {2, 2, 2.0}, {3, 2, 2.0}, {4, 3, 2.0}};

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

ThetaField bump_theta(const FlatModel& model) {
  TrigTerm t;
  t.freq.assign(static_cast<std::size_t>(2 * (model.n - model.k)), 0);
  t.freq[0] = 1;
  t.amplitude = 1.0;
  return ThetaField(1.0, {t}, model.torus_periods);
}

// 1. sigma_m of the pure weight profile vanishes identically.
bool criterion_maximality() {
  for (const Tuple& t : kTuples) {
    const MaximalRadialWeight w(t.k, t.m, 1.0, 0.0);
    for (double r : log_grid(1e-3, 0.2, 50)) {
      const DerivTriple d = w.eval(r);
      const double lam_tan = d.d1 / (2.0 * r);
      if (std::abs(w.ode_residual(r)) >= 1e-10 * std::pow(lam_tan, t.m))
        return false;
    }
  }
  return true;
}

// 2. Subweight certification with the designed exponent and coefficient.
bool criterion_subweights() {
  for (const Tuple& t : kTuples) {
    FlatModel model(t.k + 1, t.k, t.m);
    const CertifiedWeight w =
        make_weight(WeightKind::GSub, t.k, t.m, t.delta, 0.0, model);
    if (w.certified_radius <= 0.0) return false;
    for (const auto& p : w.certificate.points)
      for (double s : p.sigma)
        if (s < -1e-9) return false;
    if (!close_rel(w.certificate.fitted_exponent, t.delta, 0.02)) return false;
    const double expect =
        binom(t.k - 1, t.m - 1) * std::abs(sigma_m_leading(t.k, t.m, t.delta));
    if (!close_rel(w.certificate.fitted_coefficient, expect, 0.05)) return false;
  }
  return true;
}

// 3. Superweight certification: sigma_m < 0, lower sigmas positive.
bool criterion_superweights() {
  for (const Tuple& t : kTuples) {
    FlatModel model(t.k + 1, t.k, t.m);
    const CertifiedWeight w =
        make_weight(WeightKind::GSuper, t.k, t.m, t.delta, 0.0, model);
    if (w.certified_radius <= 0.0) return false;
    for (const auto& p : w.certificate.points) {
      for (std::size_t j = 0; j + 1 < p.sigma.size(); ++j)
        if (p.sigma[j] <= 0.0) return false;
      if (p.sigma.back() > 1e-9) return false;
    }
  }
  return true;
}

// 4. Expansion residual exponent exceeds delta for A = +-1, eps in {0, 1e-4}.
bool criterion_expansion() {
  const auto grid = log_grid(2e-2, 3e-1, 24);
  for (const Tuple& t : kTuples)
    for (int A : {1, -1})
      for (double eps : {0.0, 1e-4})
        if (!verify_expansion(t.k, t.m, t.delta, eps, A, grid)
                 .exponent_exceeds_delta)
          return false;
  return true;
}

// 5. Calibrated mass linearity and agreement of the two series.
bool criterion_lelong() {
  const FlatModel model(3, 2, 2);
  const Calibration calib = calibrate(model);
  for (double gamma : {0.5, 1.0, 2.0}) {
    const ScalarField f = ScalarField::radial(WeightFamily::g_pure(2, 2, gamma));
    const TubeSeries ts = lelong_series(f, model, default_s_grid(model),
                                        TubeMethod::RadialQuadrature, calib);
    if (!ts.fit_ok || !close_rel(lelong_number(ts), gamma, 0.02)) return false;
    const TubeSeries sub = sublevel_series(f, model, default_level_grid(model));
    if (!sub.monotone) return false;
    if (!close_rel(lelong_number(sub), lelong_number(ts), 0.02)) return false;
  }
  return true;
}

// 6. Convex sublevel maxima whose slope recovers the multiple.
bool criterion_reltype() {
  const FlatModel model(3, 2, 2);
  for (double gamma : {0.5, 1.0, 2.0}) {
    const ScalarField f = ScalarField::radial(WeightFamily::g_pure(2, 2, gamma));
    const SlopeSeries ss = relative_type(f, model, default_type_levels(model));
    if (!ss.convexity_ok) return false;
    if (!close_rel(ss.sigma_hat, gamma, 0.02)) return false;
  }
  return true;
}

// 7. Localized weights: certification, type, mass, pointwise values, bound.
bool criterion_localize() {
  struct Case {
    int k, m;
    double nu;
  };
  for (const Case& c : {Case{2, 1, 1.5}, Case{2, 2, 0.75}}) {
    const FlatModel model(c.k + 1, c.k, c.m);
    const ThetaField theta = bump_theta(model);
    const LocalizedField loc = make_localized(theta, c.nu, c.k, c.m, model);
    if (!loc.certificate.passed()) return false;

    const SlopeSeries ss =
        relative_type(loc.field, model, default_type_levels(model), 36, 16);
    if (ss.sigma_hat > 0.02) return false;

    const Calibration calib = calibrate(model);
    IntegralParams params;
    params.samples_per_stratum = 2048;
    const TubeMethod method =
        c.m == 1 ? TubeMethod::Flux : TubeMethod::MonteCarlo;
    const TubeSeries ts = lelong_series(loc.field, model, default_s_grid(model),
                                        method, calib, params);
    const double nu_hat = lelong_number(ts);
    if (!close_rel(nu_hat, theta.mean(), 0.05)) return false;

    const auto probes = v_grid(model, 3);
    const auto radii = default_probe_radii(model);
    for (std::size_t i = 0; i < std::min<std::size_t>(8, probes.size()); ++i) {
      const LProbe p = l_pointwise(loc.field, model, probes[i], radii);
      const double expect = theta.eval(probes[i]);
      if (std::abs(p.liminf_estimate - expect) >
          0.05 * std::max(1.0, std::abs(expect)))
        return false;
    }
    if (ss.sigma_hat > nu_hat + 0.02) return false;
  }
  return true;
}

// 8. Constancy along V at statement level plus the located falsifier.
bool criterion_siu() {
  const FlatModel model(2, 1, 2);
  for (double gamma : {0.5, 2.0}) {
    const ScalarField f = ScalarField::radial(WeightFamily::g_pure(1, 1, gamma));
    const SiuReport rep = siu_scan(f, model, 16);
    if (rep.falsifier_mode || !rep.constant_ok) return false;
    if (rep.spread > 0.03 * std::max(1.0, std::abs(rep.l_max))) return false;
  }
  const ScalarField bad = ScalarField::scaled_log(bump_theta(model));
  const SiuReport rep = siu_scan(bad, model, 16);
  return rep.falsifier_mode && rep.violation_found;
}

// 9. The harmonic pole for linear minimal submanifolds.
bool criterion_minimal() {
  for (int kappa : {3, 4}) {
    const WeightFamily w = minimal_real_weight(kappa);
    for (double r : log_grid(0.05, 1.0, 20))
      if (std::abs(laplacian_residual(w, r)) >= 1e-8) return false;
  }
  for (double r : log_grid(0.05, 1.0, 20)) {
    const DerivTriple d{-1.0 / r + r, 1.0 / (r * r) + 1.0, -2.0 / (r * r * r)};
    if (std::abs(radial_laplacian(d, 3, r) - 2.0 / r) >= 1e-8) return false;
  }
  return true;
}

// 10. Infrastructure: stencil order, minors vs eigenvalues, reproducibility.
bool criterion_infrastructure() {
  // (a) finite-difference order 2 against the closed radial Hessian.
  const FlatModel model(3, 2, 1);
  const WeightFamily w = WeightFamily::g_pure(2, 1);
  const ScalarField f = ScalarField::radial(w);
  Eigen::VectorXcd normal(2);
  normal << std::complex<double>(0.6, -0.3), std::complex<double>(0.7, 0.5);
  normal *= 0.1 / normal.norm();
  Eigen::VectorXcd tangent(1);
  tangent << std::complex<double>(1.1, 2.3);
  const Point p{normal, tangent};

  const double r = p.r();
  const DerivTriple d = eval_weight(w, r);
  Eigen::MatrixXcd exact = Eigen::MatrixXcd::Zero(3, 3);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      std::complex<double> v = std::conj(p.normal[a]) * p.normal[b] *
                               (d.d2 - d.d1 / r) / (4.0 * r * r);
      if (a == b) v += d.d1 / (2.0 * r);
      exact(a, b) = v;
    }
  std::vector<double> errs;
  for (double step : {4e-3, 2e-3, 1e-3})
    errs.push_back((fd_hessian(f, p, model, step).matrix() - exact).norm());
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double ratio = errs[i] / errs[i + 1];
    if (ratio < 3.5 || ratio > 4.5) return false;
  }

  // (b) sigma via minors against the eigenvalue oracle.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXcd a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = {g(rng), g(rng)};
    const HermitianMatrix h(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.matrix());
    const Eigen::VectorXd ev = es.eigenvalues();
    std::vector<double> e(5, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < 4; ++i)
      for (int t = std::min(i + 1, 4); t >= 1; --t)
        e[static_cast<std::size_t>(t)] +=
            ev[i] * e[static_cast<std::size_t>(t) - 1];
    const double scale = std::max(1.0, h.operator_norm());
    for (int j = 1; j <= 4; ++j)
      if (std::abs(sigma_minors(h, j) - e[static_cast<std::size_t>(j)]) >=
          1e-10 * std::pow(scale, j))
        return false;
  }

  // (c) byte-identical full-suite reports for 1, 2, 4 threads.
  std::string dumps[3];
  int i = 0;
  for (int threads : {1, 2, 4}) {
    RunConfig c;
    c.experiment = "full-suite";
    c.threads = threads;
    dumps[i++] = run(c).to_json().dump();
  }
  return dumps[0] == dumps[1] && dumps[0] == dumps[2];
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    std::function<bool()> check;
  };
  const std::vector<Criterion> criteria = {
      {"01 maximality: sigma_m of the pure weight vanishes (|.| < 1e-10 rel)",
       criterion_maximality},
      {"02 subweights: cone membership + exponent within 2%, coefficient 5%",
       criterion_subweights},
      {"03 superweights: sigma_m < 0 with positive lower sigmas",
       criterion_superweights},
      {"04 expansion: residual exponent exceeds delta for A=+-1, eps in {0,1e-4}",
       criterion_expansion},
      {"05 mass linearity: nu(gamma psi_V) = gamma +- 2%, series agree 2%",
       criterion_lelong},
      {"06 relative type: convex maxima, slope gamma +- 2%",
       criterion_reltype},
      {"07 localized weights: certified C, type <= 0.02, mass/pointwise 5%",
       criterion_localize},
      {"08 constancy along V: spread <= 3%, falsifier violation located",
       criterion_siu},
      {"09 minimal codimension: harmonic residual < 1e-8, control 2/r",
       criterion_minimal},
      {"10 infrastructure: fd order 2, minors vs eigenvalues, bit-identical runs",
       criterion_infrastructure},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string note;
    try {
      ok = c.check();
    } catch (const std::exception& e) {
      note = std::string(" (exception: ") + e.what() + ")";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] criterion %s [%.1fs]%s\n", ok ? "PASS" : "FAIL", c.label,
                secs, note.c_str());
    if (!ok) ++failures;
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
