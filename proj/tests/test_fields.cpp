#include <doctest.h>

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "mtube/fields.hpp"
#include "mtube/util.hpp"

using namespace mtube;

namespace {

ThetaField bump(const FlatModel& model) {
  TrigTerm t;
  t.freq.assign(static_cast<std::size_t>(2 * (model.n - model.k)), 0);
  t.freq[0] = 1;
  t.amplitude = 1.0;
  return ThetaField(1.0, {t}, model.torus_periods);
}

// Closed-form coordinate Hessian of a radial f(|z'|):
//   H(a,b) = f' delta_ab / (2r) + (f'' - f'/r) conj(z_a) z_b / (4 r^2)
// on the normal block, zero elsewhere.
Eigen::MatrixXcd radial_hessian_exact(const WeightFamily& w, const Point& p,
                                      const FlatModel& model) {
  const double r = p.r();
  const DerivTriple d = eval_weight(w, r);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(model.n, model.n);
  for (int a = 0; a < model.k; ++a) {
    for (int b = 0; b < model.k; ++b) {
      std::complex<double> v =
          std::conj(p.normal[a]) * p.normal[b] * (d.d2 - d.d1 / r) / (4.0 * r * r);
      if (a == b) v += d.d1 / (2.0 * r);
      h(a, b) = v;
    }
  }
  return h;
}

Point generic_point(const FlatModel& model, double r) {
  Eigen::VectorXcd normal(model.k);
  for (int a = 0; a < model.k; ++a)
    normal[a] = std::complex<double>(0.6 + 0.1 * a, -0.3 + 0.2 * a);
  normal *= r / normal.norm();
  Eigen::VectorXcd tangent(model.n - model.k);
  for (int a = 0; a < model.n - model.k; ++a) tangent[a] = {1.1, 2.3};
  return Point{normal, tangent};
}

}  // namespace

TEST_CASE("theta fields: mean, evaluation, nonnegativity") {
  const FlatModel model(3, 2, 1);
  const ThetaField theta = bump(model);
  CHECK(theta.mean() == doctest::Approx(1.0));
  CHECK_FALSE(theta.is_constant());
  Eigen::VectorXcd z(1);
  z[0] = {0.0, 0.0};
  CHECK(theta.eval(z) == doctest::Approx(2.0));  // 1 + cos(0)
  z[0] = {M_PI, 0.0};
  CHECK(theta.eval(z) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(theta.sampled_min() >= -1e-9);
  CHECK(theta.sampled_max() <= 2.0 + 1e-9);

  // Mean over the full cell equals the exact mean.
  CHECK(theta.patch_mean({{0.0, 2.0 * M_PI}, {0.0, 2.0 * M_PI}}) ==
        doctest::Approx(1.0).epsilon(1e-9));

  // A sign-changing profile is rejected.
  TrigTerm t;
  t.freq = {1, 0};
  t.amplitude = 1.0;
  CHECK_THROWS_AS(ThetaField(0.5, {t}, model.torus_periods), ConstraintError);

  CHECK(ThetaField::constant(0.3, model.torus_periods).is_constant());
}

TEST_CASE("finite-difference Hessian matches the closed radial form at order 2") {
  const FlatModel model(3, 2, 1);
  const WeightFamily w = WeightFamily::g_pure(2, 1);
  const ScalarField f = ScalarField::radial(w);
  const Point p = generic_point(model, 0.1);
  const Eigen::MatrixXcd exact = radial_hessian_exact(w, p, model);

  double prev_err = 0.0;
  std::vector<double> errs;
  for (double step : {4e-3, 2e-3, 1e-3}) {
    const HermitianMatrix h = fd_hessian(f, p, model, step);
    errs.push_back((h.matrix() - exact).norm());
  }
  // Order-2 stencils: halving the step divides the error by ~4.
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double ratio = errs[i] / errs[i + 1];
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
  (void)prev_err;

  // Block traces agree with the Hessian diagonal.
  const double step = 1e-3;
  const HermitianMatrix h = fd_hessian(f, p, model, step);
  const BlockTraces t = fd_block_traces(f, p, model, step);
  std::complex<double> tn = 0.0, tt = 0.0;
  for (int a = 0; a < model.k; ++a) tn += h.entry(a, a);
  for (int a = model.k; a < model.n; ++a) tt += h.entry(a, a);
  CHECK(t.normal == doctest::Approx(tn.real()).epsilon(1e-10));
  CHECK(t.tangent == doctest::Approx(tt.real()).epsilon(1e-10));
}

TEST_CASE("exact radial profiles for composite fields") {
  const FlatModel model(3, 2, 2);
  const ScalarField f = ScalarField::affine(
      {{2.0, ScalarField::radial(WeightFamily::g_pure(2, 2))},
       {1.0, ScalarField::norm_sq(false)}},
      3.0);
  const auto prof = f.radial_profile(0.05, model);
  REQUIRE(prof.has_value());
  // 2 log r contributes lambda_tan = 1/r^2, lambda_rad = 0; |z'|^2 adds 1 to both.
  CHECK(prof->lambda_tan == doctest::Approx(1.0 / 0.0025 + 1.0).epsilon(1e-10));
  CHECK(prof->lambda_rad == doctest::Approx(1.0).epsilon(1e-10));

  // Fields with genuine torus dependence expose no radial profile.
  const ScalarField s = ScalarField::scaled_log(bump(FlatModel(2, 1, 2)));
  CHECK_FALSE(s.radial_profile(0.05, FlatModel(2, 1, 2)).has_value());
}

TEST_CASE("floored fields truncate the pole") {
  const FlatModel model(2, 1, 2);
  const ScalarField f =
      ScalarField::floored(ScalarField::radial(WeightFamily::g_pure(1, 1)), -1.0);
  Point deep = generic_point(model, 1e-4);
  CHECK(f.eval(deep) == doctest::Approx(-1.0));  // log r < -1 here
  Point shallow = generic_point(model, 0.39);
  CHECK(f.eval(shallow) == doctest::Approx(std::log(0.39)));
  CHECK_FALSE(f.singular_on_v());
}

TEST_CASE("cone scan certifies the model weight and flags the falsifier") {
  const FlatModel model(2, 1, 2);
  const auto grid = scan_grid(model, model.tube_radius / 50.0,
                              model.tube_radius / 2.0, 10, 8, 8);
  // |z|^2 has the identity Hessian: strictly inside every cone.
  const ScalarField good = ScalarField::norm_sq(true);
  const ScanReport ok = gamma_m_scan(good, model, grid);
  CHECK(ok.passed());
  CHECK(ok.point_count == grid.size());
  CHECK(ok.min_margin > 0.0);

  const ScalarField bad = ScalarField::scaled_log(bump(model));
  const ScanReport viol = gamma_m_scan(bad, model, grid);
  CHECK(viol.violations > 0);
  CHECK(viol.first_violation.has_value());

  // Scan results are independent of the thread count.
  const ScanReport viol4 = gamma_m_scan(bad, model, grid, 0.0, 1e-9, 4);
  CHECK(viol.violations == viol4.violations);
  CHECK(viol.min_margin == viol4.min_margin);
}

TEST_CASE("localized construction certifies a finite multiple") {
  const FlatModel model(3, 2, 1);
  LocalizeSearch search;
  search.n_r = 10;
  search.n_torus = 8;
  search.n_sphere = 8;
  const LocalizedField loc = make_localized(bump(model), 1.5, 2, 1, model, search);
  CHECK(loc.C >= 1.0);
  CHECK(loc.certificate.passed());

  // Below the cutoff shoulder the theta dependence is exactly
  // (theta_1 - theta_2) G_m(r).
  const double r = model.tube_radius / 8.0;
  Point p1 = generic_point(model, r);
  Point p2 = p1;
  p1.tangent[0] = {0.0, 0.0};
  p2.tangent[0] = {M_PI, 0.0};
  const double g = eval_weight(WeightFamily::g_pure(2, 1), r).value;
  CHECK(loc.field.eval(p1) - loc.field.eval(p2) ==
        doctest::Approx(2.0 * g).epsilon(1e-10));
}

TEST_CASE("localization exponent range") {
  CHECK_NOTHROW(check_nu_range(1.5, 2, 1));
  CHECK_THROWS_AS(check_nu_range(2.0, 2, 1), ConstraintError);  // nu >= k
  CHECK_THROWS_AS(check_nu_range(0.5, 2, 1), ConstraintError);  // nu < k-1
  CHECK_NOTHROW(check_nu_range(0.75, 2, 2));
  CHECK_THROWS_AS(check_nu_range(0.25, 2, 2), ConstraintError);
}
