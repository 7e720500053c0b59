#include <doctest.h>

#include <cmath>

#include "mtube/measures.hpp"
#include "mtube/util.hpp"

using namespace mtube;

TEST_CASE("reference weight level geometry round-trips") {
  const FlatModel model(3, 2, 2);
  for (double r : {0.01, 0.05, 0.15}) {
    const double s = reference_value(model, r);
    CHECK(reference_level_radius(model, s) == doctest::Approx(r).epsilon(1e-12));
  }
  // m = k branch is the log.
  CHECK(reference_value(model, 0.1) == doctest::Approx(std::log(0.1)));
  const FlatModel mp(3, 2, 1);
  CHECK(reference_value(mp, 0.1) == doctest::Approx(-std::pow(0.1, -2.0)));
}

TEST_CASE("tube integral methods agree on a smooth field (m = 1)") {
  const FlatModel model(3, 2, 1);
  // |z'|^2 has a smooth density, so the interior quadrature and the boundary
  // flux see the same total mass.
  const ScalarField f = ScalarField::norm_sq(false);
  const double s = model.tube_radius / 4.0;

  const double quad = tube_integral(f, model, s, TubeMethod::RadialQuadrature).value;
  const double flux = tube_integral(f, model, s, TubeMethod::Flux).value;
  CHECK(flux == doctest::Approx(quad).epsilon(2e-3));

  IntegralParams params;
  params.samples_per_stratum = 4096;
  const TubeValue mc = tube_integral(f, model, s, TubeMethod::MonteCarlo, params);
  CHECK(std::abs(mc.value - quad) <=
        3.0 * mc.std_error + 1e-6 * std::abs(quad));
}

TEST_CASE("the boundary flux captures the distributional mass on V") {
  const FlatModel model(3, 2, 1);
  const ScalarField pole = ScalarField::radial(WeightFamily::g_pure(2, 1));
  const double s = model.tube_radius / 4.0;
  // The pure pole is harmonic away from V: the interior quadrature sees
  // nothing, while the flux picks up the mass concentrated on V.
  const double quad =
      tube_integral(pole, model, s, TubeMethod::RadialQuadrature).value;
  const double flux = tube_integral(pole, model, s, TubeMethod::Flux).value;
  CHECK(std::abs(quad) <= 1e-8 * std::abs(flux));
  CHECK(flux > 0.0);
}

TEST_CASE("tube integral is additive in the field") {
  const FlatModel model(3, 2, 2);
  const ScalarField a = ScalarField::radial(WeightFamily::g_pure(2, 2));
  const ScalarField b = ScalarField::norm_sq(false);
  const ScalarField sum = ScalarField::affine({{2.0, a}, {1.0, b}}, -4.0);
  const double s = model.tube_radius / 4.0;
  const double ia = tube_integral(a, model, s, TubeMethod::RadialQuadrature).value;
  const double ib = tube_integral(b, model, s, TubeMethod::RadialQuadrature).value;
  const double is = tube_integral(sum, model, s, TubeMethod::RadialQuadrature).value;
  CHECK(is == doctest::Approx(2.0 * ia + ib).epsilon(1e-9));
}

TEST_CASE("calibrated limits are linear in the pole multiple") {
  const FlatModel model(3, 2, 2);
  const Calibration calib = calibrate(model);
  CHECK(calib.C_km > 0.0);
  for (double gamma : {0.5, 1.0, 2.0}) {
    const ScalarField f =
        ScalarField::radial(WeightFamily::g_pure(2, 2, gamma));
    const TubeSeries ts =
        lelong_series(f, model, default_s_grid(model),
                      TubeMethod::RadialQuadrature, calib);
    CHECK(ts.fit_ok);
    CHECK(lelong_number(ts) == doctest::Approx(gamma).epsilon(0.02));
  }
}

TEST_CASE("sublevel series normalizes the model weight to 1") {
  const FlatModel model(3, 2, 2);
  const ScalarField psi = ScalarField::radial(WeightFamily::g_pure(2, 2));
  const TubeSeries ts = sublevel_series(psi, model, default_level_grid(model));
  for (double v : ts.scaled_values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ts.monotone);
  CHECK(lelong_number(ts) == doctest::Approx(1.0).epsilon(1e-6));

  // A doubled pole doubles the series.
  const ScalarField psi2 = ScalarField::radial(WeightFamily::g_pure(2, 2, 2.0));
  const TubeSeries t2 = sublevel_series(psi2, model, default_level_grid(model));
  CHECK(lelong_number(t2) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("bounded fields carry no mass on V") {
  const FlatModel model(3, 2, 2);
  const Calibration calib = calibrate(model);
  const ScalarField smooth = ScalarField::norm_sq(false);
  const TubeSeries ts =
      lelong_series(smooth, model, default_s_grid(model),
                    TubeMethod::RadialQuadrature, calib);
  CHECK(std::abs(lelong_number(ts)) <= 0.01);
}

TEST_CASE("reweight map derivative consistency (m < k)") {
  const ReweightMap h = reweight_map(2, 1);
  for (double t : {-9.0, -4.0, -1.0, -0.25}) {
    const double fd = (h.apply(t + 1e-6) - h.apply(t - 1e-6)) / 2e-6;
    CHECK(h.derivative(t) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(h.derivative(t) > 0.0);  // increasing
  }
}

TEST_CASE("shell average of the radial derivative is exact for radial fields") {
  const FlatModel model(3, 2, 1);
  const ScalarField f = ScalarField::radial(WeightFamily::g_pure(2, 1));
  const double r = 0.07;
  const double exact = eval_weight(WeightFamily::g_pure(2, 1), r).d1;
  CHECK(shell_average_radial_derivative(f, model, r) ==
        doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("monte-carlo integration is reproducible and seed-sensitive") {
  const FlatModel model(3, 2, 2);
  const ScalarField f = ScalarField::radial(WeightFamily::g_pure(2, 2));
  const double s = model.tube_radius / 4.0;
  IntegralParams p1;
  p1.seed = 42;
  IntegralParams p2 = p1;
  p2.threads = 4;
  const TubeValue a = tube_integral(f, model, s, TubeMethod::MonteCarlo, p1);
  const TubeValue b = tube_integral(f, model, s, TubeMethod::MonteCarlo, p2);
  CHECK(a.value == b.value);  // bit-identical across thread counts
  IntegralParams p3 = p1;
  p3.seed = 43;
  const TubeValue c = tube_integral(f, model, s, TubeMethod::MonteCarlo, p3);
  CHECK(a.value != c.value);
}
