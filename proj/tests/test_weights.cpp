#include <doctest.h>

#include <cmath>

#include "mtube/util.hpp"
#include "mtube/weights.hpp"

using namespace mtube;

TEST_CASE("expansion constants match their closed forms") {
  // k = 2, m = 1, delta = 3: k/m = 2, D = 1/2.
  const ExpansionConstants c = expansion_constants(2, 1, 3.0);
  CHECK(c.D == doctest::Approx(0.5));
  CHECK(c.B1 == doctest::Approx(2.0 * (1.0 - 2.0 + (1.0 - 2.0) * 3.0 + 9.0 / 4.0)));
  CHECK(c.B2 == doctest::Approx(5.0));
  CHECK(c.B3 == doctest::Approx(2.0 * (2.0 + 3.0 * 1.5 - 9.0 / 4.0)));
  // m = k: D = 1 and B1 reduces to delta^2/2.
  const ExpansionConstants ck = expansion_constants(2, 2, 2.0);
  CHECK(ck.D == doctest::Approx(1.0));
  CHECK(ck.B1 == doctest::Approx(2.0));
  CHECK_THROWS_AS(expansion_constants(3, 1, 3.0), ConstraintError);  // delta too small
}

TEST_CASE("subweight certification recovers the designed exponent") {
  const FlatModel model(3, 2, 1);
  const CertifiedWeight w = make_weight(WeightKind::GSub, 2, 1, 3.0, 0.0, model);
  CHECK(w.certified_radius > 0.0);
  // All certified points satisfy the cone inequalities.
  for (const auto& p : w.certificate.points)
    for (double s : p.sigma) CHECK(s >= -1e-9);
  CHECK(w.certificate.fitted_exponent == doctest::Approx(3.0).epsilon(0.02));
  const double expect_coeff =
      binom(1, 0) * std::abs(sigma_m_leading(2, 1, 3.0));
  CHECK(w.certificate.fitted_coefficient ==
        doctest::Approx(expect_coeff).epsilon(0.05));
}

TEST_CASE("superweight certification has the opposite sign structure") {
  const FlatModel model(4, 3, 2);
  const CertifiedWeight w = make_weight(WeightKind::GSuper, 3, 2, 2.0, 0.0, model);
  CHECK(w.certified_radius > 0.0);
  for (const auto& p : w.certificate.points) {
    REQUIRE(p.sigma.size() == 2);
    CHECK(p.sigma[0] > 0.0);        // sigma_1 stays positive
    CHECK(p.sigma[1] <= 1e-9);      // sigma_m is pushed negative
  }
  // The superweight admits no regularization.
  CHECK_THROWS_AS(make_weight(WeightKind::GSuper, 3, 2, 2.0, 1e-4, model),
                  ConstraintError);
}

TEST_CASE("expansion residual decays faster than r^delta") {
  const auto grid = log_grid(2e-2, 3e-1, 24);
  for (const int A : {1, -1}) {
    for (const double eps : {0.0, 1e-4}) {
      if (A < 0 && eps != 0.0) continue;
      const ExpansionReport rep = verify_expansion(3, 2, 2.0, eps, A, grid);
      CHECK(rep.exponent_exceeds_delta);
    }
  }
}

TEST_CASE("maximal radial weights annihilate sigma_m") {
  for (const auto& [k, m] : {std::pair{2, 1}, {3, 2}, {4, 3}}) {
    const MaximalRadialWeight w(k, m, 2.0, -5.0);
    for (double r : log_grid(1e-3, 0.2, 25)) {
      const DerivTriple d = w.eval(r);
      const double lam_tan = d.d1 / (2.0 * r);
      CHECK(std::abs(w.ode_residual(r)) <= 1e-10 * std::pow(lam_tan, m));
    }
  }
  CHECK_THROWS_AS(MaximalRadialWeight(2, 1, -1.0, 0.0), ConstraintError);
}

TEST_CASE("the radial ODE integrates back to the closed form") {
  const int k = 2, m = 1;
  const WeightFamily ref = WeightFamily::g_pure(k, m);
  const double r_end = 0.2;
  const DerivTriple at_end = eval_weight(ref, r_end);
  const OdeSolution sol =
      integrate_maximal_ode(k, m, r_end, at_end.value, at_end.d1, 1e-3);
  REQUIRE(sol.r_values.size() == sol.f_values.size());
  for (std::size_t i = 0; i < sol.r_values.size(); ++i) {
    const double exact = eval_weight(ref, sol.r_values[i]).value;
    CHECK(sol.f_values[i] == doctest::Approx(exact).epsilon(1e-8));
  }
}

TEST_CASE("minimal-codimension weight is harmonic away from V") {
  for (int kappa : {3, 4}) {
    const WeightFamily w = minimal_real_weight(kappa);
    for (double r : log_grid(0.05, 1.0, 20))
      CHECK(std::abs(laplacian_residual(w, r)) < 1e-8);
  }
  // The perturbed control -1/r + r in kappa = 3 has residual exactly 2/r.
  for (double r : log_grid(0.05, 1.0, 10)) {
    const DerivTriple d{-1.0 / r + r, 1.0 / (r * r) + 1.0, -2.0 / (r * r * r)};
    CHECK(radial_laplacian(d, 3, r) == doctest::Approx(2.0 / r).epsilon(1e-10));
  }
}
