#include <doctest.h>

#include <cmath>

#include "mtube/profiles.hpp"

using namespace mtube;

TEST_CASE("pure weight branches: log for m = k, negative power for m < k") {
  // m = k: gamma log r.
  const WeightFamily wlog = WeightFamily::g_pure(2, 2, 1.5);
  const DerivTriple tl = eval_weight(wlog, 0.1);
  CHECK(tl.value == doctest::Approx(1.5 * std::log(0.1)));
  CHECK(tl.d1 == doctest::Approx(1.5 / 0.1));
  CHECK(tl.d2 == doctest::Approx(-1.5 / 0.01));

  // m < k: -r^{2 - 2k/m} up to the positive multiplier.
  const WeightFamily wp = WeightFamily::g_pure(2, 1);  // exponent 2 - 4 = -2
  const DerivTriple tp = eval_weight(wp, 0.2);
  CHECK(tp.value == doctest::Approx(-std::pow(0.2, -2.0)));
  CHECK(tp.d1 == doctest::Approx(2.0 * std::pow(0.2, -3.0)));
  CHECK(tp.d2 == doctest::Approx(-6.0 * std::pow(0.2, -4.0)));
}

TEST_CASE("derivative triples compose by the chain rule") {
  // g(t) = t^2 at t = f(r), f(r) = sin(r) at r = 0.3.
  const double r = 0.3, fr = std::sin(r);
  const DerivTriple f{fr, std::cos(r), -std::sin(r)};
  const DerivTriple g{fr * fr, 2.0 * fr, 2.0};
  const DerivTriple c = compose(g, f);
  CHECK(c.value == doctest::Approx(fr * fr));
  CHECK(c.d1 == doctest::Approx(2.0 * fr * std::cos(r)));
  CHECK(c.d2 == doctest::Approx(2.0 * std::cos(r) * std::cos(r) -
                                2.0 * fr * std::sin(r)));
}

TEST_CASE("radial eigenvalue profile of |z'|^2 is the identity block") {
  // f = r^2: lambda_tan = f'/(2r) = 1, lambda_rad = (f'' + f'/r)/4 = 1.
  const double r = 0.17;
  const DerivTriple d{r * r, 2.0 * r, 2.0};
  const EigenProfile p = radial_eigprofile(d, r, 3, 5);
  CHECK(p.lambda_tan == doctest::Approx(1.0));
  CHECK(p.lambda_rad == doctest::Approx(1.0));
  CHECK(p.k == 3);
  CHECK(p.n == 5);
  const Eigen::VectorXd ev = p.eigenvalues();
  CHECK(ev[3] == 0.0);
  CHECK(ev[4] == 0.0);
}

TEST_CASE("profile ratio of the pure weights is 1 - k/m") {
  for (const auto& [k, m] : {std::pair{2, 1}, {3, 1}, {2, 2}, {3, 2}, {4, 3}}) {
    const WeightFamily w = WeightFamily::g_pure(k, m);
    for (double r : {0.01, 0.05, 0.2})
      CHECK(profile_ratio_check(w, r) ==
            doctest::Approx(1.0 - double(k) / double(m)).epsilon(1e-12));
  }
}

TEST_CASE("regularized weights are smooth at r = 0 and match as eps -> 0") {
  const WeightFamily we = WeightFamily::g_pure(2, 1, 1.0, 1e-4);
  CHECK(std::isfinite(eval_weight(we, 0.0).value));
  const WeightFamily w0 = WeightFamily::g_pure(2, 1);
  // Far from the core the regularization is invisible at first order.
  CHECK(eval_weight(we, 0.3).value ==
        doctest::Approx(eval_weight(w0, 0.3).value).epsilon(5e-3));
}

TEST_CASE("singularity flags and parameter validation") {
  CHECK(WeightFamily::g_pure(2, 1).singular_at_zero());
  CHECK(WeightFamily::g_pure(2, 2).singular_at_zero());
  CHECK_FALSE(WeightFamily::f_nu(2, 2, 0.75, 2.0).singular_at_zero());
  CHECK(delta_lower_bound(2, 1) == doctest::Approx(2.0));
  CHECK(delta_lower_bound(3, 1) == doctest::Approx(4.0));
  CHECK(delta_lower_bound(2, 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(WeightFamily::g_sub(2, 1, 1.5).validate(), ConstraintError);
  CHECK_THROWS_AS(WeightFamily::minimal_real(2), ConstraintError);
}
