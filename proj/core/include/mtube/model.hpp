#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mtube/errors.hpp"

namespace mtube {

/// Exact local geometry: C^k normal directions around V = {z' = 0}, with the
/// V-directions compactified as a flat complex torus (each complex coordinate
/// periodic with the given period in both real directions).  The metric is
/// flat, so distance to V is r = |z'| and all curvature corrections vanish.
struct FlatModel {
  int n = 2;           ///< total complex dimension
  int k = 1;           ///< codimension of V
  int m = 1;           ///< Hessian order
  double tube_radius = 0.4;
  std::vector<double> torus_periods;  ///< n-k positive reals, default 2*pi
  double exhaustion_shift = 0.0;      ///< rho(z) = |z|^2 - tube_radius^2 + shift

  FlatModel() = default;
  FlatModel(int n_, int k_, int m_, double tube_radius_ = 0.4)
      : n(n_), k(k_), m(m_), tube_radius(tube_radius_) {
    torus_periods.assign(static_cast<std::size_t>(n - k), 2.0 * M_PI);
    validate();
  }

  void validate() const {
    if (k < 1 || k > n || m < 1 || m > n)
      throw ConstraintError("FlatModel requires 1 <= m, k <= n");
    if (tube_radius <= 0.0)
      throw ConstraintError("FlatModel requires tube_radius > 0");
    if (static_cast<int>(torus_periods.size()) != n - k)
      throw ConstraintError("FlatModel requires n - k torus periods");
    for (double p : torus_periods)
      if (p <= 0.0) throw ConstraintError("torus periods must be positive");
  }

  /// Real volume of the torus factor (each complex period cell has area p^2).
  double torus_volume() const {
    double v = 1.0;
    for (double p : torus_periods) v *= p * p;
    return v;
  }

  /// The always-available strictly m-sh exhaustion surrogate.
  double rho(double r_sq_total) const {
    return r_sq_total - tube_radius * tube_radius + exhaustion_shift;
  }
};

/// A point of the tube: z' normal coordinates, z'' torus coordinates.
struct Point {
  Eigen::VectorXcd normal;   ///< k entries
  Eigen::VectorXcd tangent;  ///< n-k entries, each taken mod its torus period

  double r() const { return normal.norm(); }

  /// Reduces torus coordinates to the fundamental cell.
  static Point wrapped(Eigen::VectorXcd normal, Eigen::VectorXcd tangent,
                       const FlatModel& model) {
    Point p{std::move(normal), std::move(tangent)};
    for (Eigen::Index a = 0; a < p.tangent.size(); ++a) {
      const double period = model.torus_periods[static_cast<std::size_t>(a)];
      double x = std::remainder(p.tangent[a].real(), period);
      double y = std::remainder(p.tangent[a].imag(), period);
      p.tangent[a] = {x, y};
    }
    return p;
  }
};

}  // namespace mtube
