#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtube/errors.hpp"

namespace mtube {

/// n x n complex Hermitian matrix; symmetry is enforced on construction by
/// averaging with the conjugate transpose.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const Eigen::MatrixXcd& a);
  static HermitianMatrix diagonal(const Eigen::VectorXd& d);
  static HermitianMatrix identity(int n);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return mat_; }
  std::complex<double> entry(int i, int j) const { return mat_(i, j); }

  /// Largest |eigenvalue|, used only for scale normalization.
  double operator_norm() const;

 private:
  Eigen::MatrixXcd mat_;
};

/// Eigenvalues-with-multiplicities of a radial complex Hessian:
/// (lambda_rad x 1, lambda_tan x (k-1), 0 x (n-k)).
struct EigenProfile {
  double lambda_rad = 0.0;
  double lambda_tan = 0.0;
  int k = 1;
  int n = 1;

  EigenProfile() = default;
  EigenProfile(double rad, double tan, int k_, int n_)
      : lambda_rad(rad), lambda_tan(tan), k(k_), n(n_) {
    if (k < 1 || k > n) throw ConstraintError("EigenProfile requires 1 <= k <= n");
  }

  Eigen::VectorXd eigenvalues() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v[0] = lambda_rad;
    for (int i = 1; i < k; ++i) v[i] = lambda_tan;
    return v;
  }

  EigenProfile scaled(double c) const {
    return {c * lambda_rad, c * lambda_tan, k, n};
  }
};

enum class ConeStatus { StrictlyInside, Boundary, Outside };

std::string to_string(ConeStatus s);

/// Verdict of a Gamma^m membership test.  `margin` is the minimum over
/// j = 1..m of sigma_j normalized by the j-th power of the operator norm.
struct ConeVerdict {
  ConeStatus status = ConeStatus::Boundary;
  int worst_index = 1;
  double margin = 0.0;
};

/// j-th elementary symmetric polynomial of the eigenvalues of H, computed as
/// a characteristic polynomial coefficient (sum of all j x j principal
/// minors); no eigendecomposition is performed.
double sigma_minors(const HermitianMatrix& h, int j);

/// All of sigma_1 .. sigma_n at once (same minor-sum route).
std::vector<double> sigma_minors_all(const HermitianMatrix& h);

/// sigma_j of a radial profile through the closed combinatorial formula
///   sigma_j = lambda_rad C(k-1,j-1) lambda_tan^{j-1} + C(k-1,j) lambda_tan^j.
double sigma_profile(const EigenProfile& p, int j);

ConeVerdict gamma_m_test(const HermitianMatrix& h, int m, double tolerance = 1e-9);

/// Profile version of gamma_m_test; the normalization scale is the largest
/// |profile eigenvalue| instead of the operator norm.
ConeVerdict gamma_m_test(const EigenProfile& p, int m, double tolerance = 1e-9);

/// Polarized mixed symmetric function for simultaneously diagonal Hessians:
///   sum_i a_i sigma_{m-1}(b with index i removed).
/// For a == b this equals m * sigma_m(a).
double mixed_sigma_diag(std::span<const double> a, std::span<const double> b, int m);

}  // namespace mtube
