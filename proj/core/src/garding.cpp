#include "mtube/garding.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "mtube/util.hpp"

namespace mtube {

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw ConstraintError("HermitianMatrix requires a square matrix");
  mat_ = 0.5 * (a + a.adjoint());
}

HermitianMatrix HermitianMatrix::diagonal(const Eigen::VectorXd& d) {
  return HermitianMatrix(Eigen::MatrixXcd(d.cast<std::complex<double>>().asDiagonal()));
}

HermitianMatrix HermitianMatrix::identity(int n) {
  return HermitianMatrix(Eigen::MatrixXcd::Identity(n, n));
}

double HermitianMatrix::operator_norm() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::string to_string(ConeStatus s) {
  switch (s) {
    case ConeStatus::StrictlyInside: return "strictly-inside";
    case ConeStatus::Boundary: return "boundary";
    case ConeStatus::Outside: return "outside";
  }
  return "?";
}

namespace {

// Characteristic polynomial of H via Householder tridiagonalization and the
// three-term recurrence q_i(x) = (x - d_i) q_{i-1}(x) - e_{i-1}^2 q_{i-2}(x)
// for det(xI - T_i).  Returns coefficients c with q(x) = sum c[p] x^p, c[n] = 1.
std::vector<double> char_poly(const Eigen::MatrixXcd& h) {
  const int n = static_cast<int>(h.rows());
  if (n == 1) return {-h(0, 0).real(), 1.0};

  Eigen::Tridiagonalization<Eigen::MatrixXcd> tri(h);
  const Eigen::VectorXd d = tri.diagonal();
  const Eigen::VectorXd e = tri.subDiagonal();

  std::vector<double> prev{1.0};                 // q_0
  std::vector<double> cur{-d[0], 1.0};           // q_1
  for (int i = 1; i < n; ++i) {
    std::vector<double> next(static_cast<std::size_t>(i) + 2, 0.0);
    for (std::size_t p = 0; p < cur.size(); ++p) {
      next[p + 1] += cur[p];        // x * q_{i-1}
      next[p] -= d[i] * cur[p];     // -d_i * q_{i-1}
    }
    const double e2 = e[i - 1] * e[i - 1];
    for (std::size_t p = 0; p < prev.size(); ++p) next[p] -= e2 * prev[p];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

std::vector<double> sigma_minors_all(const HermitianMatrix& h) {
  const int n = h.dim();
  const std::vector<double> c = char_poly(h.matrix());
  // det(xI - H) = x^n - sigma_1 x^{n-1} + sigma_2 x^{n-2} - ...
  std::vector<double> sigma(static_cast<std::size_t>(n));
  double sign = -1.0;
  for (int j = 1; j <= n; ++j) {
    sigma[static_cast<std::size_t>(j - 1)] = sign * c[static_cast<std::size_t>(n - j)];
    sign = -sign;
  }
  return sigma;
}

double sigma_minors(const HermitianMatrix& h, int j) {
  if (j < 1 || j > h.dim())
    throw ConstraintError("sigma_minors: j must satisfy 1 <= j <= dim");
  return sigma_minors_all(h)[static_cast<std::size_t>(j - 1)];
}

double sigma_profile(const EigenProfile& p, int j) {
  if (j < 1 || j > p.k)
    throw ConstraintError("sigma_profile: j must satisfy 1 <= j <= k");
  const double tan_pow_jm1 = std::pow(p.lambda_tan, j - 1);
  return p.lambda_rad * binom(p.k - 1, j - 1) * tan_pow_jm1 +
         binom(p.k - 1, j) * tan_pow_jm1 * p.lambda_tan;
}

namespace {

ConeVerdict verdict_from_sigmas(std::span<const double> sigma, int m, double scale,
                                double tolerance) {
  if (tolerance < 0.0) throw ConstraintError("gamma_m_test: tolerance must be >= 0");
  ConeVerdict v;
  double worst = std::numeric_limits<double>::infinity();
  double scale_pow = 1.0;
  for (int j = 1; j <= m; ++j) {
    scale_pow *= std::max(scale, 1e-300);
    const double normalized = sigma[static_cast<std::size_t>(j - 1)] / scale_pow;
    if (normalized < worst) {
      worst = normalized;
      v.worst_index = j;
    }
  }
  v.margin = worst;
  if (worst < -tolerance)
    v.status = ConeStatus::Outside;
  else if (worst <= tolerance)
    v.status = ConeStatus::Boundary;
  else
    v.status = ConeStatus::StrictlyInside;
  return v;
}

}  // namespace

ConeVerdict gamma_m_test(const HermitianMatrix& h, int m, double tolerance) {
  if (m < 1 || m > h.dim())
    throw ConstraintError("gamma_m_test: m must satisfy 1 <= m <= dim");
  return verdict_from_sigmas(sigma_minors_all(h), m, h.operator_norm(), tolerance);
}

ConeVerdict gamma_m_test(const EigenProfile& p, int m, double tolerance) {
  if (m < 1 || m > p.k)
    throw ConstraintError("gamma_m_test(profile): m must satisfy 1 <= m <= k");
  std::vector<double> sigma(static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j)
    sigma[static_cast<std::size_t>(j - 1)] = sigma_profile(p, j);
  const double scale = std::max(std::abs(p.lambda_rad), std::abs(p.lambda_tan));
  return verdict_from_sigmas(sigma, m, scale, tolerance);
}

double mixed_sigma_diag(std::span<const double> a, std::span<const double> b, int m) {
  if (a.size() != b.size())
    throw ConstraintError("mixed_sigma_diag: length mismatch");
  const int n = static_cast<int>(a.size());
  if (m < 1 || m > n)
    throw ConstraintError("mixed_sigma_diag: m must satisfy 1 <= m <= n");

  // e[p] after processing a subset S of b holds sigma_p(S); rebuilding the DP
  // with one index skipped is O(n^2 m) overall, plenty for n <= 16.
  double total = 0.0;
  std::vector<double> e(static_cast<std::size_t>(m), 0.0);
  for (int skip = 0; skip < n; ++skip) {
    std::fill(e.begin(), e.end(), 0.0);
    e[0] = 1.0;
    for (int i = 0; i < n; ++i) {
      if (i == skip) continue;
      for (int p = std::min(m - 1, i + 1); p >= 1; --p)
        e[static_cast<std::size_t>(p)] += b[static_cast<std::size_t>(i)] *
                                          e[static_cast<std::size_t>(p - 1)];
    }
    total += a[static_cast<std::size_t>(skip)] * e[static_cast<std::size_t>(m - 1)];
  }
  return total;
}

}  // namespace mtube
