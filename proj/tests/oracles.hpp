// Slow, direct reference computations used to check the library. None of
// these call into squeeze_lab beyond plain Eigen types.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Omega(u, v) = sum_j (u_pj v_qj - u_qj v_pj) in interleaved coordinates.
inline double omega(const Vector& u, const Vector& v) {
  double s = 0.0;
  for (Eigen::Index j = 0; j + 1 < u.size(); j += 2) s += u(j + 1) * v(j) - u(j) * v(j + 1);
  return s;
}

inline Matrix j_matrix(Eigen::Index dim) {
  Matrix j = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i + 1 < dim; i += 2) {
    j(i, i + 1) = -1.0;
    j(i + 1, i) = 1.0;
  }
  return j;
}

inline int permutation_sign(const std::vector<int>& perm) {
  int sign = 1;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

/// Omega^k(u_1..u_2k) = (1/2^k) sum over S_2k of sgn(s) prod_i Omega(u_s(2i-1), u_s(2i)).
inline double omega_power(const Matrix& u) {
  const int m = static_cast<int>(u.cols());
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  double total = 0.0;
  do {
    double term = permutation_sign(perm);
    for (int i = 0; i < m; i += 2) term *= omega(u.col(perm[i]), u.col(perm[i + 1]));
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total / std::pow(2.0, m / 2);
}

/// sqrt(det Gram) via LU.
inline double wedge(const Matrix& u) {
  const double det = (u.transpose() * u).partialPivLu().determinant();
  return std::sqrt(std::max(det, 0.0));
}

inline double unit_ball_volume(int m) {
  if (m == 0) return 1.0;
  if (m == 1) return 2.0;
  return 2.0 * kPi / m * unit_ball_volume(m - 2);
}

/// omega_m sqrt(det(A A^T)) for a full-rank m x N matrix A.
inline double ellipsoid_volume(const Matrix& a) {
  return unit_ball_volume(static_cast<int>(a.rows())) * std::sqrt((a * a.transpose()).determinant());
}

/// Fourth-order central differences. The step is small because the bump
/// profile's shoulders are narrow and its higher derivatives jump there.
inline Matrix jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-5) {
  const Vector f0 = f(x);
  Matrix d(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    auto shifted = [&](double t) {
      Vector y = x;
      y(j) += t;
      return f(y);
    };
    d.col(j) = (-shifted(2 * h) + 8.0 * shifted(h) - 8.0 * shifted(-h) + shifted(-2 * h)) / (12.0 * h);
  }
  return d;
}

/// Shear of R^4 given chi: (q1, p1 + chi(q2), q2, p2 + chi'(q2) q1).
inline Vector shear(const std::function<double(double)>& chi, const std::function<double(double)>& chi_prime,
                    const Vector& x) {
  Vector y(4);
  y << x(0), x(1) + chi(x(2)), x(2), x(3) + chi_prime(x(2)) * x(0);
  return y;
}

/// Trapezoid rule for integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, int n = 200000) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

}  // namespace oracle
