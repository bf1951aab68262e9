// Geometry kernel for the standard symplectic space R^{2n}.
//
// Coordinates are interleaved as (q1, p1, ..., qn, pn). The complex structure J
// is block diagonal with 2x2 blocks [[0,-1],[1,0]], and the symplectic form is
// Omega(u, v) = u^T J v, which equals sum_j dp_j ^ dq_j on basis vectors.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace squeeze {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Tolerances shared by the whole library.
inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kOrthonormalTolerance = 1e-12;
inline constexpr int kMaxPfaffianOrder = 12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of incompatible sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Inputs outside an operation's domain (non-skew matrix, non-complex subspace, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to produce a certified result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require_even(Eigen::Index dim, const char* what) {
  if (dim <= 0 || dim % 2 != 0) {
    throw DimensionError(std::string(what) + ": dimension must be even and positive, got " +
                         std::to_string(dim));
  }
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// First-row expansion over the index set `idx` (which must have even size).
inline double pfaffian_expand(const Matrix& m, const std::vector<int>& idx) {
  if (idx.empty()) return 1.0;
  const int first = idx[0];
  double sum = 0.0;
  std::vector<int> rest;
  rest.reserve(idx.size() - 2);
  for (std::size_t j = 1; j < idx.size(); ++j) {
    const double a = m(first, idx[j]);
    if (a == 0.0) continue;
    rest.clear();
    for (std::size_t t = 1; t < idx.size(); ++t) {
      if (t != j) rest.push_back(idx[t]);
    }
    const double sign = (j % 2 == 1) ? 1.0 : -1.0;
    sum += sign * a * pfaffian_expand(m, rest);
  }
  return sum;
}

}  // namespace detail

/// Matrix of the complex structure on R^{dim}; dim must be even.
inline Matrix standard_j(Eigen::Index dim) {
  detail::require_even(dim, "standard_j");
  Matrix j = Matrix::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; b += 2) {
    j(b, b + 1) = -1.0;
    j(b + 1, b) = 1.0;
  }
  return j;
}

/// Applies J without forming the matrix: (q, p) -> (-p, q) in every pair.
inline Vector apply_j(const Vector& v) {
  detail::require_even(v.size(), "apply_j");
  Vector out(v.size());
  for (Eigen::Index b = 0; b < v.size(); b += 2) {
    out(b) = -v(b + 1);
    out(b + 1) = v(b);
  }
  return out;
}

/// Applies J to every column.
inline Matrix apply_j(const Matrix& m) {
  detail::require_even(m.rows(), "apply_j");
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index b = 0; b < m.rows(); b += 2) {
    out.row(b) = -m.row(b + 1);
    out.row(b + 1) = m.row(b);
  }
  return out;
}

/// Unit coordinate vector e_i in R^dim.
inline Vector unit_vector(Eigen::Index dim, Eigen::Index i) {
  Vector e = Vector::Zero(dim);
  e(i) = 1.0;
  return e;
}

/// Index of the q_j / p_j coordinate (j is 1-based, as in the usual notation).
inline Eigen::Index q_index(int j) { return 2 * (j - 1); }
inline Eigen::Index p_index(int j) { return 2 * (j - 1) + 1; }

/// Packs vectors as the columns of a matrix.
inline Matrix columns_of(const std::vector<Vector>& vectors) {
  if (vectors.empty()) return Matrix(0, 0);
  const Eigen::Index rows = vectors.front().size();
  Matrix m(rows, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != rows) throw DimensionError("columns_of: vectors of different length");
    m.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  return m;
}

/// Omega(u, v) = u^T J v.
inline double omega_eval(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw DimensionError("omega_eval: dimension mismatch");
  return u.dot(apply_j(v));
}

/// Gram matrix of Omega on the columns: G_ij = Omega(u_i, u_j).
inline Matrix omega_gram(const Matrix& vectors) { return vectors.transpose() * apply_j(vectors); }

/// Pfaffian of a skew-symmetric matrix of even order <= 12, by first-row expansion.
inline double pfaffian(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("pfaffian: matrix is not square");
  if (m.rows() % 2 != 0) throw PreconditionError("pfaffian: odd order");
  if (m.rows() > kMaxPfaffianOrder) {
    throw PreconditionError("pfaffian: order " + std::to_string(m.rows()) + " exceeds " +
                            std::to_string(kMaxPfaffianOrder));
  }
  if ((m + m.transpose()).lpNorm<Eigen::Infinity>() > 1e-10) {
    throw PreconditionError("pfaffian: matrix is not skew-symmetric");
  }
  std::vector<int> idx(static_cast<std::size_t>(m.rows()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return detail::pfaffian_expand(m, idx);
}

/// Omega^k evaluated on 2k vectors (the columns), as k! Pf(G).
inline double omega_power_eval(const Matrix& vectors) {
  if (vectors.cols() == 0 || vectors.cols() % 2 != 0) {
    throw DimensionError("omega_power_eval: need an even, positive number of vectors");
  }
  detail::require_even(vectors.rows(), "omega_power_eval");
  if (vectors.cols() > vectors.rows()) {
    throw DimensionError("omega_power_eval: more vectors than the ambient dimension");
  }
  const int k = static_cast<int>(vectors.cols() / 2);
  return detail::factorial(k) * pfaffian(omega_gram(vectors));
}

/// |u_1 ^ ... ^ u_m| = sqrt(det Gram), taken as |det R| from a QR factorization
/// so that the conditioning of the tuple is not squared.
inline double wedge_norm(const Matrix& vectors) {
  if (vectors.cols() == 0) return 1.0;
  if (vectors.cols() > vectors.rows()) return 0.0;
  const Eigen::HouseholderQR<Matrix> qr(vectors);
  return std::abs(qr.matrixQR().diagonal().prod());
}

/// Linear subspace represented by an orthonormal basis (the columns of `basis()`).
class Subspace {
 public:
  /// Orthonormal basis of the span of the columns. Rank is decided by a
  /// column-pivoted QR with threshold `rank_tol` relative to the largest pivot.
  static Subspace span_of(const Matrix& vectors, double rank_tol = kRankTolerance) {
    if (vectors.cols() == 0) return Subspace(Matrix(vectors.rows(), 0));
    Eigen::ColPivHouseholderQR<Matrix> qr(vectors);
    qr.setThreshold(rank_tol);
    const Eigen::Index rank = qr.rank();
    Matrix q = qr.householderQ() * Matrix::Identity(vectors.rows(), rank);
    return Subspace(std::move(q));
  }

  /// Wraps an already orthonormal basis; throws if B^T B != I within `tol`.
  static Subspace from_orthonormal(Matrix basis, double tol = kOrthonormalTolerance) {
    const Matrix gram = basis.transpose() * basis;
    const double err = (gram - Matrix::Identity(basis.cols(), basis.cols())).norm();
    if (err > tol) {
      throw PreconditionError("Subspace: basis is not orthonormal (error " + std::to_string(err) +
                              ")");
    }
    return Subspace(std::move(basis));
  }

  /// Span of the listed coordinate axes (0-based indices).
  static Subspace coordinate(Eigen::Index ambient_dim, const std::vector<Eigen::Index>& axes) {
    Matrix b = Matrix::Zero(ambient_dim, static_cast<Eigen::Index>(axes.size()));
    for (std::size_t i = 0; i < axes.size(); ++i) {
      if (axes[i] < 0 || axes[i] >= ambient_dim) throw DimensionError("Subspace: axis out of range");
      b(axes[i], static_cast<Eigen::Index>(i)) = 1.0;
    }
    return from_orthonormal(std::move(b));
  }

  /// The complex subspace spanned by the first k conjugate pairs (q1, p1, ..., qk, pk).
  static Subspace leading_pairs(Eigen::Index ambient_dim, int k) {
    std::vector<Eigen::Index> axes;
    for (int j = 1; j <= k; ++j) {
      axes.push_back(q_index(j));
      axes.push_back(p_index(j));
    }
    return coordinate(ambient_dim, axes);
  }

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  Matrix projector() const { return basis_ * basis_.transpose(); }

  /// ||(I - B B^T) J B||_F; zero exactly when J W = W.
  double complexity_residual() const {
    if (ambient_dim() % 2 != 0) return std::numeric_limits<double>::infinity();
    const Matrix jb = apply_j(basis_);
    return (jb - basis_ * (basis_.transpose() * jb)).norm();
  }

  bool contains(const Vector& v, double tol = 1e-10) const {
    return (v - basis_ * (basis_.transpose() * v)).norm() <= tol * std::max(1.0, v.norm());
  }

 private:
  explicit Subspace(Matrix basis) : basis_(std::move(basis)) {}
  Matrix basis_;
};

struct ComplexityCheck {
  bool is_complex = false;
  double residual = std::numeric_limits<double>::infinity();
};

/// Odd-dimensional subspaces are never complex; they report an infinite residual.
inline ComplexityCheck is_complex_subspace(const Subspace& w, double tol = 1e-10) {
  if (w.dim() % 2 != 0 || w.ambient_dim() % 2 != 0) return {};
  const double r = w.complexity_residual();
  return {r <= tol, r};
}

/// Largest principal angle between subspaces of equal dimension, in [0, pi/2].
inline double subspace_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim()) {
    throw DimensionError("subspace_distance: subspaces must have equal ambient and own dimension");
  }
  if (a.dim() == 0) return 0.0;
  const Matrix overlap = a.basis().transpose() * b.basis();
  const Eigen::JacobiSVD<Matrix> cos_svd(overlap);
  const double cos_min = cos_svd.singularValues().minCoeff();
  const Matrix outside = b.basis() - a.basis() * overlap;
  const Eigen::JacobiSVD<Matrix> sin_svd(outside);
  const double sin_max = sin_svd.singularValues().size() ? sin_svd.singularValues().maxCoeff() : 0.0;
  return std::atan2(sin_max, std::max(0.0, cos_min));
}

/// Both sides of |Omega^k[u]| <= k! |u_1 ^ ... ^ u_2k|, plus how complex the span is.
struct WirtingerReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double span_complexity_residual = std::numeric_limits<double>::infinity();
  bool degenerate = false;
};

inline WirtingerReport wirtinger_check(const Matrix& vectors) {
  if (vectors.cols() == 0 || vectors.cols() % 2 != 0) {
    throw DimensionError("wirtinger_check: need an even, positive number of vectors");
  }
  const int k = static_cast<int>(vectors.cols() / 2);
  WirtingerReport report;
  const double wedge = wedge_norm(vectors);
  if (wedge <= 1e-10) {
    report.degenerate = true;
    return report;
  }
  report.lhs = std::abs(omega_power_eval(vectors));
  report.rhs = detail::factorial(k) * wedge;
  report.gap = report.rhs - report.lhs;
  report.span_complexity_residual = Subspace::span_of(vectors).complexity_residual();
  return report;
}

}  // namespace squeeze
