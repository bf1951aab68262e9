// Linear symplectic analysis: random symplectic matrices, exact volumes of
// linear images of balls, and the linear middle-dimensional nonsqueezing check.
#pragma once

#include "squeeze_lab/core.hpp"
#include "squeeze_lab/random.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

namespace squeeze {

inline constexpr double kSymplecticTolerance = 1e-9;
inline constexpr double kDefaultSamplingScale = 0.5;

/// ||M^T J M - J||_F for a square matrix of even order.
inline double symplectic_residual(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("symplectic_residual: matrix is not square");
  const Matrix j = standard_j(m.rows());
  return (m.transpose() * j * m - j).norm();
}

/// A matrix certified symplectic at construction.
class SymplecticMatrix {
 public:
  explicit SymplecticMatrix(Matrix m, double tol = kSymplecticTolerance) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols()) {
      throw DimensionError("SymplecticMatrix: matrix is not square");
    }
    detail::require_even(matrix_.rows(), "SymplecticMatrix");
    residual_ = symplectic_residual(matrix_);
    if (!(residual_ <= tol)) {
      throw PreconditionError("SymplecticMatrix: residual " + std::to_string(residual_) +
                              " exceeds " + std::to_string(tol));
    }
  }

  static SymplecticMatrix identity(Eigen::Index dim) {
    return SymplecticMatrix(Matrix::Identity(dim, dim));
  }

  const Matrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  double residual() const { return residual_; }

  /// ||Phi J - J Phi||_F; zero for unitary (complex-linear) symplectic maps.
  double commutator_with_j() const {
    const Matrix j = standard_j(dim());
    return (matrix_ * j - j * matrix_).norm();
  }

 private:
  Matrix matrix_;
  double residual_ = 0.0;
};

namespace detail {

inline void check_phase_dim(Eigen::Index dim) {
  if (dim < 4 || dim > 16 || dim % 2 != 0) {
    throw DimensionError("phase-space dimension must be even and in [4, 16], got " +
                         std::to_string(dim));
  }
}

// exp(J S), guarded by the symplectic residual.
inline SymplecticMatrix exp_hamiltonian(const Matrix& s) {
  const Matrix generator = apply_j(s);
  const Matrix phi = generator.exp();
  if (!phi.allFinite()) throw NumericalError("matrix exponential did not converge");
  try {
    return SymplecticMatrix(phi);
  } catch (const PreconditionError& e) {
    throw NumericalError(std::string("matrix exponential lost symplecticity: ") + e.what());
  }
}

}  // namespace detail

/// exp(J S) with S symmetric, entries uniform in [-scale, scale].
inline SymplecticMatrix random_symplectic(Eigen::Index dim, double scale, std::uint64_t seed) {
  detail::check_phase_dim(dim);
  if (!(scale >= 0.0)) throw PreconditionError("random_symplectic: scale must be non-negative");
  SplitMix64 rng(seed);
  Matrix s(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i; j < dim; ++j) s(i, j) = s(j, i) = uniform(rng, -scale, scale);
  return detail::exp_hamiltonian(s);
}

/// exp(J S) with S the real form of a random Hermitian matrix, so the result
/// commutes with J (orthogonal and symplectic).
inline SymplecticMatrix random_unitary_symplectic(Eigen::Index dim, std::uint64_t seed,
                                                  double scale = 1.0) {
  detail::check_phase_dim(dim);
  const Eigen::Index n = dim / 2;
  SplitMix64 rng(seed);
  // Hermitian K = X + iY: X symmetric, Y antisymmetric. The real form of a
  // complex entry a + ib is the block [[a, -b], [b, a]].
  Matrix x(n, n), y(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      x(i, j) = x(j, i) = uniform(rng, -scale, scale);
      if (i == j) {
        y(i, i) = 0.0;
      } else {
        y(i, j) = uniform(rng, -scale, scale);
        y(j, i) = -y(i, j);
      }
    }
  }
  Matrix s(dim, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s(2 * i, 2 * j) = x(i, j);
      s(2 * i, 2 * j + 1) = -y(i, j);
      s(2 * i + 1, 2 * j) = y(i, j);
      s(2 * i + 1, 2 * j + 1) = x(i, j);
    }
  }
  SymplecticMatrix phi = detail::exp_hamiltonian(s);
  if (phi.commutator_with_j() > kSymplecticTolerance) {
    throw NumericalError("random_unitary_symplectic: result does not commute with J");
  }
  return phi;
}

/// Complex span of the given generators: span{w_i, J w_i}.
inline Subspace complex_span(const Matrix& generators) {
  Matrix spanning(generators.rows(), 2 * generators.cols());
  const Matrix jw = apply_j(generators);
  for (Eigen::Index i = 0; i < generators.cols(); ++i) {
    spanning.col(2 * i) = generators.col(i);
    spanning.col(2 * i + 1) = jw.col(i);
  }
  return Subspace::span_of(spanning);
}

/// Random complex subspace of real dimension 2k.
inline Subspace random_complex_subspace(Eigen::Index dim, int k, std::uint64_t seed) {
  detail::require_even(dim, "random_complex_subspace");
  if (k < 1 || 2 * k > dim) throw DimensionError("random_complex_subspace: need 1 <= k <= n");
  SplitMix64 rng(seed);
  for (int attempt = 0; attempt < 10; ++attempt) {
    Subspace w = complex_span(gaussian_matrix(rng, dim, k));
    if (w.dim() == 2 * k && w.complexity_residual() <= 1e-10) return w;
  }
  throw NumericalError("random_complex_subspace: degenerate draws");
}

/// Volume of the unit ball in R^m.
inline double unit_ball_volume(int m) {
  return std::pow(3.14159265358979323846, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

struct ProjectedVolume {
  double volume = 0.0;  ///< vol_m(A(B^N))
  double ratio = 0.0;   ///< volume / omega_m = product of singular values
  double log_ratio = -std::numeric_limits<double>::infinity();
  bool degenerate = true;
  Vector singular_values;
};

/// Exact m-volume of A(B^N) for an m x N matrix A.
inline ProjectedVolume projected_ball_volume(const Matrix& a) {
  if (a.rows() == 0 || a.rows() > a.cols()) {
    throw DimensionError("projected_ball_volume: need 0 < rows <= cols");
  }
  ProjectedVolume out;
  const Eigen::BDCSVD<Matrix> svd(a);
  out.singular_values = svd.singularValues();
  const double largest = out.singular_values(0);
  const double smallest = out.singular_values(out.singular_values.size() - 1);
  if (!(largest > 0.0) || smallest <= kRankTolerance * std::max(1.0, largest)) {
    out.volume = 0.0;
    out.ratio = 0.0;
    return out;
  }
  out.degenerate = false;
  out.log_ratio = out.singular_values.array().log().sum();
  out.ratio = std::exp(out.log_ratio);
  out.volume = unit_ball_volume(static_cast<int>(a.rows())) * out.ratio;
  return out;
}

/// ran A^T, where |det A|_W| attains its maximum over the Grassmannian.
inline Subspace maximal_expanding_subspace(const Matrix& a) {
  Subspace w = Subspace::span_of(a.transpose());
  if (w.dim() != a.rows()) throw PreconditionError("maximal_expanding_subspace: A is not onto");
  return w;
}

/// |det(A restricted to W)| for W of dimension rows(A).
inline double restricted_determinant(const Matrix& a, const Subspace& w) {
  if (w.ambient_dim() != a.cols() || w.dim() != a.rows()) {
    throw DimensionError("restricted_determinant: dimension mismatch");
  }
  return std::abs((a * w.basis()).determinant());
}

struct NonsqueezingTolerances {
  double inequality = 1e-9;
  double equality = 1e-8;
};

struct ProjectedVolumeReport {
  double volume_ratio = 0.0;  ///< vol_2k(P Phi(B^2n)) / omega_2k
  Subspace pullback = Subspace::span_of(Matrix(0, 0));
  double pullback_complexity_residual = 0.0;
  bool equality_flag = false;
  bool inequality_holds = false;
  /// equality_flag agrees with "pullback is complex" at the equality tolerance.
  bool characterization_consistent = false;
};

/// Checks vol_2k(P Phi(B)) >= omega_2k and the equality case for complex V.
inline ProjectedVolumeReport linear_nonsqueezing_verify(const SymplecticMatrix& phi,
                                                        const Subspace& v,
                                                        NonsqueezingTolerances tol = {}) {
  if (v.ambient_dim() != phi.dim()) throw DimensionError("linear_nonsqueezing_verify: dimension mismatch");
  const ComplexityCheck vc = is_complex_subspace(v, 1e-8);
  if (!vc.is_complex) {
    throw PreconditionError("linear_nonsqueezing_verify: target subspace is not complex (residual " +
                            std::to_string(vc.residual) + ")");
  }
  const Matrix a = v.basis().transpose() * phi.matrix();
  const ProjectedVolume pv = projected_ball_volume(a);
  if (pv.degenerate) throw NumericalError("linear_nonsqueezing_verify: projection is not onto");

  ProjectedVolumeReport report;
  report.volume_ratio = pv.ratio;
  report.pullback = maximal_expanding_subspace(a);
  report.pullback_complexity_residual = report.pullback.complexity_residual();
  report.inequality_holds = report.volume_ratio >= 1.0 - tol.inequality;
  report.equality_flag = report.volume_ratio <= 1.0 + tol.equality;
  report.characterization_consistent =
      report.equality_flag == (report.pullback_complexity_residual <= tol.equality);
  return report;
}

/// Time-one map of H = -q1 q2 on R^4: p1 += q2, p2 += q1. Its pullback of
/// span(e_q1, e_p1) is not complex, so the projected volume strictly grows.
inline SymplecticMatrix shear_q1_q2() {
  Matrix m = Matrix::Identity(4, 4);
  m(p_index(1), q_index(2)) = 1.0;
  m(p_index(2), q_index(1)) = 1.0;
  return SymplecticMatrix(m);
}

}  // namespace squeeze
