// Plane fields attached to a symplectic map phi and a complex target V:
// the maximal expanding selection W_hat(x) = D phi(x)^T V, membership in the
// multi-valued field {W : |det(P D phi(x))|_W| >= 1}, Lie brackets and
// Frobenius residuals.
#pragma once

#include "squeeze_lab/core.hpp"
#include "squeeze_lab/linear.hpp"
#include "squeeze_lab/maps.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace squeeze {

struct DistributionSample {
  Vector x;
  Subspace w_hat = Subspace::span_of(Matrix(0, 0));
  double jacobian_on_w_hat = 0.0;
  double complexity_residual = 0.0;
};

namespace detail {

inline void require_symplectic_setup(const SmoothMap& map, const Subspace& v, const char* what) {
  if (!map.is_symplectic()) throw PreconditionError(std::string(what) + ": map is not symplectic");
  if (v.ambient_dim() != map.codomain_dim()) throw DimensionError(std::string(what) + ": dimension mismatch");
  if (!is_complex_subspace(v, 1e-8).is_complex) {
    throw PreconditionError(std::string(what) + ": target subspace is not complex");
  }
}

}  // namespace detail

/// W_hat(x) = span of the columns of D phi(x)^T B, with |det(B^T D phi(x))|_{W_hat}|.
inline DistributionSample maximal_distribution(const SmoothMap& map, const Subspace& v, const Vector& x) {
  detail::require_symplectic_setup(map, v, "maximal_distribution");
  const Matrix a = v.basis().transpose() * map.jacobian(x);
  DistributionSample s;
  s.x = x;
  s.w_hat = Subspace::span_of(a.transpose());
  if (s.w_hat.dim() != v.dim()) {
    throw NumericalError("maximal_distribution: D phi(x)^T V collapsed; the Jacobian cannot be symplectic");
  }
  s.jacobian_on_w_hat = restricted_determinant(a, s.w_hat);
  s.complexity_residual = s.w_hat.complexity_residual();
  return s;
}

struct Membership {
  double value = 0.0;
  bool member = false;
};

/// |det(B^T D phi(x))|_W| via the wedge norm of the image of an orthonormal basis of W.
inline Membership membership_w(const SmoothMap& map, const Subspace& v, const Vector& x, const Subspace& w,
                               double tol = 1e-9) {
  if (w.dim() != v.dim() || w.ambient_dim() != map.domain_dim()) {
    throw DimensionError("membership_w: W must have the dimension of V and live in the domain");
  }
  const Matrix image = v.basis().transpose() * (map.jacobian(x) * w.basis());
  Membership m;
  m.value = wedge_norm(image);
  m.member = m.value >= 1.0 - tol;
  return m;
}

/// A vector field on R^N, optionally with its exact Jacobian.
struct VectorField {
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;

  Vector operator()(const Vector& x) const { return value(x); }
  bool has_exact_jacobian() const { return static_cast<bool>(jacobian); }
};

enum class BracketMode { exact, finite_difference };

/// [X, Y](x) = DY(x) X(x) - DX(x) Y(x).
inline Vector lie_bracket(const VectorField& x_field, const VectorField& y_field, const Vector& x,
                          BracketMode mode = BracketMode::exact) {
  Matrix dx, dy;
  if (mode == BracketMode::exact) {
    if (!x_field.has_exact_jacobian() || !y_field.has_exact_jacobian()) {
      throw PreconditionError("lie_bracket: exact mode needs fields with exact Jacobians");
    }
    dx = x_field.jacobian(x);
    dy = y_field.jacobian(x);
  } else {
    dx = central_difference_jacobian(x_field.value, x, 1e-5);
    dy = central_difference_jacobian(y_field.value, x, 1e-5);
  }
  return dy * x_field(x) - dx * y_field(x);
}

/// Constant field.
inline VectorField constant_field(Vector v) {
  const Eigen::Index n = v.size();
  return {[v](const Vector&) { return v; }, [n](const Vector&) { return Matrix(Matrix::Zero(n, n)); }};
}

/// grad Q1 and grad P1 of the generating shear: d/dq1 and d/dp1 - p2 d/dq1 - q1 d/dp2.
inline std::pair<VectorField, VectorField> generating_shear_gradient_fields() {
  VectorField grad_q1 = constant_field(unit_vector(4, 0));
  VectorField grad_p1;
  grad_p1.value = [](const Vector& x) {
    Vector g(4);
    g << -x(3), 1.0, 0.0, -x(0);
    return g;
  };
  grad_p1.jacobian = [](const Vector&) {
    Matrix d = Matrix::Zero(4, 4);
    d(0, 3) = -1.0;
    d(3, 0) = -1.0;
    return d;
  };
  return {grad_q1, grad_p1};
}

/// Fields x -> D phi(x)^T b_i spanning W_hat; Jacobians are left to finite differences.
inline std::vector<VectorField> maximal_distribution_fields(const SmoothMap& map, const Subspace& v) {
  std::vector<VectorField> fields;
  for (Eigen::Index i = 0; i < v.dim(); ++i) {
    const Vector b = v.basis().col(i);
    fields.push_back({[map, b](const Vector& x) { return Vector(map.jacobian(x).transpose() * b); }, {}});
  }
  return fields;
}

/// max over pairs of the component of [X_i, X_j](x) orthogonal to span{X_i(x)}.
inline double frobenius_residual(const std::vector<VectorField>& fields, const Vector& x,
                                 BracketMode mode = BracketMode::exact) {
  if (fields.empty()) throw PreconditionError("frobenius_residual: no fields");
  Matrix values(x.size(), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) values.col(static_cast<Eigen::Index>(i)) = fields[i](x);
  const Subspace span = Subspace::span_of(values);
  if (span.dim() != static_cast<Eigen::Index>(fields.size())) {
    throw PreconditionError("frobenius_residual: fields are dependent at x");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      const Vector br = lie_bracket(fields[i], fields[j], x, mode);
      const Vector off = br - span.basis() * (span.basis().transpose() * br);
      worst = std::max(worst, off.norm());
    }
  }
  return worst;
}

struct RigidPoint {
  Vector x;
  double w_hat_residual = 0.0;
  bool rigid = false;
  /// principal-angle distance between W_hat(x) and D phi(x)^{-1} V (rigid points only)
  double distance = std::numeric_limits<double>::quiet_NaN();
  bool consistent = true;
};

struct RigidCaseReport {
  std::vector<RigidPoint> points;
  std::size_t rigid_count = 0;
  bool all_consistent = true;
};

/// Where W_hat(x) is complex, checks W_hat(x) = D phi(x)^{-1} V.
inline RigidCaseReport rigid_case_check(const SmoothMap& map, const Subspace& v, const std::vector<Vector>& points,
                                        double complex_tol = 1e-8, double distance_tol = 1e-6) {
  detail::require_symplectic_setup(map, v, "rigid_case_check");
  RigidCaseReport rep;
  for (const Vector& x : points) {
    RigidPoint p;
    p.x = x;
    const DistributionSample s = maximal_distribution(map, v, x);
    p.w_hat_residual = s.complexity_residual;
    p.rigid = p.w_hat_residual <= complex_tol;
    if (p.rigid) {
      ++rep.rigid_count;
      const Matrix pulled = map.jacobian(x).partialPivLu().solve(v.basis());
      p.distance = subspace_distance(s.w_hat, Subspace::span_of(pulled));
      p.consistent = p.distance <= distance_tol;
      rep.all_consistent = rep.all_consistent && p.consistent;
    }
    rep.points.push_back(std::move(p));
  }
  return rep;
}

/// Diagnostic for the unresolved local case: the 2k-Jacobian equals 1 at the
/// center but exceeds 1 at nearby points.
struct FrontierReport {
  double jacobian_at_center = 0.0;
  double min_nearby = std::numeric_limits<double>::infinity();
  double max_nearby = 0.0;
  bool frontier = false;
};

inline FrontierReport frontier_diagnostic(const SmoothMap& map, const Subspace& v, const Vector& center,
                                          const std::vector<Vector>& nearby, double tol = 1e-9) {
  FrontierReport rep;
  rep.jacobian_at_center = maximal_distribution(map, v, center).jacobian_on_w_hat;
  for (const Vector& x : nearby) {
    const double j = maximal_distribution(map, v, x).jacobian_on_w_hat;
    rep.min_nearby = std::min(rep.min_nearby, j);
    rep.max_nearby = std::max(rep.max_nearby, j);
  }
  rep.frontier = std::abs(rep.jacobian_at_center - 1.0) <= tol && rep.max_nearby > 1.0 + tol;
  return rep;
}

}  // namespace squeeze
