// Explicit nonlinear maps with exact Jacobians.
//
// The shear phi(q1,p1,q2,p2) = (q1, p1 + chi(q2), q2, p2 + chi'(q2) q1) is the
// time-one map of H = -chi(q2) q1; the generating shear comes from
// S(Q, p) = p2 Q1^2 / 2; the rho-twist is (z, t) -> rho(|z|) e^{it} z.
#pragma once

#include "squeeze_lab/core.hpp"
#include "squeeze_lab/linear.hpp"
#include "squeeze_lab/random.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace squeeze {

// ---------------------------------------------------------------------------
// Bump profile

/// Even function chi with chi = 2R on [-eps, eps], support in
/// [-2R + eps, 2R - eps] and |chi'| <= 3/2.
///
/// On each ramp chi' is a trapezoid of height h = 2R / (L - s) (L the ramp
/// length, s the shoulder width) whose shoulders are quintic smoothsteps, so
/// chi is C^3 and its integral over a ramp is exactly 2R.
class BumpProfile {
 public:
  static BumpProfile make(double radius, double eps, double shoulder) {
    if (!(radius > 0.0)) throw PreconditionError("BumpProfile: radius must be positive");
    if (!(eps > 0.0 && eps < radius / 3.0)) {
      throw PreconditionError("BumpProfile: need 0 < eps < R/3 (eps = " + std::to_string(eps) +
                              ", R/3 = " + std::to_string(radius / 3.0) + ")");
    }
    const double max_shoulder = max_shoulder_for(radius, eps);
    if (!(shoulder > 0.0 && shoulder < max_shoulder)) {
      throw PreconditionError("BumpProfile: need 0 < shoulder < (2R - 2eps - 4R/3)/2 = " +
                              std::to_string(max_shoulder) + " so that sup|chi'| <= 3/2");
    }
    BumpProfile p(radius, eps, shoulder);
    if (p.slope_ > 1.5) {
      throw PreconditionError("BumpProfile: slope " + std::to_string(p.slope_) + " exceeds 3/2");
    }
    return p;
  }

  /// Shoulder at half of its admissible maximum.
  static BumpProfile make(double radius, double eps) {
    return make(radius, eps, 0.5 * max_shoulder_for(radius, eps));
  }

  static double max_shoulder_for(double radius, double eps) {
    return 0.5 * (2.0 * radius - 2.0 * eps - 4.0 * radius / 3.0);
  }

  double radius() const { return radius_; }
  double eps() const { return eps_; }
  double shoulder() const { return shoulder_; }
  /// Outer edge of the support, 2R - eps.
  double support_edge() const { return 2.0 * radius_ - eps_; }
  double ramp_length() const { return ramp_; }
  /// sup |chi'|, attained on the flat part of each ramp.
  double sup_derivative() const { return slope_; }

  double value(double t) const {
    const double a = std::abs(t);
    if (a <= eps_) return 2.0 * radius_;
    if (a >= support_edge()) return 0.0;
    return 2.0 * radius_ - slope_ * ramp_integral(a - eps_);
  }

  double derivative(double t) const {
    const double a = std::abs(t);
    if (a <= eps_ || a >= support_edge()) return 0.0;
    const double d = -slope_ * ramp_shape(a - eps_);
    return t < 0.0 ? -d : d;
  }

  double second_derivative(double t) const {
    const double a = std::abs(t);
    if (a <= eps_ || a >= support_edge()) return 0.0;
    return -slope_ * ramp_shape_derivative(a - eps_);
  }

  double operator()(double t) const { return value(t); }

 private:
  BumpProfile(double radius, double eps, double shoulder)
      : radius_(radius),
        eps_(eps),
        shoulder_(shoulder),
        ramp_(2.0 * radius - 2.0 * eps),
        slope_(2.0 * radius / (ramp_ - shoulder)) {}

  static double smoothstep(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
  static double smoothstep_prime(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }
  static double smoothstep_integral(double u) {
    return u * u * u * u * (2.5 + u * (-3.0 + u));
  }

  // g(tau) on [0, L]: rises over [0, s], flat, falls over [L - s, L].
  double ramp_shape(double tau) const {
    if (tau < shoulder_) return smoothstep(tau / shoulder_);
    if (tau <= ramp_ - shoulder_) return 1.0;
    return smoothstep((ramp_ - tau) / shoulder_);
  }

  double ramp_shape_derivative(double tau) const {
    if (tau < shoulder_) return smoothstep_prime(tau / shoulder_) / shoulder_;
    if (tau <= ramp_ - shoulder_) return 0.0;
    return -smoothstep_prime((ramp_ - tau) / shoulder_) / shoulder_;
  }

  // G(tau) = integral of g over [0, tau]; G(L) = L - s.
  double ramp_integral(double tau) const {
    if (tau < shoulder_) return shoulder_ * smoothstep_integral(tau / shoulder_);
    if (tau <= ramp_ - shoulder_) return 0.5 * shoulder_ + (tau - shoulder_);
    return (ramp_ - shoulder_) - shoulder_ * smoothstep_integral((ramp_ - tau) / shoulder_);
  }

  double radius_;
  double eps_;
  double shoulder_;
  double ramp_;
  double slope_;
};

// ---------------------------------------------------------------------------
// Radial profile for the twist map

/// rho with its first two derivatives and the even extension of rho'(r)/r.
struct RhoSpec {
  std::function<double(double)> rho;
  std::function<double(double)> rho_prime;
  std::function<double(double)> rho_second;
  std::function<double(double)> rho_prime_over_r;

  /// rho(r) = exp(-r^2 / c); rho''(0) = -2/c.
  static RhoSpec gaussian(double c = 16.0) {
    RhoSpec s;
    s.rho = [c](double r) { return std::exp(-r * r / c); };
    s.rho_prime = [c](double r) { return -(2.0 * r / c) * std::exp(-r * r / c); };
    s.rho_second = [c](double r) { return (-2.0 / c + 4.0 * r * r / (c * c)) * std::exp(-r * r / c); };
    s.rho_prime_over_r = [c](double r) { return -(2.0 / c) * std::exp(-r * r / c); };
    return s;
  }

  double prime_over_r(double r) const {
    if (rho_prime_over_r) return rho_prime_over_r(r);
    return r > 1e-6 ? rho_prime(r) / r : rho_second(r);
  }

  /// Throws unless rho(0) = 1, rho'(0) = 0, 0 < rho(r) < 1 for r > 0 (sampled on
  /// (0, 10]) and rho''(0) > -1/4.
  void validate() const {
    if (!rho || !rho_prime || !rho_second) throw PreconditionError("RhoSpec: missing function");
    if (std::abs(rho(0.0) - 1.0) > 1e-12) throw PreconditionError("RhoSpec: rho(0) != 1");
    if (std::abs(rho_prime(0.0)) > 1e-12) throw PreconditionError("RhoSpec: rho'(0) != 0");
    if (!(rho_second(0.0) > -0.25)) throw PreconditionError("RhoSpec: rho''(0) <= -1/4");
    for (int i = 1; i <= 1000; ++i) {
      const double r = 0.01 * i;
      const double v = rho(r);
      if (!(v > 0.0 && v < 1.0)) {
        throw PreconditionError("RhoSpec: rho(" + std::to_string(r) + ") outside (0, 1)");
      }
    }
  }
};

/// rho(r) (rho(r) + r rho'(r)) sqrt(1 + r^2): the 2-Jacobian of the twist at |z| = r.
inline double rho_twist_jacobian_closed_form(const RhoSpec& spec, double r) {
  const double rho = spec.rho(r);
  return rho * (rho + r * spec.rho_prime(r)) * std::sqrt(1.0 + r * r);
}

// ---------------------------------------------------------------------------
// Map zoo

class SmoothMap;
using SmoothMapPtr = std::shared_ptr<const SmoothMap>;

/// A closed family of analytic maps with exact evaluation and Jacobian.
class SmoothMap {
 public:
  struct Identity {
    Eigen::Index dim;
  };
  struct Linear {
    Matrix matrix;
  };
  struct GuthShear {
    BumpProfile profile;
  };
  struct GeneratingShear {};
  struct RhoTwist {
    RhoSpec spec;
  };
  /// z -> inner(R z) / R.
  struct Rescaled {
    SmoothMapPtr inner;
    double radius;
  };
  /// Stages applied in order: stages[0] first.
  struct Composite {
    std::vector<SmoothMap> stages;
  };
  /// (a, b, c) -> (a, inner(b), c) with a, c of the given sizes.
  struct Product {
    SmoothMapPtr inner;
    Eigen::Index leading;
    Eigen::Index trailing;
  };

  using Variant =
      std::variant<Identity, Linear, GuthShear, GeneratingShear, RhoTwist, Rescaled, Composite, Product>;

  explicit SmoothMap(Variant v) : variant_(std::move(v)) {}

  const Variant& variant() const { return variant_; }

  Eigen::Index domain_dim() const {
    return std::visit(
        [](const auto& m) -> Eigen::Index {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Identity>) return m.dim;
          else if constexpr (std::is_same_v<T, Linear>) return m.matrix.cols();
          else if constexpr (std::is_same_v<T, GuthShear> || std::is_same_v<T, GeneratingShear>) return 4;
          else if constexpr (std::is_same_v<T, RhoTwist>) return 3;
          else if constexpr (std::is_same_v<T, Rescaled>) return m.inner->domain_dim();
          else if constexpr (std::is_same_v<T, Composite>) return m.stages.front().domain_dim();
          else return m.leading + m.inner->domain_dim() + m.trailing;
        },
        variant_);
  }

  Eigen::Index codomain_dim() const {
    return std::visit(
        [](const auto& m) -> Eigen::Index {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Identity>) return m.dim;
          else if constexpr (std::is_same_v<T, Linear>) return m.matrix.rows();
          else if constexpr (std::is_same_v<T, GuthShear> || std::is_same_v<T, GeneratingShear>) return 4;
          else if constexpr (std::is_same_v<T, RhoTwist>) return 2;
          else if constexpr (std::is_same_v<T, Rescaled>) return m.inner->codomain_dim();
          else if constexpr (std::is_same_v<T, Composite>) return m.stages.back().codomain_dim();
          else return m.leading + m.inner->codomain_dim() + m.trailing;
        },
        variant_);
  }

  /// Whether the map is symplectic by construction (checked numerically in tests).
  bool is_symplectic() const {
    return std::visit(
        [](const auto& m) -> bool {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Identity>) return m.dim % 2 == 0;
          else if constexpr (std::is_same_v<T, Linear>) {
            return m.matrix.rows() == m.matrix.cols() && m.matrix.rows() % 2 == 0 &&
                   symplectic_residual(m.matrix) <= kSymplecticTolerance;
          } else if constexpr (std::is_same_v<T, GuthShear> || std::is_same_v<T, GeneratingShear>) {
            return true;
          } else if constexpr (std::is_same_v<T, RhoTwist>) {
            return false;
          } else if constexpr (std::is_same_v<T, Rescaled>) {
            return m.inner->is_symplectic();
          } else if constexpr (std::is_same_v<T, Composite>) {
            for (const auto& s : m.stages)
              if (!s.is_symplectic()) return false;
            return true;
          } else {
            return m.inner->is_symplectic() && m.leading % 2 == 0 && m.trailing % 2 == 0;
          }
        },
        variant_);
  }

  std::string name() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Identity>) return "identity";
          else if constexpr (std::is_same_v<T, Linear>) return "linear";
          else if constexpr (std::is_same_v<T, GuthShear>) return "guth_shear";
          else if constexpr (std::is_same_v<T, GeneratingShear>) return "generating_shear";
          else if constexpr (std::is_same_v<T, RhoTwist>) return "rho_twist";
          else if constexpr (std::is_same_v<T, Rescaled>) return "rescaled(" + m.inner->name() + ")";
          else if constexpr (std::is_same_v<T, Composite>) {
            std::string s = "compose(";
            for (std::size_t i = 0; i < m.stages.size(); ++i) s += (i ? "," : "") + m.stages[i].name();
            return s + ")";
          } else {
            return "product(" + m.inner->name() + ")";
          }
        },
        variant_);
  }

  Vector operator()(const Vector& x) const {
    check_input(x);
    return std::visit([&x](const auto& m) { return evaluate(m, x); }, variant_);
  }

  Matrix jacobian(const Vector& x) const {
    check_input(x);
    return std::visit([&x](const auto& m) { return differentiate(m, x); }, variant_);
  }

 private:
  void check_input(const Vector& x) const {
    if (x.size() != domain_dim()) {
      throw DimensionError(name() + ": expected a point of dimension " + std::to_string(domain_dim()) +
                           ", got " + std::to_string(x.size()));
    }
  }

  static Vector evaluate(const Identity&, const Vector& x) { return x; }
  static Matrix differentiate(const Identity& m, const Vector&) { return Matrix::Identity(m.dim, m.dim); }

  static Vector evaluate(const Linear& m, const Vector& x) { return m.matrix * x; }
  static Matrix differentiate(const Linear& m, const Vector&) { return m.matrix; }

  static Vector evaluate(const GuthShear& m, const Vector& x) {
    const double q1 = x(0), p1 = x(1), q2 = x(2), p2 = x(3);
    Vector y(4);
    y << q1, p1 + m.profile.value(q2), q2, p2 + m.profile.derivative(q2) * q1;
    return y;
  }
  static Matrix differentiate(const GuthShear& m, const Vector& x) {
    const double q1 = x(0), q2 = x(2);
    const double d1 = m.profile.derivative(q2);
    Matrix d = Matrix::Identity(4, 4);
    d(1, 2) = d1;
    d(3, 0) = d1;
    d(3, 2) = m.profile.second_derivative(q2) * q1;
    return d;
  }

  // Q1 = q1, P1 = p1 - p2 q1, Q2 = q2 + q1^2 / 2, P2 = p2.
  static Vector evaluate(const GeneratingShear&, const Vector& x) {
    const double q1 = x(0), p1 = x(1), q2 = x(2), p2 = x(3);
    Vector y(4);
    y << q1, p1 - p2 * q1, q2 + 0.5 * q1 * q1, p2;
    return y;
  }
  static Matrix differentiate(const GeneratingShear&, const Vector& x) {
    const double q1 = x(0), p2 = x(3);
    Matrix d = Matrix::Identity(4, 4);
    d(1, 0) = -p2;
    d(1, 3) = -q1;
    d(2, 0) = q1;
    return d;
  }

  // Cartesian form: rho(|z|) R(t) z with z = (x, y).
  static Vector evaluate(const RhoTwist& m, const Vector& x) {
    const double a = x(0), b = x(1), t = x(2);
    const double r = std::hypot(a, b);
    const double rho = m.spec.rho(r);
    const double c = std::cos(t), s = std::sin(t);
    Vector y(2);
    y << rho * (c * a - s * b), rho * (s * a + c * b);
    return y;
  }
  static Matrix differentiate(const RhoTwist& m, const Vector& x) {
    const double a = x(0), b = x(1), t = x(2);
    const double r = std::hypot(a, b);
    const double rho = m.spec.rho(r);
    const double kappa = m.spec.prime_over_r(r);
    const double c = std::cos(t), s = std::sin(t);
    Eigen::Matrix2d rot;
    rot << c, -s, s, c;
    // d/d(a,b) of rho(r) z = rho I + (rho'(r)/r) z z^T; d/dt = rho J z.
    Eigen::Matrix<double, 2, 3> inner;
    inner(0, 0) = rho + kappa * a * a;
    inner(0, 1) = kappa * a * b;
    inner(1, 0) = kappa * a * b;
    inner(1, 1) = rho + kappa * b * b;
    inner(0, 2) = -rho * b;
    inner(1, 2) = rho * a;
    return rot * inner;
  }

  static Vector evaluate(const Rescaled& m, const Vector& x) { return (*m.inner)(m.radius * x) / m.radius; }
  static Matrix differentiate(const Rescaled& m, const Vector& x) { return m.inner->jacobian(m.radius * x); }

  static Vector evaluate(const Composite& m, const Vector& x) {
    Vector y = x;
    for (const auto& s : m.stages) y = s(y);
    return y;
  }
  static Matrix differentiate(const Composite& m, const Vector& x) {
    Vector y = x;
    Matrix d = Matrix::Identity(x.size(), x.size());
    for (const auto& s : m.stages) {
      d = s.jacobian(y) * d;
      y = s(y);
    }
    return d;
  }

  static Vector evaluate(const Product& m, const Vector& x) {
    const Eigen::Index in = m.inner->domain_dim(), out = m.inner->codomain_dim();
    Vector y(m.leading + out + m.trailing);
    y.head(m.leading) = x.head(m.leading);
    y.segment(m.leading, out) = (*m.inner)(x.segment(m.leading, in));
    y.tail(m.trailing) = x.tail(m.trailing);
    return y;
  }
  static Matrix differentiate(const Product& m, const Vector& x) {
    const Eigen::Index in = m.inner->domain_dim(), out = m.inner->codomain_dim();
    Matrix d = Matrix::Zero(m.leading + out + m.trailing, m.leading + in + m.trailing);
    d.topLeftCorner(m.leading, m.leading).setIdentity();
    d.block(m.leading, m.leading, out, in) = m.inner->jacobian(x.segment(m.leading, in));
    d.bottomRightCorner(m.trailing, m.trailing).setIdentity();
    return d;
  }

  Variant variant_;
};

inline SmoothMap identity_map(Eigen::Index dim) { return SmoothMap(SmoothMap::Identity{dim}); }

inline SmoothMap linear_map(Matrix m) { return SmoothMap(SmoothMap::Linear{std::move(m)}); }

inline SmoothMap linear_map(const SymplecticMatrix& phi) { return linear_map(phi.matrix()); }

inline SmoothMap guth_shear(const BumpProfile& profile) { return SmoothMap(SmoothMap::GuthShear{profile}); }

inline SmoothMap generating_shear() { return SmoothMap(SmoothMap::GeneratingShear{}); }

inline SmoothMap rho_twist(RhoSpec spec) {
  spec.validate();
  return SmoothMap(SmoothMap::RhoTwist{std::move(spec)});
}

/// z -> map(R z) / R.
inline SmoothMap rescale_map(const SmoothMap& map, double radius) {
  if (!(radius > 0.0)) throw PreconditionError("rescale_map: radius must be positive");
  return SmoothMap(SmoothMap::Rescaled{std::make_shared<const SmoothMap>(map), radius});
}

/// Pipeline composition: maps[0] is applied first.
inline SmoothMap compose(std::vector<SmoothMap> maps) {
  if (maps.empty()) throw PreconditionError("compose: empty chain");
  for (std::size_t i = 1; i < maps.size(); ++i) {
    if (maps[i].domain_dim() != maps[i - 1].codomain_dim()) {
      throw DimensionError("compose: stage " + std::to_string(i) + " expects dimension " +
                           std::to_string(maps[i].domain_dim()) + " but receives " +
                           std::to_string(maps[i - 1].codomain_dim()));
    }
  }
  return SmoothMap(SmoothMap::Composite{std::move(maps)});
}

/// id_{leading} x map x id_{trailing}.
inline SmoothMap product_with_identity(const SmoothMap& map, Eigen::Index leading, Eigen::Index trailing) {
  if (leading < 0 || trailing < 0) throw DimensionError("product_with_identity: negative size");
  return SmoothMap(SmoothMap::Product{std::make_shared<const SmoothMap>(map), leading, trailing});
}

/// B^T map: the map followed by orthogonal projection onto V in V's own coordinates.
inline SmoothMap projected(const SmoothMap& map, const Subspace& v) {
  return compose({map, linear_map(Matrix(v.basis().transpose()))});
}

/// ||D^T J D - J||_F at x.
inline double symplectic_residual(const SmoothMap& map, const Vector& x) {
  return symplectic_residual(map.jacobian(x));
}

/// Central differences with step h = rel_step (1 + ||x||).
template <typename F>
Matrix central_difference_jacobian(F&& f, const Vector& x, double rel_step = 1e-6) {
  const double h = rel_step * (1.0 + x.norm());
  const Vector f0 = f(x);
  Matrix d(f0.size(), x.size());
  Vector xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    d.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp(j) = xm(j) = x(j);
  }
  return d;
}

struct MiddleJacobian {
  double value = 0.0;
  bool rank_deficient = false;
};

/// max over 2k-planes W of |det D psi(x)|_W|, i.e. the product of the singular
/// values of D psi(x). The map must have codomain dimension 2k.
inline MiddleJacobian middle_jacobian(const SmoothMap& map, const Vector& x, Eigen::Index two_k) {
  if (map.codomain_dim() != two_k || two_k > map.domain_dim()) {
    throw DimensionError("middle_jacobian: need codomain dimension " + std::to_string(two_k) +
                         " <= domain dimension");
  }
  const ProjectedVolume pv = projected_ball_volume(map.jacobian(x));
  return {pv.ratio, pv.degenerate};
}

// ---------------------------------------------------------------------------
// Checks on the shear

struct DisjointnessMargins {
  Vector image;
  double margin_a = 0.0;  ///< 2R - |p2 + chi'(q2) q1|
  std::optional<double> margin_b;  ///< p1 + chi(q2) - R, only when |q2| < eps
};

inline DisjointnessMargins disjointness_margins(const BumpProfile& profile, const Vector& x) {
  if (x.size() != 4) throw DimensionError("disjointness_margins: need a point of R^4");
  const double r = profile.radius();
  DisjointnessMargins m;
  m.image = guth_shear(profile)(x);
  m.margin_a = 2.0 * r - std::abs(m.image(3));
  if (std::abs(x(2)) < profile.eps()) m.margin_b = m.image(1) - r;
  return m;
}

struct DisjointnessReport {
  std::size_t samples = 0;
  std::size_t case_b_samples = 0;
  std::size_t violations = 0;
  double worst_margin_a = std::numeric_limits<double>::infinity();
  double worst_margin_b = std::numeric_limits<double>::infinity();
  /// eps + sup|chi'| R, the analytic bound on |p2 + chi'(q2) q1|.
  double analytic_bound_a = 0.0;
  std::optional<Vector> witness;
  bool passed() const { return violations == 0; }
};

/// Samples (q1,p1) in B^2(R) and (q2,p2) in [-2R,2R] x (-eps,eps) and checks
/// (a) |p2 + chi'(q2) q1| < 2R and (b) p1 + chi(q2) >= R whenever |q2| < eps.
inline DisjointnessReport disjointness_bounds_verify(const BumpProfile& profile, std::size_t samples,
                                                     std::uint64_t seed) {
  if (samples < 1) throw PreconditionError("disjointness_bounds_verify: need at least one sample");
  const double r = profile.radius(), eps = profile.eps();
  DisjointnessReport rep;
  rep.samples = samples;
  rep.analytic_bound_a = eps + profile.sup_derivative() * r;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const Vector disk = uniform_ball_point(rng, 2, r);
    double p2 = uniform(rng, -eps, eps);
    while (p2 == -eps) p2 = uniform(rng, -eps, eps);
    Vector x(4);
    x << disk(0), disk(1), uniform(rng, -2.0 * r, 2.0 * r), p2;
    const DisjointnessMargins m = disjointness_margins(profile, x);
    bool ok = m.margin_a > 0.0;
    rep.worst_margin_a = std::min(rep.worst_margin_a, m.margin_a);
    if (m.margin_b) {
      ++rep.case_b_samples;
      rep.worst_margin_b = std::min(rep.worst_margin_b, *m.margin_b);
      ok = ok && *m.margin_b >= 0.0;
    }
    if (!ok) {
      ++rep.violations;
      if (!rep.witness) rep.witness = x;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Hamiltonian flows and generating functions

/// Time-`duration` flow of x' = -J grad H(x) (so q' = dH/dp, p' = -dH/dq) by
/// the implicit midpoint rule, which is symplectic for every H.
template <typename Gradient>
Vector integrate_hamiltonian_flow(Gradient&& grad_h, const Vector& x0, double duration, double max_step) {
  if (!(max_step > 0.0)) throw PreconditionError("integrate_hamiltonian_flow: step must be positive");
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(duration) / max_step)));
  const double h = duration / steps;
  Vector x = x0;
  for (int n = 0; n < steps; ++n) {
    Vector next = x + h * (-apply_j(Vector(grad_h(x))));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const Vector mid = 0.5 * (x + next);
      const Vector candidate = x + h * (-apply_j(Vector(grad_h(mid))));
      const double change = (candidate - next).norm();
      next = candidate;
      if (change <= 1e-15 * (1.0 + next.norm())) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericalError("integrate_hamiltonian_flow: midpoint iteration diverged");
    x = next;
  }
  return x;
}

/// Gradient of H = -chi(q2) q1 on R^4.
inline Vector shear_hamiltonian_gradient(const BumpProfile& profile, const Vector& x) {
  Vector g = Vector::Zero(4);
  g(0) = -profile.value(x(2));
  g(2) = -profile.derivative(x(2)) * x(0);
  return g;
}

/// A type-(Q, p) generating function given by its partial gradients; each
/// takes (Q, p) with Q, p in R^n and returns a vector in R^n.
struct GeneratingFunction {
  std::function<Vector(const Vector& big_q, const Vector& p)> d_dq;
  std::function<Vector(const Vector& big_q, const Vector& p)> d_dp;
};

/// S(Q, p) = p2 Q1^2 / 2.
inline GeneratingFunction shear_generating_function() {
  GeneratingFunction g;
  g.d_dq = [](const Vector& big_q, const Vector& p) {
    Vector out = Vector::Zero(2);
    out(0) = p(1) * big_q(0);
    return out;
  };
  g.d_dp = [](const Vector& big_q, const Vector&) {
    Vector out = Vector::Zero(2);
    out(1) = 0.5 * big_q(0) * big_q(0);
    return out;
  };
  return g;
}

/// Solves Q = q + dS/dp(Q, p), P = p - dS/dQ(Q, p) by Newton's method (finite
/// difference Jacobian) and returns (Q1, P1, ..., Qn, Pn).
inline Vector solve_generating_function(const GeneratingFunction& gf, const Vector& x, double tol = 1e-14,
                                        int max_iter = 50) {
  detail::require_even(x.size(), "solve_generating_function");
  const Eigen::Index n = x.size() / 2;
  Vector q(n), p(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    q(j) = x(2 * j);
    p(j) = x(2 * j + 1);
  }
  auto residual = [&](const Vector& big_q) -> Vector { return big_q - q - gf.d_dp(big_q, p); };
  Vector big_q = q;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const Vector r = residual(big_q);
    if (r.norm() <= tol * (1.0 + big_q.norm())) {
      converged = true;
      break;
    }
    const Matrix d = central_difference_jacobian(residual, big_q, 1e-7);
    big_q -= d.partialPivLu().solve(r);
  }
  if (!converged && residual(big_q).norm() > 1e-12 * (1.0 + big_q.norm())) {
    throw NumericalError("solve_generating_function: Newton iteration did not converge");
  }
  const Vector big_p = p - gf.d_dq(big_q, p);
  Vector out(x.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    out(2 * j) = big_q(j);
    out(2 * j + 1) = big_p(j);
  }
  return out;
}

}  // namespace squeeze
