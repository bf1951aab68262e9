#include "oracles.hpp"
#include "squeeze_lab/maps.hpp"

#include <catch_amalgamated.hpp>

using namespace squeeze;
using Catch::Approx;

namespace {

Vector random_point(SplitMix64& rng, int dim, double half_width) {
  Vector x(dim);
  for (int i = 0; i < dim; ++i) x(i) = uniform(rng, -half_width, half_width);
  return x;
}

std::function<Vector(const Vector&)> as_function(const SmoothMap& map) {
  return [map](const Vector& x) { return map(x); };
}

}  // namespace

TEST_CASE("bump profile shape", "[maps]") {
  const BumpProfile chi = BumpProfile::make(1.0, 0.3);
  CHECK(chi.value(0.0) == 2.0);
  CHECK(chi.value(0.3) == 2.0);
  CHECK(chi.value(-0.29) == 2.0);
  CHECK(chi.value(chi.support_edge()) == 0.0);
  CHECK(chi.value(2.0) == 0.0);
  CHECK(chi.value(-5.0) == 0.0);
  CHECK(chi.support_edge() == Approx(1.7));
  for (double t = -2.5; t <= 2.5; t += 0.01) {
    CHECK(chi.value(t) == Approx(chi.value(-t)).margin(1e-14));
    CHECK(chi.value(t) >= -1e-14);
    CHECK(chi.value(t) <= 2.0 + 1e-14);
  }
}

TEST_CASE("bump profile derivatives match finite differences", "[maps][property]") {
  for (double eps : {0.05, 0.2, 0.3}) {
    const BumpProfile chi = BumpProfile::make(1.0, eps);
    for (double t = -2.0; t <= 2.0; t += 0.0173) {
      const double h = 1e-5;
      const double fd1 = (chi.value(t + h) - chi.value(t - h)) / (2 * h);
      const double fd2 = (chi.derivative(t + h) - chi.derivative(t - h)) / (2 * h);
      CHECK(chi.derivative(t) == Approx(fd1).margin(1e-5));
      CHECK(chi.second_derivative(t) == Approx(fd2).margin(1e-3 * (1.0 + std::abs(fd2))));
    }
  }
}

TEST_CASE("bump profile ramp integrates to 2R", "[maps]") {
  for (double r : {0.5, 1.0, 2.0}) {
    const BumpProfile chi = BumpProfile::make(r, 0.27 * r);
    const double integral = oracle::integrate([&](double t) { return chi.derivative(t); }, chi.eps(),
                                              chi.support_edge());
    CHECK(integral == Approx(-2.0 * r).epsilon(1e-8));
  }
}

TEST_CASE("bump profile slope stays at most 3/2", "[maps]") {
  for (double eps : {0.01, 0.1, 0.2, 0.3, 0.33}) {
    const BumpProfile chi = BumpProfile::make(1.0, eps);
    double sup = 0.0;
    for (int i = 0; i <= 100000; ++i) sup = std::max(sup, std::abs(chi.derivative(-2.0 + 4.0 * i / 100000)));
    CHECK(sup <= 1.5);
    CHECK(sup == Approx(chi.sup_derivative()).epsilon(1e-12));
  }
}

TEST_CASE("bump profile rejects bad parameters with the violated bound", "[maps]") {
  CHECK_THROWS_AS(BumpProfile::make(1.0, 0.4), PreconditionError);
  CHECK_THROWS_AS(BumpProfile::make(1.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(BumpProfile::make(-1.0, 0.1), PreconditionError);
  CHECK_THROWS_AS(BumpProfile::make(1.0, 0.3, 0.5), PreconditionError);
  try {
    BumpProfile::make(1.0, 0.5);
    FAIL("expected an exception");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("R/3") != std::string::npos);
  }
}

TEST_CASE("shear evaluates the closed form and is symplectic", "[maps][property]") {
  const BumpProfile chi = BumpProfile::make(1.0, 0.3);
  const SmoothMap shear = guth_shear(chi);
  SplitMix64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const Vector x = random_point(rng, 4, 2.5);
    const Vector expected =
        oracle::shear([&](double t) { return chi.value(t); }, [&](double t) { return chi.derivative(t); }, x);
    CHECK((shear(x) - expected).norm() == 0.0);
    CHECK(symplectic_residual(shear, x) <= 1e-9);
  }
}

TEST_CASE("analytic Jacobians agree with finite differences", "[maps][property]") {
  const std::vector<SmoothMap> maps = {
      guth_shear(BumpProfile::make(1.0, 0.3)),
      generating_shear(),
      rho_twist(RhoSpec::gaussian()),
      linear_map(random_symplectic(4, 0.5, 3)),
      rescale_map(guth_shear(BumpProfile::make(1.0, 0.2)), 2.0),
      compose({generating_shear(), linear_map(random_symplectic(4, 0.5, 9))}),
      product_with_identity(generating_shear(), 2, 2),
  };
  SplitMix64 rng(2);
  for (const auto& map : maps) {
    for (int i = 0; i < 100; ++i) {
      const Vector x = random_point(rng, static_cast<int>(map.domain_dim()), 1.5);
      const Matrix fd = oracle::jacobian(as_function(map), x);
      INFO(map.name());
      CHECK((map.jacobian(x) - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
      CHECK((central_difference_jacobian(as_function(map), x) - fd).norm() <= 1e-5 * (1.0 + fd.norm()));
    }
  }
}

TEST_CASE("symplectic maps report small residuals; the twist does not claim symplecticity", "[maps]") {
  CHECK(generating_shear().is_symplectic());
  CHECK(guth_shear(BumpProfile::make(1.0, 0.3)).is_symplectic());
  CHECK_FALSE(rho_twist(RhoSpec::gaussian()).is_symplectic());
  CHECK_FALSE(linear_map(Matrix(2.0 * Matrix::Identity(4, 4))).is_symplectic());
  CHECK(product_with_identity(generating_shear(), 2, 0).is_symplectic());
  SplitMix64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vector x = random_point(rng, 4, 3.0);
    CHECK(symplectic_residual(generating_shear(), x) <= 1e-12);
  }
}

TEST_CASE("shear is the identity outside the support slab", "[maps]") {
  const BumpProfile chi = BumpProfile::make(1.0, 0.3);
  const SmoothMap shear = guth_shear(chi);
  SplitMix64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    Vector x = random_point(rng, 4, 3.0);
    x(2) = (i % 2 ? 1.0 : -1.0) * uniform(rng, chi.support_edge(), 4.0);
    CHECK((shear(x) - x).norm() == 0.0);
  }
}

TEST_CASE("disjointness margins on the ball", "[maps]") {
  const BumpProfile chi = BumpProfile::make(1.0, 0.3);
  const DisjointnessReport rep = disjointness_bounds_verify(chi, 20000, 7);
  CHECK(rep.passed());
  CHECK(rep.worst_margin_a > 0.0);
  CHECK(rep.case_b_samples > 0);
  CHECK(rep.worst_margin_b >= 0.0);
  CHECK_FALSE(rep.witness.has_value());
  CHECK(rep.analytic_bound_a == Approx(0.3 + chi.sup_derivative()));

  Vector center(4);
  center << 0.0, -1.0, 0.0, 0.0;
  const DisjointnessMargins m = disjointness_margins(chi, center);
  REQUIRE(m.margin_b.has_value());
  CHECK(*m.margin_b == Approx(0.0).margin(1e-15));
  CHECK_THROWS_AS(disjointness_bounds_verify(chi, 0, 1), PreconditionError);
}

TEST_CASE("shear is the time-one flow of H = -chi(q2) q1", "[maps]") {
  const BumpProfile chi = BumpProfile::make(1.0, 0.3);
  const SmoothMap shear = guth_shear(chi);
  SplitMix64 rng(6);
  for (int i = 0; i < 40; ++i) {
    const Vector x = random_point(rng, 4, 2.0);
    const Vector flowed = integrate_hamiltonian_flow(
        [&](const Vector& z) { return shear_hamiltonian_gradient(chi, z); }, x, 1.0, 1e-2);
    CHECK((flowed - shear(x)).norm() <= 1e-5);
  }
}

TEST_CASE("implicit midpoint on the harmonic oscillator", "[maps]") {
  Vector x0(2);
  x0 << 1.0, 0.0;
  const Vector x1 = integrate_hamiltonian_flow([](const Vector& z) { return Vector(z); }, x0, oracle::kPi / 2, 1e-3);
  // q' = p, p' = -q: a quarter turn sends (1, 0) to (0, -1)
  CHECK(x1(0) == Approx(0.0).margin(1e-6));
  CHECK(x1(1) == Approx(-1.0).epsilon(1e-6));
  CHECK(x1.norm() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generating function solve reproduces the generating shear", "[maps]") {
  const GeneratingFunction gf = shear_generating_function();
  SplitMix64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const Vector x = random_point(rng, 4, 2.0);
    CHECK((solve_generating_function(gf, x) - generating_shear()(x)).norm() <= 1e-12);
  }
}

TEST_CASE("twist Jacobian closed form matches singular values", "[maps][property]") {
  const RhoSpec spec = RhoSpec::gaussian();
  const SmoothMap twist = rho_twist(spec);
  for (int i = 0; i < 100; ++i) {
    const double r = 2.0 * i / 99.0;
    Vector x(3);
    x << r * std::cos(1.1 * i), r * std::sin(1.1 * i), 0.37 * i;
    const Matrix d = oracle::jacobian(as_function(twist), x);
    const double svd = std::sqrt((d * d.transpose()).determinant());
    CHECK(rho_twist_jacobian_closed_form(spec, r) == Approx(svd).epsilon(1e-8));
    CHECK(std::abs(middle_jacobian(twist, x, 2).value - rho_twist_jacobian_closed_form(spec, r)) <= 1e-8);
    if (r <= 0.5) CHECK(middle_jacobian(twist, x, 2).value >= 1.0 - 1e-12);
  }
}

TEST_CASE("rho specifications are validated", "[maps]") {
  RhoSpec bad = RhoSpec::gaussian();
  bad.rho = [](double r) { return std::exp(-r * r / 16.0) + 0.1; };
  CHECK_THROWS_AS(rho_twist(bad), PreconditionError);
  CHECK_THROWS_AS(rho_twist(RhoSpec::gaussian(2.0)), PreconditionError);
  RhoSpec no_ratio = RhoSpec::gaussian();
  no_ratio.rho_prime_over_r = nullptr;
  CHECK(no_ratio.prime_over_r(0.0) == Approx(-2.0 / 16));
}

TEST_CASE("composition applies the first stage first", "[maps]") {
  Matrix swap(4, 4);
  swap << 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0;
  const SmoothMap g = generating_shear();
  const SmoothMap s = linear_map(swap);
  const SmoothMap chain = compose({g, s});
  Vector x(4);
  x << 0.3, -0.2, 0.7, 1.1;
  CHECK((chain(x) - s(g(x))).norm() == 0.0);
  CHECK((chain.jacobian(x) - s.jacobian(g(x)) * g.jacobian(x)).norm() <= 1e-15);
  CHECK_THROWS_AS(compose({rho_twist(RhoSpec::gaussian()), g}), DimensionError);
  CHECK_THROWS_AS(compose({}), PreconditionError);
  CHECK_THROWS_AS(g(Vector::Zero(3)), DimensionError);
}

TEST_CASE("rescaling and products", "[maps]") {
  const SmoothMap g = generating_shear();
  const SmoothMap half = rescale_map(g, 2.0);
  Vector x(4);
  x << 0.1, 0.2, 0.3, 0.4;
  CHECK((half(x) - g(2.0 * x) / 2.0).norm() <= 1e-15);
  CHECK_THROWS_AS(rescale_map(g, 0.0), PreconditionError);
  const SmoothMap wide = product_with_identity(g, 2, 2);
  CHECK(wide.domain_dim() == 8);
  Vector y = Vector::LinSpaced(8, -1.0, 1.0);
  const Vector wy = wide(y);
  CHECK((wy.head(2) - y.head(2)).norm() == 0.0);
  CHECK((wy.segment(2, 4) - g(y.segment(2, 4))).norm() == 0.0);
  CHECK(symplectic_residual(wide, y) <= 1e-12);
}

TEST_CASE("projected maps and middle Jacobians", "[maps]") {
  const SmoothMap p = projected(identity_map(4), Subspace::leading_pairs(4, 1));
  CHECK(p.codomain_dim() == 2);
  CHECK(middle_jacobian(p, Vector::Zero(4), 2).value == Approx(1.0));
  CHECK_THROWS_AS(middle_jacobian(identity_map(4), Vector::Zero(4), 2), DimensionError);
}
