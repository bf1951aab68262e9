#include "oracles.hpp"
#include "squeeze_lab/core.hpp"
#include "squeeze_lab/linear.hpp"
#include "squeeze_lab/random.hpp"

#include <catch_amalgamated.hpp>

using namespace squeeze;
using Catch::Approx;

TEST_CASE("standard J matches the hand-built matrix and squares to -I", "[core]") {
  for (Eigen::Index dim : {2, 4, 6, 8}) {
    const Matrix j = standard_j(dim);
    CHECK((j - oracle::j_matrix(dim)).norm() == 0.0);
    CHECK((j * j + Matrix::Identity(dim, dim)).norm() == 0.0);
    CHECK((j.transpose() + j).norm() == 0.0);
  }
  CHECK_THROWS_AS(standard_j(3), DimensionError);
  CHECK_THROWS_AS(standard_j(0), DimensionError);
}

TEST_CASE("J e_q = e_p and Omega(e_q1, e_p1) = -1", "[core]") {
  const Vector eq = unit_vector(4, q_index(1));
  const Vector ep = unit_vector(4, p_index(1));
  CHECK((apply_j(eq) - ep).norm() == 0.0);
  CHECK(omega_eval(eq, ep) == -1.0);
  CHECK(omega_eval(ep, eq) == 1.0);
  CHECK(omega_eval(eq, unit_vector(4, p_index(2))) == 0.0);
}

TEST_CASE("omega_eval agrees with the coordinate formula and is antisymmetric", "[core][property]") {
  SplitMix64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const Vector u = gaussian_vector(rng, 6), v = gaussian_vector(rng, 6);
    CHECK(omega_eval(u, v) == Approx(oracle::omega(u, v)).margin(1e-13));
    CHECK(omega_eval(u, v) == Approx(-omega_eval(v, u)).margin(1e-13));
    CHECK(omega_eval(u, u) == Approx(0.0).margin(1e-13));
  }
  CHECK_THROWS_AS(omega_eval(Vector::Zero(4), Vector::Zero(6)), DimensionError);
}

TEST_CASE("pfaffian on small matrices", "[core]") {
  Matrix m2(2, 2);
  m2 << 0, 3.5, -3.5, 0;
  CHECK(pfaffian(m2) == 3.5);

  SplitMix64 rng(3);
  Matrix a = gaussian_matrix(rng, 4, 4);
  a = a - Matrix(a.transpose());
  const double expected = a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
  CHECK(pfaffian(a) == Approx(expected).epsilon(1e-13));
}

TEST_CASE("pfaffian squared equals the determinant", "[core][property]") {
  SplitMix64 rng(5);
  for (int n : {2, 4, 6, 8, 10, 12}) {
    for (int t = 0; t < 5; ++t) {
      Matrix a = gaussian_matrix(rng, n, n);
      a = a - Matrix(a.transpose());
      const double pf = pfaffian(a);
      CHECK(pf * pf == Approx(a.determinant()).epsilon(1e-9));
    }
  }
}

TEST_CASE("pfaffian rejects bad input", "[core]") {
  CHECK_THROWS_AS(pfaffian(Matrix::Zero(3, 3)), PreconditionError);
  CHECK_THROWS_AS(pfaffian(Matrix::Zero(2, 4)), DimensionError);
  CHECK_THROWS_AS(pfaffian(Matrix::Zero(14, 14)), PreconditionError);
  CHECK_THROWS_AS(pfaffian(Matrix::Identity(4, 4)), PreconditionError);
}

TEST_CASE("Omega^k equals k! Pf(Gram) against the permutation-sum oracle", "[core][property]") {
  SplitMix64 rng(17);
  for (int two_k : {2, 4, 6}) {
    for (int t = 0; t < 20; ++t) {
      const Matrix u = gaussian_matrix(rng, 6, two_k);
      const double expected = oracle::omega_power(u);
      CHECK(std::abs(omega_power_eval(u) - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("Omega^k on a symplectic basis is k! up to sign", "[core]") {
  const Matrix b = Subspace::leading_pairs(6, 3).basis();
  CHECK(std::abs(omega_power_eval(b)) == Approx(6.0));
  CHECK(std::abs(omega_power_eval(b.leftCols(2))) == Approx(1.0));
  CHECK_THROWS_AS(omega_power_eval(Matrix::Zero(4, 3)), DimensionError);
}

TEST_CASE("wedge norm", "[core]") {
  SplitMix64 rng(23);
  for (int t = 0; t < 50; ++t) {
    const Matrix u = gaussian_matrix(rng, 6, 1 + t % 5);
    CHECK(wedge_norm(u) == Approx(oracle::wedge(u)).epsilon(1e-10));
  }
  CHECK(wedge_norm(Matrix::Identity(4, 4)) == Approx(1.0));
  Matrix dependent(3, 2);
  dependent << 1, 2, 1, 2, 1, 2;
  CHECK(wedge_norm(dependent) == Approx(0.0).margin(1e-14));
  CHECK(wedge_norm(Matrix::Zero(2, 3)) == 0.0);
}

TEST_CASE("Subspace construction", "[core]") {
  Matrix v(4, 3);
  v << 1, 2, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0;
  const Subspace s = Subspace::span_of(v);
  CHECK(s.dim() == 2);
  CHECK((s.basis().transpose() * s.basis() - Matrix::Identity(2, 2)).norm() < 1e-14);
  CHECK(s.contains(unit_vector(4, 0)));
  CHECK_FALSE(s.contains(unit_vector(4, 1)));
  CHECK_THROWS_AS(Subspace::from_orthonormal(v), PreconditionError);
  CHECK_THROWS_AS(Subspace::coordinate(4, {4}), DimensionError);
  const Matrix p = Subspace::leading_pairs(6, 2).projector();
  CHECK((p * p - p).norm() < 1e-15);
}

TEST_CASE("complexity of subspaces", "[core]") {
  CHECK(is_complex_subspace(Subspace::leading_pairs(6, 2)).is_complex);
  const Subspace lagrangian = Subspace::coordinate(4, {q_index(1), q_index(2)});
  const ComplexityCheck lag = is_complex_subspace(lagrangian);
  CHECK_FALSE(lag.is_complex);
  CHECK(lag.residual == Approx(std::sqrt(2.0)));
  CHECK(is_complex_subspace(Subspace::coordinate(3, {0, 1})).residual == std::numeric_limits<double>::infinity());

  SplitMix64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const Subspace w = random_complex_subspace(8, 1 + t % 4, 100 + t);
    CHECK(w.dim() == 2 * (1 + t % 4));
    CHECK(w.complexity_residual() < 1e-12);
  }
}

TEST_CASE("subspace distance", "[core]") {
  const Subspace a = Subspace::coordinate(4, {0, 1});
  const Subspace b = Subspace::coordinate(4, {2, 3});
  const Subspace c = Subspace::coordinate(4, {0, 2});
  CHECK(subspace_distance(a, a) == Approx(0.0).margin(1e-15));
  CHECK(subspace_distance(a, b) == Approx(oracle::kPi / 2));
  CHECK(subspace_distance(a, c) == Approx(oracle::kPi / 2));
  Matrix tilted(4, 2);
  tilted << 1, 0, 0, std::cos(0.3), 0, std::sin(0.3), 0, 0;
  CHECK(subspace_distance(a, Subspace::span_of(tilted)) == Approx(0.3));
  CHECK_THROWS_AS(subspace_distance(a, Subspace::coordinate(4, {0})), DimensionError);
}

TEST_CASE("Wirtinger inequality holds and is tight on complex spans", "[core][property]") {
  SplitMix64 rng(41);
  for (int t = 0; t < 300; ++t) {
    const int dim = 4 + 2 * (t % 3);
    const int k = 1 + t % 2;
    const WirtingerReport r = wirtinger_check(gaussian_matrix(rng, dim, 2 * k));
    REQUIRE_FALSE(r.degenerate);
    CHECK(r.gap >= -1e-10 * r.rhs);
  }
  for (int t = 0; t < 50; ++t) {
    const Subspace w = random_complex_subspace(6, 2, 500 + t);
    const Matrix tuple = w.basis() * (gaussian_matrix(rng, 4, 4) + 3.0 * Matrix::Identity(4, 4));
    const WirtingerReport r = wirtinger_check(tuple);
    CHECK(std::abs(r.gap) <= 1e-10 * r.rhs);
    CHECK(r.span_complexity_residual < 1e-10);
  }
  CHECK(wirtinger_check(Matrix::Zero(4, 2)).degenerate);
  CHECK_THROWS_AS(wirtinger_check(Matrix::Zero(4, 3)), DimensionError);
}

TEST_CASE("SplitMix64 streams are reproducible and derived seeds differ", "[core][random]") {
  SplitMix64 a(99), b(99);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  SplitMix64 rng(5);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  CHECK(mean / 100000 == Approx(0.5).margin(0.01));
}

TEST_CASE("uniform ball samples stay in the ball and fill it", "[core][random]") {
  SplitMix64 rng(8);
  int inner = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const Vector x = uniform_ball_point(rng, 4, 2.0);
    REQUIRE(x.norm() <= 2.0);
    inner += x.norm() <= 1.0;
  }
  // the ball of half radius holds 1/16 of the 4-volume
  CHECK(static_cast<double>(inner) / n == Approx(1.0 / 16).margin(0.005));
}
