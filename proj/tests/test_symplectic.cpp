#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "coiso/path_index.hpp"
#include "coiso/symplectic.hpp"

using namespace coiso;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

SymplecticPath rotation(double delta, int n = 1, int steps = 16) {
  return flow_of_quadratic(QuadraticHamiltonian(-delta * Matrix::Identity(2 * n, 2 * n)), 1.0, steps);
}

SymplecticPath shear(double T = 1.0) {
  return flow_of_quadratic(QuadraticHamiltonian(Matrix(Eigen::Vector2d(0.0, 1.0).asDiagonal())), T, 8);
}

}  // namespace

TEST_CASE("standard structure matrix") {
  for (int n = 1; n <= 4; ++n) {
    const Matrix j = standard_j(n);
    CHECK((j * j + Matrix::Identity(2 * n, 2 * n)).norm() == 0.0);
    CHECK((j.transpose() + j).norm() == 0.0);
  }
  Vector u(2), v(2);
  u << 1, 0;
  v << 0, 1;
  CHECK(omega(u, v) == 1.0);
}

TEST_CASE("validate_symplectic") {
  CHECK_NOTHROW(validate_symplectic(Matrix::Identity(2, 2)));
  CHECK_NOTHROW(validate_symplectic(m2(1, 1, 0, 1)));
  try {
    validate_symplectic(m2(2, 0, 0, 1));
    FAIL("expected NotSymplectic");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotSymplectic);
  }
  try {
    validate_symplectic(Matrix::Identity(3, 3));
    FAIL("expected OddDimension");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OddDimension);
  }
}

TEST_CASE("symplectic inverse") {
  auto rng = split_rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_symplectic(2 + 2 * (trial % 3), rng);
    CHECK((symplectic_inverse(m) * m - Matrix::Identity(m.rows(), m.cols())).norm() < 1e-9);
  }
}

TEST_CASE("flow_of_quadratic") {
  SUBCASE("negative definite gives the clockwise rotation") {
    const double delta = 0.3;
    const auto p = rotation(delta);
    CHECK((p.end() - m2(std::cos(delta), std::sin(delta), -std::sin(delta), std::cos(delta))).norm() < 1e-12);
  }
  SUBCASE("zero Hamiltonian") {
    const auto p = flow_of_quadratic(QuadraticHamiltonian(Matrix::Zero(4, 4)), 2.0, 5);
    for (const auto& s : p.samples()) CHECK(s.m == Matrix::Identity(4, 4));
  }
  SUBCASE("fiber kinetic energy gives the shear") {
    // x' = -J H x with H = diag(0, 1): q' = -p, p' = 0
    CHECK((shear(1.0).end() - m2(1, -1, 0, 1)).norm() < 1e-14);
  }
  SUBCASE("samples are symplectic and the group law holds") {
    auto rng = split_rng(3, 0);
    for (int trial = 0; trial < 50; ++trial) {
      const int dim = 2 + 2 * (trial % 4);
      const auto h = random_quadratic(dim, rng);
      const auto p = flow_of_quadratic(h, 1.3, 7);
      for (const auto& s : p.samples()) CHECK_NOTHROW(validate_symplectic(s.m, 1e-8));
      const Matrix half = flow_of_quadratic(h, 0.65, 3).end();
      CHECK((p.end() - half * half).norm() < 1e-9 * std::max(1.0, p.end().norm()));
      const Matrix exact = (1.3 * h.field()).exp();
      CHECK((p.end() - exact).norm() < 1e-10 * std::max(1.0, exact.norm()));
    }
  }
}

TEST_CASE("path constructors") {
  SUBCASE("from_samples checks the start and ordering") {
    std::vector<PathSample> bad_start{{0.0, m2(1, 1, 0, 1)}, {1.0, m2(1, 2, 0, 1)}};
    try {
      SymplecticPath::from_samples(bad_start);
      FAIL("expected BadStart");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BadStart);
    }
    std::vector<PathSample> unordered{{0.0, Matrix::Identity(2, 2)}, {0.0, m2(1, 2, 0, 1)}};
    CHECK_THROWS_AS(SymplecticPath::from_samples(unordered), Error);
  }
  SUBCASE("direct sum") {
    const auto a = rotation(kPi / 2);
    const auto sum = direct_sum(a, a);
    CHECK(sum.dim() == 4);
    CHECK(mean_index(sum) == doctest::Approx(1.0).epsilon(1e-12));
    const auto with_identity = direct_sum(a, SymplecticPath::constant_identity(2, 1.0));
    CHECK(mean_index(with_identity) == doctest::Approx(mean_index(a)).epsilon(1e-12));
    CHECK(std::abs(mean_index(direct_sum(shear(), shear()))) < 1e-12);
    try {
      direct_sum(a, shear(2.0));
      FAIL("expected IntervalMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IntervalMismatch);
    }
  }
  SUBCASE("concatenate") {
    const auto a = rotation(kPi / 2);
    const auto two = concatenate(a, a);
    CHECK(two.duration() == doctest::Approx(2.0));
    CHECK(mean_index(two) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((concatenate(shear(), shear()).end() - m2(1, -2, 0, 1)).norm() < 1e-13);
    const auto c = concatenate(a, SymplecticPath::constant_identity(2, 1.0));
    CHECK((c.end() - a.end()).norm() < 1e-14);
  }
  SUBCASE("iterate") {
    const auto a = rotation(kPi / 2);
    CHECK((iterate(a, 1).end() - a.end()).norm() == 0.0);
    const auto four = iterate(a, 4);
    CHECK((four.end() - Matrix::Identity(2, 2)).norm() < 1e-12);
    CHECK(mean_index(four) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((iterate(shear(), 3).end() - m2(1, -3, 0, 1)).norm() < 1e-12);
  }
}

TEST_CASE("spectrum") {
  SUBCASE("identity") {
    const auto s = spectrum(validate_symplectic(Matrix::Identity(4, 4)));
    int total = 0;
    for (const auto& p : s) {
      CHECK(std::abs(p.eigenvalue - Complex(1.0, 0.0)) < 1e-12);
      total += p.multiplicity;
    }
    CHECK(total == 4);
  }
  SUBCASE("rotation has opposite Krein signs") {
    const double theta = 0.7;
    const auto s = spectrum(validate_symplectic(rotation(theta).end()));
    REQUIRE(s.size() == 2);
    CHECK(s[0].krein_sign == -s[1].krein_sign);
    CHECK(s[0].krein_sign != 0);
    for (const auto& p : s) {
      CHECK(std::abs(std::abs(std::arg(p.eigenvalue)) - theta) < 1e-12);
      // Krein-positive eigenvalue of the clockwise rotation is e^{+i theta}
      if (p.krein_sign > 0) CHECK(std::arg(p.eigenvalue) > 0.0);
    }
  }
  SUBCASE("hyperbolic pair") {
    const auto s = spectrum(validate_symplectic(m2(2, 0, 0, 0.5)));
    REQUIRE(s.size() == 2);
    for (const auto& p : s) CHECK(p.krein_sign == 0);
  }
  SUBCASE("symmetry under inversion") {
    auto rng = split_rng(5, 1);
    for (int trial = 0; trial < 500; ++trial) {
      const int dim = 2 + 2 * (trial % 4);
      const Matrix m = random_symplectic(dim, rng);
      Eigen::EigenSolver<Matrix> es(m, false);
      const Eigen::VectorXcd ev = es.eigenvalues();
      for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double best = 1e300;
        for (Eigen::Index j = 0; j < ev.size(); ++j) best = std::min(best, std::abs(1.0 / ev(i) - ev(j)));
        CHECK(best < 1e-7 * std::max(1.0, std::abs(1.0 / ev(i))));
      }
      CHECK_NOTHROW(spectrum(validate_symplectic(m, 1e-8)));
    }
  }
}

TEST_CASE("signature") {
  CHECK(signature(QuadraticHamiltonian(-Matrix::Identity(2, 2))) == -2);
  CHECK(signature(QuadraticHamiltonian(Matrix(Eigen::Vector2d(1, -1).asDiagonal()))) == 0);
  CHECK(signature(QuadraticHamiltonian(Matrix(Eigen::Vector2d(1, 1e-3).asDiagonal()))) == 2);
  try {
    signature(QuadraticHamiltonian(Matrix(Eigen::Vector2d(1, 0).asDiagonal())));
    FAIL("expected DegenerateForm");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateForm);
  }
}

TEST_CASE("split_rng is deterministic and separates streams") {
  auto a = split_rng(42, 3);
  auto b = split_rng(42, 3);
  auto c = split_rng(42, 4);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
}
