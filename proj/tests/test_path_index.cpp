#include <doctest.h>

#include <cmath>
#include <numbers>

#include "coiso/path_index.hpp"

using namespace coiso;

namespace {

constexpr double kPi = std::numbers::pi;

SymplecticPath rotation(double delta, int n = 1) {
  return flow_of_quadratic(QuadraticHamiltonian(-delta * Matrix::Identity(2 * n, 2 * n)), 1.0, 16);
}

SymplecticPath shear() {
  return flow_of_quadratic(QuadraticHamiltonian(Matrix(Eigen::Vector2d(0.0, 1.0).asDiagonal())), 1.0, 8);
}

// CZ of the clockwise planar rotation by total angle theta (not a multiple of
// 2 pi), counted independently: one crossing at the start, two per full turn.
int rotation_cz_oracle(double theta) { return 2 * static_cast<int>(std::floor(theta / (2.0 * kPi))) + 1; }

// Psi(t) = [[I, t S], [0, I]] with S symmetric.
SymplecticPath unipotent(const Matrix& s, int samples) {
  const auto n = s.rows();
  std::vector<PathSample> out;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    Matrix m = Matrix::Identity(2 * n, 2 * n);
    m.topRightCorner(n, n) = t * s;
    out.push_back({t, m});
  }
  return SymplecticPath::from_samples(std::move(out));
}

}  // namespace

TEST_CASE("mean index examples") {
  CHECK(mean_index(SymplecticPath::constant_identity(4, 1.0)) == 0.0);
  CHECK(std::abs(mean_index(shear())) < 1e-12);
  CHECK(mean_index(rotation(kPi / 2)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normalization: small negative definite flows") {
  for (int n = 1; n <= 4; ++n) {
    const auto p = rotation(0.1, n);
    CHECK(conley_zehnder(p) == n);
    CHECK(std::abs(mean_index(p) - n * 0.1 / kPi) < 1e-8);
  }
}

TEST_CASE("rotation indices against the winding oracle") {
  for (double theta : {0.3, kPi / 2, 3.0 * kPi, 3.5 * kPi, 5.2 * kPi, 9.9}) {
    const auto p = rotation(theta);
    CHECK(mean_index(p) == doctest::Approx(theta / kPi).epsilon(1e-10));
    CHECK(conley_zehnder(p) == rotation_cz_oracle(theta));
    CHECK(conley_zehnder(rotation(theta, 3)) == 3 * rotation_cz_oracle(theta));
  }
}

TEST_CASE("small flows of nondegenerate forms have CZ = -sgn / 2") {
  const double mu = 1e-2;
  const auto pos = flow_of_quadratic(QuadraticHamiltonian(Matrix(Eigen::Vector2d(1.0, mu).asDiagonal())), 0.5, 4);
  CHECK(conley_zehnder(pos) == -1);
  const auto mixed = flow_of_quadratic(QuadraticHamiltonian(Matrix(Eigen::Vector2d(-mu, 1.0).asDiagonal())), 0.5, 4);
  CHECK(conley_zehnder(mixed) == 0);
  auto rng = split_rng(8, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 2 + 2 * (trial % 3);
    const auto h = random_quadratic(dim, rng);
    const auto p = flow_of_quadratic(QuadraticHamiltonian(h.matrix() * 1e-3), 1.0, 2);
    CHECK(conley_zehnder(p) == -signature(h) / 2);
  }
}

TEST_CASE("index_report") {
  const auto id = index_report(SymplecticPath::constant_identity(2, 1.0));
  CHECK(id.mean_index == 0.0);
  CHECK(id.degenerate_endpoint);
  CHECK_FALSE(id.cz.has_value());

  const auto rot = index_report(rotation(kPi / 2));
  CHECK(rot.mean_index == doctest::Approx(0.5));
  REQUIRE(rot.cz.has_value());
  CHECK(*rot.cz == 1);
  REQUIRE_FALSE(rot.crossings.empty());
  CHECK(rot.crossings.front().t == 0.0);

  const auto mixed = index_report(direct_sum(shear(), rotation(kPi / 2)));
  CHECK(mixed.mean_index == doctest::Approx(0.5));
  CHECK(mixed.degenerate_endpoint);
  CHECK_FALSE(mixed.cz.has_value());

  try {
    conley_zehnder(shear());
    FAIL("expected DegenerateEndpoint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateEndpoint);
  }
}

TEST_CASE("reported crossings add up to CZ") {
  auto rng = split_rng(21, 0);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int dim = 2 + 2 * (trial % 3);
    const auto p = flow_of_quadratic(random_quadratic(dim, rng, 3.0), 1.0, 40);
    if (degenerate_endpoint(p)) continue;
    std::vector<Crossing> crossings;
    int cz = 0;
    try {
      cz = conley_zehnder(p, {}, &crossings);
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::IrregularCrossing);
      continue;
    }
    REQUIRE_FALSE(crossings.empty());
    int twice = crossings.front().signature;
    for (std::size_t i = 1; i < crossings.size(); ++i) twice += 2 * crossings[i].signature;
    CHECK(cz == -twice / 2);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("gap bound and limit law on random flows") {
  auto rng = split_rng(1, 0);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 1 + trial % 4;
    const auto p = flow_of_quadratic(random_quadratic(2 * n, rng, 2.0), 1.0, 20);
    if (degenerate_endpoint(p)) continue;
    const double delta = mean_index(p);
    const int cz = conley_zehnder(p);
    CHECK(std::abs(delta - cz) < n - 1e-9);
    for (int k = 2; k <= 4; ++k) {
      const auto it = iterate(p, k);
      if (degenerate_endpoint(it)) continue;
      CHECK(std::abs(static_cast<double>(conley_zehnder(it)) / k - delta) <= static_cast<double>(n) / k + 1e-6);
    }
  }
}

TEST_CASE("homogeneity") {
  CHECK(homogeneity_check(shear(), 5) < 1e-8);
  CHECK(homogeneity_check(rotation(kPi / 2), 4) < 1e-8);
  auto rng = split_rng(2, 0);
  const auto p = flow_of_quadratic(random_quadratic(4, rng), 1.0, 20);
  CHECK(homogeneity_check(p, 6) <= 1e-6);
  CHECK_THROWS_AS(homogeneity_check(p, 1), Error);
}

TEST_CASE("additivity, conjugation and loop invariance") {
  auto rng = split_rng(4, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = flow_of_quadratic(random_quadratic(2 + 2 * (trial % 2), rng), 1.0, 20);
    const auto b = flow_of_quadratic(random_quadratic(2, rng), 1.0, 20);
    CHECK(std::abs(mean_index(direct_sum(a, b)) - mean_index(a) - mean_index(b)) < 1e-8);

    const Matrix c = random_symplectic(a.dim(), rng, 0.5);
    CHECK(std::abs(mean_index(conjugate(a, c)) - mean_index(a)) < 1e-7);

    // closed clockwise loop of one full turn in every plane
    const auto loop = rotation(2.0 * kPi, a.half_dim());
    CHECK(std::abs(mean_index(concatenate(loop, a)) - mean_index(loop) - mean_index(a)) < 1e-7);
  }
}

TEST_CASE("unipotent paths have zero mean index") {
  auto rng = split_rng(6, 0);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    Matrix s(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) s(i, j) = s(j, i) = u(rng);
    }
    CHECK(std::abs(mean_index(unipotent(s, 10))) <= 1e-8);
  }
}

TEST_CASE("under-sampled input is refined, not misread") {
  // a full turn given by only 8 samples still winds once
  std::vector<PathSample> samples;
  for (int i = 0; i <= 8; ++i) samples.push_back({i / 8.0, rotation(2.0 * kPi * i / 8.0).end()});
  const auto p = SymplecticPath::from_samples(std::move(samples));
  CHECK(mean_index(p) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("eigenvalues of opposite Krein sign pass through each other") {
  // plane rates 3 and -1.5 collide at t = 4 pi / 3, which is a sample time
  const double T = 8.0 * kPi / 3.0;
  const auto fast = flow_of_quadratic(QuadraticHamiltonian(-3.0 * Matrix::Identity(2, 2)), T, 64);
  const auto slow = flow_of_quadratic(QuadraticHamiltonian(1.5 * Matrix::Identity(2, 2)), T, 64);
  CHECK(mean_index(direct_sum(fast, slow)) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(mean_index(direct_sum(slow, fast)) == doctest::Approx(4.0).epsilon(1e-9));
}
