#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include "coiso/models.hpp"
#include "coiso/path_index.hpp"

using namespace coiso;

namespace {

constexpr double kPi = std::numbers::pi;

// Every nonzero integer vector with |sum a_i L_i e_i| <= max_length.
std::set<ClassVector> lattice_oracle(const std::vector<double>& lattice_lengths, double max_length) {
  const int k = static_cast<int>(lattice_lengths.size());
  std::set<ClassVector> out;
  std::vector<int> bound(k);
  for (int i = 0; i < k; ++i) bound[i] = static_cast<int>(std::floor(max_length / lattice_lengths[i]));
  ClassVector a(k, 0);
  std::function<void(int)> walk = [&](int i) {
    if (i == k) {
      double sq = 0.0;
      bool zero = true;
      for (int j = 0; j < k; ++j) {
        sq += std::pow(a[j] * lattice_lengths[j], 2);
        zero = zero && a[j] == 0;
      }
      if (!zero && std::sqrt(sq) <= max_length + 1e-12) out.insert(a);
      return;
    }
    for (int v = -bound[i]; v <= bound[i]; ++v) {
      a[i] = v;
      walk(i + 1);
    }
  };
  walk(0);
  return out;
}

std::set<ClassVector> classes_of(const std::vector<LeafGeodesic>& g) {
  std::set<ClassVector> out;
  for (const auto& x : g) out.insert(x.homotopy_class);
  return out;
}

std::vector<CoisotropicModel> shipped_models() {
  return {CoisotropicModel::split_lagrangian_torus({1.0, 2.0}, 0.25),
          CoisotropicModel::flat_coisotropic_torus(3, {1.0, 1.5}, 0.25),
          CoisotropicModel::ellipsoid({1.0, std::sqrt(2.0)}, 0.5)};
}

}  // namespace

TEST_CASE("model construction checks") {
  CHECK_THROWS_AS(CoisotropicModel::split_lagrangian_torus({1.0, 2.0}, 0.6), Error);
  CHECK_THROWS_AS(CoisotropicModel::split_lagrangian_torus({1.0, -2.0}, 0.1), Error);
  CHECK_THROWS_AS(CoisotropicModel::ellipsoid({1.0, 2.0}, 1.5), Error);
  CHECK_THROWS_AS(CoisotropicModel::flat_coisotropic_torus(2, {1.0, 1.0, 1.0}, 0.1), Error);
  ModelConfig cfg;
  cfg.kind = ModelKind::SplitLagrangianTorus;
  cfg.n = 2;
  cfg.k = 1;
  cfg.radii = {1.0};
  CHECK_THROWS_AS(CoisotropicModel::from_config(cfg), Error);
  CHECK(model_kind_from_string("flat-coisotropic-torus") == ModelKind::FlatCoisotropicTorus);
  CHECK_THROWS_AS(model_kind_from_string("sphere"), Error);
}

TEST_CASE("closed geodesics match lattice enumeration") {
  SUBCASE("split torus") {
    const auto m = CoisotropicModel::split_lagrangian_torus({1.0, 2.0}, 0.25);
    const double L = 30.0;
    const auto g = closed_geodesics(m, L);
    CHECK(classes_of(g) == lattice_oracle({2 * kPi, 4 * kPi}, L));
    for (const auto& x : g) {
      CHECK(x.length == doctest::Approx(std::hypot(2 * kPi * x.homotopy_class[0], 4 * kPi * x.homotopy_class[1])));
    }
    CHECK(std::is_sorted(g.begin(), g.end(), [](const auto& a, const auto& b) { return a.length < b.length; }));
  }
  SUBCASE("lattice lengths 1 and 2 up to 2.5") {
    const auto m = CoisotropicModel::flat_coisotropic_torus(3, {0.5 / kPi, 1.0 / kPi}, 0.05);
    const auto found = classes_of(closed_geodesics(m, 2.5));
    const auto expected = lattice_oracle({1.0, 2.0}, 2.5);
    CHECK(found == expected);
    // sqrt(5) < 2.5, so the diagonal classes are in
    CHECK(found.count({1, 1}) == 1);
    CHECK(found.count({-1, 1}) == 1);
    CHECK(found.count({2, 0}) == 1);
    CHECK(found.count({0, 1}) == 1);
    CHECK(found.size() == 10);
  }
  SUBCASE("below the shortest length") {
    const auto m = CoisotropicModel::split_lagrangian_torus({1.0, 2.0}, 0.25);
    CHECK(closed_geodesics(m, 6.0).empty());
    CHECK(length_spectrum(m, 6.0).empty());
    CHECK_THROWS_AS(closed_geodesics(m, 0.0), Error);
  }
  SUBCASE("ellipsoid principal orbits") {
    const std::vector<double> a{1.0, std::sqrt(2.0)};
    const auto m = CoisotropicModel::ellipsoid(a, 0.5);
    const double L = 12.0;
    std::set<ClassVector> expected;
    for (int j = 0; j < 2; ++j) {
      for (int mult = 1; mult * kPi * a[j] <= L; ++mult) {
        for (int s : {-1, 1}) {
          ClassVector c(2, 0);
          c[j] = s * mult;
          expected.insert(c);
        }
      }
    }
    const auto g = closed_geodesics(m, L);
    CHECK(classes_of(g) == expected);
    for (const auto& x : g) {
      const int j = x.homotopy_class[0] != 0 ? 0 : 1;
      CHECK(x.length == doctest::Approx(std::abs(x.homotopy_class[j]) * kPi * a[j]));
    }
  }
}

TEST_CASE("length spectrum") {
  const auto unit = CoisotropicModel::flat_coisotropic_torus(2, {0.5 / kPi, 0.5 / kPi}, 0.05);
  const auto s = length_spectrum(unit, 2.1);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(s[2] == doctest::Approx(2.0));

  const auto twelve = CoisotropicModel::flat_coisotropic_torus(3, {0.5 / kPi, 1.0 / kPi}, 0.05);
  const auto t = length_spectrum(twelve, 3.05);
  const std::vector<double> expected{1.0, 2.0, std::sqrt(5.0), std::sqrt(8.0), 3.0};
  REQUIRE(t.size() == expected.size());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == doctest::Approx(expected[i]));

  // closed under integer scaling
  for (const auto& m : shipped_models()) {
    const double L = 40.0;
    const auto spec = length_spectrum(m, L);
    for (double l : spec) {
      for (int mult = 2; mult * l <= L; ++mult) {
        const bool found = std::any_of(spec.begin(), spec.end(), [&](double x) { return std::abs(x - mult * l) < 1e-9; });
        CHECK(found);
      }
    }
  }
}

TEST_CASE("areas and lengths of classes") {
  const auto m = CoisotropicModel::split_lagrangian_torus({1.0, 2.0}, 0.25);
  CHECK(m.area({0, 0}) == 0.0);
  CHECK(m.area({1, 0}) == doctest::Approx(kPi));
  CHECK(m.area({1, 1}) == doctest::Approx(5 * kPi));
  CHECK(m.area({-1, 0}) == doctest::Approx(-kPi));
  CHECK(loop_area(m, m.loop({1, 1})) == doctest::Approx(5 * kPi).epsilon(1e-6));
  CHECK(loop_area(m, m.loop({1, 0})) == doctest::Approx(kPi).epsilon(1e-6));
  CHECK_THROWS_AS(m.normalize_class({1, 0, 0}), Error);

  const auto flat = CoisotropicModel::flat_coisotropic_torus(3, {1.0, 1.5}, 0.25);
  CHECK(flat.normalize_class({1, 0, 0, 0}) == ClassVector{1, 0});
  try {
    flat.normalize_class({1, 0, 0, 1});
    FAIL("expected NotContractibleInAmbient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotContractibleInAmbient);
  }

  const auto ell = CoisotropicModel::ellipsoid({1.0, 2.0}, 0.5);
  CHECK(ell.area({0, 1}) == doctest::Approx(2 * kPi));
  CHECK(ell.length({0, 2}) == doctest::Approx(4 * kPi));
  CHECK(loop_area(ell, ell.loop({0, 1})) == doctest::Approx(2 * kPi).epsilon(1e-6));
  CHECK_THROWS_AS(ell.normalize_class({1, 1}), Error);
}

TEST_CASE("geodesic flow") {
  for (const auto& m : shipped_models()) {
    auto rng = split_rng(17, 0);
    const NormalFormChart chart(m, 0.9 * m.chart_radius());
    const Vector base = m.random_point(rng);

    const auto still = geodesic_flow(chart, base, Vector::Zero(m.k()), 1.0, 100);
    for (const auto& z : still.z) CHECK((z - still.z.front()).norm() < 1e-14);

    Vector p = Vector::Random(m.k());
    p *= 0.5 * m.chart_radius() / p.norm();
    const double T = 3.0;
    const auto tr = geodesic_flow(chart, base, p, T);
    for (std::size_t s = 0; s < tr.z.size(); ++s) {
      CHECK(std::abs(m.momentum(tr.z[s]).norm() - p.norm()) < 1e-10);
      CHECK((m.momentum(tr.z[s]) - p).norm() < 1e-9);
      // projection is the straight line with velocity p in leaf coordinates
      const Vector expected = m.leaf_point(base, p * tr.t[s]);
      CHECK((m.base_of(tr.z[s]) - expected).norm() < 1e-7);
    }
  }
  SUBCASE("flat torus closes after one lattice length") {
    const auto m = CoisotropicModel::flat_coisotropic_torus(3, {1.0, 1.5}, 0.25);
    const NormalFormChart chart(m, 0.2);
    const Vector base = m.loop({1, 0}).points.front();
    Vector p(2);
    p << 0.1, 0.0;
    const double period = 2 * kPi * 1.0 / 0.1;
    const auto tr = geodesic_flow(chart, base, p, period);
    CHECK((m.base_of(tr.z.back()) - base).norm() < 1e-7);
  }
}

TEST_CASE("holonomy") {
  const auto flat = CoisotropicModel::flat_coisotropic_torus(3, {1.0, 1.5}, 0.25);
  const auto h = holonomy(flat, flat.loop({1, 2}));
  CHECK(h.dim() == 2);
  for (const auto& s : h.samples()) CHECK((s.m - Matrix::Identity(2, 2)).norm() < 1e-12);

  const auto split = CoisotropicModel::split_lagrangian_torus({1.0, 2.0}, 0.25);
  const auto empty = holonomy(split, split.loop({1, 0}));
  CHECK(empty.dim() == 0);
  CHECK(mean_index(empty) == 0.0);

  const std::vector<double> a{1.0, 3.0};
  const auto ell = CoisotropicModel::ellipsoid(a, 0.5);
  const auto rot = holonomy(ell, ell.loop({1, 0}));
  CHECK(rot.dim() == 2);
  // transverse rotation by 2 pi a_1 / a_2 over one period
  CHECK(std::abs(mean_index(rot)) == doctest::Approx(2.0 * a[0] / a[1]).epsilon(1e-7));
  const double angle = 2 * kPi * a[0] / a[1];
  Eigen::EigenSolver<Matrix> es(rot.end());
  for (Eigen::Index i = 0; i < 2; ++i) CHECK(std::abs(std::abs(std::arg(es.eigenvalues()(i))) - angle) < 1e-7);
}

TEST_CASE("stability certificate and flatness") {
  for (const auto& m : shipped_models()) {
    const auto cert = stability_certificate(m, 1000, 5);
    CHECK(cert.passed);
    CHECK(cert.min_wedge > 1e-6);
    CHECK(cert.max_dalpha_leak < 1e-10);
    auto rng = split_rng(9, 0);
    for (int i = 0; i < 20; ++i) CHECK(leaf_curvature(m, m.random_point(rng)) < 1e-8);
  }
}

TEST_CASE("canonical loops") {
  for (const auto& m : shipped_models()) {
    for (const auto& g : closed_geodesics(m, 15.0)) {
      const auto loop = m.loop(g.homotopy_class);
      CHECK(loop.orientable);
      CHECK((loop.points.back() - loop.points.front()).norm() < 1e-9);
      for (const auto& z : loop.points) CHECK(m.momentum(z).norm() < 1e-9);
    }
  }
}
