#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coiso/symplectic.hpp"

namespace coiso {

enum class ModelKind { SplitLagrangianTorus, FlatCoisotropicTorus, Ellipsoid };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Homotopy class: lattice vector for tori, m e_j for ellipsoid orbits.
using ClassVector = std::vector<int>;

struct ModelConfig {
  ModelKind kind = ModelKind::SplitLagrangianTorus;
  int n = 1;
  int k = 1;
  std::vector<double> radii;  // circle radii for tori, weights for the ellipsoid
  double R = 0.25;            // normal-form radius
  std::optional<double> displacement_energy;
  std::optional<double> neighborhood_energy;
};

/// Loop tangent to the characteristic foliation, sampled in ambient
/// coordinates, with a leaf frame (2n x k) at each sample.
struct FramedLeafLoop {
  std::vector<double> t;
  std::vector<Vector> points;
  std::vector<Matrix> frame;
  bool orientable = true;
  ClassVector homotopy_class;

  double duration() const { return t.back(); }
};

/// Closed-form stable coisotropic submanifold M of R^{2n} (torus factors are
/// read on their universal cover) together with its normal form
///   U_R = M x B^k_R,  omega = omega_M + sum_i d(p_i alpha_i).
///
/// Coordinates are (q_1..q_n, P_1..P_n); plane i is (q_i, P_i).
///  - tori: the first k planes carry circles of radius r_i, alpha_i = r_i dtheta_i,
///    and |z_i|^2 / 2 = r_i^2 / 2 + r_i p_i;
///  - ellipsoid: Q(z) = sum |z_j|^2 / a_j, M = {Q = 1}, alpha = Liouville form,
///    p = Q - 1.
class CoisotropicModel {
 public:
  static CoisotropicModel split_lagrangian_torus(std::vector<double> radii, double R);
  static CoisotropicModel flat_coisotropic_torus(int n, std::vector<double> radii, double R);
  static CoisotropicModel ellipsoid(std::vector<double> weights, double R);
  static CoisotropicModel from_config(const ModelConfig& config);

  const ModelConfig& config() const { return cfg_; }
  ModelKind kind() const { return cfg_.kind; }
  int n() const { return cfg_.n; }
  int k() const { return cfg_.k; }
  const std::vector<double>& radii() const { return cfg_.radii; }
  double chart_radius() const { return cfg_.R; }
  std::string name() const;

  /// e(M), e(U): configured constants, defaulting to closed-form literature values.
  double displacement_energy() const;
  double neighborhood_energy() const;
  bool displacement_energy_is_default() const { return !cfg_.displacement_energy; }

  // Normal form.
  Vector to_ambient(const Vector& base, const Vector& p) const;
  Vector base_of(const Vector& z) const;
  Vector momentum(const Vector& z) const;
  Matrix momentum_gradient(const Vector& z) const;              // 2n x k, columns grad p_i
  std::vector<Matrix> momentum_hessians(const Vector& z) const;  // k of 2n x 2n
  double rho(const Vector& z) const;
  Vector rho_gradient(const Vector& z) const;
  Matrix rho_hessian(const Vector& z) const;

  // Foliation data at a point of M.
  Matrix leaf_frame(const Vector& base) const;  // 2n x k, alpha_i(xi_j) = delta_ij
  Matrix dual_frame(const Vector& base) const;  // 2n x k, omega(xi_i, xi*_j) = delta_ij
  Matrix alphas(const Vector& base) const;      // k x 2n, rows alpha_i
  Matrix alpha_differential(int i) const;       // dalpha_i as an antisymmetric matrix
  Matrix tangent_basis(const Vector& base) const;  // 2n x (2n - k)
  /// Point of the leaf through base at leaf coordinates u (k-vector).
  Vector leaf_point(const Vector& base, const Vector& u) const;
  Vector random_point(std::mt19937_64& rng) const;

  // Classes and closed leaf-wise geodesics.
  /// Throws BadInput on wrong arity or a non-principal ellipsoid class and
  /// NotContractibleInAmbient for a class winding around a torus factor.
  ClassVector normalize_class(const ClassVector& cls) const;
  double length(const ClassVector& cls) const;
  double area(const ClassVector& cls) const;
  /// Constant momentum p with |p| = level whose geodesic traverses cls.
  Vector momentum_for(const ClassVector& cls, double level) const;
  /// Arc-length parametrized closed geodesic of cls with the canonical frame.
  FramedLeafLoop loop(const ClassVector& cls, int samples_per_turn = 64) const;
  /// Planes spanned by the leaf factor T F + T-perp M along loops of cls.
  std::vector<int> leaf_planes(const ClassVector& cls) const;
  /// Planes spanned by the transverse factor E along loops of cls.
  std::vector<int> transverse_planes(const ClassVector& cls) const;

 private:
  explicit CoisotropicModel(ModelConfig cfg);
  void check_point(const Vector& base) const;
  ModelConfig cfg_;
};

struct NormalFormChart {
  const CoisotropicModel* model;
  double r;

  NormalFormChart(const CoisotropicModel& m, double radius);
  Vector to_ambient(const Vector& base, const Vector& p) const;
  bool contains(const Vector& z) const;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> z;
};

/// Fixed-step RK4 for y' = f(y); keeps every `keep_every`-th state.
Trajectory rk4(const std::function<Vector(const Vector&)>& f, const Vector& y0, double duration,
               int steps, int keep_every = 1);

/// Hamiltonian flow of rho = |p|^2 / 2 from the chart point (base, p).
Trajectory geodesic_flow(const NormalFormChart& chart, const Vector& base, const Vector& p,
                         double duration, int steps = 0);

struct LeafGeodesic {
  ClassVector homotopy_class;
  double length = 0.0;
  double momentum_level = 0.0;
  double area = 0.0;
};

std::vector<LeafGeodesic> closed_geodesics(const CoisotropicModel& model, double max_length);
std::vector<double> length_spectrum(const CoisotropicModel& model, double max_length);

/// Transport of the transverse factor E along the loop, in the capping
/// trivialization, on the loop's parameter interval.
SymplecticPath holonomy(const CoisotropicModel& model, const FramedLeafLoop& loop);

/// Symplectic area of the canonical capping of the loop.
double loop_area(const CoisotropicModel& model, const FramedLeafLoop& loop);

struct StabilityCertificate {
  double min_wedge = 0.0;         // min |det alpha_i(xi_j)| times the omega_M volume on ker alpha
  double max_dalpha_leak = 0.0;   // max |dalpha_i(xi, v)| over xi in T F, v in T M
  bool passed = false;
};

StabilityCertificate stability_certificate(const CoisotropicModel& model, int points, std::uint64_t seed);

/// Largest |curvature component| of the leaf-wise metric sum alpha_i^2,
/// by finite differences in leaf coordinates.
double leaf_curvature(const CoisotropicModel& model, const Vector& base);

}  // namespace coiso
