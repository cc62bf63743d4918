#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coiso/maslov.hpp"

namespace coiso {

/// Radial profile H(s), s = |p|, of the test Hamiltonian:
///   C on [0, eps], concave cap to C - eps at 2 eps, linear with slope
///   -(C - 2 eps) / (r - 3 eps) down to eps at r - eps, convex cap to 0 at r,
///   0 on [r, R]. Caps are C^1 splines of two quadratic pieces.
class TestHamiltonianProfile {
 public:
  struct Piece {
    double a, b;      // interval
    double value;     // H(a)
    double slope;     // H'(a)
    double curvature; // H'' on (a, b)
  };

  static TestHamiltonianProfile build(double C, double eps, double r, double R);

  double C() const { return c_; }
  double eps() const { return eps_; }
  double r() const { return r_; }
  double R() const { return big_r_; }
  /// Slope magnitude (C - 2 eps) / (r - 3 eps) on the linear part.
  double slope() const { return slope_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::string cap_kind() const { return "two-piece-quadratic"; }

  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;

  /// All s in [0, R] with H'(s) = -l (l > 0); throws SlopeInSpectrum when
  /// H' = -l on a whole interval.
  std::vector<double> levels_with_slope(double l) const;

 private:
  const Piece& piece(double s) const;
  double c_ = 0, eps_ = 0, r_ = 0, big_r_ = 0, slope_ = 0;
  std::vector<Piece> pieces_;
};

inline TestHamiltonianProfile build_profile(double C, double eps, double r, double R) {
  return TestHamiltonianProfile::build(C, eps, r, R);
}

enum class Band { Inner, Outer };
const char* to_string(Band b);

struct OrbitRecord {
  ClassVector homotopy_class;  // class of the projected loop, oriented along the flow
  double length = 0.0;
  double level = 0.0;          // |p|
  double action = 0.0;         // H(level) + A(gamma) + level * length, A = -Area
  double mean_index = 0.0;     // of the orbit, equal to -maslov
  double maslov = 0.0;         // mu(gamma)
  Band band = Band::Inner;
};

/// Caches Maslov indices per class across catalog calls on one model.
using MaslovCache = std::map<ClassVector, double>;

double orbit_action(const TestHamiltonianProfile& h, const CoisotropicModel& model, const ClassVector& cls,
                    double level);

/// Action of the orbit recomputed by integrating the flow of H(|p|) for unit
/// time with the Liouville integral carried along.
struct IntegratedAction {
  double action = 0.0;
  double closure_error = 0.0;
};
IntegratedAction integrate_orbit_action(const TestHamiltonianProfile& h, const CoisotropicModel& model,
                                        const ClassVector& cls, double level, int steps = 0);

std::vector<OrbitRecord> orbit_catalog(const TestHamiltonianProfile& h, const CoisotropicModel& model,
                                       MaslovCache* cache = nullptr);

/// Linearized flow of rho along the orbit over the class with |p| = level,
/// integrated in ambient coordinates, for time length / level.
SymplecticPath linearized_rho_path(const CoisotropicModel& model, const ClassVector& cls, double level);

/// Linearized flow of H(|p|) along the unit-time orbit of the class at level.
SymplecticPath linearized_orbit_path(const TestHamiltonianProfile& h, const CoisotropicModel& model,
                                     const ClassVector& cls, double level);

struct Lemma33Result {
  int n = 0, k = 0, trials = 0;
  int violations = 0;
  int rejected = 0;
  double worst_lower_margin = 0.0;  // min over trials of CZ - (Delta - n)
  double worst_upper_margin = 0.0;  // min over trials of (Delta + n - k) - CZ
  std::uint64_t seed = 0;
};

Lemma33Result lemma33_fuzz(int n, int k, int trials, double perturb_scale, std::uint64_t seed);

/// Delta(G) and CZ(G~) for the block path G = A + Gamma with A the flow of
/// |p|^2 / 2 on R^{2k}, perturbed by the flow of the quadratic form K.
struct SandwichSample {
  double mean_index = 0.0;
  int cz = 0;
};
SandwichSample lemma33_sample(int n, int k, const SymplecticPath& gamma, const QuadraticHamiltonian& perturbation);

struct Prop31Result {
  ClassVector homotopy_class;
  double mu = 0.0;
  double minus_mean_index = 0.0;  // -Delta_rho(x)
  double diff = 0.0;
};

Prop31Result prop31_check(const CoisotropicModel& model, const ClassVector& cls, double level = 0.0);

struct Prop32Result {
  ClassVector homotopy_class;
  double mean_index = 0.0;  // Delta_rho(x)
  int trials = 0;
  int violations = 0;
  int rejected = 0;
  std::vector<int> cz_values;
  bool passed = false;
};

Prop32Result prop32_window_check(const CoisotropicModel& model, const ClassVector& cls, int trials,
                                 std::uint64_t seed, double perturb_scale = 1e-3);

struct WitnessCandidate {
  ClassVector eta_class;  // reversed orientation of the orbit's class
  double length = 0.0;
  double mu = 0.0;
  double area = 0.0;
  bool index_ok = false;
  bool area_ok = false;
};

struct TheoremReport {
  std::string model;
  double delta = 0.0;
  double displacement_energy = 0.0;
  bool displacement_energy_external = true;
  int n = 0, k = 0;
  std::vector<WitnessCandidate> candidates;
  std::optional<WitnessCandidate> witness;
  double orbit_mean_index = 0.0;  // of the unreversed orbit, by linearization
  bool mean_index_window_ok = false;
  bool passed = false;
};

/// Enumerates closed geodesics up to max_length and returns the first witness
/// (by area, then length) satisfying both inequalities. Throws NoWitnessFound
/// when `require` is set and nothing qualifies.
TheoremReport theorem_bounds_check(const CoisotropicModel& model, double delta, double max_length = 10.0,
                                   bool require = true);

struct Lemma35Case {
  double C = 0.0, eps = 0.0, slope = 0.0;
  bool slope_outside_spectrum = false;
  std::vector<OrbitRecord> inner_orbits;
  std::vector<bool> in_action_window;
  bool passed = false;
};

struct Lemma35Report {
  std::string model;
  double r = 0.0, R = 0.0;
  double neighborhood_energy = 0.0;
  std::vector<Lemma35Case> cases;
  bool passed = false;
};

/// Throws CInSpectrumScaled when some C lies within 1e-6 of r S.
Lemma35Report lemma35_band_check(const CoisotropicModel& model, const std::vector<double>& C_values,
                                 const std::vector<double>& eps_values, double r, double R);

}  // namespace coiso
