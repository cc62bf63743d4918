#pragma once

// Linear symplectic algebra on R^{2n} with the standard structure
// J = [[0, I], [-I, 0]], omega(u, v) = u^T J v, and the linear Hamiltonian
// field x -> (-J H) x of a quadratic Hamiltonian x^T H x / 2.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "coiso/errors.hpp"

namespace coiso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

struct Tolerances {
  double sympl = 1e-9;        // symplectic defect, relative to max(1, |M|^2)
  double pairing = 1e-6;      // lambda <-> 1/lambda matching
  double eig = 1e-10;         // degeneracy of quadratic forms
  double cross = 1e-8;        // eigenvalue-1 detection via sigma_min(M - I)
  double form = 1e-8;         // degeneracy of crossing forms
  double unit_circle = 1e-6;  // distance of a spectral cluster from S^1 / from +-1
  double cluster = 1e-6;      // eigenvalues closer than this share a cluster
};

/// Standard 2n x 2n structure matrix.
Matrix standard_j(int n);

/// omega(u, v) = u^T J v.
double omega(const Vector& u, const Vector& v);

/// J^{-1} M^T J, the exact inverse of a symplectic matrix.
Matrix symplectic_inverse(const Matrix& m);

/// Infinity norm of M^T J M - J.
double symplectic_defect(const Matrix& m);

class SymplecticMatrix {
 public:
  SymplecticMatrix() = default;

  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  int half_dim() const { return dim() / 2; }

  /// Wraps a matrix produced by a construction that is symplectic by design.
  static SymplecticMatrix trusted(Matrix m) { return SymplecticMatrix(std::move(m)); }

 private:
  explicit SymplecticMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;

  friend SymplecticMatrix validate_symplectic(const Matrix& m, double tol);
};

/// Accepts m iff |m^T J m - J|_inf <= tol * max(1, |m|_inf^2).
SymplecticMatrix validate_symplectic(const Matrix& m, double tol = 1e-9);

class QuadraticHamiltonian {
 public:
  /// Symmetrizes the input; the stored matrix is exactly symmetric.
  explicit QuadraticHamiltonian(const Matrix& h);

  const Matrix& matrix() const { return h_; }
  int dim() const { return static_cast<int>(h_.rows()); }

  /// The linear Hamiltonian field -J H.
  Matrix field() const;

  double operator()(const Vector& x) const { return 0.5 * x.dot(h_ * x); }

 private:
  Matrix h_;
};

struct PathSample {
  double t = 0.0;
  Matrix m;
};

class SymplecticPath {
 public:
  SymplecticPath() = default;

  /// Validates ordering, the identity start and each sample's defect.
  static SymplecticPath from_samples(std::vector<PathSample> samples,
                                     double tol = 1e-9);
  /// Skips validation; for producers whose output is symplectic by construction.
  static SymplecticPath trusted(std::vector<PathSample> samples);

  static SymplecticPath constant_identity(int dim, double duration);

  int dim() const { return samples_.empty() ? 0 : static_cast<int>(samples_.front().m.rows()); }
  int half_dim() const { return dim() / 2; }
  double duration() const { return samples_.back().t; }
  std::size_t size() const { return samples_.size(); }

  const std::vector<PathSample>& samples() const { return samples_; }
  const PathSample& operator[](std::size_t i) const { return samples_[i]; }
  const Matrix& end() const { return samples_.back().m; }

 private:
  explicit SymplecticPath(std::vector<PathSample> samples) : samples_(std::move(samples)) {}
  std::vector<PathSample> samples_;
};

/// Evaluates a sampled path between samples by
///   M(t) = exp(s L_i) M_i,  L_i = log(M_{i+1} M_i^{-1}),  s in [0, 1],
/// which is exact for piecewise autonomous flows and stays symplectic. The
/// step M_{i+1} M_i^{-1} is the flow between samples, so it stays small even
/// when M itself is large (iterates, strong shears).
class PathInterpolant {
 public:
  explicit PathInterpolant(const SymplecticPath& path);

  Matrix at(double t) const;
  /// Derivative of the interpolant, L_i M(t) / (t_{i+1} - t_i).
  Matrix derivative(double t) const;

  std::size_t interval(double t) const;
  const Matrix& generator(std::size_t i) const { return generators_[i]; }
  const SymplecticPath& path() const { return *path_; }

 private:
  const SymplecticPath* path_;
  std::vector<Matrix> generators_;
};

/// Log of a symplectic step close to the identity; throws RefinementExhausted
/// when |step - I| is too large for a real principal logarithm.
Matrix step_generator(const Matrix& step);

SymplecticPath flow_of_quadratic(const QuadraticHamiltonian& h, double duration, int steps);
SymplecticPath direct_sum(const SymplecticPath& a, const SymplecticPath& b);
SymplecticPath concatenate(const SymplecticPath& a, const SymplecticPath& b);
SymplecticPath iterate(const SymplecticPath& a, int k);

/// Pointwise product t -> a(t) b(t) on a common refinement.
SymplecticPath pointwise_product(const SymplecticPath& a, const SymplecticPath& b);
/// t -> C^{-1} a(t) C.
SymplecticPath conjugate(const SymplecticPath& a, const Matrix& c);

/// Embeds blocks given in (q_a, p_a) and (q_b, p_b) coordinates into
/// (q_a, q_b, p_a, p_b) ordering so the result is symplectic for standard_j.
Matrix block_sum(const Matrix& a, const Matrix& b);

struct SpectrumPoint {
  Complex eigenvalue;
  int multiplicity = 1;
  int krein_sign = 0;  // +1 / -1 on S^1 away from +-1, else 0
};

std::vector<SpectrumPoint> spectrum(const SymplecticMatrix& m, const Tolerances& tol = {});

/// Angle of the spectral circle map, in (-pi, pi]. Krein-positive elliptic
/// eigenvalues contribute their argument, each negative real eigenvalue pi/2,
/// everything else nothing.
double circle_map_angle(const Matrix& m, const Tolerances& tol = {});

/// Positive minus negative squares of h.
int signature(const QuadraticHamiltonian& h, const Tolerances& tol = {});

/// Random symmetric matrix with entries uniform in [-scale, scale].
QuadraticHamiltonian random_quadratic(int dim, std::mt19937_64& rng, double scale = 1.0);
/// exp(-J H) for a random quadratic H.
Matrix random_symplectic(int dim, std::mt19937_64& rng, double scale = 1.0);

/// Seeds a per-task generator from a master seed and a task index.
std::mt19937_64 split_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace coiso
