#include "coiso/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

namespace coiso {

namespace {

constexpr double kPi = std::numbers::pi;

// Largest |step - I| accepted by the interpolant's logarithm.
constexpr double kMaxLogStep = 0.9;
// Target |exp(h A) - I| per sample for flows.
constexpr double kFlowStep = 0.2;

double inf_norm(const Matrix& m) {
  return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

void require_even_square(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) {
    std::ostringstream os;
    os << "matrix of shape " << m.rows() << "x" << m.cols() << " is not square of even dimension";
    throw Error(ErrorKind::OddDimension, os.str());
  }
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSymplectic: return "NotSymplectic";
    case ErrorKind::OddDimension: return "OddDimension";
    case ErrorKind::IntervalMismatch: return "IntervalMismatch";
    case ErrorKind::BadStart: return "BadStart";
    case ErrorKind::PairingFailure: return "PairingFailure";
    case ErrorKind::DegenerateForm: return "DegenerateForm";
    case ErrorKind::RefinementExhausted: return "RefinementExhausted";
    case ErrorKind::DegenerateEndpoint: return "DegenerateEndpoint";
    case ErrorKind::IrregularCrossing: return "IrregularCrossing";
    case ErrorKind::FrameRankLoss: return "FrameRankLoss";
    case ErrorKind::NotTangent: return "NotTangent";
    case ErrorKind::NotContractibleInAmbient: return "NotContractibleInAmbient";
    case ErrorKind::ProjectionRankLoss: return "ProjectionRankLoss";
    case ErrorKind::LeftChart: return "LeftChart";
    case ErrorKind::BadParameters: return "BadParameters";
    case ErrorKind::SlopeInSpectrum: return "SlopeInSpectrum";
    case ErrorKind::CInSpectrumScaled: return "CInSpectrumScaled";
    case ErrorKind::NoWitnessFound: return "NoWitnessFound";
    case ErrorKind::BadInput: return "BadInput";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Matrix standard_j(int n) {
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return j;
}

double omega(const Vector& u, const Vector& v) {
  const auto n = u.size() / 2;
  return u.head(n).dot(v.tail(n)) - u.tail(n).dot(v.head(n));
}

Matrix symplectic_inverse(const Matrix& m) {
  const int n = static_cast<int>(m.rows()) / 2;
  const Matrix j = standard_j(n);
  return -j * m.transpose() * j;
}

double symplectic_defect(const Matrix& m) {
  const Matrix j = standard_j(static_cast<int>(m.rows()) / 2);
  return inf_norm(m.transpose() * j * m - j);
}

SymplecticMatrix validate_symplectic(const Matrix& m, double tol) {
  require_even_square(m);
  const double defect = symplectic_defect(m);
  const double scale = std::max(1.0, inf_norm(m) * inf_norm(m));
  if (!(defect <= tol * scale)) {
    std::ostringstream os;
    os << "symplectic defect " << defect << " exceeds " << tol * scale;
    throw Error(ErrorKind::NotSymplectic, os.str());
  }
  return SymplecticMatrix(m);
}

QuadraticHamiltonian::QuadraticHamiltonian(const Matrix& h) {
  require_even_square(h);
  h_ = 0.5 * (h + h.transpose());
}

Matrix QuadraticHamiltonian::field() const {
  return -standard_j(dim() / 2) * h_;
}

// ---------------------------------------------------------------------------
// Paths

SymplecticPath SymplecticPath::from_samples(std::vector<PathSample> samples, double tol) {
  if (samples.size() < 2) throw Error(ErrorKind::BadInput, "a path needs at least two samples");
  const auto dim = samples.front().m.rows();
  if (std::abs(samples.front().t) > 0.0) throw Error(ErrorKind::BadStart, "path must start at t = 0");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.m.rows() != dim || s.m.cols() != dim) throw Error(ErrorKind::BadInput, "inconsistent sample dimensions");
    if (i > 0 && !(s.t > samples[i - 1].t)) throw Error(ErrorKind::BadInput, "sample times must increase strictly");
    if (dim > 0) validate_symplectic(s.m, tol);
  }
  if (dim > 0 && inf_norm(samples.front().m - Matrix::Identity(dim, dim)) > tol) {
    throw Error(ErrorKind::BadStart, "path must start at the identity");
  }
  return SymplecticPath(std::move(samples));
}

SymplecticPath SymplecticPath::trusted(std::vector<PathSample> samples) {
  return SymplecticPath(std::move(samples));
}

SymplecticPath SymplecticPath::constant_identity(int dim, double duration) {
  const Matrix id = Matrix::Identity(dim, dim);
  return SymplecticPath({{0.0, id}, {duration, id}});
}

Matrix step_generator(const Matrix& step) {
  const auto dim = step.rows();
  if (dim == 0) return step;
  const Matrix x = step - Matrix::Identity(dim, dim);
  const double size = x.operatorNorm();
  if (!(size < kMaxLogStep)) {
    std::ostringstream os;
    os << "consecutive samples too far apart to interpolate (|step - I| = " << size << ")";
    throw Error(ErrorKind::RefinementExhausted, os.str());
  }
  if (size < 1e-3) {
    // log(I + X) by its series; exact to round-off at this size.
    Matrix term = x;
    Matrix sum = x;
    for (int k = 2; k <= 8; ++k) {
      term = term * x;
      sum += ((k % 2 == 0) ? -1.0 : 1.0) / k * term;
    }
    return sum;
  }
  return step.log();
}

PathInterpolant::PathInterpolant(const SymplecticPath& path) : path_(&path) {
  const auto& s = path.samples();
  generators_.reserve(s.size() - 1);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    generators_.push_back(step_generator(s[i + 1].m * symplectic_inverse(s[i].m)));
  }
}

std::size_t PathInterpolant::interval(double t) const {
  const auto& s = path_->samples();
  auto it = std::upper_bound(s.begin(), s.end(), t,
                             [](double v, const PathSample& p) { return v < p.t; });
  std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
  return std::min(i, s.size() - 2);
}

Matrix PathInterpolant::at(double t) const {
  const auto& s = path_->samples();
  if (s.front().m.rows() == 0) return s.front().m;
  const std::size_t i = interval(t);
  const double h = s[i + 1].t - s[i].t;
  const double u = std::clamp((t - s[i].t) / h, 0.0, 1.0);
  if (u == 0.0) return s[i].m;
  if (u == 1.0) return s[i + 1].m;
  return (u * generators_[i]).exp() * s[i].m;
}

Matrix PathInterpolant::derivative(double t) const {
  const auto& s = path_->samples();
  const std::size_t i = interval(t);
  const double h = s[i + 1].t - s[i].t;
  return generators_[i] * at(t) / h;
}

SymplecticPath flow_of_quadratic(const QuadraticHamiltonian& h, double duration, int steps) {
  if (steps < 1) throw Error(ErrorKind::BadInput, "flow needs at least one step");
  if (!(duration > 0.0)) throw Error(ErrorKind::BadInput, "flow duration must be positive");
  const Matrix a = h.field();
  const double rate = a.operatorNorm();
  const int needed = static_cast<int>(std::ceil(duration * rate / kFlowStep));
  const int count = std::max(steps, needed);
  std::vector<PathSample> samples;
  samples.reserve(count + 1);
  const auto dim = a.rows();
  samples.push_back({0.0, Matrix::Identity(dim, dim)});
  for (int i = 1; i <= count; ++i) {
    const double t = duration * i / count;
    samples.push_back({t, (t * a).exp()});
  }
  return SymplecticPath::trusted(std::move(samples));
}

Matrix block_sum(const Matrix& a, const Matrix& b) {
  const int na = static_cast<int>(a.rows()) / 2;
  const int nb = static_cast<int>(b.rows()) / 2;
  const int n = na + nb;
  Matrix m = Matrix::Zero(2 * n, 2 * n);
  // Index maps (q_a, p_a) -> (q_a, q_b, p_a, p_b).
  auto ia = [&](int i) { return i < na ? i : n + (i - na); };
  auto ib = [&](int i) { return i < nb ? na + i : n + na + (i - nb); };
  for (int r = 0; r < 2 * na; ++r)
    for (int c = 0; c < 2 * na; ++c) m(ia(r), ia(c)) = a(r, c);
  for (int r = 0; r < 2 * nb; ++r)
    for (int c = 0; c < 2 * nb; ++c) m(ib(r), ib(c)) = b(r, c);
  return m;
}

namespace {

std::vector<double> common_times(const SymplecticPath& a, const SymplecticPath& b) {
  std::vector<double> times;
  for (const auto& s : a.samples()) times.push_back(s.t);
  for (const auto& s : b.samples()) times.push_back(s.t);
  std::sort(times.begin(), times.end());
  const double eps = 1e-13 * std::max(1.0, a.duration());
  std::vector<double> merged;
  for (double t : times) {
    if (merged.empty() || t - merged.back() > eps) merged.push_back(t);
  }
  merged.back() = a.duration();
  return merged;
}

void require_same_interval(const SymplecticPath& a, const SymplecticPath& b) {
  if (std::abs(a.duration() - b.duration()) > 1e-12 * std::max(1.0, a.duration())) {
    std::ostringstream os;
    os << "parameter intervals differ: [0, " << a.duration() << "] vs [0, " << b.duration() << "]";
    throw Error(ErrorKind::IntervalMismatch, os.str());
  }
}

}  // namespace

SymplecticPath direct_sum(const SymplecticPath& a, const SymplecticPath& b) {
  require_same_interval(a, b);
  if (b.dim() == 0) return a;
  if (a.dim() == 0) return b;
  const PathInterpolant ia(a);
  const PathInterpolant ib(b);
  std::vector<PathSample> samples;
  for (double t : common_times(a, b)) samples.push_back({t, block_sum(ia.at(t), ib.at(t))});
  return SymplecticPath::trusted(std::move(samples));
}

SymplecticPath pointwise_product(const SymplecticPath& a, const SymplecticPath& b) {
  require_same_interval(a, b);
  if (a.dim() != b.dim()) throw Error(ErrorKind::BadInput, "dimension mismatch in product");
  const PathInterpolant ia(a);
  const PathInterpolant ib(b);
  std::vector<PathSample> samples;
  for (double t : common_times(a, b)) samples.push_back({t, ia.at(t) * ib.at(t)});
  return SymplecticPath::trusted(std::move(samples));
}

SymplecticPath conjugate(const SymplecticPath& a, const Matrix& c) {
  const Matrix c_inv = symplectic_inverse(c);
  std::vector<PathSample> samples;
  samples.reserve(a.size());
  for (const auto& s : a.samples()) samples.push_back({s.t, c_inv * s.m * c});
  samples.front().m = Matrix::Identity(a.dim(), a.dim());
  return SymplecticPath::trusted(std::move(samples));
}

SymplecticPath concatenate(const SymplecticPath& a, const SymplecticPath& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::BadInput, "dimension mismatch in concatenation");
  const auto dim = b.dim();
  if (dim > 0 && inf_norm(b[0].m - Matrix::Identity(dim, dim)) > 1e-9) {
    throw Error(ErrorKind::BadStart, "second path does not start at the identity");
  }
  std::vector<PathSample> samples = a.samples();
  const double shift = a.duration();
  const Matrix& end = a.end();
  for (std::size_t i = 1; i < b.size(); ++i) samples.push_back({shift + b[i].t, b[i].m * end});
  return SymplecticPath::trusted(std::move(samples));
}

SymplecticPath iterate(const SymplecticPath& a, int k) {
  if (k < 1) throw Error(ErrorKind::BadInput, "iteration count must be positive");
  std::vector<PathSample> samples = a.samples();
  samples.reserve(a.size() * k);
  const auto dim = a.dim();
  Matrix power = Matrix::Identity(dim, dim);
  const double period = a.duration();
  for (int j = 1; j < k; ++j) {
    power = a.end() * power;
    for (std::size_t i = 1; i < a.size(); ++i) samples.push_back({j * period + a[i].t, a[i].m * power});
  }
  return SymplecticPath::trusted(std::move(samples));
}

// ---------------------------------------------------------------------------
// Spectral machinery

namespace {

struct Eigenpair {
  Complex value;
  double krein = 0.0;  // Im omega(conj(v), v) for the unit eigenvector v
  Eigen::VectorXcd vec;
};

std::vector<Eigenpair> eigenpairs(const Matrix& m) {
  std::vector<Eigenpair> out;
  if (m.rows() == 0) return out;
  Eigen::EigenSolver<Matrix> es(m, true);
  const auto& values = es.eigenvalues();
  const auto& vectors = es.eigenvectors();
  const Matrix j = standard_j(static_cast<int>(m.rows()) / 2);
  out.reserve(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    Eigen::VectorXcd v = vectors.col(i);
    v.normalize();
    const Complex form = v.adjoint() * (j.cast<Complex>() * v);
    out.push_back({values[i], form.imag(), v});
  }
  return out;
}

// A Krein sign is trusted only when the eigenvector is clearly non-isotropic.
// Near +-1 the numerically split eigenvalues of a Jordan block carry
// eigenvectors with |krein| of the order of the splitting, so the threshold
// scales with the distance to +-1 there.
int krein_sign_of(const Eigenpair& e) {
  const double d = std::min(std::abs(e.value - 1.0), std::abs(e.value + 1.0));
  double threshold = 1e-9;
  if (d < 1e-3) threshold = std::max(threshold, 10.0 * d);
  if (e.krein > threshold) return 1;
  if (e.krein < -threshold) return -1;
  return 0;
}

constexpr double kClusterRadius = 1e-5;

bool near_negative_axis(Complex z) {
  return z.real() < 0.0 && std::abs(z.imag()) <= 1e-3 * std::abs(z);
}

}  // namespace

double circle_map_angle(const Matrix& m, const Tolerances&) {
  const auto pairs = eigenpairs(m);
  const std::size_t count = pairs.size();
  std::vector<bool> used(count, false);
  double angle = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (used[i]) continue;
    const Complex lambda = pairs[i].value;
    const bool elliptic = std::abs(std::abs(lambda) - 1.0) < 1e-6 &&
                          std::min(std::abs(lambda - 1.0), std::abs(lambda + 1.0)) >= 1e-3;
    std::vector<std::size_t> cluster{i};
    if (elliptic) {
      for (std::size_t j = i + 1; j < count; ++j)
        if (!used[j] && std::abs(pairs[j].value - lambda) < kClusterRadius) cluster.push_back(j);
    }
    for (std::size_t j : cluster) used[j] = true;
    if (cluster.size() == 1) {
      const int sign = krein_sign_of(pairs[i]);
      if (sign > 0) {
        angle += std::arg(lambda);
      } else if (sign == 0 && near_negative_axis(lambda)) {
        angle += 0.5 * kPi;
      }
      continue;
    }
    // Coincident elliptic eigenvalues: eigenvectors of each may mix, so read
    // the Krein form on the span of the whole cluster.
    Eigen::MatrixXcd span(m.rows(), static_cast<Eigen::Index>(cluster.size()));
    Complex mean = 0.0;
    for (std::size_t c = 0; c < cluster.size(); ++c) {
      span.col(static_cast<Eigen::Index>(c)) = pairs[cluster[c]].vec;
      mean += pairs[cluster[c]].value;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(span);
    qr.setThreshold(1e-8);
    const Eigen::MatrixXcd q =
        Eigen::MatrixXcd(qr.householderQ()).leftCols(qr.rank());
    const Matrix j = standard_j(static_cast<int>(m.rows()) / 2);
    const Eigen::MatrixXcd form = Complex(0.0, -1.0) * (q.adjoint() * j.cast<Complex>() * q);
    const Eigen::MatrixXcd herm = 0.5 * (form + form.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    int positive = 0;
    for (Eigen::Index e = 0; e < es.eigenvalues().size(); ++e)
      if (es.eigenvalues()(e) > 1e-9) ++positive;
    angle += positive * std::arg(mean);
  }
  return std::remainder(angle, 2.0 * kPi);
}

std::vector<SpectrumPoint> spectrum(const SymplecticMatrix& sm, const Tolerances& tol) {
  const Matrix& m = sm.matrix();
  auto pairs = eigenpairs(m);
  const std::size_t count = pairs.size();

  // Symplectic pairing: every lambda must have a partner near 1/lambda.
  std::vector<bool> used(count, false);
  for (std::size_t i = 0; i < count; ++i) {
    const Complex target = 1.0 / pairs[i].value;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) best = std::min(best, std::abs(pairs[j].value - target));
    if (best > tol.pairing * std::max(1.0, std::abs(target))) {
      std::ostringstream os;
      os << "eigenvalue " << pairs[i].value << " has no partner near its inverse (gap " << best << ")";
      throw Error(ErrorKind::PairingFailure, os.str());
    }
  }

  // Group numerically equal eigenvalues with equal Krein sign.
  std::vector<SpectrumPoint> points;
  for (std::size_t i = 0; i < count; ++i) {
    if (used[i]) continue;
    const Complex lambda = pairs[i].value;
    const bool on_circle = std::abs(std::abs(lambda) - 1.0) <= tol.unit_circle;
    const bool at_unit = std::min(std::abs(lambda - 1.0), std::abs(lambda + 1.0)) <= tol.unit_circle;
    const int sign_i = (on_circle && !at_unit) ? krein_sign_of(pairs[i]) : 0;
    if (on_circle && !at_unit && sign_i == 0) {
      throw Error(ErrorKind::PairingFailure, "Krein sign of an elliptic eigenvalue is indeterminate");
    }
    SpectrumPoint p{lambda, 0, sign_i};
    Complex sum = 0.0;
    for (std::size_t j = i; j < count; ++j) {
      if (used[j]) continue;
      if (std::abs(pairs[j].value - lambda) > tol.cluster * std::max(1.0, std::abs(lambda)) &&
          !(at_unit && std::abs(pairs[j].value - lambda) <= 2 * tol.unit_circle)) {
        continue;
      }
      const int sign_j = (on_circle && !at_unit) ? krein_sign_of(pairs[j]) : 0;
      if (sign_j != sign_i) continue;
      used[j] = true;
      ++p.multiplicity;
      sum += pairs[j].value;
    }
    p.eigenvalue = sum / static_cast<double>(p.multiplicity);
    if (at_unit) p.eigenvalue = Complex(p.eigenvalue.real() > 0 ? 1.0 : -1.0, 0.0);
    points.push_back(p);
  }
  return points;
}

int signature(const QuadraticHamiltonian& h, const Tolerances& tol) {
  if (h.dim() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  int sig = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()[i];
    if (std::abs(v) < tol.eig) {
      std::ostringstream os;
      os << "quadratic form has eigenvalue " << v << " below " << tol.eig;
      throw Error(ErrorKind::DegenerateForm, os.str());
    }
    sig += v > 0 ? 1 : -1;
  }
  return sig;
}

QuadraticHamiltonian random_quadratic(int dim, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix h(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = r; c < dim; ++c) h(r, c) = h(c, r) = u(rng);
  return QuadraticHamiltonian(h);
}

Matrix random_symplectic(int dim, std::mt19937_64& rng, double scale) {
  return random_quadratic(dim, rng, scale).field().exp();
}

std::mt19937_64 split_rng(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

}  // namespace coiso
