#include "coiso/path_index.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <complex>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace coiso {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxPiece = 0.5;      // |generator| per lift piece
constexpr double kGridStep = 0.05;     // |generator| per crossing-scan cell
constexpr int kMaxDepth = 40;
constexpr double kGolden = 0.6180339887498949;
constexpr double kLocateTol = 1e-12;
constexpr double kSkipStart = 1e-9;

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

double lift_piece(const PathInterpolant& ip, double ta, double tb, double angle_a,
                  double& angle_b_out, const Tolerances& tol, int depth) {
  const double angle_b = circle_map_angle(ip.at(tb), tol);
  const double jump = wrap(angle_b - angle_a);
  if (std::abs(jump) < 0.5 * kPi) {
    angle_b_out = angle_b;
    return jump;
  }
  if (depth >= kMaxDepth) {
    std::ostringstream os;
    os << "spectral angle jumps by " << jump << " on [" << ta << ", " << tb << "]";
    throw Error(ErrorKind::RefinementExhausted, os.str());
  }
  const double tm = 0.5 * (ta + tb);
  double angle_m = 0.0;
  double total = lift_piece(ip, ta, tm, angle_a, angle_m, tol, depth + 1);
  total += lift_piece(ip, tm, tb, angle_m, angle_b_out, tol, depth + 1);
  return total;
}

double sigma_min(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m - Matrix::Identity(m.rows(), m.cols()));
  return svd.singularValues()(svd.singularValues().size() - 1);
}

struct ScanPoint {
  double t;
  double f;
};

// Minimizes sigma_min(M(t) - I) on [a, b] by golden-section search.
ScanPoint locate_minimum(const PathInterpolant& ip, double a, double b) {
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = sigma_min(ip.at(x1));
  double f2 = sigma_min(ip.at(x2));
  while (b - a > kLocateTol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = sigma_min(ip.at(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = sigma_min(ip.at(x2));
    }
  }
  return f1 <= f2 ? ScanPoint{x1, f1} : ScanPoint{x2, f2};
}

// Signature of v -> omega(v, M'(t) v) on the numerical kernel of M(t) - I.
int crossing_signature(const Matrix& m, const Matrix& dm, const Tolerances& tol, double t) {
  const auto dim = m.rows();
  const Matrix j = standard_j(static_cast<int>(dim) / 2);
  Eigen::JacobiSVD<Matrix> svd(m - Matrix::Identity(dim, dim), Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double scale = std::max(1.0, m.norm());
  // Kernel: the singular values below the largest gap under the threshold.
  int kernel = 1;
  double best_ratio = 0.0;
  for (Eigen::Index d = 1; d <= dim; ++d) {
    const double below = s(dim - d);
    if (below > 1e-6 * scale) break;
    const double above = d < dim ? s(dim - d - 1) : std::numeric_limits<double>::infinity();
    const double ratio = above / std::max(below, 1e-300);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      kernel = static_cast<int>(d);
    }
  }
  const Matrix basis = svd.matrixV().rightCols(kernel);
  const Matrix jd = j * dm;
  const Matrix form = basis.transpose() * (0.5 * (jd + jd.transpose())) * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> es(form, Eigen::EigenvaluesOnly);
  const double form_scale = std::max(1.0, dm.norm());
  int sig = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    if (std::abs(v) < tol.form * form_scale) {
      std::ostringstream os;
      os << "crossing form at t = " << t << " has eigenvalue " << v;
      throw Error(ErrorKind::IrregularCrossing, os.str());
    }
    sig += v > 0 ? 1 : -1;
  }
  return sig;
}

using CMatrix = Eigen::MatrixXcd;

// Unitary of the Lagrangian with real frame z (columns) in R^{2N}, q-rows
// then p-rows given as index lists.
CMatrix lagrangian_unitary(const Matrix& z, const std::vector<int>& q_rows, const std::vector<int>& p_rows) {
  const Matrix frame = Eigen::HouseholderQR<Matrix>(z).householderQ() * Matrix::Identity(z.rows(), z.cols());
  CMatrix u(q_rows.size(), z.cols());
  for (std::size_t r = 0; r < q_rows.size(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) u(r, c) = {frame(q_rows[r], c), frame(p_rows[r], c)};
  }
  return u;
}

// Souriau map of graph(M) = {(N x, M x)} relative to the diagonal, in
// (R^{2n} + R^{2n}, omega + omega) with N = diag(I, -I). Its eigenvalue 1
// has the multiplicity of the eigenvalue 1 of M.
class GraphSouriau {
 public:
  explicit GraphSouriau(int n) : n_(n) {
    for (int half = 0; half < 2; ++half) {
      for (int i = 0; i < n; ++i) {
        q_rows_.push_back(2 * n * half + i);
        p_rows_.push_back(2 * n * half + n + i);
      }
    }
    base_adj_ = lagrangian_unitary(frame(Matrix::Identity(2 * n, 2 * n)), q_rows_, p_rows_).adjoint();
  }

  CMatrix operator()(const Matrix& m) const {
    const CMatrix u = base_adj_ * lagrangian_unitary(frame(m), q_rows_, p_rows_);
    return u * u.transpose();
  }

 private:
  Matrix frame(const Matrix& m) const {
    Matrix z(4 * n_, 2 * n_);
    z.topRows(2 * n_).setIdentity();
    z.block(n_, n_, n_, n_) *= -1.0;
    z.bottomRows(2 * n_) = m;
    return z;
  }
  int n_;
  std::vector<int> q_rows_, p_rows_;
  CMatrix base_adj_;
};

double det_phase(const GraphSouriau& w, const Matrix& m) { return std::arg(w(m).determinant()); }

double lift_det_phase(const PathInterpolant& ip, const GraphSouriau& w, double ta, double tb, double phase_a,
                      double& phase_b_out, int depth) {
  const double phase_b = det_phase(w, ip.at(tb));
  const double jump = wrap(phase_b - phase_a);
  if (std::abs(jump) < 0.5 * kPi) {
    phase_b_out = phase_b;
    return jump;
  }
  if (depth >= kMaxDepth) {
    std::ostringstream os;
    os << "graph phase jumps by " << jump << " on [" << ta << ", " << tb << "]";
    throw Error(ErrorKind::RefinementExhausted, os.str());
  }
  const double tm = 0.5 * (ta + tb);
  double phase_m = 0.0;
  double total = lift_det_phase(ip, w, ta, tm, phase_a, phase_m, depth + 1);
  total += lift_det_phase(ip, w, tm, tb, phase_m, phase_b_out, depth + 1);
  return total;
}

}  // namespace

double mean_index(const SymplecticPath& path, const Tolerances& tol) {
  if (path.dim() == 0) return 0.0;
  const PathInterpolant ip(path);
  double total = 0.0;
  double angle = circle_map_angle(path[0].m, tol);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double ta = path[i].t;
    const double tb = path[i + 1].t;
    const int pieces = std::max(1, static_cast<int>(std::ceil(ip.generator(i).norm() / kMaxPiece)));
    for (int p = 0; p < pieces; ++p) {
      const double a = ta + (tb - ta) * p / pieces;
      const double b = p + 1 == pieces ? tb : ta + (tb - ta) * (p + 1) / pieces;
      double next = 0.0;
      total += lift_piece(ip, a, b, angle, next, tol, 0);
      angle = next;
    }
  }
  return total / kPi;
}

bool degenerate_endpoint(const SymplecticPath& path, const Tolerances& tol) {
  if (path.dim() == 0) return false;
  const Matrix& end = path.end();
  return sigma_min(end) < tol.cross * std::max(1.0, end.norm());
}

namespace {

// Twice the crossing sum after the start, scanning sigma_min(M(t) - I) on a
// grid of the given generator size per cell.
int scan_crossings(const SymplecticPath& path, const PathInterpolant& ip, double grid_step, const Tolerances& tol,
                   std::vector<Crossing>* crossings) {
  std::vector<ScanPoint> grid;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double ta = path[i].t;
    const double tb = path[i + 1].t;
    const Matrix& gen = ip.generator(i);
    const int cells = std::max(4, static_cast<int>(std::ceil(gen.norm() / grid_step)));
    const Matrix step = (gen / cells).exp();
    Matrix m = path[i].m;
    for (int c = 0; c < cells; ++c) {
      grid.push_back({ta + (tb - ta) * c / cells, sigma_min(m)});
      m = step * m;
    }
  }
  grid.push_back({path.duration(), sigma_min(path.end())});

  int twice_total = 0;
  double last_crossing = -1.0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const bool last = g + 1 == grid.size();
    const bool is_min = grid[g].f <= grid[g - 1].f && (last || grid[g].f <= grid[g + 1].f);
    if (!is_min) continue;
    const double a = grid[g - 1].t;
    const double b = last ? grid[g].t : grid[g + 1].t;
    const ScanPoint hit = locate_minimum(ip, a, b);
    if (hit.t < kSkipStart) continue;
    const Matrix m = ip.at(hit.t);
    if (hit.f >= tol.cross * std::max(1.0, m.norm())) continue;
    if (std::abs(hit.t - last_crossing) < 1e3 * kLocateTol) continue;
    if (std::abs(hit.t - path.duration()) < 1e3 * kLocateTol) continue;
    last_crossing = hit.t;
    const int sig = crossing_signature(m, ip.derivative(hit.t), tol, hit.t);
    twice_total += 2 * sig;
    if (crossings) crossings->push_back({hit.t, sig});
  }
  return twice_total;
}

}  // namespace

int conley_zehnder(const SymplecticPath& path, const Tolerances& tol, std::vector<Crossing>* crossings) {
  if (path.dim() == 0) return 0;
  if (degenerate_endpoint(path, tol)) {
    throw Error(ErrorKind::DegenerateEndpoint, "path endpoint has eigenvalue 1");
  }
  const PathInterpolant ip(path);
  const int n = path.dim() / 2;

  // Start: the whole space is the kernel, counted with weight 1/2.
  const int start_sig = crossing_signature(path[0].m, ip.derivative(0.0), tol, 0.0);
  if (start_sig % 2 != 0) {
    throw Error(ErrorKind::IrregularCrossing, "odd signature at the start");
  }
  // Net count of eigenvalues of the graph Souriau map passing 1 after the
  // start: lifted phase of det W, minus the principal eigenphases at the end,
  // plus 2 pi for every eigenphase that leaves 1 clockwise at the start.
  const GraphSouriau w(n);
  double lifted = 0.0;
  double phase = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double ta = path[i].t;
    const double tb = path[i + 1].t;
    const int pieces = std::max(1, static_cast<int>(std::ceil(ip.generator(i).norm() / kMaxPiece)));
    for (int p = 0; p < pieces; ++p) {
      const double a = ta + (tb - ta) * p / pieces;
      const double b = p + 1 == pieces ? tb : ta + (tb - ta) * (p + 1) / pieces;
      double next = 0.0;
      lifted += lift_det_phase(ip, w, a, b, phase, next, 0);
      phase = next;
    }
  }
  double principal = 0.0;
  Eigen::ComplexEigenSolver<CMatrix> es(w(path.end()), false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double arg = std::arg(es.eigenvalues()(i));
    if (arg < 0.0) arg += 2.0 * kPi;
    principal += arg;
  }
  const int clockwise_at_start = n - start_sig / 2;
  const double net = (lifted - principal) / (2.0 * kPi) + clockwise_at_start;
  const double rounded = std::round(net);
  if (std::abs(net - rounded) > 1e-6) {
    std::ostringstream os;
    os << "graph winding " << net << " is not an integer";
    throw Error(ErrorKind::RefinementExhausted, os.str());
  }
  if (crossings) {
    crossings->push_back({0.0, start_sig});
    scan_crossings(path, ip, kGridStep, tol, crossings);
  }
  return -(start_sig / 2 + static_cast<int>(rounded));
}

IndexResult index_report(const SymplecticPath& path, const Tolerances& tol) {
  IndexResult r;
  r.mean_index = mean_index(path, tol);
  r.degenerate_endpoint = degenerate_endpoint(path, tol);
  if (!r.degenerate_endpoint) r.cz = conley_zehnder(path, tol, &r.crossings);
  return r;
}

double homogeneity_check(const SymplecticPath& path, int k_max, const Tolerances& tol) {
  if (k_max < 2) throw Error(ErrorKind::BadInput, "k_max must be at least 2");
  const double base = mean_index(path, tol);
  double worst = 0.0;
  for (int k = 2; k <= k_max; ++k) {
    worst = std::max(worst, std::abs(mean_index(iterate(path, k), tol) - k * base));
  }
  return worst;
}

}  // namespace coiso
