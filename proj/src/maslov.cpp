#include "coiso/maslov.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace coiso {

namespace {

Matrix restrict_rows(const Matrix& m, const std::vector<int>& planes, int n) {
  const int k = static_cast<int>(planes.size());
  Matrix out(2 * k, m.cols());
  for (int a = 0; a < k; ++a) {
    out.row(a) = m.row(planes[a]);
    out.row(k + a) = m.row(n + planes[a]);
  }
  return out;
}

void check_loop(const FramedLeafLoop& loop, const CoisotropicModel& model) {
  const std::size_t count = loop.t.size();
  if (count < 2 || loop.points.size() != count || loop.frame.size() != count) {
    throw Error(ErrorKind::BadInput, "loop needs matching times, points and frames (at least two samples)");
  }
  if (loop.t.front() != 0.0) throw Error(ErrorKind::BadStart, "loop parameter must start at 0");
  for (std::size_t s = 1; s < count; ++s) {
    if (!(loop.t[s] > loop.t[s - 1])) throw Error(ErrorKind::BadInput, "loop times must increase strictly");
  }
  const int dim = 2 * model.n();
  for (std::size_t s = 0; s < count; ++s) {
    if (loop.points[s].size() != dim || loop.frame[s].rows() != dim || loop.frame[s].cols() != model.k()) {
      throw Error(ErrorKind::BadInput, "loop sample has wrong shape");
    }
    if (model.momentum(loop.points[s]).norm() > 1e-8) {
      throw Error(ErrorKind::NotTangent, "loop leaves the model submanifold");
    }
  }
  if ((loop.points.back() - loop.points.front()).norm() > 1e-8) {
    throw Error(ErrorKind::BadInput, "loop does not close");
  }
  if (loop.orientable && (loop.frame.back() - loop.frame.front()).norm() > 1e-8) {
    throw Error(ErrorKind::BadInput, "frame of an orientable loop does not close");
  }
}

}  // namespace

SymplecticPath xi_path_from_frame(const FramedLeafLoop& loop, const CoisotropicModel& model) {
  check_loop(loop, model);
  const ClassVector cls = model.normalize_class(loop.homotopy_class);
  const auto planes = model.leaf_planes(cls);
  const int n = model.n();
  const int k = model.k();

  std::vector<Matrix> frames;
  frames.reserve(loop.t.size());
  for (std::size_t s = 0; s < loop.t.size(); ++s) {
    const Matrix xi = model.leaf_frame(loop.points[s]);
    const Matrix dual = model.dual_frame(loop.points[s]);
    const Matrix f = xi.completeOrthogonalDecomposition().solve(loop.frame[s]);
    const double residual = (xi * f - loop.frame[s]).norm();
    if (residual > 1e-8 * std::max(1.0, loop.frame[s].norm())) {
      std::ostringstream os;
      os << "frame at t = " << loop.t[s] << " is not tangent to the foliation (residual " << residual << ")";
      throw Error(ErrorKind::NotTangent, os.str());
    }
    Eigen::JacobiSVD<Matrix> svd(f);
    if (svd.singularValues()(k - 1) < 1e-8 * std::max(1.0, svd.singularValues()(0))) {
      std::ostringstream os;
      os << "frame loses rank at t = " << loop.t[s];
      throw Error(ErrorKind::FrameRankLoss, os.str());
    }
    Matrix b(2 * n, 2 * k);
    b.leftCols(k) = xi * f;
    b.rightCols(k) = dual * f.inverse().transpose();
    frames.push_back(restrict_rows(b, planes, n));
  }
  const Matrix b0_inv = symplectic_inverse(frames.front());
  std::vector<PathSample> samples;
  samples.reserve(frames.size());
  for (std::size_t s = 0; s < frames.size(); ++s) samples.push_back({loop.t[s], frames[s] * b0_inv});
  samples.front().m = Matrix::Identity(2 * k, 2 * k);
  return SymplecticPath::trusted(std::move(samples));
}

AssembledPath assemble(const FramedLeafLoop& loop, const CoisotropicModel& model) {
  AssembledPath a;
  a.xi_path = xi_path_from_frame(loop, model);
  a.holonomy_path = holonomy(model, loop);
  a.phi = direct_sum(a.xi_path, a.holonomy_path);
  return a;
}

double maslov_index(const FramedLeafLoop& loop, const CoisotropicModel& model, const Tolerances& tol) {
  const AssembledPath a = assemble(loop, model);
  if (!loop.orientable) return -0.5 * mean_index(iterate(a.phi, 2), tol);
  return -mean_index(a.phi, tol);
}

double maslov_index(const CoisotropicModel& model, const ClassVector& cls, const Tolerances& tol) {
  const ClassVector c = model.normalize_class(cls);
  if (model.length(c) == 0.0) return 0.0;
  return maslov_index(model.loop(c), model, tol);
}

double recap(double mu, int m) { return mu - 2.0 * m; }

double twisted_maslov_index(const FramedLeafLoop& loop, const CoisotropicModel& model, int m, int plane,
                            const Tolerances& tol) {
  const AssembledPath a = assemble(loop, model);
  const int dim = a.phi.dim();
  const int n = dim / 2;
  if (plane < 0 || plane >= n) throw Error(ErrorKind::BadInput, "twist plane out of range");
  Matrix gen = Matrix::Zero(dim, dim);
  gen(plane, n + plane) = 1.0;
  gen(n + plane, plane) = -1.0;
  const double period = a.phi.duration();
  const double rate = 2.0 * std::numbers::pi * m / period;
  // Clockwise rotation loop exp(rate t J) in the chosen plane, sampled finely.
  const int count = std::max(16, 64 * std::abs(m));
  std::vector<PathSample> twist;
  for (int s = 0; s <= count; ++s) {
    const double t = period * s / count;
    twist.push_back({t, (rate * t * gen).exp()});
  }
  twist.back().m = Matrix::Identity(dim, dim);
  const SymplecticPath twisted = pointwise_product(SymplecticPath::trusted(std::move(twist)), a.phi);
  if (!loop.orientable) return -0.5 * mean_index(iterate(twisted, 2), tol);
  return -mean_index(twisted, tol);
}

FramedLeafLoop iterate_loop(const FramedLeafLoop& loop, int k) {
  if (k < 1) throw Error(ErrorKind::BadInput, "iteration count must be positive");
  FramedLeafLoop out = loop;
  const double period = loop.duration();
  for (int j = 1; j < k; ++j) {
    for (std::size_t s = 1; s < loop.t.size(); ++s) {
      out.t.push_back(j * period + loop.t[s]);
      out.points.push_back(loop.points[s]);
      out.frame.push_back(loop.frame[s]);
    }
  }
  for (auto& c : out.homotopy_class) c *= k;
  return out;
}

double maslov_homogeneity(const FramedLeafLoop& loop, const CoisotropicModel& model, int k,
                          const Tolerances& tol) {
  const double base = maslov_index(loop, model, tol);
  return std::abs(maslov_index(iterate_loop(loop, k), model, tol) - k * base);
}

}  // namespace coiso
