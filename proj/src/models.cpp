#include "coiso/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/QR>

namespace coiso {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// RK4 resolution: at most this many radians of rotation per step.
constexpr double kRadiansPerStep = kTwoPi / 2000.0;

void bad(const std::string& msg) { throw Error(ErrorKind::BadParameters, msg); }

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

Vector rotate_plane(Vector z, int n, int plane, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double q = z(plane), p = z(n + plane);
  z(plane) = c * q - s * p;
  z(n + plane) = s * q + c * p;
  return z;
}

int ellipsoid_plane(const ClassVector& cls) {
  for (std::size_t j = 0; j < cls.size(); ++j)
    if (cls[j] != 0) return static_cast<int>(j);
  return 0;
}

int ellipsoid_multiple(const ClassVector& cls) {
  for (int v : cls)
    if (v != 0) return v;
  return 0;
}

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SplitLagrangianTorus: return "split-lagrangian-torus";
    case ModelKind::FlatCoisotropicTorus: return "flat-coisotropic-torus";
    case ModelKind::Ellipsoid: return "ellipsoid-hypersurface";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "split-lagrangian-torus") return ModelKind::SplitLagrangianTorus;
  if (s == "flat-coisotropic-torus") return ModelKind::FlatCoisotropicTorus;
  if (s == "ellipsoid-hypersurface" || s == "ellipsoid") return ModelKind::Ellipsoid;
  throw Error(ErrorKind::BadInput, "unknown model kind '" + s + "'");
}

CoisotropicModel::CoisotropicModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.n < 1 || cfg_.k < 1 || cfg_.k > cfg_.n) bad("need 1 <= k <= n");
  for (double r : cfg_.radii)
    if (!(r > 0.0)) bad("radii must be positive");
  if (cfg_.kind == ModelKind::Ellipsoid) {
    if (static_cast<int>(cfg_.radii.size()) != cfg_.n) bad("ellipsoid needs n weights");
    if (cfg_.k != 1) bad("ellipsoid has k = 1");
    if (!(cfg_.R > 0.0 && cfg_.R < 1.0)) bad("ellipsoid chart radius must lie in (0, 1)");
  } else {
    if (static_cast<int>(cfg_.radii.size()) != cfg_.k) bad("torus needs k radii");
    if (cfg_.kind == ModelKind::SplitLagrangianTorus && cfg_.k != cfg_.n) bad("split torus has k = n");
    if (!(cfg_.R > 0.0 && cfg_.R <= 0.5 * min_of(cfg_.radii))) bad("torus chart radius must lie in (0, min r / 2]");
  }
  if (cfg_.displacement_energy && !(*cfg_.displacement_energy > 0.0)) bad("displacement energy must be positive");
  if (cfg_.neighborhood_energy && !(*cfg_.neighborhood_energy > 0.0)) bad("neighborhood energy must be positive");
}

CoisotropicModel CoisotropicModel::split_lagrangian_torus(std::vector<double> radii, double R) {
  ModelConfig c;
  c.kind = ModelKind::SplitLagrangianTorus;
  c.n = c.k = static_cast<int>(radii.size());
  c.radii = std::move(radii);
  c.R = R;
  return CoisotropicModel(std::move(c));
}

CoisotropicModel CoisotropicModel::flat_coisotropic_torus(int n, std::vector<double> radii, double R) {
  ModelConfig c;
  c.kind = ModelKind::FlatCoisotropicTorus;
  c.n = n;
  c.k = static_cast<int>(radii.size());
  c.radii = std::move(radii);
  c.R = R;
  return CoisotropicModel(std::move(c));
}

CoisotropicModel CoisotropicModel::ellipsoid(std::vector<double> weights, double R) {
  ModelConfig c;
  c.kind = ModelKind::Ellipsoid;
  c.n = static_cast<int>(weights.size());
  c.k = 1;
  c.radii = std::move(weights);
  c.R = R;
  return CoisotropicModel(std::move(c));
}

CoisotropicModel CoisotropicModel::from_config(const ModelConfig& config) { return CoisotropicModel(config); }

std::string CoisotropicModel::name() const {
  std::ostringstream os;
  os << to_string(kind()) << "(n=" << n() << ",k=" << k() << ",radii=";
  for (std::size_t i = 0; i < radii().size(); ++i) os << (i ? "," : "") << radii()[i];
  os << ")";
  return os.str();
}

double CoisotropicModel::displacement_energy() const {
  if (cfg_.displacement_energy) return *cfg_.displacement_energy;
  const double m = min_of(cfg_.radii);
  return kind() == ModelKind::Ellipsoid ? kPi * m : kPi * m * m;
}

double CoisotropicModel::neighborhood_energy() const {
  if (cfg_.neighborhood_energy) return *cfg_.neighborhood_energy;
  const double m = min_of(cfg_.radii);
  // The displaced set is the level |p| <= R: circles of radius^2 r^2 + 2 r R,
  // or the ellipsoid scaled by 1 + R.
  return kind() == ModelKind::Ellipsoid ? kPi * m * (1.0 + cfg_.R) : kPi * (m * m + 2.0 * m * cfg_.R);
}

// ---------------------------------------------------------------------------
// Normal form

Vector CoisotropicModel::to_ambient(const Vector& base, const Vector& p) const {
  const int nn = n();
  Vector z = base;
  if (kind() == ModelKind::Ellipsoid) return std::sqrt(1.0 + p(0)) * base;
  for (int i = 0; i < k(); ++i) {
    const double r = radii()[i];
    const double scale = std::sqrt(r * r + 2.0 * r * p(i)) / r;
    z(i) *= scale;
    z(nn + i) *= scale;
  }
  return z;
}

Vector CoisotropicModel::base_of(const Vector& z) const {
  const int nn = n();
  if (kind() == ModelKind::Ellipsoid) return z / std::sqrt(momentum(z)(0) + 1.0);
  Vector b = z;
  for (int i = 0; i < k(); ++i) {
    const double len = std::hypot(z(i), z(nn + i));
    if (len == 0.0) throw Error(ErrorKind::LeftChart, "point on a circle-factor axis");
    b(i) *= radii()[i] / len;
    b(nn + i) *= radii()[i] / len;
  }
  return b;
}

Vector CoisotropicModel::momentum(const Vector& z) const {
  const int nn = n();
  if (kind() == ModelKind::Ellipsoid) {
    double q = 0.0;
    for (int j = 0; j < nn; ++j) q += (z(j) * z(j) + z(nn + j) * z(nn + j)) / radii()[j];
    return Vector::Constant(1, q - 1.0);
  }
  Vector p(k());
  for (int i = 0; i < k(); ++i) {
    const double r = radii()[i];
    p(i) = (z(i) * z(i) + z(nn + i) * z(nn + i) - r * r) / (2.0 * r);
  }
  return p;
}

Matrix CoisotropicModel::momentum_gradient(const Vector& z) const {
  const int nn = n();
  Matrix g = Matrix::Zero(2 * nn, k());
  if (kind() == ModelKind::Ellipsoid) {
    for (int j = 0; j < nn; ++j) {
      g(j, 0) = 2.0 * z(j) / radii()[j];
      g(nn + j, 0) = 2.0 * z(nn + j) / radii()[j];
    }
    return g;
  }
  for (int i = 0; i < k(); ++i) {
    g(i, i) = z(i) / radii()[i];
    g(nn + i, i) = z(nn + i) / radii()[i];
  }
  return g;
}

std::vector<Matrix> CoisotropicModel::momentum_hessians(const Vector&) const {
  const int nn = n();
  std::vector<Matrix> out;
  if (kind() == ModelKind::Ellipsoid) {
    Matrix h = Matrix::Zero(2 * nn, 2 * nn);
    for (int j = 0; j < nn; ++j) h(j, j) = h(nn + j, nn + j) = 2.0 / radii()[j];
    out.push_back(h);
    return out;
  }
  for (int i = 0; i < k(); ++i) {
    Matrix h = Matrix::Zero(2 * nn, 2 * nn);
    h(i, i) = h(nn + i, nn + i) = 1.0 / radii()[i];
    out.push_back(h);
  }
  return out;
}

double CoisotropicModel::rho(const Vector& z) const { return 0.5 * momentum(z).squaredNorm(); }

Vector CoisotropicModel::rho_gradient(const Vector& z) const { return momentum_gradient(z) * momentum(z); }

Matrix CoisotropicModel::rho_hessian(const Vector& z) const {
  const Vector p = momentum(z);
  const Matrix g = momentum_gradient(z);
  const auto hs = momentum_hessians(z);
  Matrix h = g * g.transpose();
  for (int i = 0; i < k(); ++i) h += p(i) * hs[i];
  return h;
}

// ---------------------------------------------------------------------------
// Foliation

Matrix CoisotropicModel::leaf_frame(const Vector& base) const {
  const int nn = n();
  Matrix f = Matrix::Zero(2 * nn, k());
  if (kind() == ModelKind::Ellipsoid) {
    // Reeb field of the Liouville form: X_Q = -J grad Q.
    for (int j = 0; j < nn; ++j) {
      f(j, 0) = -2.0 * base(nn + j) / radii()[j];
      f(nn + j, 0) = 2.0 * base(j) / radii()[j];
    }
    return f;
  }
  for (int i = 0; i < k(); ++i) {
    f(i, i) = -base(nn + i) / radii()[i];
    f(nn + i, i) = base(i) / radii()[i];
  }
  return f;
}

Matrix CoisotropicModel::dual_frame(const Vector& base) const {
  const int nn = n();
  Matrix f = Matrix::Zero(2 * nn, k());
  if (kind() == ModelKind::Ellipsoid) {
    f.col(0) = -0.5 * base;
    return f;
  }
  for (int i = 0; i < k(); ++i) {
    f(i, i) = -base(i) / radii()[i];
    f(nn + i, i) = -base(nn + i) / radii()[i];
  }
  return f;
}

Matrix CoisotropicModel::alphas(const Vector& base) const {
  const int nn = n();
  Matrix a = Matrix::Zero(k(), 2 * nn);
  if (kind() == ModelKind::Ellipsoid) {
    for (int j = 0; j < nn; ++j) {
      a(0, j) = -0.5 * base(nn + j);
      a(0, nn + j) = 0.5 * base(j);
    }
    return a;
  }
  for (int i = 0; i < k(); ++i) {
    const double r = radii()[i];
    const double len2 = base(i) * base(i) + base(nn + i) * base(nn + i);
    a(i, i) = -r * base(nn + i) / len2;
    a(i, nn + i) = r * base(i) / len2;
  }
  return a;
}

Matrix CoisotropicModel::alpha_differential(int) const {
  if (kind() == ModelKind::Ellipsoid) return standard_j(n());
  return Matrix::Zero(2 * n(), 2 * n());
}

Matrix CoisotropicModel::tangent_basis(const Vector& base) const {
  const Matrix normals = momentum_gradient(base);
  Eigen::HouseholderQR<Matrix> qr(normals);
  const Matrix q = qr.householderQ();
  return q.rightCols(2 * n() - k());
}

Vector CoisotropicModel::leaf_point(const Vector& base, const Vector& u) const {
  const int nn = n();
  Vector z = base;
  if (kind() == ModelKind::Ellipsoid) {
    for (int j = 0; j < nn; ++j) z = rotate_plane(z, nn, j, 2.0 * u(0) / radii()[j]);
    return z;
  }
  for (int i = 0; i < k(); ++i) z = rotate_plane(z, nn, i, u(i) / radii()[i]);
  return z;
}

Vector CoisotropicModel::random_point(std::mt19937_64& rng) const {
  const int nn = n();
  Vector z = Vector::Zero(2 * nn);
  if (kind() == ModelKind::Ellipsoid) {
    std::normal_distribution<double> g;
    for (int i = 0; i < 2 * nn; ++i) z(i) = g(rng);
    double q = 0.0;
    for (int j = 0; j < nn; ++j) q += (z(j) * z(j) + z(nn + j) * z(nn + j)) / radii()[j];
    return z / std::sqrt(q);
  }
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < k(); ++i) {
    const double th = angle(rng);
    z(i) = radii()[i] * std::cos(th);
    z(nn + i) = radii()[i] * std::sin(th);
  }
  for (int i = k(); i < nn; ++i) {
    z(i) = unit(rng);
    z(nn + i) = unit(rng);
  }
  return z;
}

void CoisotropicModel::check_point(const Vector& base) const {
  if (base.size() != 2 * n()) throw Error(ErrorKind::BadInput, "point has wrong dimension");
  if (momentum(base).norm() > 1e-8) throw Error(ErrorKind::NotTangent, "point is not on the model submanifold");
}

// ---------------------------------------------------------------------------
// Classes

ClassVector CoisotropicModel::normalize_class(const ClassVector& cls) const {
  const int nn = n();
  const int kk = k();
  std::ostringstream os;
  switch (kind()) {
    case ModelKind::SplitLagrangianTorus:
      if (static_cast<int>(cls.size()) != nn) {
        os << "class must have " << nn << " entries";
        throw Error(ErrorKind::BadInput, os.str());
      }
      return cls;
    case ModelKind::FlatCoisotropicTorus: {
      const int full = kk + 2 * (nn - kk);
      if (static_cast<int>(cls.size()) == kk) return cls;
      if (static_cast<int>(cls.size()) != full) {
        os << "class must have " << kk << " (or " << full << ") entries";
        throw Error(ErrorKind::BadInput, os.str());
      }
      for (int i = kk; i < full; ++i)
        if (cls[i] != 0) throw Error(ErrorKind::NotContractibleInAmbient, "class winds around the torus factor");
      return ClassVector(cls.begin(), cls.begin() + kk);
    }
    case ModelKind::Ellipsoid: {
      if (static_cast<int>(cls.size()) != nn) {
        os << "class must have " << nn << " entries";
        throw Error(ErrorKind::BadInput, os.str());
      }
      const auto nonzero = std::count_if(cls.begin(), cls.end(), [](int v) { return v != 0; });
      if (nonzero > 1) throw Error(ErrorKind::BadInput, "ellipsoid classes are multiples of one principal orbit");
      return cls;
    }
  }
  return cls;
}

double CoisotropicModel::length(const ClassVector& raw) const {
  const ClassVector cls = normalize_class(raw);
  if (kind() == ModelKind::Ellipsoid) {
    return std::abs(ellipsoid_multiple(cls)) * kPi * radii()[ellipsoid_plane(cls)];
  }
  double sum = 0.0;
  for (int i = 0; i < k(); ++i) {
    const double li = cls[i] * kTwoPi * radii()[i];
    sum += li * li;
  }
  return std::sqrt(sum);
}

double CoisotropicModel::area(const ClassVector& raw) const {
  const ClassVector cls = normalize_class(raw);
  if (kind() == ModelKind::Ellipsoid) return ellipsoid_multiple(cls) * kPi * radii()[ellipsoid_plane(cls)];
  double sum = 0.0;
  for (int i = 0; i < k(); ++i) sum += cls[i] * kPi * radii()[i] * radii()[i];
  return sum;
}

Vector CoisotropicModel::momentum_for(const ClassVector& raw, double level) const {
  const ClassVector cls = normalize_class(raw);
  if (kind() == ModelKind::Ellipsoid) {
    const int m = ellipsoid_multiple(cls);
    return Vector::Constant(1, m > 0 ? level : (m < 0 ? -level : 0.0));
  }
  const double l = length(cls);
  Vector p = Vector::Zero(k());
  if (l == 0.0) return p;
  for (int i = 0; i < k(); ++i) p(i) = level * cls[i] * kTwoPi * radii()[i] / l;
  return p;
}

std::vector<int> CoisotropicModel::leaf_planes(const ClassVector& raw) const {
  const ClassVector cls = normalize_class(raw);
  if (kind() == ModelKind::Ellipsoid) return {ellipsoid_plane(cls)};
  std::vector<int> planes(k());
  for (int i = 0; i < k(); ++i) planes[i] = i;
  return planes;
}

std::vector<int> CoisotropicModel::transverse_planes(const ClassVector& raw) const {
  const auto leaf = leaf_planes(raw);
  std::vector<int> planes;
  for (int i = 0; i < n(); ++i)
    if (std::find(leaf.begin(), leaf.end(), i) == leaf.end()) planes.push_back(i);
  return planes;
}

FramedLeafLoop CoisotropicModel::loop(const ClassVector& raw, int samples_per_turn) const {
  const ClassVector cls = normalize_class(raw);
  const int nn = n();
  FramedLeafLoop out;
  out.homotopy_class = cls;
  const double l = length(cls);

  Vector start = Vector::Zero(2 * nn);
  Vector u_rate = Vector::Zero(k());  // leaf coordinates per unit arc length
  int turns = 0;
  if (kind() == ModelKind::Ellipsoid) {
    const int j = ellipsoid_plane(cls);
    const int m = ellipsoid_multiple(cls);
    start(j) = std::sqrt(radii()[j]);
    u_rate(0) = m > 0 ? 1.0 : -1.0;
    turns = std::abs(m);
  } else {
    for (int i = 0; i < k(); ++i) {
      start(i) = radii()[i];
      turns = std::max(turns, std::abs(cls[i]));
    }
    if (l > 0.0)
      for (int i = 0; i < k(); ++i) u_rate(i) = cls[i] * kTwoPi * radii()[i] / l;
  }
  const double duration = l > 0.0 ? l : 1.0;
  const int samples = std::max(16, samples_per_turn * turns);
  for (int s = 0; s <= samples; ++s) {
    const double t = duration * s / samples;
    const Vector z = l > 0.0 ? leaf_point(start, u_rate * t) : start;
    out.t.push_back(t);
    out.points.push_back(z);
    out.frame.push_back(leaf_frame(z));
  }
  out.points.back() = start;
  out.frame.back() = leaf_frame(start);
  return out;
}

// ---------------------------------------------------------------------------
// Flows

NormalFormChart::NormalFormChart(const CoisotropicModel& m, double radius) : model(&m), r(radius) {
  if (!(radius > 0.0 && radius <= m.chart_radius())) {
    throw Error(ErrorKind::BadParameters, "chart radius must lie in (0, R]");
  }
}

Vector NormalFormChart::to_ambient(const Vector& base, const Vector& p) const {
  if (!(p.norm() < r)) throw Error(ErrorKind::LeftChart, "fiber coordinate outside the chart");
  return model->to_ambient(base, p);
}

bool NormalFormChart::contains(const Vector& z) const { return model->momentum(z).norm() < r; }

Trajectory rk4(const std::function<Vector(const Vector&)>& f, const Vector& y0, double duration, int steps,
               int keep_every) {
  Trajectory out;
  const double h = duration / steps;
  Vector y = y0;
  out.t.push_back(0.0);
  out.z.push_back(y);
  for (int s = 1; s <= steps; ++s) {
    const Vector k1 = f(y);
    const Vector k2 = f(y + 0.5 * h * k1);
    const Vector k3 = f(y + 0.5 * h * k2);
    const Vector k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (s % keep_every == 0 || s == steps) {
      out.t.push_back(s == steps ? duration : s * h);
      out.z.push_back(y);
    }
  }
  return out;
}

namespace {

double max_angular_rate(const CoisotropicModel& model, const Vector& p) {
  if (model.kind() == ModelKind::Ellipsoid) return 2.0 * std::abs(p(0)) / min_of(model.radii());
  double rate = 0.0;
  for (int i = 0; i < model.k(); ++i) rate = std::max(rate, std::abs(p(i)) / model.radii()[i]);
  return rate;
}

}  // namespace

Trajectory geodesic_flow(const NormalFormChart& chart, const Vector& base, const Vector& p, double duration,
                         int steps) {
  const CoisotropicModel& model = *chart.model;
  const Vector z0 = chart.to_ambient(base, p);
  const Matrix j = standard_j(model.n());
  if (steps <= 0) {
    steps = std::max(100, static_cast<int>(std::ceil(duration * max_angular_rate(model, p) / kRadiansPerStep)));
  }
  auto field = [&](const Vector& z) -> Vector { return -j * model.rho_gradient(z); };
  Trajectory tr = rk4(field, z0, duration, steps);
  for (const auto& z : tr.z) {
    if (!chart.contains(z)) throw Error(ErrorKind::LeftChart, "trajectory left the normal-form chart");
  }
  return tr;
}

std::vector<LeafGeodesic> closed_geodesics(const CoisotropicModel& model, double max_length) {
  if (!(max_length > 0.0)) throw Error(ErrorKind::BadParameters, "length cutoff must be positive");
  std::vector<LeafGeodesic> out;
  const double slack = 1e-12 * std::max(1.0, max_length);
  if (model.kind() == ModelKind::Ellipsoid) {
    for (int j = 0; j < model.n(); ++j) {
      const double base = kPi * model.radii()[j];
      const int top = static_cast<int>(std::floor((max_length + slack) / base));
      for (int m = 1; m <= top; ++m) {
        for (int sign : {1, -1}) {
          ClassVector cls(model.n(), 0);
          cls[j] = sign * m;
          out.push_back({cls, model.length(cls), 0.0, model.area(cls)});
        }
      }
    }
  } else {
    const int kk = model.k();
    std::vector<int> bound(kk);
    for (int i = 0; i < kk; ++i) {
      bound[i] = static_cast<int>(std::floor((max_length + slack) / (kTwoPi * model.radii()[i])));
    }
    ClassVector cls(kk);
    for (int i = 0; i < kk; ++i) cls[i] = -bound[i];
    while (true) {
      if (std::any_of(cls.begin(), cls.end(), [](int v) { return v != 0; })) {
        const double l = model.length(cls);
        if (l <= max_length + slack) out.push_back({cls, l, 0.0, model.area(cls)});
      }
      int i = 0;
      while (i < kk && cls[i] == bound[i]) {
        cls[i] = -bound[i];
        ++i;
      }
      if (i == kk) break;
      ++cls[i];
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const LeafGeodesic& a, const LeafGeodesic& b) {
    if (a.length != b.length) return a.length < b.length;
    return a.homotopy_class > b.homotopy_class;
  });
  return out;
}

std::vector<double> length_spectrum(const CoisotropicModel& model, double max_length) {
  std::vector<double> out;
  for (const auto& g : closed_geodesics(model, max_length)) {
    if (out.empty() || g.length - out.back() > 1e-9) out.push_back(g.length);
  }
  return out;
}

SymplecticPath holonomy(const CoisotropicModel& model, const FramedLeafLoop& loop) {
  const ClassVector cls = model.normalize_class(loop.homotopy_class);
  const auto planes = model.transverse_planes(cls);
  const int m = static_cast<int>(planes.size());
  const double duration = loop.duration();
  if (m == 0) return SymplecticPath::constant_identity(0, duration);

  // The leaf frame must project with full rank onto the leaf planes.
  const auto leaf = model.leaf_planes(cls);
  const int nn = model.n();
  for (const auto& f : loop.frame) {
    Matrix proj(2 * leaf.size(), f.cols());
    for (std::size_t a = 0; a < leaf.size(); ++a) {
      proj.row(a) = f.row(leaf[a]);
      proj.row(leaf.size() + a) = f.row(nn + leaf[a]);
    }
    Eigen::JacobiSVD<Matrix> svd(proj);
    if (svd.singularValues().minCoeff() < 1e-8) {
      throw Error(ErrorKind::ProjectionRankLoss, "leaf frame degenerates against the transverse splitting");
    }
  }

  if (model.kind() != ModelKind::Ellipsoid) return SymplecticPath::constant_identity(2 * m, duration);

  // Linearized characteristic flow on the transverse planes:
  // Y' = s (-J diag(2 / a)) Y, s the orientation of the orbit.
  const int mult = ellipsoid_multiple(cls);
  const double sign = mult >= 0 ? 1.0 : -1.0;
  Matrix h = Matrix::Zero(2 * m, 2 * m);
  double rate = 0.0;
  for (int a = 0; a < m; ++a) {
    const double w = 2.0 / model.radii()[planes[a]];
    h(a, a) = h(m + a, m + a) = w;
    rate = std::max(rate, w);
  }
  const Matrix gen = sign * (-standard_j(m) * h);
  std::vector<PathSample> samples;
  Matrix y = Matrix::Identity(2 * m, 2 * m);
  samples.push_back({0.0, y});
  for (std::size_t s = 1; s < loop.t.size(); ++s) {
    const double gap = loop.t[s] - loop.t[s - 1];
    const int steps = std::max(1, static_cast<int>(std::ceil(gap * rate / kRadiansPerStep)));
    const double dt = gap / steps;
    for (int i = 0; i < steps; ++i) {
      const Matrix k1 = gen * y;
      const Matrix k2 = gen * (y + 0.5 * dt * k1);
      const Matrix k3 = gen * (y + 0.5 * dt * k2);
      const Matrix k4 = gen * (y + dt * k3);
      y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    samples.push_back({loop.t[s], y});
  }
  return SymplecticPath::trusted(std::move(samples));
}

double loop_area(const CoisotropicModel& model, const FramedLeafLoop& loop) {
  return model.area(loop.homotopy_class);
}

StabilityCertificate stability_certificate(const CoisotropicModel& model, int points, std::uint64_t seed) {
  auto rng = split_rng(seed, 0);
  StabilityCertificate cert;
  cert.min_wedge = std::numeric_limits<double>::infinity();
  const int nn = model.n();
  const int kk = model.k();
  const Matrix j = standard_j(nn);
  for (int s = 0; s < points; ++s) {
    const Vector x = model.random_point(rng);
    const Matrix xi = model.leaf_frame(x);
    const Matrix a = model.alphas(x);
    const Matrix tm = model.tangent_basis(x);
    // ker alpha inside T M, where omega_M must be nondegenerate.
    const Matrix at = a * tm;
    Eigen::FullPivLU<Matrix> lu(at);
    const Matrix kernel = lu.dimensionOfKernel() > 0 ? Matrix(tm * lu.kernel()) : Matrix(tm.rows(), 0);
    double volume = 1.0;
    if (kernel.cols() > 0) {
      Eigen::HouseholderQR<Matrix> qr(kernel);
      const Matrix w = Matrix(qr.householderQ()).leftCols(kernel.cols());
      volume = std::sqrt(std::abs((w.transpose() * j * w).determinant()));
    }
    if (kernel.cols() != 2 * (nn - kk)) volume = 0.0;
    cert.min_wedge = std::min(cert.min_wedge, std::abs((a * xi).determinant()) * volume);
    for (int i = 0; i < kk; ++i) {
      const Matrix leak = xi.transpose() * model.alpha_differential(i) * tm;
      cert.max_dalpha_leak = std::max(cert.max_dalpha_leak, leak.cwiseAbs().maxCoeff());
    }
  }
  cert.passed = cert.min_wedge > 1e-8 && cert.max_dalpha_leak < 1e-8;
  return cert;
}

double leaf_curvature(const CoisotropicModel& model, const Vector& base) {
  const int kk = model.k();
  if (kk < 2) return 0.0;
  const double h = 1e-3;
  // Leaf coordinates u are arc lengths along the canonical frame, so the
  // coordinate vector fields are the frame vectors.
  auto metric = [&](const Vector& u) -> Matrix {
    const Vector x = model.leaf_point(base, u);
    const Matrix a = model.alphas(x) * model.leaf_frame(x);
    return a.transpose() * a;
  };
  using Christoffel = std::vector<Matrix>;  // gamma[a](b, c)
  auto christoffel = [&](const Vector& u) -> Christoffel {
    std::vector<Matrix> dg(kk);
    for (int d = 0; d < kk; ++d) {
      Vector e = Vector::Zero(kk);
      e(d) = h;
      dg[d] = (metric(u + e) - metric(u - e)) / (2.0 * h);
    }
    const Matrix ginv = metric(u).inverse();
    Christoffel g(kk, Matrix::Zero(kk, kk));
    for (int a = 0; a < kk; ++a)
      for (int b = 0; b < kk; ++b)
        for (int c = 0; c < kk; ++c)
          for (int d = 0; d < kk; ++d)
            g[a](b, c) += 0.5 * ginv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
    return g;
  };
  const Vector u0 = Vector::Zero(kk);
  const Christoffel g0 = christoffel(u0);
  std::vector<Christoffel> dgam(kk);
  for (int c = 0; c < kk; ++c) {
    Vector e = Vector::Zero(kk);
    e(c) = h;
    const Christoffel plus = christoffel(u0 + e);
    const Christoffel minus = christoffel(u0 - e);
    dgam[c].assign(kk, Matrix::Zero(kk, kk));
    for (int a = 0; a < kk; ++a) dgam[c][a] = (plus[a] - minus[a]) / (2.0 * h);
  }
  double worst = 0.0;
  for (int a = 0; a < kk; ++a)
    for (int b = 0; b < kk; ++b)
      for (int c = 0; c < kk; ++c)
        for (int d = 0; d < kk; ++d) {
          double r = dgam[c][a](d, b) - dgam[d][a](c, b);
          for (int e = 0; e < kk; ++e) r += g0[a](c, e) * g0[e](d, b) - g0[a](d, e) * g0[e](c, b);
          worst = std::max(worst, std::abs(r));
        }
  return worst;
}

}  // namespace coiso
