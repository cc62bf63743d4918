#include "coiso/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace coiso {

namespace {

constexpr double kRadiansPerStep = 2.0 * std::numbers::pi / 2000.0;
constexpr int kKeepEvery = 10;
constexpr double kMaxKeptStep = 0.2;
constexpr double kStiffSteps = 2.5;
constexpr double kSlack = 1e-9;

// Radians swept per unit of leaf-wise length, bounding the rotation speed of
// every plane along a geodesic.
double radians_per_length(const CoisotropicModel& model) {
  const double m = *std::min_element(model.radii().begin(), model.radii().end());
  return model.kind() == ModelKind::Ellipsoid ? 2.0 / m : 1.0 / m;
}

ClassVector reversed(ClassVector cls) {
  for (auto& v : cls) v = -v;
  return cls;
}

Vector loop_start(const CoisotropicModel& model, const ClassVector& cls) {
  return model.loop(cls, 1).points.front();
}

// Integrates z' = -J grad f(z), Y' = -J hess f(z) Y from (z0, I).
SymplecticPath variational_path(const std::function<Vector(const Vector&)>& grad,
                                const std::function<Matrix(const Vector&)>& hess, const Vector& z0,
                                double duration, int steps) {
  const int dim = static_cast<int>(z0.size());
  const Matrix j = standard_j(dim / 2);
  auto field = [&](const Vector& y) -> Vector {
    const Vector z = y.head(dim);
    const Eigen::Map<const Matrix> m(y.data() + dim, dim, dim);
    Vector out(y.size());
    out.head(dim) = -j * grad(z);
    Eigen::Map<Matrix> dm(out.data() + dim, dim, dim);
    dm = -j * hess(z) * m;
    return out;
  };
  Vector y(dim + dim * dim);
  y.head(dim) = z0;
  Eigen::Map<Matrix>(y.data() + dim, dim, dim).setIdentity();
  auto state = [&](const Vector& v) -> Matrix { return Eigen::Map<const Matrix>(v.data() + dim, dim, dim); };
  std::vector<PathSample> samples{{0.0, Matrix::Identity(dim, dim)}};
  // Keep a sample every few steps, and sooner whenever the step since the
  // last kept sample grows (the shear part makes the path far from uniform).
  Matrix last_inv = Matrix::Identity(dim, dim);
  const double h = duration / steps;
  for (int s = 1; s <= steps; ++s) {
    const Vector k1 = field(y);
    const Vector k2 = field(y + 0.5 * h * k1);
    const Vector k3 = field(y + 0.5 * h * k2);
    const Vector k4 = field(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const Matrix m = state(y);
    if (s % kKeepEvery == 0 || s == steps ||
        (m * last_inv - Matrix::Identity(dim, dim)).norm() > kMaxKeptStep) {
      samples.push_back({s == steps ? duration : s * h, m});
      last_inv = symplectic_inverse(m);
    }
  }
  return SymplecticPath::trusted(std::move(samples));
}

struct RadialDerivatives {
  Vector grad;
  Matrix hess;
};

// Gradient and Hessian of f(|p(z)|) from f', f''.
RadialDerivatives radial(const CoisotropicModel& model, const Vector& z, double f1, double f2) {
  const Vector p = model.momentum(z);
  const double s = p.norm();
  const Matrix g = model.momentum_gradient(z);
  const Vector ds = g * p / s;
  const Matrix hess_s = (model.rho_hessian(z) - ds * ds.transpose()) / s;
  return {f1 * ds, f2 * ds * ds.transpose() + f1 * hess_s};
}

int flow_steps(const CoisotropicModel& model, double length) {
  return std::max(2000, static_cast<int>(std::ceil(length * radians_per_length(model) / kRadiansPerStep)));
}

// The caps make the flow of H(|p|) stiff: the twist rate across levels is
// |H''| |grad s|^2, and RK4 needs h times that well below 1.
int orbit_steps(const TestHamiltonianProfile& h, const CoisotropicModel& model, const Vector& z0, double length) {
  const Vector p = model.momentum(z0);
  const double s = p.norm();
  const double grad_sq = (model.momentum_gradient(z0) * p / s).squaredNorm();
  const double stiffness = std::abs(h.second_derivative(s)) * grad_sq + std::abs(h.derivative(s)) * grad_sq;
  const double wanted = std::ceil(kStiffSteps * stiffness);
  return std::max(flow_steps(model, length), static_cast<int>(std::min(wanted, 4.0e6)));
}

}  // namespace

// ---------------------------------------------------------------------------
// Profile

TestHamiltonianProfile TestHamiltonianProfile::build(double C, double eps, double r, double R) {
  std::ostringstream os;
  if (!(eps > 0.0 && eps < 0.25 * r)) {
    os << "need 0 < eps < r / 4 (eps = " << eps << ", r = " << r << ")";
    throw Error(ErrorKind::BadParameters, os.str());
  }
  if (!(r < R)) throw Error(ErrorKind::BadParameters, "need r < R");
  if (!(C > 0.0)) throw Error(ErrorKind::BadParameters, "need C > 0");
  const double slope = (C - 2.0 * eps) / (r - 3.0 * eps);
  if (!(slope >= 1.0)) {
    os << "linear slope " << slope << " < 1: the caps cannot drop by eps";
    throw Error(ErrorKind::BadParameters, os.str());
  }

  TestHamiltonianProfile h;
  h.c_ = C;
  h.eps_ = eps;
  h.r_ = r;
  h.big_r_ = R;
  h.slope_ = slope;

  // (end, curvature) in order; values and slopes are accumulated below.
  std::vector<std::pair<double, double>> spec;
  spec.push_back({eps, 0.0});
  if (slope >= 2.0) {
    const double u = 2.0 * eps / slope;
    spec.push_back({2.0 * eps - u, 0.0});
    spec.push_back({2.0 * eps, -slope / u});
  } else {
    const double u = 2.0 * eps * (1.0 - 1.0 / slope);
    spec.push_back({eps + u, -slope / u});
    spec.push_back({2.0 * eps, 0.0});
  }
  spec.push_back({r - eps, 0.0});
  if (slope >= 2.0) {
    const double u = 2.0 * eps / slope;
    spec.push_back({r - eps + u, slope / u});
    spec.push_back({r, 0.0});
  } else {
    const double u = 2.0 * eps * (1.0 - 1.0 / slope);
    spec.push_back({r - u, 0.0});
    spec.push_back({r, slope / u});
  }
  spec.push_back({R, 0.0});

  double a = 0.0, value = C, d1 = 0.0;
  for (const auto& [b, curv] : spec) {
    if (b - a <= 0.0) continue;
    h.pieces_.push_back({a, b, value, d1, curv});
    const double w = b - a;
    value += d1 * w + 0.5 * curv * w * w;
    d1 += curv * w;
    a = b;
  }
  // Pin the knots that round-off would otherwise smear.
  for (auto& p : h.pieces_) {
    if (p.a == 2.0 * eps) p.value = C - eps, p.slope = -slope;
    if (p.a == r - eps) p.value = eps, p.slope = -slope;
    if (p.a == r) p.value = 0.0, p.slope = 0.0;
  }
  return h;
}

const TestHamiltonianProfile::Piece& TestHamiltonianProfile::piece(double s) const {
  for (const auto& p : pieces_)
    if (s < p.b) return p;
  return pieces_.back();
}

double TestHamiltonianProfile::value(double s) const {
  if (s >= big_r_) return 0.0;
  const Piece& p = piece(s);
  const double w = s - p.a;
  return p.value + p.slope * w + 0.5 * p.curvature * w * w;
}

double TestHamiltonianProfile::derivative(double s) const {
  if (s >= big_r_) return 0.0;
  const Piece& p = piece(s);
  return p.slope + p.curvature * (s - p.a);
}

double TestHamiltonianProfile::second_derivative(double s) const {
  if (s >= big_r_) return 0.0;
  return piece(s).curvature;
}

std::vector<double> TestHamiltonianProfile::levels_with_slope(double l) const {
  std::vector<double> out;
  for (const auto& p : pieces_) {
    if (p.curvature == 0.0) {
      if (std::abs(p.slope + l) <= 1e-12 * std::max(1.0, l)) {
        std::ostringstream os;
        os << "H' = -" << l << " on all of [" << p.a << ", " << p.b << "]";
        throw Error(ErrorKind::SlopeInSpectrum, os.str());
      }
      continue;
    }
    const double s = p.a + (-l - p.slope) / p.curvature;
    const double tol = 1e-14 * std::max(1.0, p.b);
    if (s >= p.a - tol && s <= p.b + tol) {
      const double c = std::clamp(s, p.a, p.b);
      if (out.empty() || c - out.back() > 1e-12) out.push_back(c);
    }
  }
  return out;
}

const char* to_string(Band b) { return b == Band::Inner ? "inner" : "outer"; }

// ---------------------------------------------------------------------------
// Orbits

double orbit_action(const TestHamiltonianProfile& h, const CoisotropicModel& model, const ClassVector& cls,
                    double level) {
  return h.value(level) - model.area(cls) + level * model.length(cls);
}

IntegratedAction integrate_orbit_action(const TestHamiltonianProfile& h, const CoisotropicModel& model,
                                        const ClassVector& cls, double level, int steps) {
  const int n = model.n();
  const Matrix j = standard_j(n);
  // The orbit runs against its momentum: X_H = H'(|p|) X_{|p|} with H' < 0.
  const Vector p = model.momentum_for(reversed(cls), level);
  const Vector z0 = model.to_ambient(loop_start(model, cls), p);
  if (steps <= 0) steps = orbit_steps(h, model, z0, model.length(cls));
  auto field = [&](const Vector& y) -> Vector {
    const Vector z = y.head(2 * n);
    const double s = model.momentum(z).norm();
    const Vector grad = radial(model, z, h.derivative(s), 0.0).grad;
    Vector out(2 * n + 2);
    out.head(2 * n) = -j * grad;
    out(2 * n) = 0.5 * z.dot(j * out.head(2 * n));  // Liouville form on the velocity
    out(2 * n + 1) = h.value(s);
    return out;
  };
  Vector y0 = Vector::Zero(2 * n + 2);
  y0.head(2 * n) = z0;
  const Trajectory tr = rk4(field, y0, 1.0, steps, steps);
  const Vector& end = tr.z.back();
  return {end(2 * n + 1) - end(2 * n), (end.head(2 * n) - z0).norm()};
}

std::vector<OrbitRecord> orbit_catalog(const TestHamiltonianProfile& h, const CoisotropicModel& model,
                                       MaslovCache* cache) {
  if (!(h.C() > model.neighborhood_energy())) {
    std::ostringstream os;
    os << "C = " << h.C() << " must exceed e(U) = " << model.neighborhood_energy();
    throw Error(ErrorKind::BadParameters, os.str());
  }
  if (h.R() > model.chart_radius() * (1.0 + 1e-12)) {
    throw Error(ErrorKind::BadParameters, "profile support exceeds the normal-form chart");
  }
  const auto geodesics = closed_geodesics(model, h.slope() + 1.0);
  for (const auto& g : geodesics) {
    if (std::abs(g.length - h.slope()) < kSlack) {
      std::ostringstream os;
      os << "linear slope " << h.slope() << " lies in the length spectrum";
      throw Error(ErrorKind::SlopeInSpectrum, os.str());
    }
  }
  MaslovCache local;
  MaslovCache& mu_cache = cache ? *cache : local;
  std::vector<OrbitRecord> out;
  for (const auto& g : geodesics) {
    if (g.length > h.slope()) continue;
    for (double s : h.levels_with_slope(g.length)) {
      OrbitRecord rec;
      rec.homotopy_class = g.homotopy_class;
      rec.length = g.length;
      rec.level = s;
      rec.action = orbit_action(h, model, g.homotopy_class, s);
      if (s >= h.eps() - kSlack && s <= 2.0 * h.eps() + kSlack) {
        rec.band = Band::Inner;
      } else if (s >= h.r() - h.eps() - kSlack && s <= h.r() + kSlack) {
        rec.band = Band::Outer;
      } else {
        std::ostringstream os;
        os << "orbit at level " << s << " lies on the linear part";
        throw Error(ErrorKind::SlopeInSpectrum, os.str());
      }
      auto it = mu_cache.find(g.homotopy_class);
      if (it == mu_cache.end()) it = mu_cache.emplace(g.homotopy_class, maslov_index(model, g.homotopy_class)).first;
      rec.maslov = it->second;
      rec.mean_index = -rec.maslov;
      out.push_back(rec);
    }
  }
  return out;
}

SymplecticPath linearized_rho_path(const CoisotropicModel& model, const ClassVector& cls, double level) {
  if (!(level > 0.0 && level < model.chart_radius())) {
    throw Error(ErrorKind::LeftChart, "momentum level outside the chart");
  }
  const double length = model.length(cls);
  if (length == 0.0) throw Error(ErrorKind::BadInput, "trivial class has no geodesic");
  const Vector z0 = model.to_ambient(loop_start(model, cls), model.momentum_for(cls, level));
  auto grad = [&](const Vector& z) { return model.rho_gradient(z); };
  auto hess = [&](const Vector& z) { return model.rho_hessian(z); };
  return variational_path(grad, hess, z0, length / level, flow_steps(model, length));
}

SymplecticPath linearized_orbit_path(const TestHamiltonianProfile& h, const CoisotropicModel& model,
                                     const ClassVector& cls, double level) {
  const double length = model.length(cls);
  if (length == 0.0) throw Error(ErrorKind::BadInput, "trivial class has no orbit");
  const Vector z0 = model.to_ambient(loop_start(model, cls), model.momentum_for(reversed(cls), level));
  auto grad = [&](const Vector& z) {
    const double s = model.momentum(z).norm();
    return radial(model, z, h.derivative(s), h.second_derivative(s)).grad;
  };
  auto hess = [&](const Vector& z) {
    const double s = model.momentum(z).norm();
    return radial(model, z, h.derivative(s), h.second_derivative(s)).hess;
  };
  return variational_path(grad, hess, z0, 1.0, orbit_steps(h, model, z0, length));
}

// ---------------------------------------------------------------------------
// Sandwich bounds and perturbed geodesic flows

SandwichSample lemma33_sample(int n, int k, const SymplecticPath& gamma, const QuadraticHamiltonian& perturbation) {
  // A: flow of |p|^2 / 2 on R^{2k}, positive on the fiber directions.
  Matrix rho = Matrix::Zero(2 * k, 2 * k);
  rho.bottomRightCorner(k, k).setIdentity();
  const SymplecticPath a = flow_of_quadratic(QuadraticHamiltonian(rho), 1.0, 4);
  const SymplecticPath g = direct_sum(a, gamma);
  if (g.dim() != 2 * n) throw Error(ErrorKind::BadInput, "holonomy block has the wrong dimension");
  const SymplecticPath perturbed = pointwise_product(g, flow_of_quadratic(perturbation, 1.0, 4));
  return {mean_index(g), conley_zehnder(perturbed)};
}

Lemma33Result lemma33_fuzz(int n, int k, int trials, double perturb_scale, std::uint64_t seed) {
  if (!(1 <= k && k <= n && n <= 4)) throw Error(ErrorKind::BadParameters, "need 1 <= k <= n <= 4");
  if (!(perturb_scale > 0.0 && perturb_scale <= 1e-2)) {
    throw Error(ErrorKind::BadParameters, "perturbation scale must lie in (0, 1e-2]");
  }
  Lemma33Result res;
  res.n = n;
  res.k = k;
  res.trials = trials;
  res.seed = seed;
  res.worst_lower_margin = res.worst_upper_margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    auto rng = split_rng(seed, static_cast<std::uint64_t>(t));
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 100) throw Error(ErrorKind::BadParameters, "no nondegenerate perturbation found");
      const SymplecticPath gamma =
          n > k ? flow_of_quadratic(random_quadratic(2 * (n - k), rng), 1.0, 8)
                : SymplecticPath::constant_identity(0, 1.0);
      const QuadraticHamiltonian pert = random_quadratic(2 * n, rng, perturb_scale);
      SandwichSample s;
      try {
        s = lemma33_sample(n, k, gamma, pert);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateEndpoint && e.kind() != ErrorKind::IrregularCrossing) throw;
        ++res.rejected;
        continue;
      }
      const double lower = s.cz - (s.mean_index - n);
      const double upper = (s.mean_index + (n - k)) - s.cz;
      res.worst_lower_margin = std::min(res.worst_lower_margin, lower);
      res.worst_upper_margin = std::min(res.worst_upper_margin, upper);
      if (lower < -kSlack || upper < -kSlack) ++res.violations;
      break;
    }
  }
  return res;
}

Prop31Result prop31_check(const CoisotropicModel& model, const ClassVector& cls, double level) {
  Prop31Result r;
  r.homotopy_class = model.normalize_class(cls);
  if (level <= 0.0) level = 0.5 * model.chart_radius();
  r.mu = maslov_index(model, r.homotopy_class);
  r.minus_mean_index = -mean_index(linearized_rho_path(model, r.homotopy_class, level));
  r.diff = std::abs(r.mu - r.minus_mean_index);
  return r;
}

Prop32Result prop32_window_check(const CoisotropicModel& model, const ClassVector& cls, int trials,
                                 std::uint64_t seed, double perturb_scale) {
  Prop32Result r;
  r.homotopy_class = model.normalize_class(cls);
  r.trials = trials;
  const int n = model.n();
  const int k = model.k();
  const SymplecticPath g = linearized_rho_path(model, r.homotopy_class, 0.5 * model.chart_radius());
  r.mean_index = mean_index(g);
  const double duration = g.duration();
  for (int t = 0; t < trials; ++t) {
    auto rng = split_rng(seed, static_cast<std::uint64_t>(t));
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 100) throw Error(ErrorKind::BadParameters, "no nondegenerate perturbation found");
      const QuadraticHamiltonian pert(random_quadratic(2 * n, rng, perturb_scale).matrix() / duration);
      int cz = 0;
      try {
        cz = conley_zehnder(pointwise_product(g, flow_of_quadratic(pert, duration, 4)));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateEndpoint && e.kind() != ErrorKind::IrregularCrossing) throw;
        ++r.rejected;
        continue;
      }
      r.cz_values.push_back(cz);
      if (cz < r.mean_index - n - kSlack || cz > r.mean_index + (n - k) + kSlack) ++r.violations;
      break;
    }
  }
  r.passed = r.violations == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Witness search and action windows

TheoremReport theorem_bounds_check(const CoisotropicModel& model, double delta, double max_length, bool require) {
  if (!(delta > 0.0)) throw Error(ErrorKind::BadParameters, "delta must be positive");
  TheoremReport rep;
  rep.model = model.name();
  rep.delta = delta;
  rep.n = model.n();
  rep.k = model.k();
  rep.displacement_energy = model.displacement_energy();
  rep.displacement_energy_external = true;
  const double upper_mu = 2.0 * rep.n + 1.0 - rep.k;
  for (const auto& g : closed_geodesics(model, max_length)) {
    WitnessCandidate c;
    c.eta_class = g.homotopy_class;
    c.length = g.length;
    c.area = g.area;
    c.mu = maslov_index(model, g.homotopy_class);
    c.index_ok = c.mu >= 1.0 - kSlack && c.mu <= upper_mu + kSlack;
    c.area_ok = c.area > 0.0 && c.area <= rep.displacement_energy + delta;
    rep.candidates.push_back(c);
  }
  for (const auto& c : rep.candidates) {
    if (!(c.index_ok && c.area_ok)) continue;
    if (!rep.witness || c.area < rep.witness->area - kSlack ||
        (std::abs(c.area - rep.witness->area) <= kSlack && c.length < rep.witness->length)) {
      rep.witness = c;
    }
  }
  if (rep.witness) {
    // The orbit runs along the opposite class; its linearization is integrated directly.
    const ClassVector orbit = reversed(rep.witness->eta_class);
    rep.orbit_mean_index = mean_index(linearized_rho_path(model, orbit, 0.5 * model.chart_radius()));
    rep.mean_index_window_ok =
        rep.orbit_mean_index >= 1.0 - 1e-6 && rep.orbit_mean_index <= 2.0 * rep.n + 1.0 + 1e-6;
  }
  rep.passed = rep.witness.has_value() && rep.mean_index_window_ok;
  if (!rep.witness && require) {
    std::ostringstream os;
    os << "no loop among " << rep.candidates.size() << " candidates satisfies both inequalities on " << rep.model;
    throw Error(ErrorKind::NoWitnessFound, os.str());
  }
  return rep;
}

Lemma35Report lemma35_band_check(const CoisotropicModel& model, const std::vector<double>& C_values,
                                 const std::vector<double>& eps_values, double r, double R) {
  Lemma35Report rep;
  rep.model = model.name();
  rep.r = r;
  rep.R = R;
  rep.neighborhood_energy = model.neighborhood_energy();
  double c_max = 0.0;
  for (double c : C_values) c_max = std::max(c_max, c);
  const auto spectrum = length_spectrum(model, c_max / r + 1.0);
  for (double c : C_values) {
    for (double l : spectrum) {
      if (std::abs(c - r * l) < 1e-6) {
        std::ostringstream os;
        os << "C = " << c << " lies in r S (r = " << r << ", length " << l << ")";
        throw Error(ErrorKind::CInSpectrumScaled, os.str());
      }
    }
  }
  MaslovCache cache;
  rep.passed = true;
  for (double c : C_values) {
    for (double eps : eps_values) {
      Lemma35Case cs;
      cs.C = c;
      cs.eps = eps;
      const auto h = TestHamiltonianProfile::build(c, eps, r, R);
      cs.slope = h.slope();
      cs.slope_outside_spectrum = std::none_of(spectrum.begin(), spectrum.end(),
                                               [&](double l) { return std::abs(l - cs.slope) < kSlack; });
      if (cs.slope_outside_spectrum) {
        bool any_window = false;
        for (const auto& rec : orbit_catalog(h, model, &cache)) {
          if (rec.band != Band::Inner) continue;
          const bool in = rec.action > c && rec.action < c + rep.neighborhood_energy;
          cs.inner_orbits.push_back(rec);
          cs.in_action_window.push_back(in);
          any_window = any_window || in;
        }
        cs.passed = any_window;
      }
      rep.passed = rep.passed && cs.passed;
      rep.cases.push_back(cs);
    }
  }
  return rep;
}

}  // namespace coiso
