#pragma once
// Independent reference computations used by unit and acceptance tests.
// Nothing here calls the library's solvers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "graspeq/equilibrium.hpp"
#include "graspeq/synthetic.hpp"

namespace graspeq::testing {

/// Columns [mu B diag(F), mu T diag(F)] and constant N F + g of the
/// energy |M x + c|^2 over x = (gamma, delta).
struct EnergyForm {
  Eigen::MatrixXd m;
  Eigen::VectorXd c;
};

inline EnergyForm energy_form(const EquilibriumSystem& sys) {
  const Eigen::Index n = sys.size();
  EnergyForm e;
  e.m.resize(6, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    e.m.col(i) = sys.mu * sys.force[i] * sys.binormal_wrench.col(i);
    e.m.col(n + i) = sys.mu * sys.force[i] * sys.tangent_wrench.col(i);
  }
  e.c = sys.normal_wrench * sys.force + sys.gravity6;
  return e;
}

/// Exact minimum of |M x + c|^2 over the box [-1, 1]^k by enumerating every
/// assignment of each coordinate to {lower, upper, free}. For each pattern the
/// free coordinates solve the reduced least-squares problem; feasible
/// candidates are upper bounds and the KKT point of the optimum is among them
/// when the free columns have full rank (generic for k <= 6).
inline double box_minimum_by_enumeration(const Eigen::MatrixXd& m, const Eigen::VectorXd& c) {
  const Eigen::Index k = m.cols();
  if (k == 0) return c.squaredNorm();
  long patterns = 1;
  for (Eigen::Index i = 0; i < k; ++i) patterns *= 3;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> state(static_cast<std::size_t>(k));
  for (long p = 0; p < patterns; ++p) {
    long code = p;
    std::vector<Eigen::Index> free;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const int s = static_cast<int>(code % 3);
      code /= 3;
      if (s == 0) x[i] = -1.0;
      if (s == 1) x[i] = 1.0;
      if (s == 2) free.push_back(i);
    }
    if (!free.empty()) {
      Eigen::MatrixXd mf(m.rows(), static_cast<Eigen::Index>(free.size()));
      for (std::size_t j = 0; j < free.size(); ++j) mf.col(static_cast<Eigen::Index>(j)) = m.col(free[j]);
      const Eigen::VectorXd rhs = -(c + m * x);
      const Eigen::VectorXd xf = mf.colPivHouseholderQr().solve(rhs);
      bool feasible = true;
      for (std::size_t j = 0; j < free.size(); ++j) {
        const double v = xf[static_cast<Eigen::Index>(j)];
        if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12)) feasible = false;
        x[free[j]] = std::clamp(v, -1.0, 1.0);
      }
      if (!feasible) continue;
    }
    best = std::min(best, (m * x + c).squaredNorm());
  }
  return best;
}

/// Minimum over the grid {-1, -1 + step, ..., 1}^k. The last coordinate is
/// minimized exactly over its grid values (a 1-d convex quadratic is minimized
/// over a grid at one of the two points bracketing its clamped minimizer);
/// every other coordinate is enumerated.
inline double grid_minimum(const Eigen::MatrixXd& m, const Eigen::VectorXd& c, double step) {
  const Eigen::Index k = m.cols();
  if (k == 0) return c.squaredNorm();
  const int count = static_cast<int>(std::lround(2.0 / step)) + 1;
  const auto value = [&](int idx) { return -1.0 + step * idx; };
  const Eigen::VectorXd last = m.col(k - 1);
  const double last_sq = last.squaredNorm();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(k - 1), 0);
  Eigen::VectorXd r(m.rows());
  while (true) {
    r = c;
    for (Eigen::Index i = 0; i + 1 < k; ++i) r += value(idx[static_cast<std::size_t>(i)]) * m.col(i);
    // minimize |r + x last|^2 over grid x
    double x_star = last_sq > 0.0 ? -r.dot(last) / last_sq : 0.0;
    x_star = std::clamp(x_star, -1.0, 1.0);
    const int lo = std::clamp(static_cast<int>(std::floor((x_star + 1.0) / step)), 0, count - 1);
    for (int j = std::max(lo - 1, 0); j <= std::min(lo + 2, count - 1); ++j) {
      best = std::min(best, (r + value(j) * last).squaredNorm());
    }
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] == count) idx[d++] = 0;
    if (d == idx.size()) break;
  }
  return best;
}

/// Row-by-row evaluation of the hinge loss straight from the system matrices.
inline double hinge_loss_reference(const EquilibriumSystem& sys, const Eigen::VectorXd& f) {
  const Eigen::Index n = sys.size();
  Matrix6X fric(6, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    fric.col(i) = sys.mu * (sys.binormal_wrench.col(i).cwiseAbs() + sys.tangent_wrench.col(i).cwiseAbs());
  }
  const Vec6 lower_row = (sys.normal_wrench - fric) * f + sys.gravity6;
  const Vec6 upper_row = (sys.normal_wrench + fric) * f + sys.gravity6;
  double loss = 0.0;
  for (int r = 0; r < 6; ++r) loss += std::max(lower_row[r], 0.0) - std::min(upper_row[r], 0.0);
  return loss;
}

/// Central difference of a scalar function of an Eigen vector.
template <class Vec>
Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g = Vec::Zero(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x;
    Vec xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Random contacts on a sphere of radius 0.05 around the origin with random
/// outward normals and forces in [f_lo, f_hi].
inline std::vector<Contact> random_contacts(Rng& rng, int n, double f_lo = 0.5, double f_hi = 10.0) {
  std::vector<Contact> out;
  for (int i = 0; i < n; ++i) {
    const Vec3 u = rng.unit_vector();
    Contact c;
    c.position = 0.05 * u;
    c.normal = (u + 0.3 * rng.unit_vector()).normalized();
    c.force = rng.uniform(f_lo, f_hi);
    out.push_back(c);
  }
  return out;
}

/// Rigid body of mass 1 and radius 0.05 (inertia 0.4 m r^2).
inline EquilibriumSystem random_system(Rng& rng, int n, double mu = 1.0) {
  const auto contacts = random_contacts(rng, n);
  return assemble(Vec3::Zero(), 1.0, 0.4 * 0.05 * 0.05, contacts, mu, kDefaultGravity);
}

/// Rescales forces and gravity together so the energy's Hessian has
/// spectral norm at most `bound`.
inline EquilibriumSystem normalized(EquilibriumSystem sys, double bound) {
  const EnergyForm e = energy_form(sys);
  if (e.m.cols() == 0) return sys;
  const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(e.m).singularValues()(0);
  if (norm > bound) {
    const double s = bound / norm;
    sys.force *= s;
    sys.gravity6 *= s;
  }
  return sys;
}

inline double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  const Mat3 d = a.transpose() * b - b.transpose() * a;
  const double s = 0.5 * Vec3(d(2, 1), d(0, 2), d(1, 0)).norm();
  return std::atan2(s, c);
}

inline Mat3 random_rotation(Rng& rng) {
  const Vec3 axis = rng.unit_vector();
  const double angle = rng.uniform(0.0, 3.1);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

}  // namespace graspeq::testing
