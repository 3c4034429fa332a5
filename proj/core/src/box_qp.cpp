#include "graspeq/box_qp.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <vector>

namespace graspeq {

namespace {

double objective(const Eigen::MatrixXd& m, const Eigen::VectorXd& c, const Eigen::VectorXd& x) {
  return (c + m * x).squaredNorm();
}

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

double spectral_norm_sq(const Eigen::MatrixXd& m, int iterations) {
  if (m.size() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.cols()).normalized();
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd w = m.transpose() * (m * v);
    const double norm = w.norm();
    if (norm == 0.0) {
      // Started orthogonal to the range; fall back to the Frobenius bound.
      return m.squaredNorm();
    }
    lambda = v.dot(w);
    v = w / norm;
  }
  return lambda;
}

QpResult solve_box_lsq(const Eigen::MatrixXd& m, const Eigen::VectorXd& c,
                       const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                       const Eigen::VectorXd& x0, const QpOptions& options) {
  const Eigen::Index n = m.cols();
  QpResult res;
  res.x = clamp(x0, lower, upper);
  res.objective = objective(m, c, res.x);
  if (n == 0) {
    res.converged = true;
    return res;
  }

  // Hessian of |c + Mx|^2 is 2 M^T M.
  double lipschitz = 2.0 * spectral_norm_sq(m, options.power_iterations);
  if (lipschitz <= 0.0) {
    res.converged = true;
    return res;
  }

  const Eigen::VectorXd g0 = 2.0 * m.transpose() * (c + m * res.x);
  const double tol = options.tolerance * std::max(1.0, g0.cwiseAbs().maxCoeff());

  Eigen::VectorXd x = res.x;
  double fx = res.objective;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd r = c + m * x;
    const Eigen::VectorXd g = 2.0 * m.transpose() * r;
    const double pg = (x - clamp(x - g, lower, upper)).norm();
    res.iterations = it;
    res.projected_gradient = pg;
    if (pg < tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd next = clamp(x - g / lipschitz, lower, upper);
    double fnext = objective(m, c, next);
    while (fnext > fx && lipschitz < 1e300) {
      lipschitz *= 2.0;
      next = clamp(x - g / lipschitz, lower, upper);
      fnext = objective(m, c, next);
    }

    // Subspace step: exact least squares over variables strictly inside the box.
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (next[i] > lower[i] && next[i] < upper[i]) free.push_back(i);
    }
    if (!free.empty()) {
      Eigen::MatrixXd mf(m.rows(), static_cast<Eigen::Index>(free.size()));
      for (std::size_t k = 0; k < free.size(); ++k) mf.col(static_cast<Eigen::Index>(k)) = m.col(free[k]);
      const Eigen::VectorXd rn = c + m * next;
      const Eigen::VectorXd d = mf.completeOrthogonalDecomposition().solve(-rn);
      double step = 1.0;
      for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
        Eigen::VectorXd trial = next;
        for (std::size_t k = 0; k < free.size(); ++k) {
          trial[free[k]] += step * d[static_cast<Eigen::Index>(k)];
        }
        trial = clamp(trial, lower, upper);
        const double ft = objective(m, c, trial);
        if (ft <= fnext) {
          next = trial;
          fnext = ft;
          break;
        }
      }
    }
    x = next;
    fx = fnext;
    res.iterations = it + 1;
  }
  if (!res.converged) {
    const Eigen::VectorXd g = 2.0 * m.transpose() * (c + m * x);
    res.projected_gradient = (x - clamp(x - g, lower, upper)).norm();
    res.converged = res.projected_gradient < tol;
  }
  res.x = x;
  res.objective = fx;
  return res;
}

QpResult solve_projected_lsq(const Eigen::MatrixXd& m, const Eigen::VectorXd& c,
                             const Projection& project, const Eigen::VectorXd& x0,
                             const QpOptions& options) {
  QpResult res;
  Eigen::VectorXd x = x0;
  project(x);
  res.x = x;
  res.objective = objective(m, c, x);
  if (m.cols() == 0) {
    res.converged = true;
    return res;
  }
  const double lipschitz = 2.0 * spectral_norm_sq(m, options.power_iterations) * 1.05;
  if (lipschitz <= 0.0) {
    res.converged = true;
    return res;
  }
  const auto gradient = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return 2.0 * m.transpose() * (c + m * z);
  };
  const auto mapping_norm = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& gz) {
    Eigen::VectorXd p = z - gz;
    project(p);
    return (z - p).norm();
  };

  const double tol = options.tolerance * std::max(1.0, gradient(x).cwiseAbs().maxCoeff());
  Eigen::VectorXd y = x;
  double fx = res.objective;
  double momentum = 1.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd next = y - gradient(y) / lipschitz;
    project(next);
    double fnext = objective(m, c, next);
    if (fnext > fx) {
      // Restart from a plain projected step at x.
      momentum = 1.0;
      next = x - gradient(x) / lipschitz;
      project(next);
      fnext = objective(m, c, next);
    }
    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = next + ((momentum - 1.0) / momentum_next) * (next - x);
    momentum = momentum_next;
    x = next;
    fx = fnext;
    res.iterations = it + 1;
    const double pg = mapping_norm(x, gradient(x));
    res.projected_gradient = pg;
    if (pg < tol) {
      res.converged = true;
      break;
    }
  }
  res.x = x;
  res.objective = fx;
  return res;
}

void project_friction_pyramid(double& f, double& u, double& w, double f_min, double f_max) {
  const double p1 = std::min(std::abs(u), std::abs(w));
  const double p2 = std::max(std::abs(u), std::abs(w));
  // phi(F) = (F - f)^2 + max(|u| - F, 0)^2 + max(|w| - F, 0)^2 is convex and C1;
  // exactly one of the three pieces holds its own stationary point.
  double best;
  if (f >= p2) {
    best = f;
  } else if (const double mid = 0.5 * (f + p2); mid >= p1 && mid < p2) {
    best = mid;
  } else {
    best = (f + p1 + p2) / 3.0;
  }
  best = std::clamp(best, f_min, f_max);
  f = best;
  u = std::clamp(u, -best, best);
  w = std::clamp(w, -best, best);
}

}  // namespace graspeq
