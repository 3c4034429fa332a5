#pragma once

#include <functional>

#include <Eigen/Core>

namespace graspeq {

struct QpOptions {
  /// Stop when the projected-gradient norm falls below tolerance * scale,
  /// where scale = max(1, |grad f(x0)|_inf).
  double tolerance = 1e-8;
  int max_iterations = 10000;
  int power_iterations = 50;
};

struct QpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double projected_gradient = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of M^T M by power iteration.
double spectral_norm_sq(const Eigen::MatrixXd& m, int iterations);

/// minimize |c + M x|^2  subject to  lower <= x <= upper.
///
/// Projected gradient with a fixed 1/L step (L from power iteration, doubled
/// whenever a step fails to descend), followed after every step by an exact
/// least-squares solve on the current free variables, accepted through a
/// projected backtracking search. The problem is convex, so the result is
/// the global minimum up to the stopping tolerance.
QpResult solve_box_lsq(const Eigen::MatrixXd& m, const Eigen::VectorXd& c,
                       const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                       const Eigen::VectorXd& x0, const QpOptions& options = {});

using Projection = std::function<void(Eigen::VectorXd&)>;

/// minimize |c + M x|^2 over a closed convex set given by its Euclidean
/// projection. Accelerated projected gradient with function-value restarts.
QpResult solve_projected_lsq(const Eigen::MatrixXd& m, const Eigen::VectorXd& c,
                             const Projection& project, const Eigen::VectorXd& x0,
                             const QpOptions& options = {});

/// Euclidean projection of (f, u, w) onto the linearized friction cone
/// {f_min <= f <= f_max, |u| <= f, |w| <= f}.
void project_friction_pyramid(double& f, double& u, double& w, double f_min, double f_max);

}  // namespace graspeq
