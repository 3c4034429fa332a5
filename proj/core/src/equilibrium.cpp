#include "graspeq/equilibrium.hpp"

#include <algorithm>
#include <cmath>

namespace graspeq {

namespace {

Eigen::VectorXd masked_force(const EquilibriumSystem& sys, std::span<const double> force_map,
                             std::span<const double> likelihood) {
  const auto n = static_cast<std::size_t>(sys.size());
  if (force_map.size() != n || likelihood.size() != n) {
    throw Error(ErrorCode::ShapeError, "force map and likelihood must match the contact count");
  }
  Eigen::VectorXd f(sys.size());
  for (std::size_t i = 0; i < n; ++i) {
    f[static_cast<Eigen::Index>(i)] = force_map[i] * likelihood[i];
  }
  return f;
}

struct RowBounds {
  Vec6 lower;  // (N - Ffric) F + g
  Vec6 upper;  // (N + Ffric) F + g
  Matrix6X friction;  // Ffric
};

RowBounds row_bounds(const EquilibriumSystem& sys, const Eigen::VectorXd& f) {
  RowBounds rb;
  rb.friction = sys.mu * (sys.binormal_wrench.cwiseAbs() + sys.tangent_wrench.cwiseAbs());
  const Vec6 center = sys.normal_wrench * f + sys.gravity6;
  const Vec6 spread = rb.friction * f;
  rb.lower = center - spread;
  rb.upper = center + spread;
  return rb;
}

}  // namespace

Vec6 EquilibriumSystem::acceleration(const Eigen::VectorXd& gamma,
                                     const Eigen::VectorXd& delta) const {
  return normal_wrench * force + mu * binormal_wrench * gamma.cwiseProduct(force) +
         mu * tangent_wrench * delta.cwiseProduct(force) + gravity6;
}

EquilibriumSystem EquilibriumSystem::with_force(const Eigen::VectorXd& f) const {
  EquilibriumSystem copy = *this;
  copy.force = f;
  return copy;
}

EquilibriumSystem assemble(const Vec3& com, double mass, double inertia,
                           std::span<const Contact> contacts, double mu, const Vec3& gravity) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::InvalidArgument, "friction coefficient must be non-negative");
  }
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  }
  const auto n = static_cast<Eigen::Index>(contacts.size());
  EquilibriumSystem sys;
  sys.mu = mu;
  sys.normal_wrench.setZero(6, n);
  sys.binormal_wrench.setZero(6, n);
  sys.tangent_wrench.setZero(6, n);
  sys.force.setZero(n);
  sys.gravity6.head<3>() = gravity;

  for (Eigen::Index i = 0; i < n; ++i) {
    const Contact& c = contacts[static_cast<std::size_t>(i)];
    if (!std::isfinite(c.force) || c.force < 0.0) {
      throw Error(ErrorCode::InvalidForce, "contact force must be finite and non-negative");
    }
    const TangentBasis basis = build_tangent_basis(c.normal);
    const Vec3 arm = c.position - com;
    const auto wrench = [&](const Vec3& dir) {
      Vec6 w;
      w.head<3>() = dir / mass;
      // A point set of zero extent has no rotational inertia; its torque rows vanish.
      w.tail<3>() = inertia > 0.0 ? Vec3(arm.cross(dir) / inertia) : Vec3::Zero();
      return w;
    };
    sys.normal_wrench.col(i) = wrench(-basis.n);
    sys.binormal_wrench.col(i) = wrench(basis.b);
    sys.tangent_wrench.col(i) = wrench(basis.t);
    sys.force[i] = c.force;
  }
  return sys;
}

EquilibriumSystem assemble(const ObjectModel& object, std::span<const Contact> contacts, double mu,
                           const Vec3& gravity) {
  return assemble(object.com(), object.mass(), object.inertia(), contacts, mu, gravity);
}

StabilityResult stability_energy(const EquilibriumSystem& sys, const QpOptions& options) {
  const Eigen::Index n = sys.size();
  StabilityResult out;
  out.gamma.setZero(n);
  out.delta.setZero(n);

  // accel = c + M x with x = [gamma; delta].
  Eigen::MatrixXd m(6, 2 * n);
  m.leftCols(n) = sys.mu * sys.binormal_wrench * sys.force.asDiagonal();
  m.rightCols(n) = sys.mu * sys.tangent_wrench * sys.force.asDiagonal();
  const Eigen::VectorXd c = sys.normal_wrench * sys.force + sys.gravity6;

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2 * n);
  const QpResult qp = solve_box_lsq(m, c, -ones, ones, Eigen::VectorXd::Zero(2 * n), options);

  out.gamma = qp.x.head(n);
  out.delta = qp.x.tail(n);
  out.accel = sys.acceleration(out.gamma, out.delta);
  out.energy = out.accel.squaredNorm();
  out.iterations = qp.iterations;
  if (!qp.converged) {
    throw SolverError("stability QP did not converge (projected gradient " +
                          std::to_string(qp.projected_gradient) + ")",
                      out);
  }
  return out;
}

double stability_loss(const EquilibriumSystem& sys) {
  const RowBounds rb = row_bounds(sys, sys.force);
  return rb.lower.cwiseMax(0.0).sum() - rb.upper.cwiseMin(0.0).sum();
}

double stability_loss_masked(const EquilibriumSystem& sys, std::span<const double> force_map,
                             std::span<const double> likelihood) {
  const RowBounds rb = row_bounds(sys, masked_force(sys, force_map, likelihood));
  return rb.lower.cwiseMax(0.0).sum() - rb.upper.cwiseMin(0.0).sum();
}

Eigen::VectorXd loss_gradient(const EquilibriumSystem& sys, std::span<const double> force_map,
                              std::span<const double> likelihood) {
  const RowBounds rb = row_bounds(sys, masked_force(sys, force_map, likelihood));
  const Matrix6X lower_rows = sys.normal_wrench - rb.friction;
  const Matrix6X upper_rows = sys.normal_wrench + rb.friction;
  Eigen::VectorXd grad_f = Eigen::VectorXd::Zero(sys.size());
  for (int r = 0; r < 6; ++r) {
    // A hinge sitting exactly at zero takes the derivative of its active side.
    if (rb.lower[r] >= 0.0) grad_f += lower_rows.row(r).transpose();
    if (rb.upper[r] <= 0.0) grad_f -= upper_rows.row(r).transpose();
  }
  // Chain rule through F = force_map o likelihood.
  for (Eigen::Index i = 0; i < sys.size(); ++i) {
    grad_f[i] *= likelihood[static_cast<std::size_t>(i)];
  }
  return grad_f;
}

double loss_kink_margin(const EquilibriumSystem& sys, std::span<const double> force_map,
                        std::span<const double> likelihood) {
  const RowBounds rb = row_bounds(sys, masked_force(sys, force_map, likelihood));
  return std::min(rb.lower.cwiseAbs().minCoeff(), rb.upper.cwiseAbs().minCoeff());
}

std::vector<Contact> contacts_from_state(const ObjectModel& object, const ContactState& state) {
  state.validate(object.size());
  std::vector<Contact> out;
  for (std::size_t i = 0; i < object.size(); ++i) {
    if (state.force[i] > 0.0) {
      out.push_back(Contact{object.point(i), object.normal(i), state.force[i]});
    }
  }
  return out;
}

}  // namespace graspeq
