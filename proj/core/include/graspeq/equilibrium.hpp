#pragma once

#include <span>

#include <Eigen/Core>

#include "graspeq/box_qp.hpp"
#include "graspeq/error.hpp"
#include "graspeq/scene_model.hpp"

namespace graspeq {

using Matrix6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

inline constexpr double kDefaultFriction = 1.0;
inline const Vec3 kDefaultGravity{0.0, 0.0, -9.81};

/// A point contact on the object: position, outward surface normal and the
/// magnitude of the normal force pressing into the object.
struct Contact {
  Vec3 position;
  Vec3 normal;
  double force = 0.0;
};

/// Bilinear acceleration model of a grasped object:
///
///   [a; alpha] = N F + mu B (gamma o F) + mu T (delta o F) + [g; 0]
///
/// Column i of N is the unit wrench of the inward normal force at contact i,
/// i.e. (-n_i / m; (p_i - com) x (-n_i) / I). B and T hold the same wrench for
/// the tangent directions b_i and t_i.
struct EquilibriumSystem {
  Matrix6X normal_wrench;   // N
  Matrix6X binormal_wrench; // B
  Matrix6X tangent_wrench;  // T
  Vec6 gravity6 = Vec6::Zero();
  double mu = kDefaultFriction;
  Eigen::VectorXd force;    // F, one entry per contact

  Eigen::Index size() const { return force.size(); }

  /// Acceleration for given friction coefficients gamma, delta in [-1, 1].
  Vec6 acceleration(const Eigen::VectorXd& gamma, const Eigen::VectorXd& delta) const;

  /// Same system with a different force vector.
  EquilibriumSystem with_force(const Eigen::VectorXd& f) const;
};

struct StabilityResult {
  double energy = 0.0;
  Eigen::VectorXd gamma;
  Eigen::VectorXd delta;
  Vec6 accel = Vec6::Zero();
  int iterations = 0;
};

/// Raised when the QP does not reach tolerance; carries the best iterate.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, StabilityResult best)
      : Error(ErrorCode::SolverError, message), best_(std::move(best)) {}

  const StabilityResult& best() const noexcept { return best_; }

 private:
  StabilityResult best_;
};

EquilibriumSystem assemble(const ObjectModel& object, std::span<const Contact> contacts,
                           double mu = kDefaultFriction, const Vec3& gravity = kDefaultGravity);

/// Same as above with explicit rigid-body parameters (no sampled object needed).
EquilibriumSystem assemble(const Vec3& com, double mass, double inertia,
                           std::span<const Contact> contacts, double mu, const Vec3& gravity);

/// min over gamma, delta in [-1,1]^n of |a|^2 + |alpha|^2.
StabilityResult stability_energy(const EquilibriumSystem& sys, const QpOptions& options = {});

/// Bound-based hinge relaxation of the equilibrium test; zero when every row
/// of the acceleration can reach zero independently.
double stability_loss(const EquilibriumSystem& sys);

/// stability_loss with F replaced by force_map o likelihood.
double stability_loss_masked(const EquilibriumSystem& sys, std::span<const double> force_map,
                             std::span<const double> likelihood);

/// Subgradient of stability_loss_masked with respect to force_map.
Eigen::VectorXd loss_gradient(const EquilibriumSystem& sys, std::span<const double> force_map,
                              std::span<const double> likelihood);

/// Smallest |hinge argument| across the 12 hinge terms; the loss is linear in
/// a neighbourhood of F whenever this is positive.
double loss_kink_margin(const EquilibriumSystem& sys, std::span<const double> force_map,
                        std::span<const double> likelihood);

/// Collects the contacts of a contact state (points with positive force).
std::vector<Contact> contacts_from_state(const ObjectModel& object, const ContactState& state);

}  // namespace graspeq
