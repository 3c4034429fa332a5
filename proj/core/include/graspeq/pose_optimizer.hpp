#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graspeq/equilibrium.hpp"
#include "graspeq/hand_model.hpp"
#include "graspeq/keypoint_selector.hpp"
#include "graspeq/scene_model.hpp"

namespace graspeq {

struct OptimizationConfig {
  double w_kp = 100.0;  // L_kp is in m^2, several orders below the other terms
  double w_c = 0.5;
  double w_pene = 10.0;
  double w_reg = 0.01;
  double step_size = 0.01;
  int max_iters_stage2 = 200;
  int max_iters_stage3 = 300;
  /// Stop a stage once the loss decreased by less than this over `patience` iterations.
  double convergence_tol = 1e-12;
  int patience = 10;
  std::uint64_t seed = 0;
  int snapshot_interval = 50;

  ContactParams contact;
  double mu = kDefaultFriction;
  Vec3 gravity = kDefaultGravity;
  double f_max = 20.0;  // per-contact force bound for grasp evaluation

  void validate() const;
};

// ---------------------------------------------------------------------------
// Stage I: rigid registration

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double residual = 0.0;          // sum |target - (R c + t)|^2
  bool degenerate = false;        // collinear correspondences; rotation about the line is free
  bool translation_only = false;  // fewer than three correspondences
};

/// Least-squares rigid transform taking `centers` onto `targets` (Kabsch with
/// reflection correction).
RigidTransform register_global(std::span<const Vec3> centers, std::span<const Vec3> targets);

// ---------------------------------------------------------------------------
// Losses

struct LossTerms {
  double kp = 0.0;
  double contact = 0.0;
  double pene = 0.0;
  double reg = 0.0;
  double total = 0.0;
  PoseParams grad_kp = PoseParams::Zero();
  PoseParams grad_contact = PoseParams::Zero();
  PoseParams grad_pene = PoseParams::Zero();
  PoseParams grad_reg = PoseParams::Zero();
  PoseParams grad_total = PoseParams::Zero();
};

struct LossWeights {
  double kp = 1.0;
  double contact = 0.0;
  double pene = 0.0;
  double reg = 0.0;
};

/// Weighted keypoint, contact, penetration and regularization losses of a hand
/// pose against one object, with analytic gradients through the kinematic chain.
///
///   L_kp   = sum_h |q_h - center_h|^2
///   L_c    = mean_i |C_i(hand) - C_i(target)|
///   L_pene = sum_k max(0, radius_k - sdf(sample_k))
///   L_reg  = |angles|^2 + (scale - 1)^2
class GraspObjective {
 public:
  GraspObjective(const ObjectModel* object, std::vector<int> parts, std::vector<Vec3> targets,
                 std::optional<std::vector<double>> target_likelihood, LossWeights weights,
                 ContactParams contact = {});

  LossTerms evaluate(const HandPose& pose, bool with_gradient) const;

  /// Distance of the pose from the nearest hinge of any active term
  /// (penetration onset, likelihood saturation, |C - C_target| sign, joint limits).
  double kink_margin(const HandPose& pose) const;

  /// Smallest nearest/second-nearest distance gap, in meters, over the
  /// surface queries that feed an active term. The gradient jumps where a
  /// nearest sample changes, so finite differences need steps well below this.
  double switch_margin(const HandPose& pose) const;

  const LossWeights& weights() const { return weights_; }

 private:
  const ObjectModel* object_;
  std::vector<int> parts_;
  std::vector<Vec3> targets_;
  std::optional<std::vector<double>> target_likelihood_;
  LossWeights weights_;
  ContactParams contact_;
};

double keypoint_loss(const HandPose& pose, std::span<const int> parts, std::span<const Vec3> targets);

// ---------------------------------------------------------------------------
// Stages II and III

struct TraceRecord {
  int stage = 0;
  int iteration = 0;
  double total = 0.0;
  double kp = 0.0;
  double contact = 0.0;
  double pene = 0.0;
  double reg = 0.0;
  double step = 0.0;
  bool accepted = false;
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  std::vector<std::pair<int, HandPose>> snapshots;  // (global iteration, pose)
};

/// Stage II: descends L_kp over the global transform and joint angles.
HandPose fit_keypoints(const HandPose& pose0, const KeypointSet& keypoints,
                       const OptimizationConfig& config, OptimizationTrace* trace = nullptr);

struct GraspResult {
  HandPose pose;
  OptimizationTrace trace;
  bool aborted = false;
  std::string diagnostic;
};

/// Stage III: descends the weighted objective over every pose parameter.
GraspResult optimize_grasp(const HandPose& pose1, const ObjectModel& object,
                           const ContactState& contact_target, const KeypointSet& keypoints,
                           const OptimizationConfig& config);

// ---------------------------------------------------------------------------
// Evaluation

struct ForceExistenceResult {
  double energy = 0.0;
  Eigen::VectorXd forces;
  Eigen::VectorXd gamma;
  Eigen::VectorXd delta;
  Vec6 accel = Vec6::Zero();
  bool converged = false;
};

/// min |a|^2 + |alpha|^2 over forces in [f_min, f_max] and gamma, delta in
/// [-1, 1], solved as a convex problem in (F, gamma F, delta F).
ForceExistenceResult solve_force_existence(const ObjectModel& object,
                                           std::span<const Contact> contacts, double mu,
                                           const Vec3& gravity, double f_min, double f_max);

struct GraspReport {
  double residual = 0.0;
  int contact_count = 0;
  double max_penetration = 0.0;  // meters
  std::vector<Contact> contacts; // forces filled from the existence solve
};

GraspReport evaluate_grasp(const HandPose& pose, const ObjectModel& object,
                           const OptimizationConfig& config);

}  // namespace graspeq
