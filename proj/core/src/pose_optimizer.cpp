#include "graspeq/pose_optimizer.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "graspeq/box_qp.hpp"
#include "graspeq/error.hpp"

namespace graspeq {

void OptimizationConfig::validate() const {
  if (w_kp < 0.0 || w_c < 0.0 || w_pene < 0.0 || w_reg < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "loss weights must be non-negative");
  }
  if (!(step_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "step_size must be positive");
  if (max_iters_stage2 < 1 || max_iters_stage3 < 1) {
    throw Error(ErrorCode::InvalidArgument, "iteration limits must be at least 1");
  }
  if (!(mu >= 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be non-negative");
  if (!(f_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "f_max must be positive");
  if (!(contact.contact_radius > 0.0) || !(contact.threshold > 0.0) || contact.threshold > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "contact radius and threshold out of range");
  }
}

// ---------------------------------------------------------------------------
// Registration

namespace {

Mat3 smallest_rotation(const Vec3& from, const Vec3& to) {
  const Vec3 axis = from.cross(to);
  const double s = axis.norm();
  const double c = from.dot(to);
  if (s < 1e-12) {
    if (c > 0.0) return Mat3::Identity();
    return Eigen::AngleAxisd(std::numbers::pi, build_tangent_basis(from.normalized()).b)
        .toRotationMatrix();
  }
  return Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
}

}  // namespace

RigidTransform register_global(std::span<const Vec3> centers, std::span<const Vec3> targets) {
  if (centers.size() != targets.size()) {
    throw Error(ErrorCode::ShapeError, "registration needs equal-length point lists");
  }
  if (centers.empty()) {
    throw Error(ErrorCode::InvalidArgument, "registration needs at least one correspondence");
  }
  const double n = static_cast<double>(centers.size());
  Vec3 ca = Vec3::Zero();
  Vec3 cb = Vec3::Zero();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    ca += centers[i];
    cb += targets[i];
  }
  ca /= n;
  cb /= n;

  RigidTransform out;
  if (centers.size() < 3) {
    out.translation_only = true;
    out.rotation = Mat3::Identity();
  } else {
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < centers.size(); ++i) {
      h += (centers[i] - ca) * (targets[i] - cb).transpose();
    }
    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    const Mat3 u = svd.matrixU();
    const Mat3 v = svd.matrixV();
    if (sv[1] <= 1e-12 * std::max(sv[0], 1e-300)) {
      out.degenerate = true;
      out.rotation = sv[0] > 0.0 ? smallest_rotation(u.col(0), v.col(0)) : Mat3::Identity();
    } else {
      Mat3 d = Mat3::Identity();
      d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
      out.rotation = v * d * u.transpose();
    }
  }
  out.translation = cb - out.rotation * ca;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    out.residual += (targets[i] - (out.rotation * centers[i] + out.translation)).squaredNorm();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Losses

GraspObjective::GraspObjective(const ObjectModel* object, std::vector<int> parts,
                               std::vector<Vec3> targets,
                               std::optional<std::vector<double>> target_likelihood,
                               LossWeights weights, ContactParams contact)
    : object_(object),
      parts_(std::move(parts)),
      targets_(std::move(targets)),
      target_likelihood_(std::move(target_likelihood)),
      weights_(weights),
      contact_(contact) {
  if (parts_.size() != targets_.size()) {
    throw Error(ErrorCode::ShapeError, "keypoint parts and targets differ in length");
  }
  for (int p : parts_) part_joints(p);  // validates ids
  if (target_likelihood_ && object_ && target_likelihood_->size() != object_->size()) {
    throw Error(ErrorCode::ShapeError, "target likelihood must have one entry per object point");
  }
  if ((weights_.contact > 0.0 || weights_.pene > 0.0) && object_ == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "contact and penetration terms need an object");
  }
}

LossTerms GraspObjective::evaluate(const HandPose& pose, bool with_gradient) const {
  const HandKinematics kin = forward_kinematics_with_jacobian(pose);
  const HandGeometry& geo = kin.geometry;
  LossTerms out;

  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const Vec3 diff = targets_[i] - geo.part_centers[static_cast<std::size_t>(parts_[i] - 1)];
    out.kp += diff.squaredNorm();
    if (with_gradient) out.grad_kp += -2.0 * kin.part_center_jacobian(parts_[i]).transpose() * diff;
  }

  for (int i = 0; i < kAngleCount; ++i) {
    const double a = pose.joint_angles[static_cast<std::size_t>(i)];
    out.reg += a * a;
    out.grad_reg[kParamAngles + i] = 2.0 * a;
  }
  out.reg += (pose.shape_scale - 1.0) * (pose.shape_scale - 1.0);
  out.grad_reg[kParamScale] = 2.0 * (pose.shape_scale - 1.0);

  if (weights_.pene > 0.0) {
    for (std::size_t k = 0; k < geo.samples.size(); ++k) {
      const HandSample& s = geo.samples[k];
      const SurfaceQuery q = query_surface(*object_, s.point);
      const double depth = s.radius - q.signed_distance;
      if (depth > 0.0) {
        out.pene += depth;
        if (with_gradient) {
          out.grad_pene += -kin.sample_jacobian(k).transpose() * object_->normal(q.nearest);
        }
      }
    }
  }

  if (weights_.contact > 0.0 && target_likelihood_) {
    const double inv_n = 1.0 / static_cast<double>(object_->size());
    std::vector<Vec3> sample_grad(geo.samples.size(), Vec3::Zero());
    for (std::size_t i = 0; i < object_->size(); ++i) {
      const Vec3& o = object_->point(i);
      const HandDistance hd = nearest_hand_distance(o, geo.samples);
      const double c = likelihood_from_distance(hd.distance, contact_);
      const double diff = c - (*target_likelihood_)[i];
      out.contact += std::abs(diff) * inv_n;
      if (with_gradient && hd.distance > contact_.contact_radius && diff != 0.0) {
        const Vec3 rel = geo.samples[hd.sample].point - o;
        const double len = rel.norm();
        const double dc_dd = -contact_.contact_radius / (hd.distance * hd.distance);
        const double sign = diff > 0.0 ? 1.0 : -1.0;
        sample_grad[hd.sample] += sign * inv_n * dc_dd * rel / len;
      }
    }
    if (with_gradient) {
      for (std::size_t k = 0; k < sample_grad.size(); ++k) {
        if (sample_grad[k].squaredNorm() > 0.0) {
          out.grad_contact += kin.sample_jacobian(k).transpose() * sample_grad[k];
        }
      }
    }
  }

  out.total = weights_.kp * out.kp + weights_.contact * out.contact + weights_.pene * out.pene +
              weights_.reg * out.reg;
  if (with_gradient) {
    out.grad_total = weights_.kp * out.grad_kp + weights_.contact * out.grad_contact +
                     weights_.pene * out.grad_pene + weights_.reg * out.grad_reg;
  }
  return out;
}

double GraspObjective::kink_margin(const HandPose& pose) const {
  double margin = std::numeric_limits<double>::infinity();
  const PoseParams p = to_params(pose);
  const PoseParams lo = param_lower_bounds();
  const PoseParams hi = param_upper_bounds();
  for (int i = kParamAngles; i < kParamCount; ++i) {
    margin = std::min({margin, p[i] - lo[i], hi[i] - p[i]});
  }
  const HandGeometry geo = forward_kinematics(pose);
  if (weights_.pene > 0.0) {
    for (const auto& s : geo.samples) {
      const SurfaceQuery q = query_surface(*object_, s.point);
      margin = std::min(margin, std::abs(s.radius - q.signed_distance));
    }
  }
  if (weights_.contact > 0.0 && target_likelihood_) {
    for (std::size_t i = 0; i < object_->size(); ++i) {
      const HandDistance hd = nearest_hand_distance(object_->point(i), geo.samples);
      margin = std::min(margin, std::abs(hd.distance - contact_.contact_radius));
      if (hd.distance > contact_.contact_radius) {
        const double c = likelihood_from_distance(hd.distance, contact_);
        margin = std::min(margin, std::abs(c - (*target_likelihood_)[i]));
      }
    }
  }
  return margin;
}

double GraspObjective::switch_margin(const HandPose& pose) const {
  // Signed distance jumps at a switch, so samples a few millimeters outside
  // the hinge are included too.
  constexpr double kNear = 0.005;
  double margin = std::numeric_limits<double>::infinity();
  const HandGeometry geo = forward_kinematics(pose);
  if (weights_.pene > 0.0) {
    for (const auto& s : geo.samples) {
      const SurfaceQuery q = query_surface(*object_, s.point);
      if (s.radius - q.signed_distance > -kNear) margin = std::min(margin, q.switch_margin);
    }
  }
  if (weights_.contact > 0.0 && target_likelihood_) {
    for (std::size_t i = 0; i < object_->size(); ++i) {
      const HandDistance hd = nearest_hand_distance(object_->point(i), geo.samples);
      if (hd.distance > contact_.contact_radius) margin = std::min(margin, hd.switch_margin);
    }
  }
  return margin;
}

double keypoint_loss(const HandPose& pose, std::span<const int> parts, std::span<const Vec3> targets) {
  const HandGeometry geo = forward_kinematics(pose);
  double loss = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    loss += (targets[i] - part_center(geo, parts[i])).squaredNorm();
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Adaptive descent with backtracking

namespace {

struct StageSpec {
  int stage = 2;
  int max_iterations = 200;
  bool optimize_scale = false;
};

struct DescentOutcome {
  PoseParams x;
  bool aborted = false;
  std::string diagnostic;
};

PoseParams step_scales(const StageSpec& spec) {
  PoseParams s = PoseParams::Ones();
  s.segment<3>(kParamTranslation).setConstant(0.5);
  s[kParamScale] = spec.optimize_scale ? 0.5 : 0.0;
  return s;
}

DescentOutcome descend(const GraspObjective& objective, const PoseParams& x0, const StageSpec& spec,
                       const OptimizationConfig& config, OptimizationTrace* trace,
                       int& global_iteration) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  constexpr int max_backtracks = 20;
  constexpr int max_consecutive_rejects = 4;

  const PoseParams lo = param_lower_bounds();
  const PoseParams hi = param_upper_bounds();
  const PoseParams scales = step_scales(spec);

  DescentOutcome out;
  out.x = x0.cwiseMax(lo).cwiseMin(hi);
  LossTerms terms = objective.evaluate(from_params(out.x), true);
  if (!std::isfinite(terms.total)) {
    out.aborted = true;
    out.diagnostic = "non-finite loss at stage start";
    return out;
  }

  PoseParams m = PoseParams::Zero();
  PoseParams v = PoseParams::Zero();
  std::vector<double> history{terms.total};
  int rejects = 0;
  int t = 0;  // moment age; restarted after a rejected step
  for (int it = 1; it <= spec.max_iterations; ++it) {
    const PoseParams g = terms.grad_total.cwiseProduct((scales.array() > 0.0).cast<double>().matrix());
    ++t;
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseAbs2();
    const PoseParams m_hat = m / (1.0 - std::pow(beta1, t));
    const PoseParams v_hat = v / (1.0 - std::pow(beta2, t));
    const PoseParams direction =
        (m_hat.array() / (v_hat.array().sqrt() + eps)).matrix().cwiseProduct(scales);

    double alpha = config.step_size;
    bool accepted = false;
    bool non_finite = false;
    for (int bt = 0; bt < max_backtracks; ++bt, alpha *= 0.5) {
      const PoseParams trial = (out.x - alpha * direction).cwiseMax(lo).cwiseMin(hi);
      LossTerms trial_terms = objective.evaluate(from_params(trial), true);
      if (!std::isfinite(trial_terms.total)) {
        non_finite = true;
        continue;
      }
      if (trial_terms.total <= terms.total) {
        out.x = trial;
        terms = std::move(trial_terms);
        accepted = true;
        break;
      }
    }
    ++global_iteration;
    if (trace) {
      trace->records.push_back(TraceRecord{spec.stage, it, terms.total, terms.kp, terms.contact,
                                           terms.pene, terms.reg, accepted ? alpha : 0.0, accepted});
      if (config.snapshot_interval > 0 && global_iteration % config.snapshot_interval == 0) {
        trace->snapshots.emplace_back(global_iteration, from_params(out.x));
      }
    }
    if (!accepted) {
      if (non_finite) {
        out.aborted = true;
        out.diagnostic = "non-finite loss during stage " + std::to_string(spec.stage) +
                         " at iteration " + std::to_string(it);
        break;
      }
      if (++rejects >= max_consecutive_rejects) break;
      m.setZero();
      v.setZero();
      t = 0;
      continue;
    }
    rejects = 0;
    history.push_back(terms.total);
    const auto h = static_cast<int>(history.size());
    if (h > config.patience &&
        history[static_cast<std::size_t>(h - 1 - config.patience)] - terms.total <
            config.convergence_tol) {
      break;
    }
  }
  return out;
}

std::vector<double> likelihood_vector(const ContactState& state) { return state.likelihood; }

}  // namespace

HandPose fit_keypoints(const HandPose& pose0, const KeypointSet& keypoints,
                       const OptimizationConfig& config, OptimizationTrace* trace) {
  config.validate();
  const GraspObjective objective(nullptr, keypoints.parts, keypoints.targets, std::nullopt,
                                 LossWeights{1.0, 0.0, 0.0, 0.0}, config.contact);
  int global = trace ? static_cast<int>(trace->records.size()) : 0;
  const StageSpec spec{2, config.max_iters_stage2, false};
  const DescentOutcome res = descend(objective, to_params(pose0), spec, config, trace, global);
  return from_params(res.x);
}

GraspResult optimize_grasp(const HandPose& pose1, const ObjectModel& object,
                           const ContactState& contact_target, const KeypointSet& keypoints,
                           const OptimizationConfig& config) {
  config.validate();
  contact_target.validate(object.size());
  const GraspObjective objective(&object, keypoints.parts, keypoints.targets,
                                 likelihood_vector(contact_target),
                                 LossWeights{config.w_kp, config.w_c, config.w_pene, config.w_reg},
                                 config.contact);
  GraspResult out;
  int global = 0;
  const StageSpec spec{3, config.max_iters_stage3, true};
  const DescentOutcome res = descend(objective, to_params(pose1), spec, config, &out.trace, global);
  out.pose = from_params(res.x);
  out.aborted = res.aborted;
  out.diagnostic = res.diagnostic;
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

ForceExistenceResult solve_force_existence(const ObjectModel& object,
                                           std::span<const Contact> contacts, double mu,
                                           const Vec3& gravity, double f_min, double f_max) {
  const EquilibriumSystem sys = assemble(object, contacts, mu, gravity);
  const Eigen::Index n = sys.size();
  ForceExistenceResult out;
  out.forces.setZero(n);
  out.gamma.setZero(n);
  out.delta.setZero(n);

  // Variables per contact: (F, gamma F, delta F).
  Eigen::MatrixXd m(6, 3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m.col(3 * i) = sys.normal_wrench.col(i);
    m.col(3 * i + 1) = mu * sys.binormal_wrench.col(i);
    m.col(3 * i + 2) = mu * sys.tangent_wrench.col(i);
  }
  const Eigen::VectorXd c = sys.gravity6;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) x0[3 * i] = std::clamp(0.5 * f_max, f_min, f_max);
  const Projection project = [&](Eigen::VectorXd& x) {
    for (Eigen::Index i = 0; i < n; ++i) {
      project_friction_pyramid(x[3 * i], x[3 * i + 1], x[3 * i + 2], f_min, f_max);
    }
  };
  QpOptions options;
  options.tolerance = 1e-10;
  options.max_iterations = 20000;
  const QpResult qp = solve_projected_lsq(m, c, project, x0, options);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = qp.x[3 * i];
    out.forces[i] = f;
    out.gamma[i] = f > 0.0 ? qp.x[3 * i + 1] / f : 0.0;
    out.delta[i] = f > 0.0 ? qp.x[3 * i + 2] / f : 0.0;
  }
  out.accel = c + m * qp.x;
  out.energy = out.accel.squaredNorm();
  out.converged = qp.converged;
  return out;
}

GraspReport evaluate_grasp(const HandPose& pose, const ObjectModel& object,
                           const OptimizationConfig& config) {
  const HandGeometry geo = forward_kinematics(pose);
  GraspReport report;
  std::map<std::size_t, bool> touched;  // ordered for deterministic contact order
  for (const HandSample& s : geo.samples) {
    const SurfaceQuery q = query_surface(object, s.point);
    const double gap = q.signed_distance - s.radius;
    report.max_penetration = std::max(report.max_penetration, -gap);
    if (std::abs(gap) <= config.contact.contact_distance()) touched[q.nearest] = true;
  }
  for (const auto& [idx, unused] : touched) {
    report.contacts.push_back(Contact{object.point(idx), object.normal(idx), 0.0});
  }
  report.contact_count = static_cast<int>(report.contacts.size());
  const ForceExistenceResult fe =
      solve_force_existence(object, report.contacts, config.mu, config.gravity, 0.0, config.f_max);
  report.residual = fe.energy;
  for (std::size_t i = 0; i < report.contacts.size(); ++i) {
    report.contacts[i].force = fe.forces[static_cast<Eigen::Index>(i)];
  }
  return report;
}

}  // namespace graspeq
