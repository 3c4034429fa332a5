#include "graspeq/pipeline.hpp"

#include "graspeq/geometry.hpp"

namespace graspeq {

HandPose register_rest_hand(const KeypointSet& keypoints, RigidTransform* transform) {
  const HandGeometry rest = forward_kinematics(HandPose{});
  std::vector<Vec3> centers;
  for (int part : keypoints.parts) centers.push_back(part_center(rest, part));
  const RigidTransform tf = register_global(centers, keypoints.targets);
  if (transform) *transform = tf;
  HandPose pose;
  pose.global_rotation = axis_angle_from_rotation(tf.rotation);
  pose.global_translation = tf.translation;
  return pose;
}

PipelineResult run_pipeline(const ObjectModel& object, const ContactState& contacts,
                            const OptimizationConfig& config, const KeypointParams& keypoint_params) {
  config.validate();
  PipelineResult out;
  out.keypoints = extract_keypoints(object, contacts, keypoint_params);
  out.stage1 = register_rest_hand(out.keypoints, &out.registration);
  out.stage2 = fit_keypoints(out.stage1, out.keypoints, config, &out.stage2_trace);
  out.stage3 = optimize_grasp(out.stage2, object, contacts, out.keypoints, config);
  return out;
}

HandPose approach_pose(const ObjectModel& object, const ContactState& contacts) {
  Vec3 centroid = Vec3::Zero();
  double weight = 0.0;
  for (std::size_t i = 0; i < object.size(); ++i) {
    const double w = contacts.likelihood[i];
    centroid += w * object.point(i);
    weight += w;
  }
  Vec3 dir = weight > 0.0 ? Vec3(centroid / weight - object.com()) : Vec3::Zero();
  if (dir.norm() < 1e-9) dir = Vec3::UnitX();
  dir.normalize();

  // Hand -z (palm normal) must point back at the object: -R e_z = -dir.
  const TangentBasis basis = build_tangent_basis(dir);
  Mat3 rotation;
  rotation.col(0) = basis.b;
  rotation.col(1) = basis.t;
  rotation.col(2) = dir;

  HandPose pose;
  pose.global_rotation = axis_angle_from_rotation(rotation);
  const HandGeometry rest = forward_kinematics(HandPose{});
  const Vec3 palm_local = part_center(rest, kPalmPart);
  const Vec3 palm_target = object.com() + (object.bounding_radius() + 0.010) * dir;
  pose.global_translation = palm_target - rotation * palm_local;
  return pose;
}

GraspResult run_keypoint_free(const ObjectModel& object, const ContactState& contacts,
                              const OptimizationConfig& config) {
  OptimizationConfig cfg = config;
  cfg.w_kp = 0.0;
  return optimize_grasp(approach_pose(object, contacts), object, contacts, KeypointSet{}, cfg);
}

}  // namespace graspeq
