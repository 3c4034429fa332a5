#pragma once

#include <string>

#include "graspeq/keypoint_selector.hpp"
#include "graspeq/pose_optimizer.hpp"

namespace graspeq {

struct PipelineResult {
  KeypointSet keypoints;
  RigidTransform registration;
  HandPose stage1;
  HandPose stage2;
  GraspResult stage3;
  OptimizationTrace stage2_trace;
};

/// Stage I: registers the rest-pose centers of the keypoint parts onto the targets.
HandPose register_rest_hand(const KeypointSet& keypoints, RigidTransform* transform = nullptr);

/// Keypoint extraction followed by stages I, II and III.
PipelineResult run_pipeline(const ObjectModel& object, const ContactState& contacts,
                            const OptimizationConfig& config, const KeypointParams& keypoint_params);

/// Rest hand placed palm-down toward the object, approaching from the side of
/// the force-weighted contact centroid.
HandPose approach_pose(const ObjectModel& object, const ContactState& contacts);

/// Baseline without keypoints: stage III alone from the approach pose with w_kp = 0.
GraspResult run_keypoint_free(const ObjectModel& object, const ContactState& contacts,
                              const OptimizationConfig& config);

}  // namespace graspeq
