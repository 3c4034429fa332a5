#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "graspeq/geometry.hpp"
#include "graspeq/scene_model.hpp"

namespace graspeq {

// Skeleton layout
//   joints: 0 = wrist, then per finger f in {index, middle, ring, little, thumb}
//           1 + 4f .. 4 + 4f = base, second, third joint and tip.
//   parts:  1 = palm, 2 + 3f + k = segment k (0 proximal .. 2 distal) of finger f.
//   angles: per finger [abduction, flex base, flex second, flex third].
inline constexpr int kFingerCount = 5;
inline constexpr int kJointCount = 21;
inline constexpr int kAngleCount = 20;
inline constexpr int kPalmPart = 1;

enum Finger : int { kIndex = 0, kMiddle = 1, kRing = 2, kLittle = 3, kThumb = 4 };

constexpr int finger_part(int finger, int segment) { return 2 + 3 * finger + segment; }

// Pose parameter vector layout.
inline constexpr int kParamRotation = 0;
inline constexpr int kParamTranslation = 3;
inline constexpr int kParamAngles = 6;
inline constexpr int kParamScale = 26;
inline constexpr int kParamCount = 27;

using PoseParams = Eigen::Matrix<double, kParamCount, 1>;
using PointJacobian = Eigen::Matrix<double, 3, kParamCount>;

struct JointLimits {
  double flex_min = -0.3;
  double flex_max = 1.8;
  double abduction_min = -0.5;
  double abduction_max = 0.5;
  double scale_min = 0.7;
  double scale_max = 1.3;
};

inline constexpr JointLimits kJointLimits{};

struct HandPose {
  Vec3 global_rotation = Vec3::Zero();     // axis-angle, radians
  Vec3 global_translation = Vec3::Zero();  // meters
  std::array<double, kAngleCount> joint_angles{};
  double shape_scale = 1.0;

  bool operator==(const HandPose&) const = default;
};

/// Fixed rest-pose skeleton (version 1): per-finger base joint position and
/// orientation in the hand frame plus three segment lengths, for a scale of 1.
///
/// Hand frame: +y along the fingers, +x toward the thumb, +z out of the back
/// of the hand, so the palm faces -z and flexion curls fingers toward -z.
struct RestSkeleton {
  int version = 1;
  std::array<Vec3, kFingerCount> base;
  std::array<Mat3, kFingerCount> base_frame;
  std::array<std::array<double, 3>, kFingerCount> lengths;
  double finger_radius = 0.005;
  double palm_radius = 0.010;
  int samples_per_segment = 5;
};

const RestSkeleton& rest_skeleton();

struct HandGeometry {
  std::array<Vec3, kJointCount> joints;
  std::array<Vec3, kPartCount> part_centers;  // index part - 1
  std::vector<HandSample> samples;
  bool clamped = false;  // pose had to be clamped to the joint limits
};

/// Which joints a surface sample interpolates between.
struct SampleDefinition {
  int joint_a = 0;
  int joint_b = 0;
  double fraction = 0.0;
  int part = 0;
  double radius = 0.0;
};

const std::vector<SampleDefinition>& sample_definitions();

/// Joints bounding a part: two for finger segments, six for the palm.
std::vector<int> part_joints(int part);

struct HandKinematics {
  HandGeometry geometry;
  std::array<PointJacobian, kJointCount> joint_jacobians;

  PointJacobian part_center_jacobian(int part) const;
  PointJacobian sample_jacobian(std::size_t sample) const;
};

/// Clamps angles and scale into the limits; `clamped` reports whether anything moved.
HandPose clamp_to_limits(const HandPose& pose, bool* clamped = nullptr);

HandGeometry forward_kinematics(const HandPose& pose);

/// Forward kinematics plus d(joint)/d(pose params) for every joint. Parameters
/// held at a limit by clamping have zero Jacobian columns.
HandKinematics forward_kinematics_with_jacobian(const HandPose& pose);

/// Mean of the joints bounding `part` (1..16).
Vec3 part_center(const HandGeometry& geometry, int part);

PoseParams to_params(const HandPose& pose);
HandPose from_params(const PoseParams& params);

/// Per-parameter lower/upper bounds (+-inf for the global transform).
PoseParams param_lower_bounds();
PoseParams param_upper_bounds();

}  // namespace graspeq
