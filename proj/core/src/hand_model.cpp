#include "graspeq/hand_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "graspeq/error.hpp"

namespace graspeq {

namespace {

constexpr int base_joint(int finger) { return 1 + 4 * finger; }

RestSkeleton make_rest_skeleton() {
  RestSkeleton s;
  // Average adult proportions, meters. Finger bases sit on the knuckle line.
  s.base[kIndex] = Vec3(0.024, 0.086, 0.0);
  s.base[kMiddle] = Vec3(0.004, 0.089, 0.0);
  s.base[kRing] = Vec3(-0.015, 0.084, 0.0);
  s.base[kLittle] = Vec3(-0.032, 0.076, 0.0);
  s.base[kThumb] = Vec3(0.024, 0.022, -0.012);

  s.lengths[kIndex] = {0.040, 0.024, 0.020};
  s.lengths[kMiddle] = {0.045, 0.028, 0.021};
  s.lengths[kRing] = {0.042, 0.027, 0.020};
  s.lengths[kLittle] = {0.033, 0.019, 0.018};
  s.lengths[kThumb] = {0.045, 0.032, 0.025};

  // Slight fan of the long fingers; the thumb points out 45 degrees in the
  // palm plane and is rolled so that its flexion crosses the palm.
  s.base_frame[kIndex] = rotation_z(-0.08);
  s.base_frame[kMiddle] = Mat3::Identity();
  s.base_frame[kRing] = rotation_z(0.06);
  s.base_frame[kLittle] = rotation_z(0.12);
  s.base_frame[kThumb] = rotation_z(-std::numbers::pi / 4.0) * rotation_y(std::numbers::pi / 3.0);
  return s;
}

std::vector<SampleDefinition> make_sample_definitions(const RestSkeleton& s) {
  std::vector<SampleDefinition> defs;
  const int per = s.samples_per_segment;
  for (int f = 0; f < kFingerCount; ++f) {
    if (f == kThumb) continue;
    for (int k = 0; k < per; ++k) {
      defs.push_back({0, base_joint(f), (k + 0.5) / per, kPalmPart, s.palm_radius});
    }
  }
  for (int f = 0; f < kFingerCount; ++f) {
    for (int seg = 0; seg < 3; ++seg) {
      for (int k = 0; k < per; ++k) {
        defs.push_back({base_joint(f) + seg, base_joint(f) + seg + 1, (k + 0.5) / per,
                        finger_part(f, seg), s.finger_radius});
      }
    }
  }
  return defs;
}

struct LocalChain {
  std::array<Vec3, kJointCount> unit;  // joint positions at scale 1, hand frame
  // d(unit joint)/d(angle) in the hand frame, one column per angle.
  std::array<Eigen::Matrix<double, 3, kAngleCount>, kJointCount> d_angle;
};

LocalChain local_chain(const HandPose& pose, const std::array<bool, kAngleCount>& frozen) {
  const RestSkeleton& s = rest_skeleton();
  LocalChain c;
  c.unit[0] = Vec3::Zero();
  for (auto& d : c.d_angle) d.setZero();

  for (int f = 0; f < kFingerCount; ++f) {
    const int a0 = 4 * f;
    const double abd = pose.joint_angles[static_cast<std::size_t>(a0)];
    const int j0 = base_joint(f);

    // Rotation axes (hand frame) and pivots for the four angles of this finger.
    std::array<Vec3, 4> axis;
    std::array<int, 4> pivot{j0, j0, j0 + 1, j0 + 2};

    const Mat3 frame0 = s.base_frame[static_cast<std::size_t>(f)];
    const Mat3 after_abd = frame0 * rotation_z(abd);
    axis[0] = frame0.col(2);
    Mat3 frame = after_abd;
    c.unit[static_cast<std::size_t>(j0)] = s.base[static_cast<std::size_t>(f)];
    for (int seg = 0; seg < 3; ++seg) {
      const double flex = pose.joint_angles[static_cast<std::size_t>(a0 + 1 + seg)];
      // Flexion by +angle curls toward the palm: rotation about local x by -angle.
      axis[static_cast<std::size_t>(seg + 1)] = -frame.col(0);
      frame = frame * rotation_x(-flex);
      c.unit[static_cast<std::size_t>(j0 + seg + 1)] =
          c.unit[static_cast<std::size_t>(j0 + seg)] +
          s.lengths[static_cast<std::size_t>(f)][static_cast<std::size_t>(seg)] * frame.col(1);
    }
    for (int k = 0; k < 4; ++k) {
      if (frozen[static_cast<std::size_t>(a0 + k)]) continue;
      const Vec3& o = c.unit[static_cast<std::size_t>(pivot[static_cast<std::size_t>(k)])];
      // Every joint distal to the pivot moves.
      for (int j = pivot[static_cast<std::size_t>(k)] + 1; j <= j0 + 3; ++j) {
        c.d_angle[static_cast<std::size_t>(j)].col(a0 + k) =
            axis[static_cast<std::size_t>(k)].cross(c.unit[static_cast<std::size_t>(j)] - o);
      }
    }
  }
  return c;
}

HandGeometry finish_geometry(const std::array<Vec3, kJointCount>& joints, bool clamped) {
  HandGeometry g;
  g.joints = joints;
  g.clamped = clamped;
  for (int p = 1; p <= kPartCount; ++p) {
    g.part_centers[static_cast<std::size_t>(p - 1)] = part_center(g, p);
  }
  const auto& defs = sample_definitions();
  g.samples.reserve(defs.size());
  for (const auto& d : defs) {
    const Vec3 pt = (1.0 - d.fraction) * joints[static_cast<std::size_t>(d.joint_a)] +
                    d.fraction * joints[static_cast<std::size_t>(d.joint_b)];
    g.samples.push_back(HandSample{pt, d.part, d.radius});
  }
  return g;
}

}  // namespace

const RestSkeleton& rest_skeleton() {
  static const RestSkeleton skeleton = make_rest_skeleton();
  return skeleton;
}

const std::vector<SampleDefinition>& sample_definitions() {
  static const std::vector<SampleDefinition> defs = make_sample_definitions(rest_skeleton());
  return defs;
}

std::vector<int> part_joints(int part) {
  if (part < 1 || part > kPartCount) {
    throw Error(ErrorCode::InvalidPart, "hand part id must be in 1..16, got " + std::to_string(part));
  }
  if (part == kPalmPart) {
    std::vector<int> joints{0};
    for (int f = 0; f < kFingerCount; ++f) joints.push_back(base_joint(f));
    return joints;
  }
  const int finger = (part - 2) / 3;
  const int seg = (part - 2) % 3;
  return {base_joint(finger) + seg, base_joint(finger) + seg + 1};
}

Vec3 part_center(const HandGeometry& geometry, int part) {
  const auto joints = part_joints(part);
  Vec3 sum = Vec3::Zero();
  for (int j : joints) sum += geometry.joints[static_cast<std::size_t>(j)];
  return sum / static_cast<double>(joints.size());
}

PointJacobian HandKinematics::part_center_jacobian(int part) const {
  const auto joints = part_joints(part);
  PointJacobian jac = PointJacobian::Zero();
  for (int j : joints) jac += joint_jacobians[static_cast<std::size_t>(j)];
  return jac / static_cast<double>(joints.size());
}

PointJacobian HandKinematics::sample_jacobian(std::size_t sample) const {
  const auto& d = sample_definitions()[sample];
  return (1.0 - d.fraction) * joint_jacobians[static_cast<std::size_t>(d.joint_a)] +
         d.fraction * joint_jacobians[static_cast<std::size_t>(d.joint_b)];
}

HandPose clamp_to_limits(const HandPose& pose, bool* clamped) {
  HandPose out = pose;
  bool moved = false;
  for (int i = 0; i < kAngleCount; ++i) {
    const bool abduction = i % 4 == 0;
    const double lo = abduction ? kJointLimits.abduction_min : kJointLimits.flex_min;
    const double hi = abduction ? kJointLimits.abduction_max : kJointLimits.flex_max;
    auto& a = out.joint_angles[static_cast<std::size_t>(i)];
    const double c = std::clamp(a, lo, hi);
    if (c != a) moved = true;
    a = c;
  }
  const double s = std::clamp(out.shape_scale, kJointLimits.scale_min, kJointLimits.scale_max);
  if (s != out.shape_scale) moved = true;
  out.shape_scale = s;
  if (clamped) *clamped = moved;
  return out;
}

HandGeometry forward_kinematics(const HandPose& pose) {
  return forward_kinematics_with_jacobian(pose).geometry;
}

HandKinematics forward_kinematics_with_jacobian(const HandPose& raw_pose) {
  bool clamped = false;
  const HandPose pose = clamp_to_limits(raw_pose, &clamped);
  std::array<bool, kAngleCount> frozen{};
  for (int i = 0; i < kAngleCount; ++i) {
    frozen[static_cast<std::size_t>(i)] =
        pose.joint_angles[static_cast<std::size_t>(i)] != raw_pose.joint_angles[static_cast<std::size_t>(i)];
  }
  const bool scale_frozen = pose.shape_scale != raw_pose.shape_scale;

  const LocalChain chain = local_chain(pose, frozen);
  const Mat3 rot = rotation_from_axis_angle(pose.global_rotation);
  const Mat3 jr = right_jacobian_so3(pose.global_rotation);
  const double s = pose.shape_scale;

  HandKinematics out;
  std::array<Vec3, kJointCount> joints;
  for (int j = 0; j < kJointCount; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const Vec3 local = s * chain.unit[ju];
    joints[ju] = rot * local + pose.global_translation;

    PointJacobian& jac = out.joint_jacobians[ju];
    jac.setZero();
    jac.block<3, 3>(0, kParamRotation) = -rot * skew(local) * jr;
    jac.block<3, 3>(0, kParamTranslation) = Mat3::Identity();
    jac.block<3, kAngleCount>(0, kParamAngles) = s * rot * chain.d_angle[ju];
    if (!scale_frozen) jac.col(kParamScale) = rot * chain.unit[ju];
  }
  out.geometry = finish_geometry(joints, clamped);
  return out;
}

PoseParams to_params(const HandPose& pose) {
  PoseParams p;
  p.segment<3>(kParamRotation) = pose.global_rotation;
  p.segment<3>(kParamTranslation) = pose.global_translation;
  for (int i = 0; i < kAngleCount; ++i) p[kParamAngles + i] = pose.joint_angles[static_cast<std::size_t>(i)];
  p[kParamScale] = pose.shape_scale;
  return p;
}

HandPose from_params(const PoseParams& p) {
  HandPose pose;
  pose.global_rotation = p.segment<3>(kParamRotation);
  pose.global_translation = p.segment<3>(kParamTranslation);
  for (int i = 0; i < kAngleCount; ++i) pose.joint_angles[static_cast<std::size_t>(i)] = p[kParamAngles + i];
  pose.shape_scale = p[kParamScale];
  return pose;
}

PoseParams param_lower_bounds() {
  PoseParams lo = PoseParams::Constant(-std::numeric_limits<double>::infinity());
  for (int i = 0; i < kAngleCount; ++i) {
    lo[kParamAngles + i] = i % 4 == 0 ? kJointLimits.abduction_min : kJointLimits.flex_min;
  }
  lo[kParamScale] = kJointLimits.scale_min;
  return lo;
}

PoseParams param_upper_bounds() {
  PoseParams hi = PoseParams::Constant(std::numeric_limits<double>::infinity());
  for (int i = 0; i < kAngleCount; ++i) {
    hi[kParamAngles + i] = i % 4 == 0 ? kJointLimits.abduction_max : kJointLimits.flex_max;
  }
  hi[kParamScale] = kJointLimits.scale_max;
  return hi;
}

}  // namespace graspeq
