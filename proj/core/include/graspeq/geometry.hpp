#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace graspeq {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Cross-product matrix: skew(a) * b == a.cross(b).
Mat3 skew(const Vec3& a);

Mat3 rotation_x(double angle);
Mat3 rotation_y(double angle);
Mat3 rotation_z(double angle);

/// Exponential map of so(3); the vector norm is the rotation angle in radians.
Mat3 rotation_from_axis_angle(const Vec3& axis_angle);

/// Logarithm of SO(3), returning an angle in [0, pi].
Vec3 axis_angle_from_rotation(const Mat3& rotation);

/// Right Jacobian of SO(3): d(exp(w) v)/dw == -exp(w) * skew(v) * right_jacobian(w).
Mat3 right_jacobian_so3(const Vec3& axis_angle);

/// Angle of the relative rotation a^T b.
double rotation_distance(const Mat3& a, const Mat3& b);

}  // namespace graspeq
