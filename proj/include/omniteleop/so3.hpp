#pragma once

#include <Eigen/Dense>

namespace omniteleop {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Rotation matrices are plain 3x3 orthonormal matrices with det = +1.
using Rotation = Eigen::Matrix3d;

namespace so3 {

inline constexpr double kSkewTolerance = 1e-9;
inline constexpr double kQMapEpsilon = 1e-6;
inline constexpr double kGimbalTolerance = 1e-6;

/// Skew-symmetric matrix such that hat(v) * w == v.cross(w).
Mat3 hat(const Vec3& v);

/// Inverse of hat. Throws std::invalid_argument when ||M + M^T|| exceeds kSkewTolerance.
Vec3 vee(const Mat3& m);

/// Rodrigues formula for exp(hat(phi)).
Rotation exp(const Vec3& phi);

/// Rotation vector of R, angle in [0, pi].
Vec3 log(const Rotation& r);

Rotation rot_x(double angle);
Rotation rot_y(double angle);
Rotation rot_z(double angle);

/// Columns re-orthonormalized by Gram-Schmidt (x first, then y, z = x × y).
Rotation orthonormalize(const Rotation& r);

/// R * exp(hat(omega) * dt), omega in the body frame, then re-orthonormalized.
Rotation integrate_rotation(const Rotation& r, const Vec3& omega, double dt);

bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Stick-orientation map used to turn an attitude into a normalized rate command.
enum class QVariant {
  kPaperNormalized,  // unit axis (R - R^T)^v / ||(R - R^T)^v||, zero below epsilon
  kSinAxis,          // (R - R^T)^v / 2 = sin(angle) * axis
};

Vec3 q_map(const Rotation& r, QVariant variant = QVariant::kSinAxis,
           double epsilon = kQMapEpsilon);

struct EulerZYX {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  // |pitch| within kGimbalTolerance of pi/2: roll and yaw are not separable.
  bool gimbal_degenerate = false;
};

EulerZYX euler_zyx(const Rotation& r);
Rotation from_euler_zyx(double roll, double pitch, double yaw);

Eigen::Quaterniond to_quaternion(const Rotation& r);
Rotation from_quaternion(const Eigen::Quaterniond& q);

}  // namespace so3
}  // namespace omniteleop
