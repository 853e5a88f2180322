#include "omniteleop/so3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omniteleop::so3 {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) {
  if ((m + m.transpose()).norm() > kSkewTolerance) {
    throw std::invalid_argument("vee: matrix is not skew-symmetric");
  }
  return {m(2, 1), m(0, 2), m(1, 0)};
}

Rotation exp(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = hat(phi);
  if (theta < 1e-8) {
    // second-order Taylor expansion
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  return Mat3::Identity() + (std::sin(theta) / theta) * k +
         ((1.0 - std::cos(theta)) / (theta * theta)) * k * k;
}

Vec3 log(const Rotation& r) {
  const double cos_theta = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Vec3 w{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
  if (theta < 1e-8) {
    return 0.5 * w;
  }
  if (std::numbers::pi - theta < 1e-6) {
    // axis from the symmetric part: R = 2 a a^T - I near pi
    const Mat3 b = 0.5 * (r + Mat3::Identity());
    int i = 0;
    b.diagonal().maxCoeff(&i);
    Vec3 axis = b.col(i) / std::sqrt(std::max(b(i, i), 1e-300));
    if (axis.dot(w) < 0.0) axis = -axis;
    return theta * axis.normalized();
  }
  return (theta / (2.0 * std::sin(theta))) * w;
}

Rotation rot_x(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix();
}

Rotation rot_y(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix();
}

Rotation rot_z(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

Rotation orthonormalize(const Rotation& r) {
  const Vec3 x = r.col(0).normalized();
  Vec3 y = r.col(1) - x.dot(r.col(1)) * x;
  y.normalize();
  Rotation out;
  out.col(0) = x;
  out.col(1) = y;
  out.col(2) = x.cross(y);
  return out;
}

Rotation integrate_rotation(const Rotation& r, const Vec3& omega, double dt) {
  return orthonormalize(r * exp(omega * dt));
}

bool is_rotation(const Mat3& r, double tol) {
  return (r * r.transpose() - Mat3::Identity()).norm() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

Vec3 q_map(const Rotation& r, QVariant variant, double epsilon) {
  const Vec3 v{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
  switch (variant) {
    case QVariant::kSinAxis:
      return 0.5 * v;
    case QVariant::kPaperNormalized: {
      const double n = v.norm();
      if (n < epsilon) return Vec3::Zero();
      return v / n;
    }
  }
  return Vec3::Zero();
}

EulerZYX euler_zyx(const Rotation& r) {
  EulerZYX e;
  const double s = std::clamp(-r(2, 0), -1.0, 1.0);
  e.pitch = std::asin(s);
  e.gimbal_degenerate = std::abs(std::abs(e.pitch) - std::numbers::pi / 2) < kGimbalTolerance;
  if (e.gimbal_degenerate) {
    // only one combination of roll and yaw is observable; report it as roll
    e.yaw = 0.0;
    e.roll = std::atan2(-r(1, 2), r(1, 1));
    return e;
  }
  e.roll = std::atan2(r(2, 1), r(2, 2));
  e.yaw = std::atan2(r(1, 0), r(0, 0));
  return e;
}

Rotation from_euler_zyx(double roll, double pitch, double yaw) {
  return rot_z(yaw) * rot_y(pitch) * rot_x(roll);
}

Eigen::Quaterniond to_quaternion(const Rotation& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

Rotation from_quaternion(const Eigen::Quaterniond& q) {
  return q.normalized().toRotationMatrix();
}

}  // namespace omniteleop::so3
