#include "omniteleop/madgwick.hpp"

#include <stdexcept>

namespace omniteleop {

MadgwickState madgwick_update(const MadgwickState& ms, const ImuSample& imu, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("madgwick_update: dt must be positive");
  const double q0 = ms.q.w(), q1 = ms.q.x(), q2 = ms.q.y(), q3 = ms.q.z();
  const Vec3& g = imu.gyro;

  // q_dot = 1/2 q (x) (0, gyro)
  Eigen::Vector4d q_dot(0.5 * (-q1 * g.x() - q2 * g.y() - q3 * g.z()),
                        0.5 * (q0 * g.x() + q2 * g.z() - q3 * g.y()),
                        0.5 * (q0 * g.y() - q1 * g.z() + q3 * g.x()),
                        0.5 * (q0 * g.z() + q1 * g.y() - q2 * g.x()));

  const double a_norm = imu.accel.norm();
  if (a_norm > 0.0) {
    const Vec3 a = imu.accel / a_norm;
    // objective: gravity predicted in the sensor frame minus the measurement
    const Vec3 f(2.0 * (q1 * q3 - q0 * q2) - a.x(), 2.0 * (q0 * q1 + q2 * q3) - a.y(),
                 2.0 * (0.5 - q1 * q1 - q2 * q2) - a.z());
    Eigen::Matrix<double, 3, 4> jacobian;
    jacobian << -2.0 * q2, 2.0 * q3, -2.0 * q0, 2.0 * q1,
                2.0 * q1, 2.0 * q0, 2.0 * q3, 2.0 * q2,
                0.0, -4.0 * q1, -4.0 * q2, 0.0;
    Eigen::Vector4d step = jacobian.transpose() * f;
    const double step_norm = step.norm();
    if (step_norm > 0.0) q_dot -= ms.beta * step / step_norm;
  }

  MadgwickState next = ms;
  Eigen::Vector4d q(q0, q1, q2, q3);
  q += dt * q_dot;
  q.normalize();
  next.q = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
  return next;
}

}  // namespace omniteleop
