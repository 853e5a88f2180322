#include "omniteleop/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace omniteleop {

namespace {
constexpr double kPi = std::numbers::pi;
}

bool RobotState::finite() const {
  return position.allFinite() && rotation.allFinite() && velocity.allFinite() &&
         angular_velocity.allFinite();
}

void VehicleParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("vehicle: mass must be positive");
  if (!(arm_length > 0.0)) throw std::invalid_argument("vehicle: arm length must be positive");
  if (!(thrust_coeff > 0.0)) throw std::invalid_argument("vehicle: k_f must be positive");
  if (drag_coeff < 0.0) throw std::invalid_argument("vehicle: k_m must be non-negative");
  if (!(rotor_speed_max > 0.0)) throw std::invalid_argument("vehicle: rotor speed max must be positive");
  if ((inertia - inertia.transpose()).norm() > 1e-12) {
    throw std::invalid_argument("vehicle: inertia must be symmetric");
  }
  if (Eigen::LLT<Mat3>(inertia).info() != Eigen::Success) {
    throw std::invalid_argument("vehicle: inertia must be positive definite");
  }
  for (double d : spin) {
    if (d != 1.0 && d != -1.0) throw std::invalid_argument("vehicle: spin must be +1 or -1");
  }
}

Vec3 VehicleParams::rotor_position(int i) const {
  return arm_length * Vec3(std::cos(arm_azimuth[i]), std::sin(arm_azimuth[i]), 0.0);
}

Vec3 VehicleParams::lateral_axis(int i) const {
  return {-std::sin(arm_azimuth[i]), std::cos(arm_azimuth[i]), 0.0};
}

Mat6 VehicleParams::mass_matrix() const {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = mass * Mat3::Identity();
  m.bottomRightCorner<3, 3>() = inertia;
  return m;
}

void ActuatorDynamicsParams::validate() const {
  if (!(servo_time_constant > 0.0) || !(rotor_time_constant > 0.0)) {
    throw std::invalid_argument("actuators: time constants must be positive");
  }
  if (!(servo_rate_limit > 0.0)) throw std::invalid_argument("actuators: rate limit must be positive");
  if (servo_noise_std < 0.0) throw std::invalid_argument("actuators: noise std must be non-negative");
}

void WallEnvironment::validate() const {
  if (stiffness < 0.0 || damping < 0.0 || tangential_damping < 0.0 || friction < 0.0) {
    throw std::invalid_argument("wall: coefficients must be non-negative");
  }
  if (std::abs(normal.norm() - 1.0) > 1e-9) throw std::invalid_argument("wall: normal must be unit");
  if (!(radius > 0.0)) throw std::invalid_argument("wall: radius must be positive");
}

Wrench actuator_wrench(const ActuatorState& act, const VehicleParams& params) {
  Wrench w;
  const double drag_ratio = params.drag_coeff / params.thrust_coeff;
  for (int i = 0; i < kNumRotors; ++i) {
    const double alpha = act.tilt[i];
    const double speed = act.rotor_speed[i];
    if (!(alpha >= -kPi && alpha <= kPi) || !(speed >= 0.0 && speed <= params.rotor_speed_max)) {
      throw std::out_of_range("actuator_wrench: actuator state out of range");
    }
    const double thrust = params.thrust_coeff * speed * speed;
    // Tilting about the inboard arm axis swings z_M toward the counter-clockwise tangent.
    const Vec3 direction = std::cos(alpha) * Vec3::UnitZ() + std::sin(alpha) * params.lateral_axis(i);
    const Vec3 force = thrust * direction;
    w.force += force;
    w.torque += params.rotor_position(i).cross(force) + params.spin[i] * drag_ratio * force;
  }
  return w;
}

Vec3 body_acceleration(const RobotState& s, const Wrench& actuation, const Wrench& external,
                       const VehicleParams& params) {
  return (actuation.force + external.force) / params.mass - s.angular_velocity.cross(s.velocity);
}

RobotState step_dynamics(const RobotState& s, const Wrench& actuation, const Wrench& external,
                         const VehicleParams& params, double dt) {
  if (!(dt > 0.0 && dt <= 0.01)) throw std::invalid_argument("step_dynamics: dt must be in (0, 0.01]");

  // Momenta are advanced in the world frame; this is the body-frame Newton-Euler
  // equation with the omega x (.) terms absorbed by the frame change.
  const Rotation& r = s.rotation;
  const Vec3 gravity_world{0.0, 0.0, -params.gravity};
  const Vec3 force_world = r * (actuation.force + external.force);
  const Vec3 torque_world = r * (actuation.torque + external.torque);

  RobotState next;
  const Vec3 v_world = r * s.velocity + dt * (force_world / params.mass + gravity_world);
  next.position = s.position + dt * v_world;

  const Vec3 momentum_world = r * (params.inertia * s.angular_velocity) + dt * torque_world;
  const Mat3 inertia_inv = params.inertia.inverse();
  // Midpoint attitude: angular velocity re-evaluated half a step ahead.
  const Rotation r_half = so3::integrate_rotation(r, inertia_inv * (r.transpose() * momentum_world), 0.5 * dt);
  const Vec3 omega_half_world = r_half * (inertia_inv * (r_half.transpose() * momentum_world));
  next.rotation = so3::integrate_rotation(r, r.transpose() * omega_half_world, dt);
  next.angular_velocity = inertia_inv * (next.rotation.transpose() * momentum_world);
  next.velocity = next.rotation.transpose() * v_world;

  if (!next.finite()) throw SimulationDiverged("step_dynamics: non-finite state", s);
  return next;
}

ActuatorCommand clamp_command(const ActuatorCommand& cmd, double rotor_speed_max) {
  ActuatorCommand out;
  for (int i = 0; i < kNumRotors; ++i) {
    out.tilt[i] = std::clamp(cmd.tilt[i], -kPi, kPi);
    out.rotor_speed[i] = std::clamp(cmd.rotor_speed[i], 0.0, rotor_speed_max);
  }
  return out;
}

ActuatorState step_actuators(const ActuatorState& act, const ActuatorCommand& cmd,
                             const ActuatorDynamicsParams& dyn, double dt, std::mt19937_64* rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_actuators: dt must be positive");
  const ActuatorCommand target = clamp_command(cmd);
  const double servo_gain = 1.0 - std::exp(-dt / dyn.servo_time_constant);
  const double rotor_gain = 1.0 - std::exp(-dt / dyn.rotor_time_constant);
  const double max_step = dyn.servo_rate_limit * dt;

  ActuatorState next;
  for (int i = 0; i < kNumRotors; ++i) {
    const double delta = std::clamp(servo_gain * (target.tilt[i] - act.tilt[i]), -max_step, max_step);
    double tilt = act.tilt[i] + delta;
    if (dyn.servo_noise_std > 0.0 && rng != nullptr) {
      std::normal_distribution<double> noise(0.0, dyn.servo_noise_std);
      tilt += noise(*rng);
    }
    next.tilt[i] = std::clamp(tilt, -kPi, kPi);
    next.rotor_speed[i] = std::clamp(
        act.rotor_speed[i] + rotor_gain * (target.rotor_speed[i] - act.rotor_speed[i]), 0.0,
        kRotorSpeedMax);
  }
  return next;
}

Vec3 contact_force_world(const RobotState& s, const WallEnvironment& wall) {
  if (!wall.enabled) return Vec3::Zero();
  const double distance = (s.position - wall.point).dot(wall.normal);
  if (distance > wall.radius) return Vec3::Zero();

  const double penetration = wall.radius - distance;
  const Vec3 v_world = s.world_velocity();
  const double approach_rate = v_world.dot(wall.normal);
  const double normal_force =
      std::max(0.0, wall.stiffness * penetration + wall.damping * std::max(0.0, -approach_rate));

  const Vec3 v_tangent = v_world - approach_rate * wall.normal;
  Vec3 tangential = -wall.tangential_damping * v_tangent;
  const double cap = wall.friction * normal_force;
  if (tangential.norm() > cap) tangential *= cap / tangential.norm();

  return normal_force * wall.normal + tangential;
}

Wrench contact_wrench(const RobotState& s, const WallEnvironment& wall) {
  return {s.rotation.transpose() * contact_force_world(s, wall), Vec3::Zero()};
}

ImuSample simulate_imu(const RobotState& s, const Vec3& body_accel, const ImuNoise& noise,
                       std::mt19937_64& rng, double timestamp) {
  ImuSample sample;
  sample.timestamp = timestamp;
  sample.accel = s.rotation.transpose() * Vec3(0.0, 0.0, 9.81) + body_accel;
  sample.gyro = s.angular_velocity;
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 3; ++k) sample.accel[k] += noise.accel_std * unit(rng);
  for (int k = 0; k < 3; ++k) sample.gyro[k] += noise.gyro_std * unit(rng);
  return sample;
}

}  // namespace omniteleop
