#pragma once

#include <array>
#include <numbers>
#include <random>
#include <stdexcept>

#include "omniteleop/so3.hpp"

namespace omniteleop {

/// Body-frame force and torque.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 out;
    out << force, torque;
    return out;
  }
  static Wrench from_stacked(const Vec6& w) { return {w.head<3>(), w.tail<3>()}; }

  Wrench operator+(const Wrench& o) const { return {force + o.force, torque + o.torque}; }
  Wrench operator-(const Wrench& o) const { return {force - o.force, torque - o.torque}; }
  Wrench operator*(double s) const { return {force * s, torque * s}; }
  bool finite() const { return force.allFinite() && torque.allFinite(); }
};

struct RobotState {
  Vec3 position = Vec3::Zero();     // O_B in the world frame, m
  Rotation rotation = Rotation::Identity();  // R_WB
  Vec3 velocity = Vec3::Zero();     // linear velocity, body frame, m/s
  Vec3 angular_velocity = Vec3::Zero();  // body frame, rad/s

  Vec3 world_velocity() const { return rotation * velocity; }
  bool finite() const;
};

inline constexpr int kNumRotors = 4;
inline constexpr double kRotorSpeedMax = 2199.17;  // rad/s

struct VehicleParams {
  double mass = 2.1;
  Mat3 inertia = Eigen::Vector3d(0.035, 0.035, 0.06).asDiagonal();
  double arm_length = 0.206;
  double thrust_coeff = 2.585e-6;  // k_f, N s^2 / rad^2
  double drag_coeff = 4.136e-8;    // k_m, N m s^2 / rad^2
  // Quad-X, counted counter-clockwise from the front-right arm.
  std::array<double, kNumRotors> arm_azimuth{
      -std::numbers::pi / 4, std::numbers::pi / 4, 3 * std::numbers::pi / 4, 5 * std::numbers::pi / 4};
  std::array<double, kNumRotors> spin{+1.0, -1.0, +1.0, -1.0};
  double gravity = 9.81;
  double rotor_speed_max = kRotorSpeedMax;

  /// Throws std::invalid_argument on non-physical values.
  void validate() const;

  double max_rotor_thrust() const { return thrust_coeff * rotor_speed_max * rotor_speed_max; }
  Vec3 rotor_position(int i) const;
  /// Unit vector of the thrust tilt direction for positive alpha (counter-clockwise tangent).
  Vec3 lateral_axis(int i) const;
  Mat6 mass_matrix() const;
};

struct ActuatorState {
  Vec4 tilt = Vec4::Zero();         // alpha_i, rad
  Vec4 rotor_speed = Vec4::Zero();  // omega_i, rad/s
};

struct ActuatorCommand {
  Vec4 tilt = Vec4::Zero();
  Vec4 rotor_speed = Vec4::Zero();
};

struct ActuatorDynamicsParams {
  double servo_time_constant = 0.02;  // s
  double servo_rate_limit = 8.0;      // rad/s
  double servo_noise_std = 0.0;       // rad, added to the tilt each step
  double rotor_time_constant = 0.02;  // s

  void validate() const;
};

struct WallEnvironment {
  bool enabled = false;
  Vec3 point{1.5, 0.0, 0.0};    // on the plane, world frame
  Vec3 normal{-1.0, 0.0, 0.0};  // unit, pointing into free space
  double stiffness = 500.0;     // N/m
  double damping = 50.0;        // N s/m
  double friction = 0.5;        // Coulomb cap on tangential force
  double tangential_damping = 20.0;  // N s/m
  double radius = 0.3;          // m, contact sphere around O_B

  void validate() const;
};

struct ImuNoise {
  double accel_std = 0.0;  // m/s^2
  double gyro_std = 0.0;   // rad/s
};

struct ImuSample {
  Vec3 accel = Vec3::Zero();  // specific force, body frame
  Vec3 gyro = Vec3::Zero();
  double timestamp = 0.0;
};

class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(const std::string& what, RobotState last_valid)
      : std::runtime_error(what), last_valid_(std::move(last_valid)) {}
  const RobotState& last_valid() const { return last_valid_; }

 private:
  RobotState last_valid_;
};

/// Body wrench produced by the four tilted rotors. Throws std::out_of_range
/// when the actuator state is outside [-pi, pi] x [0, omega_max].
Wrench actuator_wrench(const ActuatorState& act, const VehicleParams& params);

/// One semi-implicit Euler step of the rigid body. dt must lie in (0, 0.01].
RobotState step_dynamics(const RobotState& s, const Wrench& actuation, const Wrench& external,
                         const VehicleParams& params, double dt);

/// Body-frame linear acceleration implied by the applied wrenches (no gravity).
Vec3 body_acceleration(const RobotState& s, const Wrench& actuation, const Wrench& external,
                       const VehicleParams& params);

/// First-order servo and rotor lag toward the clamped command. Noise draws come from rng
/// only when servo_noise_std > 0.
ActuatorState step_actuators(const ActuatorState& act, const ActuatorCommand& cmd,
                             const ActuatorDynamicsParams& dyn, double dt,
                             std::mt19937_64* rng = nullptr);

ActuatorCommand clamp_command(const ActuatorCommand& cmd, double rotor_speed_max = kRotorSpeedMax);

/// Penalty contact of the sphere around O_B against the wall, world frame force.
Vec3 contact_force_world(const RobotState& s, const WallEnvironment& wall);

/// Same force expressed as a body-frame wrench (acts through O_B, so no torque).
Wrench contact_wrench(const RobotState& s, const WallEnvironment& wall);

ImuSample simulate_imu(const RobotState& s, const Vec3& body_accel, const ImuNoise& noise,
                       std::mt19937_64& rng, double timestamp);

}  // namespace omniteleop
