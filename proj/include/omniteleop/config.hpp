#pragma once

#include <cstdint>
#include <string>

#include "omniteleop/allocation.hpp"
#include "omniteleop/haptic.hpp"
#include "omniteleop/reference.hpp"
#include "omniteleop/vehicle.hpp"

namespace omniteleop {

struct LoopConfig {
  double physics_dt = 0.001;        // s
  double controller_rate = 500.0;   // Hz
  double device_rate = 250.0;       // Hz
  double telemetry_rate = 50.0;     // Hz
  bool realtime = false;
  std::uint64_t seed = 1;

  /// Throws ConfigurationError unless every rate divides the physics rate.
  void validate() const;
  int physics_steps_per(double rate) const;
};

/// Every tunable of a teleoperation session.
struct SystemConfig {
  LoopConfig loop;
  VehicleParams vehicle;
  ActuatorDynamicsParams actuators;
  double k_roll = 0.2, k_pitch = 0.2, k_yaw = 0.5;

  double translation_frequency = 2.5;  // rad/s, impedance natural frequency
  double rotation_frequency = 8.0;
  double damping_ratio = 1.0;
  double estimator_gain_force = 5.0;   // 1/s
  double estimator_gain_torque = 5.0;

  ReferenceLimits limits;
  so3::QVariant q_variant = so3::QVariant::kSinAxis;
  std::string mode_preset = "corrected-mode2";

  double stick_limit = 0.4;
  AdmittanceParams admittance;
  Vec4 k_rec = Vec4::Constant(0.2);
  Vec4 k_ext = Vec4::Constant(0.02);
  double torque_cap = kServoTorqueCap;
  Vec4 finger_inertia = Vec4::Constant(5e-4);
  Vec4 finger_damping = Vec4::Constant(0.01);

  double madgwick_beta = 0.1;
  ImuNoise joystick_imu{0.02, 0.004};

  WallEnvironment wall;
  Vec3 initial_position{0.0, 0.0, 1.0};
  double heartbeat_timeout = 0.5;  // s

  void validate() const;
  AllocationParams allocation() const;
};

/// key = value lines, '#' comments. Unknown keys and malformed values throw ConfigurationError.
SystemConfig parse_config(const std::string& text, SystemConfig base = {});
SystemConfig load_config(const std::string& path);
std::string format_config(const SystemConfig& cfg);

}  // namespace omniteleop
