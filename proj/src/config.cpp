#include "omniteleop/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace omniteleop {

void LoopConfig::validate() const {
  if (!(physics_dt > 0.0 && physics_dt <= 0.01)) {
    throw ConfigurationError("loop: physics_dt must be in (0, 0.01]");
  }
  for (double rate : {controller_rate, device_rate, telemetry_rate}) {
    if (!(rate > 0.0)) throw ConfigurationError("loop: rates must be positive");
    const double ratio = 1.0 / (physics_dt * rate);
    if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-6) {
      throw ConfigurationError("loop: rate " + std::to_string(rate) +
                               " Hz does not divide the physics rate");
    }
  }
}

int LoopConfig::physics_steps_per(double rate) const {
  return static_cast<int>(std::lround(1.0 / (physics_dt * rate)));
}

void SystemConfig::validate() const {
  loop.validate();
  try {
    vehicle.validate();
    actuators.validate();
    limits.validate();
    admittance.validate();
    wall.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigurationError(e.what());
  }
  allocation().validate();
  if (!(stick_limit > 0.0)) throw ConfigurationError("stick_limit must be positive");
  if (!(translation_frequency > 0.0 && rotation_frequency > 0.0 && damping_ratio > 0.0)) {
    throw ConfigurationError("impedance frequencies and damping ratio must be positive");
  }
  if (!(estimator_gain_force > 0.0 && estimator_gain_torque > 0.0)) {
    throw ConfigurationError("estimator gains must be positive");
  }
  if ((k_rec.array() < 0.0).any() || (k_ext.array() < 0.0).any() || !(torque_cap > 0.0)) {
    throw ConfigurationError("feedback gains must be non-negative");
  }
  if (!(madgwick_beta >= 0.0)) throw ConfigurationError("madgwick_beta must be non-negative");
  if (!(heartbeat_timeout > 0.0)) throw ConfigurationError("heartbeat_timeout must be positive");
}

AllocationParams SystemConfig::allocation() const {
  AllocationParams ap;
  ap.k_roll = k_roll;
  ap.k_pitch = k_pitch;
  ap.k_yaw = k_yaw;
  ap.vehicle = vehicle;
  return ap;
}

namespace {

using Setter = std::function<void(SystemConfig&, const std::string&)>;

double to_double(const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigurationError("expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigurationError("expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_seed(const std::string& v) {
  std::size_t used = 0;
  std::uint64_t x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw ConfigurationError("expected a non-negative integer, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigurationError("expected a non-negative integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigurationError("expected true/false, got '" + v + "'");
}

Vec4 to_vec4(const std::string& v) {
  std::istringstream in(v);
  std::vector<double> xs;
  std::string tok;
  while (in >> tok) xs.push_back(to_double(tok));
  if (xs.size() == 1) return Vec4::Constant(xs[0]);
  if (xs.size() != 4) throw ConfigurationError("expected 1 or 4 numbers, got '" + v + "'");
  return {xs[0], xs[1], xs[2], xs[3]};
}

Vec3 to_vec3(const std::string& v) {
  std::istringstream in(v);
  std::vector<double> xs;
  std::string tok;
  while (in >> tok) xs.push_back(to_double(tok));
  if (xs.size() != 3) throw ConfigurationError("expected 3 numbers, got '" + v + "'");
  return {xs[0], xs[1], xs[2]};
}

#define NUM(key, field) {key, [](SystemConfig& c, const std::string& v) { c.field = to_double(v); }}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      NUM("physics_dt", loop.physics_dt),
      NUM("controller_rate", loop.controller_rate),
      NUM("device_rate", loop.device_rate),
      NUM("telemetry_rate", loop.telemetry_rate),
      {"realtime", [](SystemConfig& c, const std::string& v) { c.loop.realtime = to_bool(v); }},
      {"seed", [](SystemConfig& c, const std::string& v) { c.loop.seed = to_seed(v); }},
      NUM("mass", vehicle.mass),
      NUM("inertia_xx", vehicle.inertia(0, 0)),
      NUM("inertia_yy", vehicle.inertia(1, 1)),
      NUM("inertia_zz", vehicle.inertia(2, 2)),
      NUM("arm_length", vehicle.arm_length),
      NUM("thrust_coeff", vehicle.thrust_coeff),
      NUM("drag_coeff", vehicle.drag_coeff),
      NUM("gravity", vehicle.gravity),
      NUM("rotor_speed_max", vehicle.rotor_speed_max),
      NUM("servo_time_constant", actuators.servo_time_constant),
      NUM("servo_rate_limit", actuators.servo_rate_limit),
      NUM("servo_noise_std", actuators.servo_noise_std),
      NUM("rotor_time_constant", actuators.rotor_time_constant),
      NUM("k_roll", k_roll),
      NUM("k_pitch", k_pitch),
      NUM("k_yaw", k_yaw),
      NUM("translation_frequency", translation_frequency),
      NUM("rotation_frequency", rotation_frequency),
      NUM("damping_ratio", damping_ratio),
      NUM("estimator_gain_force", estimator_gain_force),
      NUM("estimator_gain_torque", estimator_gain_torque),
      NUM("v_max", limits.v_max),
      NUM("omega_max", limits.omega_max),
      {"q_variant", [](SystemConfig& c, const std::string& v) {
         if (v == "sin-axis") {
           c.q_variant = so3::QVariant::kSinAxis;
         } else if (v == "paper-normalized") {
           c.q_variant = so3::QVariant::kPaperNormalized;
         } else {
           throw ConfigurationError("q_variant must be sin-axis or paper-normalized");
         }
       }},
      {"mode_preset", [](SystemConfig& c, const std::string& v) { c.mode_preset = v; }},
      NUM("stick_limit", stick_limit),
      {"adm_inertia", [](SystemConfig& c, const std::string& v) { c.admittance.inertia = to_vec4(v); }},
      {"adm_damping", [](SystemConfig& c, const std::string& v) { c.admittance.damping = to_vec4(v); }},
      {"k_rec", [](SystemConfig& c, const std::string& v) { c.k_rec = to_vec4(v); }},
      {"k_ext", [](SystemConfig& c, const std::string& v) { c.k_ext = to_vec4(v); }},
      NUM("torque_cap", torque_cap),
      {"finger_inertia", [](SystemConfig& c, const std::string& v) { c.finger_inertia = to_vec4(v); }},
      {"finger_damping", [](SystemConfig& c, const std::string& v) { c.finger_damping = to_vec4(v); }},
      NUM("madgwick_beta", madgwick_beta),
      NUM("joystick_accel_std", joystick_imu.accel_std),
      NUM("joystick_gyro_std", joystick_imu.gyro_std),
      {"wall_enabled", [](SystemConfig& c, const std::string& v) { c.wall.enabled = to_bool(v); }},
      {"wall_point", [](SystemConfig& c, const std::string& v) { c.wall.point = to_vec3(v); }},
      {"wall_normal", [](SystemConfig& c, const std::string& v) { c.wall.normal = to_vec3(v); }},
      NUM("wall_stiffness", wall.stiffness),
      NUM("wall_damping", wall.damping),
      NUM("wall_friction", wall.friction),
      NUM("wall_tangential_damping", wall.tangential_damping),
      NUM("wall_radius", wall.radius),
      {"initial_position", [](SystemConfig& c, const std::string& v) { c.initial_position = to_vec3(v); }},
      NUM("heartbeat_timeout", heartbeat_timeout),
  };
  return table;
}

#undef NUM

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SystemConfig parse_config(const std::string& text, SystemConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigurationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigurationError("config line " + std::to_string(line_no) + ": unknown config key '" + key + "'");
    }
    try {
      it->second(base, value);
    } catch (const ConfigurationError& e) {
      throw ConfigurationError("config line " + std::to_string(line_no) + " (" + key + "): " + e.what());
    }
  }
  base.validate();
  return base;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const SystemConfig& c) {
  std::ostringstream o;
  o.precision(17);
  auto v4 = [](const Vec4& v) {
    std::ostringstream s;
    s.precision(17);
    s << v[0] << ' ' << v[1] << ' ' << v[2] << ' ' << v[3];
    return s.str();
  };
  auto v3 = [](const Vec3& v) {
    std::ostringstream s;
    s.precision(17);
    s << v[0] << ' ' << v[1] << ' ' << v[2];
    return s.str();
  };
  o << "physics_dt = " << c.loop.physics_dt << "\n"
    << "controller_rate = " << c.loop.controller_rate << "\n"
    << "device_rate = " << c.loop.device_rate << "\n"
    << "telemetry_rate = " << c.loop.telemetry_rate << "\n"
    << "realtime = " << (c.loop.realtime ? "true" : "false") << "\n"
    << "seed = " << c.loop.seed << "\n"
    << "mass = " << c.vehicle.mass << "\n"
    << "inertia_xx = " << c.vehicle.inertia(0, 0) << "\n"
    << "inertia_yy = " << c.vehicle.inertia(1, 1) << "\n"
    << "inertia_zz = " << c.vehicle.inertia(2, 2) << "\n"
    << "arm_length = " << c.vehicle.arm_length << "\n"
    << "thrust_coeff = " << c.vehicle.thrust_coeff << "\n"
    << "drag_coeff = " << c.vehicle.drag_coeff << "\n"
    << "gravity = " << c.vehicle.gravity << "\n"
    << "rotor_speed_max = " << c.vehicle.rotor_speed_max << "\n"
    << "servo_time_constant = " << c.actuators.servo_time_constant << "\n"
    << "servo_rate_limit = " << c.actuators.servo_rate_limit << "\n"
    << "servo_noise_std = " << c.actuators.servo_noise_std << "\n"
    << "rotor_time_constant = " << c.actuators.rotor_time_constant << "\n"
    << "k_roll = " << c.k_roll << "\n"
    << "k_pitch = " << c.k_pitch << "\n"
    << "k_yaw = " << c.k_yaw << "\n"
    << "translation_frequency = " << c.translation_frequency << "\n"
    << "rotation_frequency = " << c.rotation_frequency << "\n"
    << "damping_ratio = " << c.damping_ratio << "\n"
    << "estimator_gain_force = " << c.estimator_gain_force << "\n"
    << "estimator_gain_torque = " << c.estimator_gain_torque << "\n"
    << "v_max = " << c.limits.v_max << "\n"
    << "omega_max = " << c.limits.omega_max << "\n"
    << "q_variant = " << (c.q_variant == so3::QVariant::kSinAxis ? "sin-axis" : "paper-normalized") << "\n"
    << "mode_preset = " << c.mode_preset << "\n"
    << "stick_limit = " << c.stick_limit << "\n"
    << "adm_inertia = " << v4(c.admittance.inertia) << "\n"
    << "adm_damping = " << v4(c.admittance.damping) << "\n"
    << "k_rec = " << v4(c.k_rec) << "\n"
    << "k_ext = " << v4(c.k_ext) << "\n"
    << "torque_cap = " << c.torque_cap << "\n"
    << "finger_inertia = " << v4(c.finger_inertia) << "\n"
    << "finger_damping = " << v4(c.finger_damping) << "\n"
    << "madgwick_beta = " << c.madgwick_beta << "\n"
    << "joystick_accel_std = " << c.joystick_imu.accel_std << "\n"
    << "joystick_gyro_std = " << c.joystick_imu.gyro_std << "\n"
    << "wall_enabled = " << (c.wall.enabled ? "true" : "false") << "\n"
    << "wall_point = " << v3(c.wall.point) << "\n"
    << "wall_normal = " << v3(c.wall.normal) << "\n"
    << "wall_stiffness = " << c.wall.stiffness << "\n"
    << "wall_damping = " << c.wall.damping << "\n"
    << "wall_friction = " << c.wall.friction << "\n"
    << "wall_tangential_damping = " << c.wall.tangential_damping << "\n"
    << "wall_radius = " << c.wall.radius << "\n"
    << "initial_position = " << v3(c.initial_position) << "\n"
    << "heartbeat_timeout = " << c.heartbeat_timeout << "\n";
  return o.str();
}

}  // namespace omniteleop
