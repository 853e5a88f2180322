#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "omniteleop/so3.hpp"

namespace omniteleop {

/// One snapshot of the closed loop; every field is taken from the same physics tick.
struct TelemetryRecord {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();  // world frame
  Vec3 euler = Vec3::Zero();     // roll, pitch, yaw
  Vec3 angular_velocity = Vec3::Zero();
  Vec3 ref_position = Vec3::Zero();
  Vec3 ref_velocity = Vec3::Zero();
  Vec3 ref_euler = Vec3::Zero();
  Vec3 ref_angular_velocity = Vec3::Zero();
  Vec4 tilt = Vec4::Zero();
  Vec4 rotor_speed = Vec4::Zero();
  Vec4 rotor_percent = Vec4::Zero();  // 100 (w / w_max)^2, thrust-linear like a PX4 motor output
  Vec6 external_estimate = Vec6::Zero();
  Vec4 stick_axes = Vec4::Zero();
  Vec4 feedback = Vec4::Zero();
  Vec3 contact_force = Vec3::Zero();  // world frame
};

/// Column names in file order.
const std::vector<std::string>& telemetry_columns();

std::vector<double> flatten(const TelemetryRecord& r);
TelemetryRecord unflatten(const std::vector<double>& values);

/// CSV with a leading '# ' comment line naming the format, then a header row.
std::string telemetry_csv(const std::vector<TelemetryRecord>& records);
void write_telemetry_csv(const std::vector<TelemetryRecord>& records, const std::filesystem::path& file);
std::vector<TelemetryRecord> read_telemetry_csv(const std::filesystem::path& file);

}  // namespace omniteleop
